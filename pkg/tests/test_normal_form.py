"""The normal-form solver against the published exact coefficients."""
from fractions import Fraction

import pytest

from nosekam import fixtures
from nosekam.jets import JetSpace, ln1p
from nosekam.normal_form import (G0Expansion, NormalFormError,
                                 bnf_oscillator, expand_G0,
                                 hatG_normal_form, hessian_det_series,
                                 kam_sufficient, kam_sufficient_value,
                                 nose_like_coefficients, nose_like_g0,
                                 nose_like_normal_form,
                                 nose_like_normal_form_symbolic,
                                 nose_normal_form,
                                 oscillator_bnf_coefficient_oracle,
                                 oscillator_g0, solve_normal_form,
                                 transformed_template)

F = Fraction


@pytest.fixture(scope="module")
def nose_result():
    return nose_normal_form()


def test_g0_expansion_matches_published_display():
    g0 = nose_like_g0()
    assert g0.constant == fixtures.G0_NOSE_CONSTANT
    assert g0.jet.terms == fixtures.G0_NOSE_TERMS


def test_oscillator_g0_expansion():
    g0 = oscillator_g0()
    assert g0.constant == fixtures.T4_CONSTANT
    want = {(2, 0, 0, 0): F(1, 2), (0, 0, 2, 0): F(1, 2),
            (3, 0, 0, 0): F(2, 3), (4, 0, 0, 0): F(3, 4)}
    assert g0.jet.terms == want


def test_nose_normal_form_coefficients(nose_result):
    assert nose_result.alpha == fixtures.NOSE_ALPHA
    assert nose_result.beta == fixtures.NOSE_BETA
    assert nose_result.gamma == fixtures.NOSE_GAMMA


def test_nose_generating_function(nose_result):
    nu = nose_result.nu
    sp = nu.space
    assert sp.variables == ("x", "y", "U", "V")
    got = {exp: c for exp, c in nu.items()
           if sp.degree(exp) >= 3}
    assert got == fixtures.NOSE_NU_COEFFS
    # linear part is the identity generator x U + y V
    assert nu.coefficient((1, 0, 1, 0)) == 1
    assert nu.coefficient((0, 1, 0, 1)) == 1


def test_nose_transformed_hamiltonian(nose_result):
    t = nose_result.transformed
    sp = t.space
    assert sp.variables == ("I", "J")
    assert sp.weights == (2, 1)
    want = {(2, 0): F(-11, 24), (1, 0): F(1), (1, 1): F(1), (1, 2): F(1),
            (0, 1): F(-1), (0, 2): F(-1, 2), (0, 3): F(-1, 3), (0, 4): F(-1, 4)}
    assert t.terms == want


def test_full_bnf_identity_with_spectator_term(nose_result):
    # pushing F0 = G0 + ln(1-V) through the induced map reproduces the
    # normal form with the exact ln(1-J) tail
    g0 = nose_like_g0()
    space = g0.jet.space
    f0 = g0.jet + ln1p(-space.var("V"))
    pulled = nose_result.induced_map.pullback(f0)

    new_space = pulled.space
    x, X, Y = new_space.var("x"), new_space.var("X"), new_space.var("Y")
    I = x ** 2 + X ** 2 / 2
    want = I * (fixtures.NOSE_ALPHA * I + 1 + Y + Y ** 2) + ln1p(-Y)
    assert pulled == want


def test_restriction_to_zero_radial_action_is_log(nose_result):
    t = nose_result.transformed
    sp = t.space
    restricted = t.substitute({"I": sp.zero(), "J": sp.var("J")})
    assert restricted == ln1p(-sp.var("J"))


def test_solver_reports_active_equations(nose_result):
    rep = nose_result.report["degrees"]
    assert set(rep) == {3, 4}
    # degree 3 genuinely pins the cross coefficient beta
    assert any(unk == "beta" for _, unk in rep[3]["pinned"])
    assert all(isinstance(lbl, str) for lbl, _ in rep[3]["pinned"])


def test_quadratic_mismatch_is_rejected():
    space = JetSpace.create(("u", "v", "U", "V"), 4)
    bad = space.var("u") ** 2 + space.var("U") ** 2  # U^2 coefficient 1, not 1/2
    with pytest.raises(NormalFormError):
        solve_normal_form(G0Expansion(bad, F(0), ()))


def test_nose_like_closed_form_coefficients():
    assert nose_like_coefficients(0, 0) == (F(-11, 24), F(1), F(1))
    alpha, beta, gamma = nose_like_coefficients(2, 0)
    assert (alpha, beta, gamma) == fixtures.NOSE_LIKE_SAMPLES[(F(2), F(0))]


def test_nose_like_solver_agrees_with_closed_form_samples():
    import random
    rng = random.Random(20240817)
    pairs = [(F(0), F(0)), (F(2), F(0))]
    while len(pairs) < 22:
        pairs.append((F(rng.randint(-12, 12), rng.randint(1, 6)),
                      F(rng.randint(-12, 12), rng.randint(1, 6))))
    for a, b in pairs:
        res = nose_like_normal_form(a, b)
        assert (res.alpha, res.beta, res.gamma) == nose_like_coefficients(a, b)


def test_nose_like_symbolic_relations():
    res = nose_like_normal_form_symbolic()
    sp = res.alpha.space
    a, b = sp.var("a"), sp.var("b")
    alpha, beta, gamma = (v if hasattr(v, "space") else sp.constant(v)
                          for v in (res.alpha, res.beta, res.gamma))
    # the printed relations hold as polynomial identities in (a, b)
    assert 6 * b == 96 * alpha + 9 * a ** 2 - 30 * a + 44
    assert 2 * beta == 2 - a
    assert 12 * gamma == 48 * alpha + 3 * a ** 2 - 21 * a + 34


def test_hessian_series_nose(nose_result):
    h = nose_result.hessian_series
    assert h.constant_term() == fixtures.NOSE_HESSIAN_CONSTANT
    want = {(0, 0): F(-1, 12), (1, 0): F(-11, 6), (0, 1): F(-13, 6),
            (0, 2): F(-5, 4)}
    assert h.terms == want


def test_hessian_series_symbolic_template():
    # with symbolic (alpha, beta, gamma) the series matches the displayed
    # polynomial -(2a+b^2) + 4ag I - 4(bg+a) J - (4g^2+6a) J^2 identically
    params = ("al", "be", "ga")
    t = transformed_template(_p("al"), _p("be"), _p("ga"), params=params)
    h = hessian_det_series(t)
    sp = h.space
    al, be, ga = sp.var("al"), sp.var("be"), sp.var("ga")
    I, Jv = sp.var("I"), sp.var("J")
    want = (-(2 * al + be ** 2) + 4 * al * ga * I
            - 4 * (be * ga + al) * Jv - (4 * ga ** 2 + 6 * al) * Jv ** 2)
    assert h == want


def _p(name):
    space = JetSpace.create(("al", "be", "ga"), 4, weights={"al": 0, "be": 0, "ga": 0})
    return space.var(name)


def test_hessian_zero_coefficients():
    t = transformed_template(0, 0, 0)
    h = hessian_det_series(t)
    # only the spectator tail contributes: det of [[0,0],[0,f_JJ]] = 0
    assert h.is_zero()


def test_kam_sufficiency():
    assert kam_sufficient(F(-11, 24), F(1)) is True
    assert kam_sufficient(F(-1, 2), F(1)) is False  # 2a + b^2 = 0
    res = nose_like_normal_form_symbolic()
    assert kam_sufficient(res) is True
    q = kam_sufficient_value(res.alpha, res.beta)
    # 2 alpha + beta^2 = (6b + 3a^2 - 18a + 4)/48 as a polynomial identity
    sp = q.space
    a, b = sp.var("a"), sp.var("b")
    assert 48 * q == 6 * b + 3 * a ** 2 - 18 * a + 4


def test_kam_edge_case_alpha_gamma_zero():
    # if alpha = gamma = 0 then 3a^2 - 21a + 34 = 0, which a = 2 fails
    # (it evaluates to 4), so beta = (2-a)/2 is nonzero and the constant
    # Hessian term -(2 alpha + beta^2) = -beta^2 stays away from zero.
    a = F(2)
    assert 3 * a ** 2 - 21 * a + 34 == 4  # nonzero: a=2 incompatible
    # at the (irrational) roots of 3a^2-21a+34, beta^2 = (2-a)^2/4 > 0:
    import math
    for root in ((21 + math.sqrt(33)) / 6, (21 - math.sqrt(33)) / 6):
        beta = (2 - root) / 2
        assert 2 * 0 + beta ** 2 > 1e-3


def test_random_nose_like_samples_are_kam_sufficient():
    import random
    rng = random.Random(7)
    for _ in range(20):
        a = F(rng.randint(-8, 8), rng.randint(1, 5))
        b = F(rng.randint(-8, 8), rng.randint(1, 5))
        alpha, beta, gamma = nose_like_coefficients(a, b)
        if 2 * alpha + beta ** 2 != 0:
            assert kam_sufficient(alpha, beta) is True


def test_bnf_oscillator_published_value():
    res = bnf_oscillator(fixtures.OSC_BNF_A3, fixtures.OSC_BNF_A4)
    assert res.c == fixtures.OSC_BNF_COEFF


def test_bnf_oscillator_oracle_cases():
    assert bnf_oscillator(0, 0).c == 0
    assert bnf_oscillator(0, 1).c == F(3, 2)
    assert oscillator_bnf_coefficient_oracle(0, 1) == F(3, 2)
    res = bnf_oscillator(F(1, 5), F(-2, 7))
    assert res.c == oscillator_bnf_coefficient_oracle(F(1, 5), F(-2, 7))


def test_bnf_oscillator_generator_matches_printed_first_line():
    # the printed slow generating function: Ux - 2Ux^2/3 + 65Ux^3/288
    # + 295U^3x/288 - 4U^3/9 (exponents over (x, U))
    res = bnf_oscillator(F(2, 3), F(3, 4))
    got = {exp: c for exp, c in res.nu.items() if res.nu.space.degree(exp) >= 3}
    want = {(2, 1): F(-2, 3), (3, 1): F(65, 288), (1, 3): F(295, 288),
            (0, 3): F(-4, 9)}
    assert got == want


def test_expand_g0_dispatch():
    class Model:
        kind = "rescaled_F_beta"
        beta = 0
    assert expand_G0(Model()).jet.terms == fixtures.G0_NOSE_TERMS

    class Bad:
        kind = "rescaled_F_beta"
        beta = F(1, 100)
    with pytest.raises(NormalFormError):
        expand_G0(Bad())

    class Osc:
        kind = "oscillator_G_kappa"
    assert expand_G0(Osc()).constant == 1

    with pytest.raises(NormalFormError):
        expand_G0("no_such_model")


def test_hatG_normal_form_kappa_one():
    res = hatG_normal_form(1)
    assert res.alpha == F(-13, 24)
    assert res.beta == F(-1)
    assert res.gamma == F(-1, 2)
    assert res.sign_flip_needed is True
    assert res.shear_dropped is True


def test_hatG_full_hamiltonian_exact_coefficients():
    # with the fast-slow shear kept, the order-by-order solver yields exact
    # closed forms whose leading parts are the printed coefficients
    from nosekam.jets import RationalParam, bind_params
    from nosekam.normal_form import (_COUPLING_PARAMS, _MatchProblem,
                                     _hatG_jet, _solve_matching,
                                     hatG_full_coefficients)

    kappa = F(1, 5)
    space = JetSpace.create(("u", "U", "v", "V") + _COUPLING_PARAMS, 4,
                            weights={"kap": 0, "ikap": 0})
    g = bind_params(_hatG_jet(+1, space, shear=True),
                    [RationalParam("kap", kappa),
                     RationalParam("ikap", 1 / kappa)])

    class FullProblem(_MatchProblem):
        def target(self, tcoeffs, sp):
            x, X, y, Y = (sp.var(n) for n in ("x", "X", "y", "Y"))
            I = (x ** 2 + X ** 2) / 2
            Jv = (y ** 2 + Y ** 2) / 2
            c = lambda n: tcoeffs.get(n, F(0))
            return (kappa * I + Jv + c("alpha") * I * I
                    + c("beta") * I * Jv + c("gamma") * Jv * Jv)

    prob = FullProblem(g0=g, old_pairs=(("u", "U"), ("v", "V")),
                       new_pairs=(("x", "X"), ("y", "Y")), params=(),
                       target_unknowns={3: (), 4: ("alpha", "beta", "gamma")})
    _, tgt, _, _ = _solve_matching(prob)
    alpha, beta, gamma = hatG_full_coefficients(kappa)
    assert tgt["alpha"] == alpha == -13 * kappa / 24
    assert tgt["beta"] == beta
    assert tgt["gamma"] == gamma
    # the printed values are the kappa -> 0 leading parts
    assert beta + 1 == -kappa ** 2 / (8 - 2 * kappa ** 2)
    assert gamma + F(1, 2) / kappa == kappa / (2 * (8 - 2 * kappa ** 2))


def test_hatG_normal_form_general_kappa():
    for kappa in (F(1, 10), F(3, 7), F(5)):
        res = hatG_normal_form(kappa)
        assert res.alpha == fixtures.HATG_ALPHA_OVER_KAPPA * kappa
        assert res.beta == fixtures.HATG_BETA
        assert res.gamma == fixtures.HATG_GAMMA_TIMES_KAPPA / kappa


def test_hatG_reduced_hamiltonian():
    kappa = F(1, 10)
    res = hatG_normal_form(kappa)
    got = {exp: c / kappa for exp, c in res.reduced_j.items()}
    assert got == fixtures.HATG_REDUCED_J_OVER_KAPPA


def test_hatG_consistency_with_averaged_form():
    # setting J = 0 in the normal form gives kappa I (1 - 13 I / 24)
    res = hatG_normal_form(F(2, 3))
    sp = JetSpace.create(("I",), 4, weights={"I": 2})
    I = sp.var("I")
    at_j0 = res.kappa * I + res.alpha * I * I
    assert at_j0 == res.kappa * (I - 13 * I * I / 24)


def test_hatG_rejects_zero_coupling():
    with pytest.raises(NormalFormError):
        hatG_normal_form(0)
