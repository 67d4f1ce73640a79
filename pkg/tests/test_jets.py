"""Exact-arithmetic checks for the graded jet algebra."""
import json
from fractions import Fraction

import pytest

from nosekam.jets import (CompositionDomainError, GradedJet,
                          IncompatibleJetsError, JetSpace, RationalParam,
                          UnknownVariableError, analytic_apply, bind_params,
                          expj, ln1p, reciprocal, reciprocal_power, sqrt1p)

F = Fraction


@pytest.fixture
def uspace():
    return JetSpace.create(["u"], 4)


def test_add_cancellation(uspace):
    u = uspace.var("u")
    assert (1 + u) + (-u) == uspace.one()


def test_ln_series(uspace):
    u = uspace.var("u")
    got = ln1p(-u) + u
    want = uspace.jet({(2,): F(-1, 2), (3,): F(-1, 3), (4,): F(-1, 4)})
    assert got == want


def test_half_reciprocal_plus_log(uspace):
    # (1/2)(1-u)^-2 + ln(1-u) = 1/2 + u^2 + 5/3 u^3 + 9/4 u^4, truncated at 4
    u = uspace.var("u")
    got = reciprocal_power(2, -u) / 2 + ln1p(-u)
    want = uspace.jet({(0,): F(1, 2), (2,): F(1), (3,): F(5, 3), (4,): F(9, 4)})
    assert got == want


def test_mul_basic(uspace):
    u = uspace.var("u")
    assert (1 + u) * (1 - u) == uspace.jet({(0,): 1, (2,): -1})


def test_weighted_truncation_drops_degree_five():
    # deg(I)=2, deg(J)=1, truncation at 4: I * J^3 has degree 5 and vanishes
    space = JetSpace.create(["I", "J"], 4, weights={"I": 2, "J": 1})
    I, Jv = space.var("I"), space.var("J")
    assert (I * Jv ** 3).is_zero()
    assert not (I * Jv ** 2).is_zero()


def test_mul_distributes():
    space = JetSpace.create(["U", "V"], 4)
    U, V = space.var("U"), space.var("V")
    got = U ** 2 * (1 + 2 * V + 3 * V ** 2)
    want = space.jet({(2, 0): 1, (2, 1): 2, (2, 2): 3})
    assert got == want


def test_incompatible_spaces_raise(uspace):
    other = JetSpace.create(["v"], 4)
    with pytest.raises(IncompatibleJetsError):
        uspace.var("u") + other.var("v")
    with pytest.raises(IncompatibleJetsError):
        uspace.var("u") * other.var("v")


def test_reciprocal_power_binomial(uspace):
    u = uspace.var("u")
    got = reciprocal_power(2, -u)
    want = uspace.jet({(0,): 1, (1,): 2, (2,): 3, (3,): 4, (4,): 5})
    assert got == want


def test_ln1p_matches_bnf_tail():
    space = JetSpace.create(["V"], 4)
    V = space.var("V")
    got = ln1p(-V)
    want = space.jet({(1,): F(-1), (2,): F(-1, 2), (3,): F(-1, 3), (4,): F(-1, 4)})
    assert got == want


def test_sqrt1p_identity(uspace):
    assert sqrt1p(uspace.zero()) == uspace.one()
    u = uspace.var("u")
    s = sqrt1p(u)
    assert s * s == uspace.one() + u


def test_analytic_apply_requires_constant_free(uspace):
    with pytest.raises(CompositionDomainError):
        ln1p(uspace.one())
    assert analytic_apply("ln1p", -uspace.var("u")) == ln1p(-uspace.var("u"))
    assert analytic_apply(("reciprocal_power", 1), -uspace.var("u")) == \
        reciprocal(-uspace.var("u"))


def test_substitute_reciprocal_square():
    # substituting W = 1-V (weight-0 carrier) and the shifted scale variable
    # into W^2 * (1+s)^-2 / 2 with s = (1-u)(1-V) - 1 gives (1/2)(1-u)^-2
    mixed = JetSpace.create(["W", "s"], 4, weights={"W": 0, "s": 1})
    W, s = mixed.var("W"), mixed.var("s")
    expr = W ** 2 * reciprocal_power(2, s) / 2

    target = JetSpace.create(["u", "V"], 4)
    u, V = target.var("u"), target.var("V")
    got = expr.substitute({"W": 1 - V, "s": (1 - u) * (1 - V) - 1})
    want = reciprocal_power(2, -u.space.var("u")) / 2
    assert got == want


def test_substitute_rejects_unsound_constant_shift():
    src = JetSpace.create(["W"], 4)  # weight 1
    tgt = JetSpace.create(["V"], 4)
    with pytest.raises(CompositionDomainError):
        src.var("W").substitute({"W": 1 - tgt.var("V")})


def test_substitute_action_polynomial():
    # alpha * I^2 with I = x^2 + X^2/2
    ispace = JetSpace.create(["I"], 4, weights={"I": 2})
    xspace = JetSpace.create(["x", "X"], 4)
    x, X = xspace.var("x"), xspace.var("X")
    got = (ispace.var("I") ** 2).substitute({"I": x ** 2 + X ** 2 / 2})
    want = (x ** 2 + X ** 2 / 2) ** 2
    assert got == want


def test_partial_derivative_drops_degree():
    space = JetSpace.create(["x", "U"], 4)
    j = space.var("x") * space.var("U")
    dU = j.partial_derivative("U")
    assert dU.space.max_degree == 3
    assert dU == JetSpace.create(["x", "U"], 3).var("x")


def test_partial_derivative_power_rule():
    space = JetSpace.create(["U", "x"], 4)
    j = space.jet({(1, 3): F(55, 144)})
    got = j.partial_derivative("x")
    assert got.coefficient((1, 2)) == F(55, 48)


def test_partial_derivative_unknown_variable():
    space = JetSpace.create(["x"], 4)
    with pytest.raises(UnknownVariableError):
        space.var("x").partial_derivative("zz")


def test_equality_requires_full_match(uspace):
    same = JetSpace.create(["u"], 4).var("u")
    assert uspace.var("u") == same
    assert uspace.var("u") != uspace.var("u").with_max_degree(3)


def test_json_roundtrip():
    space = JetSpace.create(["I", "J"], 4, weights={"I": 2, "J": 1})
    j = space.jet({(2, 0): F(-11, 24), (1, 1): 1, (0, 3): F(-1, 3)})
    data = json.loads(j.to_json())
    assert data["vars"] == ["I", "J"]
    assert data["weights"] == [2, 1]
    assert GradedJet.from_json(j.to_json()) == j


def test_pretty_printer_is_sorted(uspace):
    u = uspace.var("u")
    j = u ** 3 * F(5, 3) + u ** 2 + F(1, 2)
    assert str(j) == "1/2 + u^2 + 5/3*u^3"


def test_bind_params():
    space = JetSpace.create(["u", "a"], 4, weights={"u": 1, "a": 0})
    j = space.var("a") * space.var("u") ** 2
    out = bind_params(j, [RationalParam("a", F(3, 7))])
    assert out.space.variables == ("u",)
    assert out.coefficient((2,)) == F(3, 7)


def test_bind_params_requires_weight_zero():
    space = JetSpace.create(["u", "a"], 4)
    with pytest.raises(Exception):
        bind_params(space.var("a"), [RationalParam("a", F(1))])


def test_evaluate_exact():
    space = JetSpace.create(["u", "V"], 4)
    j = space.var("u") ** 2 + 3 * space.var("V")
    assert j.evaluate({"u": F(1, 2), "V": F(1, 3)}) == F(5, 4)


def test_exp_undoes_ln(uspace):
    u = uspace.var("u")
    j = u + u ** 2 / 2
    assert expj(ln1p(j)) == uspace.one() + j


def test_float_coefficients_rejected(uspace):
    with pytest.raises(TypeError):
        uspace.constant(0.5)
