"""The exact-arithmetic verification suite behind `nosekam verify`.

Every check recomputes a published identity from scratch and compares it,
exactly where the mathematics is exact, against the frozen golden values in
nosekam.fixtures.  Corrupting a fixture makes the matching check fail.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import fixtures
from .averaging import (averaged_oscillator, critical_fast_energy,
                        discrepancies, maclaurin_expand,
                        printed_averaged_oscillator,
                        scaled_by_inverse_coupling)
from .canonical import (compose, fgen_map, flip_u_map, ho_sqrt_map,
                        nose_rescaling, polar_cartesian, symplectic_check)
from .jets import GradedJet, JetSpace, ln1p, reciprocal, reciprocal_power
from .normal_form import (bnf_oscillator, hatG_normal_form,
                          hessian_det_series, kam_sufficient_value,
                          nose_like_coefficients, nose_like_g0,
                          nose_like_normal_form,
                          nose_like_normal_form_symbolic, nose_normal_form,
                          nose_nu_map, oscillator_bnf_coefficient_oracle)

F = Fraction


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _eq(name, lhs, rhs, note=""):
    ok = lhs == rhs
    detail = "" if ok else f"lhs = {lhs} ; rhs = {rhs}"
    if note and not ok:
        detail = f"{note}: {detail}"
    return CheckResult(name, ok, detail)


# --- jet algebra -----------------------------------------------------------


def check_jets_log_series():
    sp = JetSpace.create(["V"], 4)
    got = ln1p(-sp.var("V"))
    want = sp.jet({(1,): F(-1), (2,): F(-1, 2), (3,): F(-1, 3), (4,): F(-1, 4)})
    return _eq("jets/log-series", got, want)


def check_jets_radial_expansion():
    sp = JetSpace.create(["u"], 4)
    u = sp.var("u")
    got = reciprocal_power(2, -u) / 2 + ln1p(-u)
    want = sp.jet({(0,): F(1, 2), (2,): 1, (3,): F(5, 3), (4,): F(9, 4)})
    return _eq("jets/radial-expansion", got, want)


def check_jets_weighted_truncation():
    sp = JetSpace.create(["I", "J"], 4, weights={"I": 2, "J": 1})
    got = sp.var("I") * sp.var("J") ** 3
    return _eq("jets/weighted-truncation", got, sp.zero(),
               note="degree-5 term must truncate")


def check_jets_json_roundtrip():
    sp = JetSpace.create(["I", "J"], 4, weights={"I": 2, "J": 1})
    jet = sp.jet({(2, 0): F(-11, 24), (1, 1): 1})
    return _eq("jets/json-roundtrip", GradedJet.from_json(jet.to_json()), jet)


# --- the radial generating function ----------------------------------------


def check_fgen_induced_map():
    m = fgen_map()
    sp = next(iter(m.components.values())).space
    u, U, v, V = (sp.var(n) for n in ("u", "U", "v", "V"))
    inv = reciprocal(-V)
    ok = (m.components["sigma"] == (1 - u) * (1 - V) - 1
          and m.components["W"] == -V
          and m.components["Sigma"] == -U * inv
          and m.components["w"] == -v - U * (1 - u) * inv)
    return CheckResult("fgen/induced-map", ok,
                       "" if ok else str({k: str(j) for k, j in m.components.items()}))


def check_fgen_periodic_variety():
    m = fgen_map()
    sp = next(iter(m.components.values())).space
    zero = sp.zero()
    bind = {"u": zero, "U": zero, "v": sp.var("v"), "V": sp.var("V")}
    sigma = m.components["sigma"].substitute(bind)
    W = m.components["W"].substitute(bind)
    Sigma = m.components["Sigma"].substitute(bind)
    ok = sigma == W and Sigma.is_zero()
    return CheckResult("fgen/periodic-variety", ok,
                       "" if ok else f"sigma = {sigma}, W = {W}, Sigma = {Sigma}")


def check_fgen_g0_expansion():
    g0 = nose_like_g0()
    ok = (g0.jet.terms == fixtures.G0_NOSE_TERMS
          and g0.constant == fixtures.G0_NOSE_CONSTANT)
    return CheckResult("fgen/g0-expansion", ok,
                       "" if ok else f"got {g0.jet} + const {g0.constant}")


# --- the free-particle normal form ------------------------------------------


def check_nose_nf_coefficients():
    res = nose_normal_form()
    got = (res.alpha, res.beta, res.gamma)
    want = (fixtures.NOSE_ALPHA, fixtures.NOSE_BETA, fixtures.NOSE_GAMMA)
    return _eq("nose-nf/coefficients", got, want)


def check_nose_nf_nu_table():
    res = nose_normal_form()
    got = {e: c for e, c in res.nu.items() if res.nu.space.degree(e) >= 3}
    return _eq("nose-nf/nu-table", got, dict(fixtures.NOSE_NU_COEFFS))


def check_nose_nf_bnf_identity():
    res = nose_normal_form()
    g0 = nose_like_g0()
    f0 = g0.jet + ln1p(-g0.jet.space.var("V"))
    pulled = res.induced_map.pullback(f0)
    sp = pulled.space
    x, X, Y = sp.var("x"), sp.var("X"), sp.var("Y")
    I = x ** 2 + X ** 2 / 2
    want = I * (fixtures.NOSE_ALPHA * I + 1 + Y + Y ** 2) + ln1p(-Y)
    return _eq("nose-nf/bnf-identity", pulled, want)


def check_nose_nf_hessian():
    res = nose_normal_form()
    h = res.hessian_series
    ok = (h.constant_term() == fixtures.NOSE_HESSIAN_CONSTANT
          and h.coefficient((1, 0)) == 4 * res.alpha * res.gamma
          and h.coefficient((0, 1)) == -4 * (res.beta * res.gamma + res.alpha)
          and h.coefficient((0, 2)) == -(4 * res.gamma ** 2 + 6 * res.alpha))
    return CheckResult("nose-nf/hessian", ok, "" if ok else str(h))


# --- the thermostat-shape family ---------------------------------------------


def check_nose_like_symbolic():
    res = nose_like_normal_form_symbolic()
    sp = res.alpha.space
    a, b = sp.var("a"), sp.var("b")
    alpha = res.alpha
    beta = res.beta if isinstance(res.beta, GradedJet) else sp.constant(res.beta)
    gamma = res.gamma if isinstance(res.gamma, GradedJet) else sp.constant(res.gamma)
    ok = (6 * b == 96 * alpha + 9 * a ** 2 - 30 * a + 44
          and 2 * beta == 2 - a
          and 12 * gamma == 48 * alpha + 3 * a ** 2 - 21 * a + 34)
    return CheckResult("nose-like/symbolic-relations", ok,
                       "" if ok else f"alpha={alpha}, beta={beta}, gamma={gamma}")


def check_nose_like_reduction():
    got = nose_like_coefficients(0, 0)
    want = fixtures.NOSE_LIKE_SAMPLES[(F(0), F(0))]
    return _eq("nose-like/reduction-a0b0", got, want)


def check_nose_like_sample():
    res = nose_like_normal_form(2, 0)
    got = (res.alpha, res.beta, res.gamma)
    want = fixtures.NOSE_LIKE_SAMPLES[(F(2), F(0))]
    return _eq("nose-like/sample-a2b0", got, want)


def check_nose_like_random_agreement(seed=20240817, n=5):
    rng = random.Random(seed)
    for _ in range(n):
        a = F(rng.randint(-12, 12), rng.randint(1, 6))
        b = F(rng.randint(-12, 12), rng.randint(1, 6))
        res = nose_like_normal_form(a, b)
        if (res.alpha, res.beta, res.gamma) != nose_like_coefficients(a, b):
            return CheckResult("nose-like/random-agreement", False,
                               f"mismatch at (a, b) = ({a}, {b})")
    return CheckResult("nose-like/random-agreement", True)


def check_nose_like_kam_twist():
    res = nose_like_normal_form_symbolic()
    q = kam_sufficient_value(res.alpha, res.beta)
    sp = q.space
    a, b = sp.var("a"), sp.var("b")
    return _eq("nose-like/kam-twist", 48 * q, 6 * b + 3 * a ** 2 - 18 * a + 4)


def check_hessian_template():
    sp = JetSpace.create(("al", "be", "ga"), 4,
                         weights={"al": 0, "be": 0, "ga": 0})
    from .normal_form import transformed_template
    t = transformed_template(sp.var("al"), sp.var("be"), sp.var("ga"),
                             params=("al", "be", "ga"))
    h = hessian_det_series(t)
    hs = h.space
    al, be, ga = hs.var("al"), hs.var("be"), hs.var("ga")
    I, Jv = hs.var("I"), hs.var("J")
    want = (-(2 * al + be ** 2) + 4 * al * ga * I
            - 4 * (be * ga + al) * Jv - (4 * ga ** 2 + 6 * al) * Jv ** 2)
    return _eq("nose-like/hessian-template", h, want)


# --- the weakly coupled oscillator -------------------------------------------


def check_gk_pullback():
    m = compose(ho_sqrt_map(), flip_u_map())
    kappa = F(3, 7)
    for u, U, v, V in ((F(3, 4), F(1, 5), F(-2, 7), F(1, 2)),
                       (F(8, 9), F(-1, 3), F(1, 4), F(-2, 5))):
        w, W, sigma, Sigma = m((u, U, v, V))
        if sigma != 1 - u:
            return CheckResult("oscillator/gk-pullback", False,
                               f"sigma = {sigma} vs 1-u = {1 - u}")
        lhs = (W / sigma) ** 2 / 2 + w ** 2 / 2 + kappa * Sigma ** 2 / 2
        A = U - v * V / (2 * (1 - u))
        rhs = (V ** 2 + v ** 2) / (2 * (1 - u)) + kappa * A ** 2 / 2
        if lhs != rhs:
            return CheckResult("oscillator/gk-pullback", False,
                               f"lhs = {lhs} ; rhs = {rhs}")
    return CheckResult("oscillator/gk-pullback", True)


def check_t2_coefficients():
    scaled = scaled_by_inverse_coupling(averaged_oscillator())
    t2 = maclaurin_expand(scaled, 2)
    sp = t2.space

    def coeff(u_pow, U_pow, E_pow, ik_pow):
        exp = [0] * len(sp.variables)
        exp[sp.index("u")] = u_pow
        exp[sp.index("U")] = U_pow
        exp[sp.index("E")] = E_pow
        exp[sp.index("inv_kappa")] = ik_pow
        return t2.coefficient(tuple(exp))

    rows = {
        "u^2": (coeff(2, 0, 2, 0), coeff(2, 0, 1, 1), coeff(2, 0, 0, 0)),
        "u": (coeff(1, 0, 2, 0), coeff(1, 0, 1, 1), coeff(1, 0, 0, 0)),
        "1": (coeff(0, 0, 2, 0), coeff(0, 0, 1, 1), coeff(0, 0, 0, 0)),
    }
    want = {
        "u^2": (fixtures.T2_U2_COEFF["E2"], fixtures.T2_U2_COEFF["E_over_kappa"],
                fixtures.T2_U2_COEFF["const"]),
        "u": (fixtures.T2_U1_COEFF["E2"], fixtures.T2_U1_COEFF["E_over_kappa"],
              fixtures.T2_U1_COEFF["const"]),
        "1": (fixtures.T2_U0_COEFF["E2"], fixtures.T2_U0_COEFF["E_over_kappa"],
              fixtures.T2_U0_COEFF["const"]),
    }
    return _eq("oscillator/t2-coefficients", rows, want)


def check_t4_expansion():
    scaled = scaled_by_inverse_coupling(averaged_oscillator())
    t4 = maclaurin_expand(scaled, 4, constraint="coupling")
    sp = t4.space
    got = {}
    const = F(0)
    for exp, c in t4.items():
        u_pow, U_pow = exp[sp.index("u")], exp[sp.index("U")]
        if u_pow == U_pow == 0:
            const = c
        else:
            got[(u_pow, U_pow)] = c
    ok = got == fixtures.T4_TERMS and const == fixtures.T4_CONSTANT
    return CheckResult("oscillator/t4-expansion", ok,
                       "" if ok else f"got {got} + {const}")


def check_bnf_coefficient():
    res = bnf_oscillator(fixtures.OSC_BNF_A3, fixtures.OSC_BNF_A4)
    oracle = oscillator_bnf_coefficient_oracle(fixtures.OSC_BNF_A3,
                                               fixtures.OSC_BNF_A4)
    got = (res.c, oracle)
    return _eq("oscillator/bnf-coefficient", got,
               (fixtures.OSC_BNF_COEFF, fixtures.OSC_BNF_COEFF))


def check_slow_generator_line():
    res = bnf_oscillator(F(2, 3), F(3, 4))
    got = {e: c for e, c in res.nu.items() if res.nu.space.degree(e) >= 3}
    want = {(2, 1): F(-2, 3), (3, 1): F(65, 288), (1, 3): F(295, 288),
            (0, 3): F(-4, 9)}
    return _eq("oscillator/slow-generator", got, want)


def check_critical_energy():
    e3 = critical_fast_energy(3)
    got = {exp[0]: c for exp, c in e3.items()}
    want = {k: v for k, v in fixtures.CRITICAL_E_COEFFS.items() if v != 0}
    return _eq("oscillator/critical-energy", got, want)


def check_hatg_normal_form():
    res = hatG_normal_form(1)
    got = (res.alpha, res.beta, res.gamma, res.sign_flip_needed)
    want = (fixtures.HATG_ALPHA_OVER_KAPPA, fixtures.HATG_BETA,
            fixtures.HATG_GAMMA_TIMES_KAPPA, True)
    return _eq("hatg/normal-form", got, want)


def check_hatg_reduced_hamiltonian():
    kappa = F(1, 10)
    res = hatG_normal_form(kappa)
    got = {exp: c / kappa for exp, c in res.reduced_j.items()}
    return _eq("hatg/reduced-hamiltonian", got,
               dict(fixtures.HATG_REDUCED_J_OVER_KAPPA))


def check_hatg_j0_consistency():
    res = hatG_normal_form(F(2, 3))
    sp = JetSpace.create(("I",), 4, weights={"I": 2})
    I = sp.var("I")
    got = res.kappa * I + res.alpha * I * I
    return _eq("hatg/j0-consistency", got, res.kappa * (I - 13 * I * I / 24))


# --- averaging ----------------------------------------------------------------


def check_averaging_oracle_form():
    got = averaged_oscillator()
    sp = got.space
    E, u, U, kap = (sp.var(n) for n in ("E", "u", "U", "kappa"))
    denom = 2 ** fixtures.AVERAGE_FAST_DENOM_POWER
    want = (E * reciprocal(-u) / fixtures.AVERAGE_LEADING_DENOM
            + (U ** 2 / 2 + E ** 2 * reciprocal_power(2, -u) / denom
               + ln1p(-u)) * kap)
    return _eq("averaging/oracle-form", got, want)


def check_averaging_discrepancies():
    entries = discrepancies()
    ok = (any("2^6" in e.printed and "2^4" in e.computed for e in entries)
          and any("E/(2(1-u))" in e.printed for e in entries)
          and printed_averaged_oscillator() != averaged_oscillator())
    return CheckResult("averaging/discrepancies-present", ok,
                       "" if ok else f"{len(entries)} entries")


# --- canonical maps -------------------------------------------------------------


def check_maps_symplectic(seed=0):
    rng = np.random.default_rng(seed)
    worst = {}
    m = fgen_map()
    pts = []
    while len(pts) < 50:
        u, U, v, V = rng.uniform(-0.4, 0.4, 4)
        if V < 0.5:
            pts.append((u, U, v, V))
    worst["fgen"] = symplectic_check(m, pts)
    worst["ho-flip"] = symplectic_check(
        compose(ho_sqrt_map(), flip_u_map()),
        rng.uniform(-0.4, 0.4, (50, 4)))
    worst["rescale"] = symplectic_check(nose_rescaling(2.0, 3.0),
                                        rng.uniform(-0.5, 0.5, (50, 4))
                                        + np.array([0, 0, 1.5, 0]))
    worst["polar"] = symplectic_check(polar_cartesian(),
                                      rng.uniform(-0.5, 0.5, (50, 4))
                                      + np.array([0, 1, 1.5, 0]))
    worst["flip-u"] = symplectic_check(flip_u_map(),
                                       rng.uniform(-0.5, 0.5, (50, 4)))
    # the nu map is a degree-4 jet: exact mod O(5), so its symplectic defect
    # scales like radius^4; sample its formal neighborhood accordingly
    worst["nu"] = symplectic_check(nose_nu_map(),
                                   rng.uniform(-0.005, 0.005, (50, 4)))
    bad = {k: v for k, v in worst.items() if v >= 1e-7}
    return CheckResult("maps/symplectic", not bad,
                       "" if not bad else f"deviations {bad}")


def check_rescale_values():
    m = nose_rescaling(1, 4)
    return _eq("maps/rescale-values", m((0, 1, 1, 0)), (0, 1, F(1, 2), 0))


def check_inverse_roundtrip():
    pt = (F(1, 3), F(2, 7), F(5, 6), F(-1, 4))
    m = nose_rescaling(F(9, 4), F(4, 9))
    ok = m.inverse(m(pt)) == pt
    ho = ho_sqrt_map()
    pt2 = (F(9, 4), F(1, 3), F(2, 5), F(7, 2))
    ok = ok and ho.inverse(ho.forward(pt2)) == pt2
    return CheckResult("maps/inverse-roundtrip", ok)


ALL_CHECKS = [
    check_jets_log_series,
    check_jets_radial_expansion,
    check_jets_weighted_truncation,
    check_jets_json_roundtrip,
    check_fgen_induced_map,
    check_fgen_periodic_variety,
    check_fgen_g0_expansion,
    check_nose_nf_coefficients,
    check_nose_nf_nu_table,
    check_nose_nf_bnf_identity,
    check_nose_nf_hessian,
    check_nose_like_symbolic,
    check_nose_like_reduction,
    check_nose_like_sample,
    check_nose_like_random_agreement,
    check_nose_like_kam_twist,
    check_hessian_template,
    check_gk_pullback,
    check_t2_coefficients,
    check_t4_expansion,
    check_bnf_coefficient,
    check_slow_generator_line,
    check_critical_energy,
    check_hatg_normal_form,
    check_hatg_reduced_hamiltonian,
    check_hatg_j0_consistency,
    check_averaging_oracle_form,
    check_averaging_discrepancies,
    check_maps_symplectic,
    check_rescale_values,
    check_inverse_roundtrip,
]


def run_checks(name_filter: str | None = None) -> list:
    """Run the golden checks (optionally filtered by substring) and return
    CheckResult objects in registry order."""
    results = []
    for fn in ALL_CHECKS:
        probe = fn.__name__.replace("check_", "").replace("_", "-")
        result = None
        try:
            result = fn()
        except Exception as exc:  # a crash is a failure with its reason
            result = CheckResult(probe, False, f"exception: {exc!r}")
        if name_filter and name_filter not in result.name:
            continue
        results.append(result)
    return results


def discrepancy_markdown() -> str:
    """DISCREPANCIES.md content: printed values that disagree with the
    exact computations, with the evidence that pins each call."""
    entries = discrepancies()
    lines = ["# Discrepancies between printed displays and exact computation",
             "",
             "Each entry records a value as printed, the value this package",
             "computes exactly, and the internal evidence that decides it.",
             ""]
    for e in entries:
        lines.append(f"## {e.where}")
        lines.append("")
        lines.append(f"* printed: `{e.printed}`")
        lines.append(f"* computed: `{e.computed}`")
        lines.append(f"* evidence: {e.evidence}")
        lines.append("")
    return "\n".join(lines)
