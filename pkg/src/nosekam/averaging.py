"""First-order averaging of the weakly coupled oscillator over the fast angle.

The fast pair (v, V) is replaced by its action through the exact substitution
v = sqrt(2E) cos(theta), V = sqrt(2E) sin(theta) and an exact average over
theta: trig monomial moments are rational numbers, so the averaged
Hamiltonian is again an exact jet, now in (E, u, U) with the coupling as a
weight-0 symbol.

The printed form of the averaged Hamiltonian disagrees with this exact
average in two denominators; the module computes both and reports the
discrepancy rather than silently adopting either (the printed second-order
expansion coefficients agree with the exact average, which pins the typo).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .jets import GradedJet, JetSpace, ln1p, reciprocal, reciprocal_power

F = Fraction

COUPLING = "kappa"
INV_COUPLING = "inv_kappa"
ENERGY = "E"


class AveragingError(Exception):
    pass


@dataclass(frozen=True)
class FastSlowSplit:
    """Names of the fast rotation pair, the slow pair, and the coupling."""

    fast: tuple = ("v", "V")
    slow: tuple = ("u", "U")
    coupling: str = COUPLING

    def fast_energy(self, v, V):
        return (v * v + V * V) / 2


def trig_moment(m: int, n: int) -> Fraction:
    """(1/2pi) * integral of cos^m(t) sin^n(t) over a period, exactly."""
    if m < 0 or n < 0:
        raise AveragingError("negative trig powers")
    if m % 2 or n % 2:
        return F(0)

    def dfact(k):  # (k-1)!! with dfact(0) = 1
        out = 1
        while k > 1:
            out *= k - 1
            k -= 2
        return out

    num = dfact(m) * dfact(n)
    den = 1
    k = m + n
    while k > 1:
        den *= k
        k -= 2
    return F(num, den)


def angle_average(h: GradedJet, split: FastSlowSplit = FastSlowSplit(),
                  energy: str = ENERGY) -> GradedJet:
    """Average a jet over the fast angle at fixed fast energy.

    Each monomial v^m V^n maps to (2E)^((m+n)/2) <cos^m sin^n>; odd
    harmonics vanish.  The result lives in (energy,) + remaining variables,
    with the energy carried at weight 0 so parametric expansions stay exact.
    """
    sp = h.space
    iv = sp.index(split.fast[0])
    iV = sp.index(split.fast[1])
    rest = [i for i in range(len(sp.variables)) if i not in (iv, iV)]
    out_space = JetSpace.create(
        (energy,) + tuple(sp.variables[i] for i in rest), sp.max_degree,
        weights={energy: 0, **{sp.variables[i]: sp.weights[i] for i in rest}})
    terms: dict = {}
    for exp, c in h.items():
        m, n = exp[iv], exp[iV]
        mom = trig_moment(m, n)
        if mom == 0:
            continue
        epow = (m + n) // 2
        coeff = c * mom * F(2) ** epow
        key = (epow,) + tuple(exp[i] for i in rest)
        s = terms.get(key, F(0)) + coeff
        if s == 0:
            terms.pop(key, None)
        else:
            terms[key] = s
    return GradedJet(out_space, terms)


def weak_coupling_hamiltonian(max_degree: int = 8) -> GradedJet:
    """The weakly coupled oscillator (v^2+V^2)/(2(1-u))
    + kappa*((U - vV/(2(1-u)))^2/2 + ln(1-u)) as a jet in (v, V, u, U, kappa).
    """
    sp = JetSpace.create(("v", "V", "u", "U", COUPLING), max_degree,
                         weights={COUPLING: 0})
    v, V, u, U = (sp.var(n) for n in ("v", "V", "u", "U"))
    kap = sp.var(COUPLING)
    inv = reciprocal(-u)
    fast = (v ** 2 + V ** 2) * inv / 2
    A = U - v * V * inv / 2
    return fast + (A ** 2 / 2 + ln1p(-u)) * kap


def averaged_oscillator(max_degree: int = 4) -> GradedJet:
    """Exact first-order average of the weak-coupling Hamiltonian: a jet in
    (E, u, U, kappa) equal to E/(1-u) + kappa*(U^2/2 + E^2/(16(1-u)^2)
    + ln(1-u)) at this order."""
    g = weak_coupling_hamiltonian(max_degree + 4)
    return angle_average(g).truncate(max_degree)


def printed_averaged_oscillator(max_degree: int = 4) -> GradedJet:
    """The averaged Hamiltonian as displayed: E/(2(1-u))
    + kappa*(U^2/2 + E^2/(64(1-u)^2) + ln(1-u)).  Kept for the discrepancy
    report; its own downstream expansions contradict it."""
    sp = JetSpace.create((ENERGY, "u", "U", COUPLING), max_degree,
                         weights={ENERGY: 0, COUPLING: 0})
    E, u, U = sp.var(ENERGY), sp.var("u"), sp.var("U")
    kap = sp.var(COUPLING)
    return (E * reciprocal(-u) / 2
            + (U ** 2 / 2 + E ** 2 * reciprocal_power(2, -u) / 64 + ln1p(-u)) * kap)


def scaled_by_inverse_coupling(gbar: GradedJet) -> GradedJet:
    """kappa^(-1) * gbar, re-expressed with the weight-0 symbol inv_kappa.

    Requires coupling degree <= 1 (first-order averaging truncates there);
    a coupling-degree-d term becomes an inv_kappa^(1-d) term.
    """
    sp = gbar.space
    ik = sp.index(COUPLING)
    rest = [i for i in range(len(sp.variables)) if i != ik]
    out_space = JetSpace.create(
        tuple(sp.variables[i] for i in rest) + (INV_COUPLING,), sp.max_degree,
        weights={INV_COUPLING: 0,
                 **{sp.variables[i]: sp.weights[i] for i in rest}})
    terms = {}
    for exp, c in gbar.items():
        d = exp[ik]
        if d > 1:
            raise AveragingError("jet has coupling degree above first order")
        key = tuple(exp[i] for i in rest) + (1 - d,)
        terms[key] = c
    return GradedJet(out_space, terms)


def maclaurin_expand(g_scaled: GradedJet, order: int,
                     constraint=None) -> GradedJet:
    """Slow expansion of the inverse-coupling-scaled averaged Hamiltonian.

    constraint=None keeps the fast energy symbolic (second-order display);
    constraint="coupling" sets E = kappa and drops the resulting O(kappa)
    terms (fourth-order display); a rational constraint substitutes that
    exact fast energy.
    """
    sp = g_scaled.space
    iE = sp.index(ENERGY)
    iK = sp.index(INV_COUPLING)
    if constraint is None:
        return g_scaled.truncate(order)
    terms = {}
    if constraint == "coupling":
        # E = kappa: E^a inv_kappa^b -> kappa^(a-b); keep the O(1) part
        for exp, c in g_scaled.items():
            net = exp[iE] - exp[iK]
            if net < 0:
                raise AveragingError("negative coupling power after E = kappa")
            if net > 0:
                continue
            key = tuple(0 if i in (iE, iK) else e for i, e in enumerate(exp))
            s = terms.get(key, F(0)) + c
            if s == 0:
                terms.pop(key, None)
            else:
                terms[key] = s
        reduced = GradedJet(sp, terms)
    else:
        e0 = F(constraint)
        for exp, c in g_scaled.items():
            coeff = c * e0 ** exp[iE]
            if coeff == 0:
                continue
            key = tuple(0 if i == iE else e for i, e in enumerate(exp))
            s = terms.get(key, F(0)) + coeff
            if s == 0:
                terms.pop(key, None)
            else:
                terms[key] = s
        reduced = GradedJet(sp, terms)
    return reduced.truncate(order)


def critical_fast_energy(order: int = 3) -> GradedJet:
    """The fast energy E(kappa) at which the scaled slow system is critical
    at the origin, as a series in the coupling: solve d/du at u = U = 0.

    Leading term kappa; the quadratic coefficient vanishes and the cubic one
    is -1/8 (solver output, frozen in the fixtures).
    """
    if order < 1:
        raise AveragingError("order must be >= 1")
    gbar = averaged_oscillator()
    slope = gbar.polynomial_derivative("u")
    sp = slope.space
    zero = sp.zero()
    slope0 = slope.substitute({
        "u": zero, "U": zero,
        ENERGY: sp.var(ENERGY), COUPLING: sp.var(COUPLING)})
    # slope0 = E + kappa*(E^2/8 - 1) exactly at this truncation
    kspace = JetSpace.create((COUPLING,), order)
    kap = kspace.var(COUPLING)
    E = kspace.zero()
    for _ in range(order + 2):
        # solve slope0(E, kappa) = 0 by the contraction E -> E - slope0(E)
        val = slope0.substitute({ENERGY: E, COUPLING: kap,
                                 "u": kspace.zero(), "U": kspace.zero()},
                                space=kspace)
        E = E - val
    check = slope0.substitute({ENERGY: E, COUPLING: kap,
                               "u": kspace.zero(), "U": kspace.zero()},
                              space=kspace)
    if not check.is_zero():
        raise AveragingError(f"no critical energy at order {order}")
    return E


# ---------------------------------------------------------------------------
# discrepancy report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Discrepancy:
    """A printed value that disagrees with an independently computed one."""

    where: str
    printed: str
    computed: str
    evidence: str


def discrepancies() -> list:
    """The documented deviations between printed displays and exact
    computation, with the printed second-order expansion as the arbiter."""
    out = []
    exact = averaged_oscillator()
    printed = printed_averaged_oscillator()
    if exact != printed:
        out.append(Discrepancy(
            where="averaged Hamiltonian, leading fast term",
            printed="E/(2(1-u))",
            computed="E/(1-u)",
            evidence=("exact angle average of (v^2+V^2)/(2(1-u)) with "
                      "v^2+V^2 = 2E; the printed second-order expansion "
                      "coefficients E/kappa - 1 and E/kappa - 1/2 require "
                      "E/(1-u)"),
        ))
        out.append(Discrepancy(
            where="averaged Hamiltonian, quartic fast term",
            printed="E^2/(2^6 (1-u)^2)",
            computed="E^2/(2^4 (1-u)^2)",
            evidence=("exact average of (vV)^2/(8(1-u)^2) is "
                      "E^2/(16(1-u)^2); the printed second-order "
                      "coefficients 3E^2/16, E^2/8, E^2/16 require 2^4"),
        ))
    from .normal_form import hatG_normal_form
    hat = hatG_normal_form(F(1))
    if hat.sign_flip_needed:
        out.append(Discrepancy(
            where="modified weak-coupling Hamiltonian",
            printed="G_kappa - kappa*u/(1-u)",
            computed="G_kappa + kappa*u/(1-u)",
            evidence=("only the '+' sign gives a critical point at the "
                      "origin with slow quadratic part kappa*(u^2+U^2)/2; "
                      "the printed normal form then verifies exactly"),
        ))
    if hat.shear_dropped:
        out.append(Discrepancy(
            where="weak-coupling normal form via the printed generator",
            printed="exact normal form of G_kappa + kappa*u/(1-u)",
            computed=("exact normal form of the shear-free Hamiltonian; "
                      "with the shear kept, beta = -(8-k^2)/(8-2k^2) and "
                      "gamma = -(8-3k^2)/(2k(8-2k^2))"),
            evidence=("the dropped slow-momentum shear -vV/(2(1-u)) is a "
                      "zero-average fast harmonic; the printed coefficients "
                      "are the leading coupling order of the exact ones"),
        ))
    return out
