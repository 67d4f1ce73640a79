"""Exact angle averaging and the published slow expansions."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nosekam import fixtures
from nosekam.averaging import (AveragingError, FastSlowSplit, angle_average,
                               averaged_oscillator, critical_fast_energy,
                               discrepancies, maclaurin_expand,
                               printed_averaged_oscillator,
                               scaled_by_inverse_coupling, trig_moment,
                               weak_coupling_hamiltonian)
from nosekam.jets import GradedJet, JetSpace, reciprocal, reciprocal_power

F = Fraction


def test_trig_moments():
    assert trig_moment(0, 0) == 1
    assert trig_moment(1, 0) == 0
    assert trig_moment(2, 0) == F(1, 2)
    assert trig_moment(0, 4) == F(3, 8)
    assert trig_moment(2, 2) == F(1, 8)
    assert trig_moment(1, 1) == 0


def test_average_kills_odd_harmonics():
    sp = JetSpace.create(("v", "V", "u", "U"), 4)
    v, V = sp.var("v"), sp.var("V")
    assert angle_average(v * V).is_zero()
    assert angle_average(v ** 3).is_zero()
    assert angle_average(v * sp.var("u") ** 2).is_zero()


def test_average_of_vV_squared():
    sp = JetSpace.create(("v", "V", "u", "U"), 4)
    got = angle_average((sp.var("v") * sp.var("V")) ** 2)
    # (vV)^2 = E^2 sin^2(2 theta) averages to E^2/2
    assert got == got.space.var("E", 2) / 2


def test_average_of_fast_kinetic_term():
    # (v^2+V^2)/(2(1-u)) averages to E/(1-u), not E/(2(1-u));
    # the average is trustworthy to slow degree max_degree - 2
    sp = JetSpace.create(("v", "V", "u", "U"), 6)
    v, V, u = sp.var("v"), sp.var("V"), sp.var("u")
    h = (v ** 2 + V ** 2) * reciprocal(-u) / 2
    got = angle_average(h).truncate(4)
    out = got.space
    want = out.var("E") * reciprocal(-out.var("u"))
    assert got == want


def test_angle_average_is_linear():
    sp = JetSpace.create(("v", "V", "u", "U"), 4)
    a = sp.var("v") ** 2 + sp.var("u") * sp.var("V") ** 2
    b = sp.var("U") ** 2 + sp.var("v") * sp.var("V")
    assert angle_average(a + b) == angle_average(a) + angle_average(b)


@given(st.integers(0, 4), st.integers(0, 4))
@settings(max_examples=25, deadline=None)
def test_trig_moment_against_quadrature(m, n):
    theta = (np.arange(4096) + 0.5) * (2 * np.pi / 4096)
    val = float(np.mean(np.cos(theta) ** m * np.sin(theta) ** n))
    assert abs(val - float(trig_moment(m, n))) < 1e-12


def test_angle_average_against_quadrature():
    # float oracle: evaluate the jet on the fast circle and quadrature it
    sp = JetSpace.create(("v", "V", "u", "U"), 6)
    rng = np.random.default_rng(5)
    jet = GradedJet(sp, {
        (2, 0, 1, 0): F(1, 3), (1, 1, 0, 1): F(-2, 7), (0, 4, 0, 0): F(5, 4),
        (2, 2, 1, 0): F(1, 9), (0, 0, 3, 1): F(3, 5), (1, 0, 1, 1): F(2)})
    avg = angle_average(jet)
    theta = (np.arange(4096) + 0.5) * (2 * np.pi / 4096)
    for _ in range(5):
        E, u, U = rng.uniform(0.05, 0.4, 3)
        v = math.sqrt(2 * E) * np.cos(theta)
        V = math.sqrt(2 * E) * np.sin(theta)
        direct = np.mean([float(jet.evaluate(
            {"v": vv, "V": VV, "u": u, "U": U})) for vv, VV in zip(v, V)])
        via_jet = float(avg.evaluate({"E": E, "u": u, "U": U}))
        assert abs(direct - via_jet) < 1e-12


def test_averaged_oscillator_oracle_form():
    got = averaged_oscillator()
    sp = got.space
    E, u, U, kap = (sp.var(n) for n in ("E", "u", "U", "kappa"))
    from nosekam.jets import ln1p
    want = (E * reciprocal(-u)
            + (U ** 2 / 2 + E ** 2 * reciprocal_power(2, -u) / 16 + ln1p(-u)) * kap)
    assert got == want


def test_printed_average_differs_from_oracle():
    assert printed_averaged_oscillator() != averaged_oscillator()


def test_second_order_expansion_coefficients():
    scaled = scaled_by_inverse_coupling(averaged_oscillator())
    t2 = maclaurin_expand(scaled, 2)
    sp = t2.space  # (E, u, U, inv_kappa)

    def coeff(u_pow, U_pow, E_pow, ik_pow):
        exp = [0] * len(sp.variables)
        exp[sp.index("u")] = u_pow
        exp[sp.index("U")] = U_pow
        exp[sp.index("E")] = E_pow
        exp[sp.index("inv_kappa")] = ik_pow
        return t2.coefficient(tuple(exp))

    # u^2: 3E^2/16 + E/kappa - 1/2
    assert coeff(2, 0, 2, 0) == fixtures.T2_U2_COEFF["E2"]
    assert coeff(2, 0, 1, 1) == fixtures.T2_U2_COEFF["E_over_kappa"]
    assert coeff(2, 0, 0, 0) == fixtures.T2_U2_COEFF["const"]
    # u: E^2/8 + E/kappa - 1
    assert coeff(1, 0, 2, 0) == fixtures.T2_U1_COEFF["E2"]
    assert coeff(1, 0, 1, 1) == fixtures.T2_U1_COEFF["E_over_kappa"]
    assert coeff(1, 0, 0, 0) == fixtures.T2_U1_COEFF["const"]
    # constant: E^2/16 + E/kappa
    assert coeff(0, 0, 2, 0) == fixtures.T2_U0_COEFF["E2"]
    assert coeff(0, 0, 1, 1) == fixtures.T2_U0_COEFF["E_over_kappa"]
    # and the kinetic slow term U^2/2
    assert coeff(0, 2, 0, 0) == F(1, 2)


def test_fourth_order_expansion_at_critical_energy():
    scaled = scaled_by_inverse_coupling(averaged_oscillator())
    t4 = maclaurin_expand(scaled, 4, constraint="coupling")
    sp = t4.space
    got = {}
    const = F(0)
    for exp, c in t4.items():
        u_pow = exp[sp.index("u")]
        U_pow = exp[sp.index("U")]
        assert exp[sp.index("E")] == 0 and exp[sp.index("inv_kappa")] == 0
        if u_pow == U_pow == 0:
            const = c
        else:
            got[(u_pow, U_pow)] = c
    assert const == fixtures.T4_CONSTANT
    assert got == fixtures.T4_TERMS


def test_oscillator_g0_matches_averaging_chain():
    # the normal-form module's direct construction agrees with the
    # averaging pipeline term by term
    from nosekam.normal_form import oscillator_g0
    scaled = scaled_by_inverse_coupling(averaged_oscillator())
    t4 = maclaurin_expand(scaled, 4, constraint="coupling")
    g0 = oscillator_g0()
    sp = t4.space
    for exp, c in t4.items():
        u_pow, U_pow = exp[sp.index("u")], exp[sp.index("U")]
        if u_pow == U_pow == 0:
            assert c == g0.constant
        else:
            assert c == g0.jet.coefficient((u_pow, 0, U_pow, 0))


def test_expansion_with_zero_fast_energy():
    scaled = scaled_by_inverse_coupling(averaged_oscillator())
    t0 = maclaurin_expand(scaled, 0, constraint=F(0))
    assert t0.constant_term() == 0


def test_critical_fast_energy_series():
    e1 = critical_fast_energy(1)
    assert e1.terms == {(1,): F(1)}
    e2 = critical_fast_energy(2)
    assert e2.coefficient((2,)) == fixtures.CRITICAL_E_COEFFS[2]
    e3 = critical_fast_energy(3)
    assert {exp[0]: c for exp, c in e3.items()} == {
        k: v for k, v in fixtures.CRITICAL_E_COEFFS.items() if v != 0}
    with pytest.raises(AveragingError):
        critical_fast_energy(0)


def test_bnf_of_fourth_order_expansion():
    # the cubic/quartic coefficients 2/3 and 3/4 give the published
    # normal-form coefficient -13/24
    from nosekam.normal_form import bnf_oscillator
    assert bnf_oscillator(F(2, 3), F(3, 4)).c == F(-13, 24)


def test_discrepancy_report():
    entries = discrepancies()
    wheres = [e.where for e in entries]
    assert any("leading fast term" in w for w in wheres)
    assert any("quartic fast term" in w for w in wheres)
    assert any("modified weak-coupling" in w for w in wheres)
    two_six = [e for e in entries if "2^6" in e.printed]
    assert two_six and "2^4" in two_six[0].computed


def test_fast_slow_split_energy():
    split = FastSlowSplit()
    assert split.fast_energy(3.0, 4.0) == 12.5
    assert split.fast == ("v", "V")
