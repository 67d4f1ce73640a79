"""Model catalog: energies, vector fields, observables, thermostat forms."""
import math
from fractions import Fraction

import numpy as np
import pytest

from nosekam.canonical import nose_rescaling
from nosekam.models import (HamiltonianModel, ModelDomainError, ModelError,
                            NormalizedThermostat, TrigPotential, energy,
                            evaluate, model_from_json, model_to_json,
                            nose_hoover_model, nose_like_model, nose_model,
                            oscillator_model, rescaled_model,
                            temperature_observable, temperature_series,
                            thermostat_normal_form, vector_field)

F = Fraction


def test_trig_potential_basics():
    V = TrigPotential.cosine()
    assert V(0.0) == pytest.approx(1.0)
    assert V.deriv(0.0) == pytest.approx(0.0)
    assert V.deriv(math.pi / 2) == pytest.approx(-1.0)
    x = np.linspace(0, 2 * math.pi, 7)
    assert np.allclose(V(x + 2 * math.pi), V(x))
    h = 1e-6
    assert V.deriv(0.7) == pytest.approx((V(0.7 + h) - V(0.7 - h)) / (2 * h),
                                         abs=1e-8)


def test_rescaled_evaluate_trivial():
    m = rescaled_model(beta=0.0, potential=TrigPotential.zero())
    assert evaluate(m, (0.0, 1.0, 1.0, 0.0)) == pytest.approx(0.5)


def test_oscillator_evaluate_origin():
    m = oscillator_model(kappa=0.3)
    assert evaluate(m, (0.0, 0.0, 0.0, 0.0)) == 0.0


def test_nose_full_vs_rescaled_pullback():
    # F = T * F_beta - (T/2) ln(MT) under the rescaling map
    M, T = 2.0, 3.0
    full = nose_model(M=M, T=T)
    resc = rescaled_model(beta=1.0 / T, M=M)
    rmap = nose_rescaling(M, T)
    rng = np.random.default_rng(4)
    for _ in range(20):
        w = rng.uniform(-2, 2)
        W = rng.uniform(-2, 2)
        sigma = rng.uniform(0.4, 2.0)
        Sigma = rng.uniform(-1.5, 1.5)
        old = rmap((w, W, sigma, Sigma))
        lhs = evaluate(full, old)
        rhs = T * evaluate(resc, (w, W, sigma, Sigma)) - 0.5 * T * math.log(M * T)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_vector_field_is_symplectic_gradient():
    rng = np.random.default_rng(9)
    models = [rescaled_model(beta=0.01), nose_like_model(beta=0.02, a=0.3, b=-0.2),
              nose_model(M=2, T=5), oscillator_model(0.2)]
    h = 1e-4
    for model in models:
        for _ in range(25):
            state = np.array([rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.3),
                              rng.uniform(0.7, 1.3), rng.uniform(-0.3, 0.3)])
            if model.kind == "oscillator_G_kappa":
                state = rng.uniform(-0.3, 0.3, 4)
            f = vector_field(model, state)
            # directional derivative of H along the flow vanishes
            # (fourth-order stencil keeps finite-difference noise ~ 1e-12)
            dH = np.zeros(4)
            for i in range(4):
                vals = []
                for shift in (-2 * h, -h, h, 2 * h):
                    s = state.copy()
                    s[i] += shift
                    vals.append(evaluate(model, s))
                dH[i] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
            assert abs(float(dH @ f)) < 1e-10 * max(1.0, float(np.abs(f).max()))
            assert np.all(np.isfinite(f))


def test_rescaled_beta0_W_is_cyclic():
    m = rescaled_model(beta=0.0)
    f = vector_field(m, (0.3, 1.1, 0.9, -0.2))
    assert f[1] == 0.0


def test_nose_hoover_vector_field():
    T = 2.25
    m = nose_hoover_model(T=T)
    f = vector_field(m, (0.0, math.sqrt(T), 0.0))
    assert f == pytest.approx((math.sqrt(T), 0.0, 0.0))


def test_nose_hoover_divergence_and_stationarity():
    # div X = -xi, and the stationary-measure combination
    # div X - (1/T) grad(H + M xi^2/2) . X vanishes identically
    m = nose_hoover_model(T=1.7, M=1.3)
    rng = np.random.default_rng(12)
    h = 1e-6
    for _ in range(20):
        st = rng.uniform(-1, 1, 3)
        div = 0.0
        for i in range(3):
            sp = st.copy(); sm = st.copy()
            sp[i] += h; sm[i] -= h
            div += (vector_field(m, sp)[i] - vector_field(m, sm)[i]) / (2 * h)
        assert div == pytest.approx(-st[2], abs=1e-8)
        gradE = np.array([st[0], st[1], m.M * st[2]])
        combo = div - (1.0 / m.temperature) * float(gradE @ vector_field(m, st))
        assert combo == pytest.approx(0.0, abs=1e-8)


def test_nose_like_equilibrium_identity():
    # at a thermodynamic equilibrium (sigma dot = Sigma dot = 0) the kinetic
    # temperature observable equals T
    m = nose_like_model(beta=0.0, a=0.4, b=0.1, T=5.0)
    state = (0.0, 1.0, 1.0, 0.0)  # sigma = |W| = 1, Sigma = 0
    f = vector_field(m, state)
    assert f[2] == 0.0 and f[3] == pytest.approx(0.0)
    assert temperature_observable(m, state) == pytest.approx(5.0)


def test_temperature_observable():
    full = nose_model(T=4.0)
    assert temperature_observable(full, (0.0, 2.0, 1.0, 0.0)) == 4.0
    resc = rescaled_model(beta=0.0, T=5.0)
    assert temperature_observable(resc, (0.0, 1.0, 1.0, 0.0)) == 5.0
    with pytest.raises(ModelError):
        temperature_observable(oscillator_model(), (0, 0, 0, 0))
    states = np.array([[0.0, 1.0, 1.0, 0.0], [0.0, 2.0, 1.0, 0.0]])
    assert temperature_series(resc, states) == pytest.approx([5.0, 20.0])


def test_domain_guards():
    m = rescaled_model()
    with pytest.raises(ModelDomainError):
        evaluate(m, (0.0, 1.0, -1.0, 0.0))
    with pytest.raises(ModelDomainError):
        vector_field(oscillator_model(), (1.5, 0, 0, 0))


def test_energy_vectorized_matches_scalar():
    for model in (rescaled_model(beta=0.01), nose_like_model(beta=0.01, a=0.2),
                  nose_model(T=3), oscillator_model(0.15)):
        rng = np.random.default_rng(2)
        states = np.column_stack([
            rng.uniform(-0.3, 0.3, 8), rng.uniform(0.8, 1.2, 8),
            rng.uniform(0.8, 1.2, 8), rng.uniform(-0.3, 0.3, 8)])
        if model.kind == "oscillator_G_kappa":
            states = rng.uniform(-0.3, 0.3, (8, 4))
        vec = energy(model, states)
        for row, e in zip(states, vec):
            assert evaluate(model, row) == pytest.approx(float(e), abs=1e-14)


def test_thermostat_normal_form_classical():
    M = 2.5
    nt = thermostat_normal_form(A=lambda s: 1.0 / M, u=lambda s: s, T=1.0)
    assert all(abs(v - 1.0 / M) < 1e-8 for v in nt.omega_values)
    assert nt.equilibrium_residual < 1e-8


def test_thermostat_normal_form_square():
    # u(s) = s^2 with unit A gives Omega_T(u) = 4u by the chain rule
    nt = thermostat_normal_form(A=lambda s: 1.0, u=lambda s: s * s, T=1.0)
    for u_val, om in zip(nt.samples_u, nt.omega_values):
        assert om == pytest.approx(4 * u_val, rel=1e-6)
    assert nt.evaluate(1.0, 2.0) == pytest.approx(0.5 * nt.omega_at(1.0) * 4.0)


def test_thermostat_normal_form_rejects_degenerate():
    with pytest.raises(ModelError):
        thermostat_normal_form(A=lambda s: 0.0, u=lambda s: s)
    with pytest.raises(ModelError):
        thermostat_normal_form(A=lambda s: 1.0, u=lambda s: -s)


def test_model_json_roundtrip():
    m = nose_like_model(beta=0.01, a=0.5, b=-0.25, M=2.0, T=100.0)
    data = model_to_json(m)
    assert data["omega_jet"] == {"a": 0.5, "b": -0.25}
    m2 = model_from_json(data)
    assert m2 == m
    m3 = model_from_json({"kind": "rescaled_F_beta", "beta": 0.01, "M": 1,
                          "T": 100, "potential": {"cos": [1.0], "sin": []}})
    assert m3.kind == "rescaled_F_beta"
    assert m3.potential.cos_coeffs == (1.0,)


def test_unknown_kind_rejected():
    with pytest.raises(ModelError):
        HamiltonianModel("bogus")
