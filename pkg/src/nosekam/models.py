"""Catalog of the thermostated Hamiltonians and the reduced oscillator ODE.

State vectors interleave coordinate/momentum pairs:

* ``rescaled_F_beta`` / ``nose_like``: (w, W, sigma, Sigma), sigma > 0
* ``nose_full``: (q, p, s, p_s), s > 0
* ``oscillator_G_kappa``: (u, U, v, V), u < 1
* ``nose_hoover_reduced``: (q, rho, xi), the non-symplectic reduction of the
  thermostated harmonic oscillator

Potentials are finite trigonometric polynomials, so every Hamiltonian here
is smooth and 2 pi periodic in the angle variable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

KINDS = ("rescaled_F_beta", "nose_like", "nose_full", "oscillator_G_kappa",
         "nose_hoover_reduced")

KIND_IDS = {k: i for i, k in enumerate(
    ("rescaled_F_beta", "nose_like", "oscillator_G_kappa", "nose_full",
     "nose_hoover_reduced"))}


class ModelError(Exception):
    pass


class ModelDomainError(ModelError):
    """State outside the model's domain (nonpositive scale variable)."""


@dataclass(frozen=True)
class TrigPotential:
    """V(x) = sum_k c_k cos(kx) + s_k sin(kx), k = 1..K; smooth and
    2 pi periodic, so arbitrarily many derivatives exist."""

    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(s) for s in self.sin_coeffs))

    @classmethod
    def cosine(cls):
        return cls((1.0,), ())

    @classmethod
    def zero(cls):
        return cls((), ())

    def __call__(self, x):
        out = 0.0 * np.asarray(x, dtype=float)
        for k, c in enumerate(self.cos_coeffs, start=1):
            out = out + c * np.cos(k * np.asarray(x))
        for k, s in enumerate(self.sin_coeffs, start=1):
            out = out + s * np.sin(k * np.asarray(x))
        if np.ndim(x) == 0:
            return float(out)
        return out

    def deriv(self, x):
        out = 0.0 * np.asarray(x, dtype=float)
        for k, c in enumerate(self.cos_coeffs, start=1):
            out = out - c * k * np.sin(k * np.asarray(x))
        for k, s in enumerate(self.sin_coeffs, start=1):
            out = out + s * k * np.cos(k * np.asarray(x))
        if np.ndim(x) == 0:
            return float(out)
        return out

    def is_zero(self):
        return not any(self.cos_coeffs) and not any(self.sin_coeffs)


@dataclass(frozen=True)
class HamiltonianModel:
    """A named model with parameters; immutable and cheap to copy."""

    kind: str
    beta: float = 0.0
    M: float = 1.0
    T: float | None = None
    kappa: float = 0.1
    omega_a: float = 0.0
    omega_b: float = 0.0
    potential: TrigPotential = field(default_factory=TrigPotential.zero)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}")
        if self.M <= 0:
            raise ModelError("thermostat mass must be positive")

    @property
    def eps(self) -> float:
        return 1.0 / math.sqrt(self.M)

    @property
    def temperature(self) -> float:
        """The temperature used by the observable: T when given, else
        1/beta, else 1 (the beta = 0 limit has no intrinsic scale)."""
        if self.T is not None:
            return float(self.T)
        if self.beta > 0:
            return 1.0 / self.beta
        return 1.0

    @property
    def dim(self) -> int:
        return 3 if self.kind == "nose_hoover_reduced" else 4

    @property
    def state_names(self):
        return {
            "rescaled_F_beta": ("w", "W", "sigma", "Sigma"),
            "nose_like": ("w", "W", "sigma", "Sigma"),
            "nose_full": ("q", "p", "s", "ps"),
            "oscillator_G_kappa": ("u", "U", "v", "V"),
            "nose_hoover_reduced": ("q", "rho", "xi"),
        }[self.kind]

    def omega(self, sigma):
        s1 = sigma - 1.0
        return 1.0 + self.omega_a * s1 + 0.5 * self.omega_b * s1 * s1

    def omega_deriv(self, sigma):
        return self.omega_a + self.omega_b * (sigma - 1.0)

    def in_domain(self, state) -> bool:
        if self.kind in ("rescaled_F_beta", "nose_like"):
            ok = state[2] > 0
            if ok and self.kind == "nose_like":
                ok = self.omega(state[2]) > 0
            return bool(ok)
        if self.kind == "nose_full":
            return bool(state[2] > 0)
        if self.kind == "oscillator_G_kappa":
            return bool(state[0] < 1)
        return True


def rescaled_model(beta=0.0, M=1.0, potential=None, T=None) -> HamiltonianModel:
    return HamiltonianModel("rescaled_F_beta", beta=float(beta), M=float(M),
                            T=T, potential=potential or TrigPotential.cosine())


def nose_like_model(beta=0.0, a=0.0, b=0.0, M=1.0, potential=None, T=None):
    return HamiltonianModel("nose_like", beta=float(beta), M=float(M), T=T,
                            omega_a=float(a), omega_b=float(b),
                            potential=potential or TrigPotential.cosine())


def nose_model(M=1.0, T=1.0, potential=None) -> HamiltonianModel:
    return HamiltonianModel("nose_full", M=float(M), T=float(T),
                            beta=1.0 / float(T),
                            potential=potential or TrigPotential.cosine())


def oscillator_model(kappa=0.1) -> HamiltonianModel:
    return HamiltonianModel("oscillator_G_kappa", kappa=float(kappa))


def nose_hoover_model(T=1.0, M=1.0) -> HamiltonianModel:
    return HamiltonianModel("nose_hoover_reduced", T=float(T), M=float(M))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def evaluate(model: HamiltonianModel, state) -> float:
    """The Hamiltonian value; for the reduced oscillator ODE this is the
    stationary-measure exponent H + M xi^2/2, which is not conserved."""
    if not model.in_domain(state):
        raise ModelDomainError(f"state {tuple(state)} outside domain of {model.kind}")
    if model.kind in ("rescaled_F_beta", "nose_like"):
        w, W, sigma, Sigma = state
        kin = 0.5 * (W / sigma) ** 2
        therm = 0.5 * Sigma * Sigma
        if model.kind == "nose_like":
            therm *= model.omega(sigma)
        pot = model.beta * model.potential(w / model.eps) if model.beta else 0.0
        return kin + therm + pot + math.log(sigma)
    if model.kind == "nose_full":
        q, p, s, ps = state
        T = model.temperature
        return (0.5 * (p / s) ** 2 + model.potential(q)
                + ps * ps / (2 * model.M) + T * math.log(s))
    if model.kind == "oscillator_G_kappa":
        u, U, v, V = state
        d = 1.0 - u
        A = U - 0.5 * v * V / d
        return ((v * v + V * V) / (2 * d)
                + model.kappa * (0.5 * A * A + math.log(d)))
    q, rho, xi = state
    return 0.5 * rho * rho + 0.5 * q * q + 0.5 * model.M * xi * xi


def energy(model: HamiltonianModel, states: np.ndarray) -> np.ndarray:
    """Vectorized Hamiltonian over an (N, dim) array of states."""
    s = np.asarray(states, dtype=float)
    if model.kind in ("rescaled_F_beta", "nose_like"):
        w, W, sigma, Sigma = s[:, 0], s[:, 1], s[:, 2], s[:, 3]
        therm = 0.5 * Sigma ** 2
        if model.kind == "nose_like":
            s1 = sigma - 1.0
            therm = therm * (1.0 + model.omega_a * s1 + 0.5 * model.omega_b * s1 ** 2)
        out = 0.5 * (W / sigma) ** 2 + therm + np.log(sigma)
        if model.beta:
            out = out + model.beta * model.potential(w / model.eps)
        return out
    if model.kind == "nose_full":
        q, p, ss, ps = s[:, 0], s[:, 1], s[:, 2], s[:, 3]
        return (0.5 * (p / ss) ** 2 + model.potential(q)
                + ps ** 2 / (2 * model.M) + model.temperature * np.log(ss))
    if model.kind == "oscillator_G_kappa":
        u, U, v, V = s[:, 0], s[:, 1], s[:, 2], s[:, 3]
        d = 1.0 - u
        A = U - 0.5 * v * V / d
        return (v ** 2 + V ** 2) / (2 * d) + model.kappa * (0.5 * A ** 2 + np.log(d))
    q, rho, xi = s[:, 0], s[:, 1], s[:, 2]
    return 0.5 * rho ** 2 + 0.5 * q ** 2 + 0.5 * model.M * xi ** 2


def vector_field(model: HamiltonianModel, state) -> np.ndarray:
    """Canonical equations (q dot = dH/dp, p dot = -dH/dq) specialized per
    kind; the reduced oscillator returns its first-order ODE right-hand side.
    """
    if not model.in_domain(state):
        raise ModelDomainError(f"state {tuple(state)} outside domain of {model.kind}")
    if model.kind in ("rescaled_F_beta", "nose_like"):
        w, W, sigma, Sigma = state
        inv = 1.0 / sigma
        dw = W * inv * inv
        dW = (-model.beta / model.eps * model.potential.deriv(w / model.eps)
              if model.beta else 0.0)
        if model.kind == "nose_like":
            om = model.omega(sigma)
            dsigma = om * Sigma
            dSigma = (W * W * inv ** 3 - inv
                      - 0.5 * model.omega_deriv(sigma) * Sigma * Sigma)
        else:
            dsigma = Sigma
            dSigma = W * W * inv ** 3 - inv
        return np.array([dw, dW, dsigma, dSigma])
    if model.kind == "nose_full":
        q, p, s, ps = state
        inv = 1.0 / s
        return np.array([
            p * inv * inv,
            -model.potential.deriv(q),
            ps / model.M,
            p * p * inv ** 3 - model.temperature * inv,
        ])
    if model.kind == "oscillator_G_kappa":
        u, U, v, V = state
        k = model.kappa
        inv = 1.0 / (1.0 - u)
        A = U - 0.5 * v * V * inv
        du = k * A
        dU = -(0.5 * (v * v + V * V) * inv * inv
               - 0.5 * k * A * v * V * inv * inv - k * inv)
        dv = V * inv - 0.5 * k * A * v * inv
        dV = -v * inv + 0.5 * k * A * V * inv
        return np.array([du, dU, dv, dV])
    q, rho, xi = state
    return np.array([rho, -q - xi * rho, (rho * rho - model.temperature) / model.M])


def temperature_observable(model: HamiltonianModel, state) -> float:
    """The kinetic temperature |p/s|^2 in the model's own variables."""
    if model.kind == "nose_full":
        q, p, s, ps = state
        if s <= 0:
            raise ModelDomainError("temperature needs s > 0")
        return (p / s) ** 2
    if model.kind in ("rescaled_F_beta", "nose_like"):
        w, W, sigma, Sigma = state
        if sigma <= 0:
            raise ModelDomainError("temperature needs sigma > 0")
        return model.temperature * (W / sigma) ** 2
    if model.kind == "nose_hoover_reduced":
        return state[1] ** 2
    raise ModelError(f"no temperature observable for {model.kind}")


def temperature_series(model: HamiltonianModel, states: np.ndarray) -> np.ndarray:
    s = np.asarray(states, dtype=float)
    if model.kind == "nose_full":
        return (s[:, 1] / s[:, 2]) ** 2
    if model.kind in ("rescaled_F_beta", "nose_like"):
        return model.temperature * (s[:, 1] / s[:, 2]) ** 2
    if model.kind == "nose_hoover_reduced":
        return s[:, 1] ** 2
    raise ModelError(f"no temperature observable for {model.kind}")


# ---------------------------------------------------------------------------
# thermostat normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedThermostat:
    """A momentum-rescaling thermostat brought to the form
    (1/2) Omega_T(u) p_u^2 + T ln u by the change of variables s -> u."""

    T: float
    samples_s: tuple
    samples_u: tuple
    omega_values: tuple
    equilibrium_residual: float

    def omega_at(self, u_value: float) -> float:
        return float(np.interp(u_value, self.samples_u, self.omega_values))

    def evaluate(self, u_value: float, p_u: float) -> float:
        if u_value <= 0:
            raise ModelDomainError("normalized thermostat needs u > 0")
        return 0.5 * self.omega_at(u_value) * p_u ** 2 + self.T * math.log(u_value)


def thermostat_normal_form(A, u, T: float = 1.0,
                           samples: Sequence[float] | None = None,
                           h: float = 1e-6) -> NormalizedThermostat:
    """Normalize N(s, p_s) = (1/2) A(s) p_s^2 + T ln u(s).

    Checks that A > 0 (N increasing and homogeneous quadratic in p_s) and
    that u is increasing, computes Omega_T = A (u')^2 on the sample grid,
    and verifies the thermodynamic-equilibrium identity: at p_s = 0 the
    fibre-derivative constant N_1 u/u' equals T independently of s.
    """
    if samples is None:
        samples = tuple(0.4 + 0.2 * i for i in range(9))
    samples = tuple(float(s) for s in samples)
    omega_vals = []
    u_vals = []
    worst = 0.0
    for s in samples:
        a_val = float(A(s))
        if a_val <= 0:
            raise ModelError("thermostat is not increasing in p_s (A <= 0)")
        du = (float(u(s + h)) - float(u(s - h))) / (2 * h)
        if du <= 0:
            raise ModelError("u is not an increasing diffeomorphism")
        u_val = float(u(s))
        if u_val <= 0:
            raise ModelError("u must take positive values")
        omega_vals.append(a_val * du * du)
        u_vals.append(u_val)
        # N_1 at p_s = 0 is T (ln u)' = T u'/u; the equilibrium constant
        # N_1 u / u' must equal T for every s
        n1 = T * du / u_val
        worst = max(worst, abs(n1 * u_val / du - T))
    if any(b <= a for a, b in zip(u_vals, u_vals[1:])):
        raise ModelError("u is not an increasing diffeomorphism")
    return NormalizedThermostat(T, samples, tuple(u_vals), tuple(omega_vals),
                                worst)


# ---------------------------------------------------------------------------
# kernel parameter packing and serialization
# ---------------------------------------------------------------------------


def pack_params(model: HamiltonianModel):
    """(kind_id, float64 parameter vector) consumed by the integration
    kernels; the layout is mirrored in the compiled and pure backends."""
    kid = KIND_IDS[model.kind]
    pot = model.potential
    K = max(len(pot.cos_coeffs), len(pot.sin_coeffs))
    cos = list(pot.cos_coeffs) + [0.0] * (K - len(pot.cos_coeffs))
    sin = list(pot.sin_coeffs) + [0.0] * (K - len(pot.sin_coeffs))
    if model.kind == "rescaled_F_beta":
        params = [model.beta, 1.0 / model.eps, float(K)] + cos + sin
    elif model.kind == "nose_like":
        params = [model.beta, 1.0 / model.eps, model.omega_a, model.omega_b,
                  float(K)] + cos + sin
    elif model.kind == "oscillator_G_kappa":
        params = [model.kappa]
    elif model.kind == "nose_full":
        params = [model.M, model.temperature, float(K)] + cos + sin
    else:
        params = [model.M, model.temperature]
    return kid, np.asarray(params, dtype=float)


def model_to_json(model: HamiltonianModel) -> dict:
    out = {"kind": model.kind, "beta": model.beta, "M": model.M,
           "potential": {"cos": list(model.potential.cos_coeffs),
                         "sin": list(model.potential.sin_coeffs)}}
    if model.T is not None:
        out["T"] = model.T
    if model.kind == "oscillator_G_kappa":
        out["kappa"] = model.kappa
    if model.kind == "nose_like":
        out["omega_jet"] = {"a": model.omega_a, "b": model.omega_b}
    return out


def model_from_json(data) -> HamiltonianModel:
    if isinstance(data, str):
        data = json.loads(data)
    pot = data.get("potential", {})
    potential = TrigPotential(tuple(pot.get("cos", ())), tuple(pot.get("sin", ())))
    omega = data.get("omega_jet", {})
    return HamiltonianModel(
        kind=data["kind"],
        beta=float(data.get("beta", 0.0)),
        M=float(data.get("M", 1.0)),
        T=(float(data["T"]) if "T" in data and data["T"] is not None else None),
        kappa=float(data.get("kappa", 0.1)),
        omega_a=float(omega.get("a", 0.0)),
        omega_b=float(omega.get("b", 0.0)),
        potential=potential)
