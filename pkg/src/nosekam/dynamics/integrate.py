"""Trajectory integration: implicit midpoint and an embedded RK pair.

The implicit midpoint rule is the workhorse for the rescaled Hamiltonians
(non-separable, so explicit symplectic splittings do not apply); the
embedded fifth-order pair with PI step control serves the reduced oscillator
ODE and cross-checks the midpoint results.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models import HamiltonianModel, energy as model_energy, pack_params
from .backend import kernels


class IntegrationError(Exception):
    pass


class StageSolveError(IntegrationError):
    """The implicit stage equation could not be solved."""


@dataclass(frozen=True)
class ImplicitMidpoint:
    dt: float = 1e-3
    name: str = "implicit_midpoint"


@dataclass(frozen=True)
class EmbeddedRK:
    tol: float = 1e-10
    dt_init: float = 1e-3
    name: str = "embedded_rk"


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray | None
    model: HamiltonianModel
    method: str
    step_or_tol: float
    exit_reason: str | None = None

    @property
    def complete(self) -> bool:
        return self.exit_reason is None

    def energy_drift(self) -> float:
        if self.energies is None or len(self.energies) == 0:
            raise IntegrationError("trajectory has no energies")
        return float(np.max(np.abs(self.energies - self.energies[0])))


def _newton_midpoint_step(kind, params, y, dt, tol=1e-13, max_iter=25):
    """Newton fallback for the midpoint stage equation
    g(m) = m - y - (dt/2) f(m) = 0 with a finite-difference Jacobian."""
    dim = len(y)
    m = np.array(y, dtype=float)
    scale = np.maximum(np.abs(y), 1.0)
    h = 1e-7
    for _ in range(max_iter):
        st, f = kernels.rhs_eval(kind, params, m)
        if st:
            return st, m
        g = m - y - 0.5 * dt * f
        if np.all(np.abs(g) <= tol * scale):
            return 0, 2.0 * m - y
        jac = np.eye(dim)
        for j in range(dim):
            mp = m.copy(); mm = m.copy()
            mp[j] += h; mm[j] -= h
            stp, fp = kernels.rhs_eval(kind, params, mp)
            stm, fm = kernels.rhs_eval(kind, params, mm)
            if stp or stm:
                return stp or stm, m
            jac[:, j] -= 0.5 * dt * (fp - fm) / (2 * h)
        try:
            m = m - np.linalg.solve(jac, g)
        except np.linalg.LinAlgError:
            return 2, m
    return 2, m


def midpoint_step(model: HamiltonianModel, y, dt: float):
    """One implicit midpoint step with Newton fallback; raises on domain
    exit or an unsolvable stage equation."""
    kind, params = pack_params(model)
    y = np.asarray(y, dtype=float)
    st, out = kernels.midpoint_step(kind, params, y, dt)
    if st == 2:
        st, out = _newton_midpoint_step(kind, params, y, dt)
    if st == 1:
        raise IntegrationError("domain exit during step")
    if st == 2:
        raise StageSolveError("stage equation did not converge")
    return out


def integrate(model: HamiltonianModel, ic, t_end: float,
              method=ImplicitMidpoint(), record_every: int = 1) -> Trajectory:
    """Integrate from ic to t_end; trajectories are sampled every
    record_every-th step (midpoint) or at accepted steps (embedded pair).

    A domain exit truncates the trajectory and sets exit_reason instead of
    raising, so callers can inspect the partial orbit.
    """
    if isinstance(method, EmbeddedRK):
        return _integrate_rk(model, ic, t_end, method, record_every)
    dt = float(method.dt)
    if dt <= 0:
        raise IntegrationError("dt must be positive")
    kind, params = pack_params(model)
    n_steps = int(round(t_end / dt))
    y = np.array(ic, dtype=float)
    dim = len(y)

    rec_states = [y.copy()]
    rec_steps = [0]
    done = 0
    exit_reason = None
    while done < n_steps:
        chunk_start = done
        remaining = n_steps - done
        cap = remaining // record_every + 1
        out = np.empty((cap, dim))
        st, steps, nrec = kernels.midpoint_run(kind, params, y, dt, remaining,
                                               record_every, out)
        for r in range(nrec):
            rec_states.append(out[r].copy())
            rec_steps.append(chunk_start + (r + 1) * record_every)
        done += steps
        if st == 0:
            break
        if st == 1:
            exit_reason = "domain-exit"
            break
        # stage solve stalled: one Newton step, then resume
        stn, ynew = _newton_midpoint_step(kind, params, y, dt)
        if stn == 1:
            exit_reason = "domain-exit"
            break
        if stn == 2:
            exit_reason = "stage-solve-failed"
            break
        y[:] = ynew
        done += 1
        rec_states.append(y.copy())
        rec_steps.append(done)

    if rec_steps[-1] != done:
        rec_states.append(y.copy())
        rec_steps.append(done)
    states = np.array(rec_states)
    times = np.array(rec_steps, dtype=float) * dt
    energies = None
    if model.kind != "nose_hoover_reduced":
        energies = model_energy(model, states)
    return Trajectory(times, states, energies, model, "implicit_midpoint",
                      dt, exit_reason)


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)


def _integrate_rk(model, ic, t_end, method: EmbeddedRK, record_every):
    """Embedded 5(4) pair with a PI step-size controller."""
    kind, params = pack_params(model)
    tol = float(method.tol)

    def f(y):
        st, dy = kernels.rhs_eval(kind, params, y)
        if st:
            raise IntegrationError("domain exit")
        return dy

    y = np.array(ic, dtype=float)
    t = 0.0
    dt = min(float(method.dt_init), t_end)
    times = [0.0]
    states = [y.copy()]
    err_old = 1e-4
    exit_reason = None
    safety, alpha, beta_exp = 0.9, 0.7 / 5, 0.4 / 5
    accepted = 0
    try:
        while t < t_end - 1e-14:
            dt = min(dt, t_end - t)
            k = [f(y)]
            for i in range(1, 7):
                yi = y + dt * sum(a * kk for a, kk in zip(_DP_A[i], k))
                k.append(f(yi))
            y5 = y + dt * sum(b * kk for b, kk in zip(_DP_B5, k))
            y4 = y + dt * sum(b * kk for b, kk in zip(_DP_B4, k))
            scale = tol + tol * np.maximum(np.abs(y), np.abs(y5))
            err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
            if err <= 1.0:
                t += dt
                y = y5
                accepted += 1
                if accepted % max(record_every, 1) == 0 or t >= t_end - 1e-14:
                    times.append(t)
                    states.append(y.copy())
                factor = safety * (err + 1e-16) ** (-alpha) * err_old ** beta_exp
                err_old = max(err, 1e-4)
            else:
                factor = safety * (err + 1e-16) ** (-0.2)
            dt *= min(5.0, max(0.2, factor))
            if dt < 1e-14:
                raise IntegrationError("step size underflow")
    except IntegrationError as exc:
        exit_reason = str(exc) or "domain-exit"

    states = np.array(states)
    times_arr = np.array(times)
    energies = None
    if model.kind != "nose_hoover_reduced":
        energies = model_energy(model, states)
    return Trajectory(times_arr, states, energies, model, "embedded_rk",
                      tol, exit_reason)
