"""Birkhoff (time) averages of the kinetic temperature along trajectories."""
from __future__ import annotations

import numpy as np

from ..models import temperature_series


class ObservableError(Exception):
    pass


def running_average(times, values) -> np.ndarray:
    """Cumulative trapezoidal time averages A(t_k) = integral/(t_k - t_0);
    A(t_0) is the initial value."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) == 0:
        raise ObservableError("empty trajectory")
    if len(t) == 1:
        return v.copy()
    seg = 0.5 * (v[1:] + v[:-1]) * np.diff(t)
    integral = np.concatenate(([0.0], np.cumsum(seg)))
    span = t - t[0]
    out = np.empty_like(v)
    out[0] = v[0]
    out[1:] = integral[1:] / span[1:]
    return out


def birkhoff_temperature(traj, model=None) -> np.ndarray:
    """Running Birkhoff averages of the temperature observable along a
    trajectory."""
    model = model or traj.model
    values = temperature_series(model, traj.states)
    return running_average(traj.times, values)


def tail_oscillation(times, averages, decade: float = 10.0) -> float:
    """Spread (max - min) of the running average over the last decade of
    time, i.e. for t >= t_end / decade; the Cauchy-tail convergence figure."""
    t = np.asarray(times, dtype=float)
    a = np.asarray(averages, dtype=float)
    if len(t) < 2:
        raise ObservableError("need at least two samples")
    mask = t >= t[-1] / decade
    window = a[mask]
    if len(window) < 2:
        window = a[-2:]
    return float(window.max() - window.min())
