"""The high-temperature experiment grid: section classification, rotation
numbers, and temperature-average convergence per (beta, initial condition)
cell, merged deterministically by grid index."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..models import rescaled_model, temperature_series
from .integrate import ImplicitMidpoint, integrate
from .observables import running_average, tail_oscillation
from .rotation import rotation_number
from .sections import InsufficientDataError, SectionSpec, poincare_section

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GridSpec:
    """The default experiment brackets the high-temperature regime with
    beta in {0, 1e-3, 1e-2, 1e-1} and rings of initial conditions around
    the unit periodic orbit; no claim is made about where tori first break.
    """

    betas: tuple = (0.0, 1e-3, 1e-2, 1e-1)
    radii: tuple = (0.05, 0.1, 0.2)
    n_angles: int = 8
    n_section_points: int = 96
    dt: float = 1e-3
    average_time: float = 20000.0
    M: float = 1.0

    def cells(self):
        out = []
        for beta in self.betas:
            for radius in self.radii:
                for j in range(self.n_angles):
                    angle = TWO_PI * j / self.n_angles
                    out.append({"beta": beta, "radius": radius,
                                "angle_index": j, "angle": angle})
        return out


def xi1_initial_condition(radius: float, angle: float = 0.0):
    """A state offset from the unit periodic orbit (sigma = W = 1,
    Sigma = 0) by the given radius in the (sigma, Sigma) plane."""
    return (0.0, 1.0, 1.0 + radius * math.cos(angle),
            radius * math.sin(angle))


def run_cell(cell, spec: GridSpec) -> dict:
    model = rescaled_model(beta=cell["beta"], M=spec.M)
    ic = xi1_initial_condition(cell["radius"], cell["angle"])
    out = dict(cell)
    try:
        record = poincare_section(model, ic, SectionSpec(),
                                  n_points=spec.n_section_points, dt=spec.dt)
    except InsufficientDataError as exc:
        out.update(classification="insufficient-data", residual=None,
                   rotation=None, rotation_uncertainty=None, error=str(exc))
        return out
    out["classification"] = record.classification
    out["residual"] = record.residual
    out["section_points"] = len(record.times)
    out["termination"] = record.termination
    if record.classification == "curve" and len(record.times) >= 64:
        est, unc = rotation_number(record)
        out["rotation"] = est
        out["rotation_uncertainty"] = unc
    else:
        out["rotation"] = None
        out["rotation_uncertainty"] = None

    traj = integrate(model, ic, spec.average_time,
                     ImplicitMidpoint(spec.dt), record_every=100)
    # temperature averages in units of T: beta-independent convergence figure
    values = temperature_series(model, traj.states) / model.temperature
    avg = running_average(traj.times, values)
    out["temperature_average"] = float(avg[-1])
    out["temperature_tail_oscillation"] = tail_oscillation(traj.times, avg)
    out["energy_drift"] = traj.energy_drift()
    out["exit_reason"] = traj.exit_reason
    return out


def run_grid(spec: GridSpec = GridSpec(), workers: int = 1) -> dict:
    """Run every grid cell (optionally in parallel; the kernel releases the
    GIL) and merge results by cell index, so the report is deterministic."""
    cells = spec.cells()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: run_cell(c, spec), cells))
    else:
        results = [run_cell(c, spec) for c in cells]

    summary = {}
    for beta in spec.betas:
        rows = [r for r in results if r["beta"] == beta]
        curves = sum(1 for r in rows if r["classification"] == "curve")
        summary[repr(beta)] = {
            "cells": len(rows),
            "curve": curves,
            "curve_fraction": curves / len(rows) if rows else None,
        }
    return {"spec": {
                "betas": list(spec.betas), "radii": list(spec.radii),
                "n_angles": spec.n_angles,
                "n_section_points": spec.n_section_points, "dt": spec.dt,
                "average_time": spec.average_time, "M": spec.M},
            "cells": results,
            "summary": summary}
