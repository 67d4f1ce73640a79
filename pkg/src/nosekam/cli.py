"""Batch front door: verification suite, normal-form solves, simulations,
section/rotation/ergodicity experiments, and the averaging pipeline.

Configuration can come from a JSON file (--config); explicit flags override
config fields, which override built-in defaults.  Rational-valued flags
accept exact "p/q" strings.  Exit codes: 0 success, 1 verification failure,
2 usage or configuration error, 3 runtime domain error.
"""
from __future__ import annotations

import datetime
import json
import math
import os
import sys
import tempfile
from fractions import Fraction

import click
import numpy as np

from . import fixtures
from .averaging import (averaged_oscillator, critical_fast_energy,
                        discrepancies, maclaurin_expand,
                        scaled_by_inverse_coupling)
from .canonical import DomainError, builtin_maps, symplectic_check
from .dynamics import (EmbeddedRK, ImplicitMidpoint, IntegrationError,
                       SectionSpec, backend_name, birkhoff_temperature,
                       integrate, poincare_section, rotation_number,
                       run_grid, tail_oscillation, xi1_initial_condition)
from .dynamics.experiments import GridSpec
from .averaging import AveragingError
from .dynamics.sections import SectionError
from .models import (ModelDomainError, ModelError,
                     model_from_json, model_to_json, nose_hoover_model,
                     nose_like_model, nose_model, oscillator_model,
                     rescaled_model, temperature_series)
from .normal_form import (NormalFormError, bnf_oscillator, hatG_normal_form,
                          nose_like_normal_form, nose_normal_form)
from .verify import discrepancy_markdown, run_checks

EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

RUNTIME_ERRORS = (DomainError, ModelDomainError, ModelError,
                  IntegrationError, SectionError, NormalFormError,
                  AveragingError)


def _rat(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise click.UsageError(f"not an exact rational: {text!r}")


def _rat_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nosekam-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _timestamp_line(no_timestamp: bool) -> str:
    if no_timestamp:
        return ""
    return f"# generated {datetime.datetime.now().isoformat()}\n"


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError("config must be a JSON object")
    return data


def _merged(config, key, flag_value, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _build_model(config, model, beta, M, T, kappa, a, b):
    name = _merged(config, "model", model, "rescaled")
    if isinstance(name, dict):
        return model_from_json(name)
    beta = float(_merged(config, "beta", beta, 0.0))
    M = float(_merged(config, "M", M, 1.0))
    T = _merged(config, "T", T, None)
    T = float(T) if T is not None else None
    kappa = float(_merged(config, "kappa", kappa, 0.1))
    a = float(_merged(config, "a", a, 0.0))
    b = float(_merged(config, "b", b, 0.0))
    if name in ("rescaled", "rescaled_F_beta"):
        return rescaled_model(beta=beta, M=M, T=T)
    if name in ("nose-like", "nose_like"):
        return nose_like_model(beta=beta, a=a, b=b, M=M, T=T)
    if name in ("nose", "nose_full"):
        return nose_model(M=M, T=T if T is not None else 1.0)
    if name in ("oscillator", "oscillator_G_kappa"):
        return oscillator_model(kappa=kappa)
    if name in ("nose-hoover", "nose_hoover_reduced"):
        return nose_hoover_model(T=T if T is not None else 1.0, M=M)
    raise click.UsageError(f"unknown model {name!r}")


def _parse_ic(text, model):
    if text is None:
        text = "near-xi1"
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    text = str(text)
    if text.startswith("near-xi1"):
        parts = text.split(":")
        radius = float(parts[1]) if len(parts) > 1 else 0.1
        angle = float(parts[2]) if len(parts) > 2 else 0.0
        return xi1_initial_condition(radius, angle)
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise click.UsageError(f"cannot parse initial condition {text!r}")
    if len(values) != model.dim:
        raise click.UsageError(
            f"initial condition needs {model.dim} components")
    return values


@click.group()
@click.version_option(package_name="nosekam")
def main():
    """Exact thermostat normal forms and KAM-tori diagnostics."""


@main.command()
@click.option("--filter", "name_filter", default=None,
              help="run only checks whose name contains this substring")
@click.option("--out", "out_dir", default=None, type=click.Path(),
              help="directory for report.txt and DISCREPANCIES.md")
@click.option("--no-timestamp", is_flag=True, default=False)
def verify(name_filter, out_dir, no_timestamp):
    """Run every exact-arithmetic golden check; exit 0 iff all pass."""
    results = run_checks(name_filter)
    if not results:
        raise click.UsageError(f"no checks match filter {name_filter!r}")
    lines = []
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        line = f"{status} {r.name}" + (f"  [{r.detail}]" if r.detail else "")
        lines.append(line)
        click.echo(line)
    n_fail = sum(1 for r in results if not r.ok)
    summary = f"{len(results) - n_fail}/{len(results)} checks passed"
    lines.append(summary)
    click.echo(summary)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _atomic_write(os.path.join(out_dir, "report.txt"),
                      _timestamp_line(no_timestamp) + "\n".join(lines) + "\n")
        _atomic_write(os.path.join(out_dir, "DISCREPANCIES.md"),
                      discrepancy_markdown())
    if n_fail:
        sys.exit(EXIT_VERIFY_FAILED)


_model_options = [
    click.option("--config", "config_path", default=None, type=click.Path()),
    click.option("--model", default=None,
                 help="rescaled | nose-like | nose | oscillator | nose-hoover"),
    click.option("--beta", default=None, type=float),
    click.option("--M", "M", default=None, type=float),
    click.option("--T", "T", default=None, type=float),
    click.option("--kappa-float", "kappa", default=None, type=float),
    click.option("--a", default=None, type=float),
    click.option("--b", default=None, type=float),
    click.option("--no-timestamp", is_flag=True, default=False),
]


def model_options(fn):
    for opt in reversed(_model_options):
        fn = opt(fn)
    return fn


@main.command()
@model_options
@click.option("--ic", default=None, help="near-xi1[:radius[:angle]] or comma floats")
@click.option("--t-end", default=None, type=float)
@click.option("--dt", default=None, type=float)
@click.option("--tol", default=None, type=float,
              help="use the embedded pair at this tolerance instead of midpoint")
@click.option("--record-every", default=None, type=int)
@click.option("--out", default=None, type=click.Path())
def simulate(config_path, model, beta, M, T, kappa, a, b, no_timestamp,
             ic, t_end, dt, tol, record_every, out):
    """Integrate one trajectory and write t, state, energy as CSV."""
    config = _load_config(config_path)
    mdl = _build_model(config, model, beta, M, T, kappa, a, b)
    ic_val = _parse_ic(_merged(config, "ic", ic, None), mdl)
    t_end = float(_merged(config, "t_end", t_end, 100.0))
    record_every = int(_merged(config, "record_every", record_every, 10))
    tol = _merged(config, "tol", tol, None)
    if tol is not None:
        method = EmbeddedRK(float(tol))
    else:
        method = ImplicitMidpoint(float(_merged(config, "dt", dt, 1e-3)))
    try:
        traj = integrate(mdl, ic_val, t_end, method, record_every=record_every)
    except RUNTIME_ERRORS as exc:
        click.echo(json.dumps({"error": str(exc)}))
        sys.exit(EXIT_RUNTIME)
    names = mdl.state_names
    rows = [_timestamp_line(no_timestamp)
            + "t," + ",".join(names) + ",energy"]
    energies = traj.energies if traj.energies is not None else [math.nan] * len(traj.times)
    for t, state, e in zip(traj.times, traj.states, energies):
        rows.append(f"{t:.17g}," + ",".join(f"{x:.17g}" for x in state)
                    + f",{e:.17g}")
    text = "\n".join(rows) + "\n"
    if out:
        _atomic_write(out, text)
        click.echo(json.dumps({"written": out, "points": len(traj.times),
                               "exit_reason": traj.exit_reason}))
    else:
        click.echo(text, nl=False)


@main.command()
@model_options
@click.option("--ic", default=None)
@click.option("--n-points", default=None, type=int)
@click.option("--dt", default=None, type=float)
@click.option("--coord", default=None, type=click.Choice(["w", "Sigma"]))
@click.option("--level", default=None, type=float)
@click.option("--out", default=None, type=click.Path(),
              help="section CSV path; a JSON report goes to stdout")
def poincare(config_path, model, beta, M, T, kappa, a, b, no_timestamp,
             ic, n_points, dt, coord, level, out):
    """Collect a Poincare section and classify it."""
    config = _load_config(config_path)
    mdl = _build_model(config, model, beta, M, T, kappa, a, b)
    ic_val = _parse_ic(_merged(config, "ic", ic, None), mdl)
    spec = SectionSpec(coord=_merged(config, "coord", coord, "w"),
                       level=float(_merged(config, "level", level, 0.0)))
    n_points = int(_merged(config, "n_points", n_points, 96))
    dt = float(_merged(config, "dt", dt, 1e-3))
    try:
        record = poincare_section(mdl, ic_val, spec, n_points=n_points, dt=dt)
    except RUNTIME_ERRORS as exc:
        click.echo(json.dumps({"error": str(exc)}))
        sys.exit(EXIT_RUNTIME)
    if out:
        rows = [_timestamp_line(no_timestamp)
                + "index," + ",".join(record.point_names) + ",time"]
        for i, (pt, t) in enumerate(zip(record.points, record.times)):
            rows.append(f"{i}," + ",".join(f"{x:.17g}" for x in pt)
                        + f",{t:.17g}")
        _atomic_write(out, "\n".join(rows) + "\n")
    report = {
        "model": model_to_json(mdl),
        "section": {"coord": spec.coord, "level": spec.level},
        "points": len(record.times),
        "classification": record.classification,
        "residual": record.residual,
        "energy_level": record.energy_level,
        "termination": record.termination,
    }
    if out:
        report["csv"] = out
    click.echo(json.dumps(report, sort_keys=True))


@main.command()
@model_options
@click.option("--ic", default=None)
@click.option("--n-points", default=None, type=int)
@click.option("--dt", default=None, type=float)
def rotation(config_path, model, beta, M, T, kappa, a, b, no_timestamp,
             ic, n_points, dt):
    """Rotation number of the section map for one orbit."""
    config = _load_config(config_path)
    mdl = _build_model(config, model, beta, M, T, kappa, a, b)
    ic_val = _parse_ic(_merged(config, "ic", ic, None), mdl)
    n_points = int(_merged(config, "n_points", n_points, 128))
    dt = float(_merged(config, "dt", dt, 1e-3))
    try:
        record = poincare_section(mdl, ic_val, SectionSpec(),
                                  n_points=n_points, dt=dt)
        est, unc = rotation_number(record)
    except RUNTIME_ERRORS as exc:
        click.echo(json.dumps({"error": str(exc)}))
        sys.exit(EXIT_RUNTIME)
    click.echo(json.dumps({
        "rotation": est, "uncertainty": unc,
        "classification": record.classification,
        "residual": record.residual, "points": len(record.times),
    }, sort_keys=True))


@main.command()
@model_options
@click.option("--ic", default=None)
@click.option("--t-end", default=None, type=float)
@click.option("--dt", default=None, type=float)
def ergodicity(config_path, model, beta, M, T, kappa, a, b, no_timestamp,
               ic, t_end, dt):
    """Birkhoff temperature averages along one orbit (non-ergodicity probe)."""
    config = _load_config(config_path)
    mdl = _build_model(config, model, beta, M, T, kappa, a, b)
    ic_val = _parse_ic(_merged(config, "ic", ic, None), mdl)
    t_end = float(_merged(config, "t_end", t_end, 2000.0))
    dt = float(_merged(config, "dt", dt, 1e-3))
    try:
        traj = integrate(mdl, ic_val, t_end, ImplicitMidpoint(dt),
                         record_every=50)
        avg = birkhoff_temperature(traj)
        normalized = (temperature_series(mdl, traj.states)
                      / mdl.temperature)
        from .dynamics.observables import running_average
        navg = running_average(traj.times, normalized)
    except RUNTIME_ERRORS as exc:
        click.echo(json.dumps({"error": str(exc)}))
        sys.exit(EXIT_RUNTIME)
    click.echo(json.dumps({
        "temperature_average": float(avg[-1]),
        "normalized_average": float(navg[-1]),
        "tail_oscillation": tail_oscillation(traj.times, navg),
        "t_end": t_end,
        "energy_drift": traj.energy_drift(),
    }, sort_keys=True))


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--betas", default=None, help="comma separated")
@click.option("--radii", default=None, help="comma separated")
@click.option("--workers", default=1, type=int)
@click.option("--average-time", default=None, type=float)
@click.option("--n-points", default=None, type=int)
@click.option("--out", default=None, type=click.Path())
@click.option("--no-timestamp", is_flag=True, default=False)
def experiment(config_path, betas, radii, workers, average_time, n_points,
               out, no_timestamp):
    """Run the full high-temperature grid and write the JSON report."""
    config = _load_config(config_path)
    spec = GridSpec()
    betas = _merged(config, "betas", betas, None)
    if betas is not None:
        if isinstance(betas, str):
            betas = tuple(float(x) for x in betas.split(","))
        spec = GridSpec(betas=tuple(betas), radii=spec.radii)
    if radii is not None:
        if isinstance(radii, str):
            radii = tuple(float(x) for x in radii.split(","))
        spec = GridSpec(betas=spec.betas, radii=tuple(radii))
    if average_time is not None:
        spec = GridSpec(betas=spec.betas, radii=spec.radii,
                        average_time=float(average_time))
    if n_points is not None:
        spec = GridSpec(betas=spec.betas, radii=spec.radii,
                        average_time=spec.average_time,
                        n_section_points=int(n_points))
    try:
        report = run_grid(spec, workers=workers)
    except RUNTIME_ERRORS as exc:
        click.echo(json.dumps({"error": str(exc)}))
        sys.exit(EXIT_RUNTIME)
    if not no_timestamp:
        report["generated"] = datetime.datetime.now().isoformat()
    report["backend"] = backend_name()
    text = json.dumps(report, indent=1, sort_keys=True)
    if out:
        _atomic_write(out, text + "\n")
        click.echo(json.dumps({"written": out,
                               "summary": report["summary"]}, sort_keys=True))
    else:
        click.echo(text)


@main.command("normal-form")
@click.option("--model", default="nose",
              type=click.Choice(["nose", "nose-like", "oscillator", "hatg"]))
@click.option("--a", default="0", help="thermostat shape parameter (p/q)")
@click.option("--b", default="0", help="thermostat shape parameter (p/q)")
@click.option("--a3", default="2/3", help="cubic coefficient (p/q)")
@click.option("--a4", default="3/4", help="quartic coefficient (p/q)")
@click.option("--kappa", default="1/10", help="coupling (p/q)")
def normal_form_cmd(model, a, b, a3, a4, kappa):
    """Solve a normal form and print the exact coefficients as JSON."""
    try:
        if model == "nose":
            res = nose_normal_form()
        elif model == "nose-like":
            res = nose_like_normal_form(_rat(a), _rat(b))
        elif model == "oscillator":
            osc = bnf_oscillator(_rat(a3), _rat(a4))
            click.echo(json.dumps({
                "c": _rat_str(osc.c),
                "nu": osc.nu.to_json_dict()["terms"],
                "transformed": osc.transformed.to_json_dict()["terms"],
            }, sort_keys=True))
            return
        else:
            hat = hatG_normal_form(_rat(kappa))
            click.echo(json.dumps({
                "alpha": _rat_str(hat.alpha),
                "beta": _rat_str(hat.beta),
                "gamma": _rat_str(hat.gamma),
                "reduced_j": hat.reduced_j.to_json_dict()["terms"],
                "sign_flip_needed": hat.sign_flip_needed,
                "shear_dropped": hat.shear_dropped,
            }, sort_keys=True))
            return
    except RUNTIME_ERRORS as exc:
        click.echo(json.dumps({"error": str(exc)}))
        sys.exit(EXIT_RUNTIME)
    click.echo(json.dumps({
        "alpha": _rat_str(res.alpha),
        "beta": _rat_str(res.beta),
        "gamma": _rat_str(res.gamma),
        "nu": res.nu.to_json_dict()["terms"],
        "hessian": res.hessian_series.to_json_dict()["terms"],
        "kam_sufficient": res.kam_sufficient,
        "constant": _rat_str(res.constant),
    }, sort_keys=True))


@main.command("average-ho")
@click.option("--kappa", default="1/10", help="coupling (p/q)")
def average_ho(kappa):
    """The averaged oscillator pipeline: averaged jet, slow expansions,
    normal-form coefficient, and the discrepancy log."""
    kap = _rat(kappa)
    if kap == 0:
        raise click.UsageError("kappa must be nonzero")
    gbar = averaged_oscillator()
    scaled = scaled_by_inverse_coupling(gbar)
    t2 = maclaurin_expand(scaled, 2)
    t4 = maclaurin_expand(scaled, 4, constraint="coupling")
    osc = bnf_oscillator(fixtures.OSC_BNF_A3, fixtures.OSC_BNF_A4)
    click.echo(json.dumps({
        "averaged": gbar.to_json_dict(),
        "second_order": t2.to_json_dict()["terms"],
        "fourth_order_at_critical_energy": t4.to_json_dict()["terms"],
        "bnf_coefficient": _rat_str(osc.c * kap),
        "bnf_coefficient_per_action_squared": _rat_str(osc.c),
        "critical_fast_energy": critical_fast_energy(3).to_json_dict()["terms"],
        "discrepancies": [
            {"where": d.where, "printed": d.printed, "computed": d.computed,
             "evidence": d.evidence} for d in discrepancies()],
    }, sort_keys=True))


@main.command()
@click.option("--check", "map_name", default=None,
              help="rescale | polar | fgen | nu | ho-sqrt | flip-u")
@click.option("--points", default=50, type=int)
@click.option("--seed", default=0, type=int)
def maps(map_name, points, seed):
    """Symplecticity check of the built-in canonical maps."""
    catalog = builtin_maps()
    names = [map_name] if map_name else sorted(catalog)
    if map_name and map_name not in catalog:
        raise click.UsageError(f"unknown map {map_name!r}")
    rng = np.random.default_rng(seed)
    out = {}
    for name in names:
        m = catalog[name]()
        if name == "fgen":
            pts = []
            while len(pts) < points:
                u, U, v, V = rng.uniform(-0.4, 0.4, 4)
                if V < 0.5:
                    pts.append((u, U, v, V))
        elif name == "nu":
            pts = rng.uniform(-0.005, 0.005, (points, 4))
        elif name in ("rescale", "polar"):
            pts = rng.uniform(-0.5, 0.5, (points, 4)) + np.array([0, 1, 1.5, 0])
        else:
            pts = rng.uniform(-0.4, 0.4, (points, 4))
        try:
            dev = symplectic_check(m, pts)
        except RUNTIME_ERRORS as exc:
            click.echo(json.dumps({"error": str(exc)}))
            sys.exit(EXIT_RUNTIME)
        out[name] = {"max_deviation": dev, "passed": bool(dev < 1e-7)}
    click.echo(json.dumps(out, sort_keys=True))


if __name__ == "__main__":
    main()
