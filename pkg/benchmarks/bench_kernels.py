#!/usr/bin/env python3
"""Benchmark the compiled integration kernel against the pure-Python mirror.

Both backends implement the identical arithmetic, so besides timing the
script also asserts the trajectories agree bit for bit.

Usage: python benchmarks/bench_kernels.py [n_steps]
"""
import sys
import time

import numpy as np

from nosekam.dynamics import backend_name
from nosekam.dynamics import pure
from nosekam.models import pack_params, rescaled_model

try:
    from nosekam import _core as compiled
except ImportError:
    compiled = None


def run(kernel, kind, params, ic, dt, n_steps):
    y = np.array(ic, dtype=float)
    out = np.empty((1, 4))
    start = time.perf_counter()
    status, steps, _ = kernel.midpoint_run(kind, params, y, dt, n_steps, 0, out)
    elapsed = time.perf_counter() - start
    assert status == 0 and steps == n_steps
    return elapsed, y


def main():
    n_steps = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    model = rescaled_model(beta=1e-2)
    kind, params = pack_params(model)
    ic = (0.0, 1.0, 1.1, 0.0)
    dt = 1e-3

    print(f"implicit midpoint, {model.kind}, beta={model.beta}, "
          f"dt={dt}, {n_steps} steps (default backend: {backend_name()})")

    t_pure, y_pure = run(pure, kind, params, ic, dt, n_steps)
    print(f"  pure     : {t_pure:8.3f} s   {n_steps / t_pure:12.0f} steps/s")

    if compiled is None:
        print("  compiled : unavailable (pure-only build)")
        return

    t_comp, y_comp = run(compiled, kind, params, ic, dt, n_steps)
    print(f"  compiled : {t_comp:8.3f} s   {n_steps / t_comp:12.0f} steps/s")
    print(f"  speedup  : {t_pure / t_comp:8.1f} x")
    if np.array_equal(y_pure, y_comp):
        print("  final states bit-identical: yes")
    else:
        print(f"  WARNING: backends disagree: {y_pure} vs {y_comp}")
        sys.exit(1)


if __name__ == "__main__":
    main()
