"""Pure-Python fallback kernels.

Statement-for-statement mirror of the compiled extension (nosekam._core);
the arithmetic order is kept identical so both backends produce bit-identical
trajectories.  Used when the extension is unavailable or NOSEKAM_PURE is set.
"""
from __future__ import annotations

import math

import numpy as np

FP_TOL = 1e-13
MAX_FP_ITER = 50


def _rhs(kind, p, y, dy):
    if kind == 0:
        w = y[0]; W = y[1]; sigma = y[2]; Sigma = y[3]
        if sigma <= 1e-9 or not math.isfinite(sigma):
            return 1
        inv = 1.0 / sigma
        beta = p[0]; inv_eps = p[1]; K = int(p[2])
        dy[0] = W * inv * inv
        Vp = 0.0
        if beta != 0.0:
            x = w * inv_eps
            for k in range(K):
                Vp += (k + 1) * (-p[3 + k] * math.sin((k + 1) * x)
                                 + p[3 + K + k] * math.cos((k + 1) * x))
        dy[1] = -beta * inv_eps * Vp
        dy[2] = Sigma
        dy[3] = W * W * inv * inv * inv - inv
        return 0
    elif kind == 1:
        w = y[0]; W = y[1]; sigma = y[2]; Sigma = y[3]
        if sigma <= 1e-9 or not math.isfinite(sigma):
            return 1
        inv = 1.0 / sigma
        beta = p[0]; inv_eps = p[1]; a = p[2]; b = p[3]; K = int(p[4])
        s1 = sigma - 1.0
        om = 1.0 + a * s1 + 0.5 * b * s1 * s1
        if om <= 1e-9:
            return 1
        dom = a + b * s1
        dy[0] = W * inv * inv
        Vp = 0.0
        if beta != 0.0:
            x = w * inv_eps
            for k in range(K):
                Vp += (k + 1) * (-p[5 + k] * math.sin((k + 1) * x)
                                 + p[5 + K + k] * math.cos((k + 1) * x))
        dy[1] = -beta * inv_eps * Vp
        dy[2] = om * Sigma
        dy[3] = W * W * inv * inv * inv - inv - 0.5 * dom * Sigma * Sigma
        return 0
    elif kind == 2:
        u = y[0]; U = y[1]; v = y[2]; V = y[3]
        d = 1.0 - u
        if d <= 1e-9 or not math.isfinite(d):
            return 1
        kap = p[0]
        inv = 1.0 / d
        A = U - 0.5 * v * V * inv
        dy[0] = kap * A
        dy[1] = -(0.5 * (v * v + V * V) * inv * inv
                  - 0.5 * kap * A * v * V * inv * inv - kap * inv)
        dy[2] = V * inv - 0.5 * kap * A * v * inv
        dy[3] = -v * inv + 0.5 * kap * A * V * inv
        return 0
    elif kind == 3:
        q = y[0]; pp = y[1]; s = y[2]; ps = y[3]
        if s <= 1e-9 or not math.isfinite(s):
            return 1
        M = p[0]; T = p[1]; K = int(p[2])
        inv = 1.0 / s
        dy[0] = pp * inv * inv
        Vp = 0.0
        for k in range(K):
            Vp += (k + 1) * (-p[3 + k] * math.sin((k + 1) * q)
                             + p[3 + K + k] * math.cos((k + 1) * q))
        dy[1] = -Vp
        dy[2] = ps / M
        dy[3] = pp * pp * inv * inv * inv - T * inv
        return 0
    else:
        q = y[0]; rho = y[1]; xi = y[2]
        dy[0] = rho
        dy[1] = -q - xi * rho
        dy[2] = (rho * rho - p[1]) / p[0]
        return 0


def _midpoint_step(kind, p, y, dt, out, dim):
    # mirror of the compiled stepper: per-component tolerance scaled by the
    # component magnitude (the unwrapped angle grows with time)
    m = [y[i] for i in range(dim)]
    f = [0.0, 0.0, 0.0, 0.0]
    tol = [0.0, 0.0, 0.0, 0.0]
    for i in range(dim):
        t = y[i] if y[i] >= 0.0 else -y[i]
        if t < 1.0:
            t = 1.0
        tol[i] = 1e-13 * t
    for _ in range(MAX_FP_ITER):
        st = _rhs(kind, p, m, f)
        if st:
            return st
        converged = 1
        for i in range(dim):
            mn = y[i] + 0.5 * dt * f[i]
            diff = mn - m[i]
            if diff < 0.0:
                diff = -diff
            if diff > tol[i]:
                converged = 0
            m[i] = mn
        if converged:
            for i in range(dim):
                out[i] = 2.0 * m[i] - y[i]
            return 0
    return 2


def rhs_eval(kind, params, y):
    p = [float(v) for v in params]
    state = [float(v) for v in y]
    dy = [0.0, 0.0, 0.0, 0.0]
    dim = len(state)
    st = _rhs(kind, p, state, dy)
    out = np.empty(dim, dtype=float)
    if st == 0:
        for i in range(dim):
            out[i] = dy[i]
    return st, out


def midpoint_step(kind, params, y, dt):
    p = [float(v) for v in params]
    state = [float(v) for v in y]
    dim = len(state)
    ynext = [0.0, 0.0, 0.0, 0.0]
    st = _midpoint_step(kind, p, state, float(dt), ynext, dim)
    out = np.empty(dim, dtype=float)
    if st == 0:
        for i in range(dim):
            out[i] = ynext[i]
    return st, out


def midpoint_run(kind, params, y, dt, n_steps, record_every, out):
    p = [float(v) for v in params]
    state = [float(v) for v in y]
    dim = len(state)
    cap = out.shape[0]
    ynext = [0.0, 0.0, 0.0, 0.0]
    rec = 0
    st = 0
    step = 0
    dt = float(dt)
    for step in range(n_steps):
        st = _midpoint_step(kind, p, state, dt, ynext, dim)
        if st:
            break
        for i in range(dim):
            state[i] = ynext[i]
        if record_every > 0 and (step + 1) % record_every == 0 and rec < cap:
            for i in range(dim):
                out[rec, i] = state[i]
            rec += 1
    for i in range(dim):
        y[i] = state[i]
    if st:
        return st, step, rec
    return 0, n_steps, rec
