# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels: model vector fields and the implicit
midpoint stepper.

nosekam.dynamics.pure mirrors these routines statement for statement; keep
the arithmetic order identical in both so the backends produce bit-identical
trajectories (the extension is also built with -ffp-contract=off for this
reason).  Parameter layouts come from nosekam.models.pack_params.
"""
from libc.math cimport sin, cos, isfinite

import numpy as np

FP_TOL = 1e-13
MAX_FP_ITER = 50


cdef int _rhs(int kind, const double* p, const double* y, double* dy) noexcept nogil:
    cdef double w, W, sigma, Sigma, inv, x, Vp, beta, inv_eps
    cdef double a, b, om, dom, s1
    cdef double u, U, v, V, kap, d, A
    cdef double q, rho, xi, M, T, ps, s, pp
    cdef int K, k
    if kind == 0:
        # rescaled_F_beta, params [beta, inv_eps, K, cos.., sin..]
        w = y[0]; W = y[1]; sigma = y[2]; Sigma = y[3]
        if sigma <= 1e-9 or not isfinite(sigma):
            return 1
        inv = 1.0 / sigma
        beta = p[0]; inv_eps = p[1]; K = <int>p[2]
        dy[0] = W * inv * inv
        Vp = 0.0
        if beta != 0.0:
            x = w * inv_eps
            for k in range(K):
                Vp += (k + 1) * (-p[3 + k] * sin((k + 1) * x)
                                 + p[3 + K + k] * cos((k + 1) * x))
        dy[1] = -beta * inv_eps * Vp
        dy[2] = Sigma
        dy[3] = W * W * inv * inv * inv - inv
        return 0
    elif kind == 1:
        # nose_like, params [beta, inv_eps, a, b, K, cos.., sin..]
        w = y[0]; W = y[1]; sigma = y[2]; Sigma = y[3]
        if sigma <= 1e-9 or not isfinite(sigma):
            return 1
        inv = 1.0 / sigma
        beta = p[0]; inv_eps = p[1]; a = p[2]; b = p[3]; K = <int>p[4]
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
                Vp += (k + 1) * (-p[5 + k] * sin((k + 1) * x)
                                 + p[5 + K + k] * cos((k + 1) * x))
        dy[1] = -beta * inv_eps * Vp
        dy[2] = om * Sigma
        dy[3] = W * W * inv * inv * inv - inv - 0.5 * dom * Sigma * Sigma
        return 0
    elif kind == 2:
        # oscillator_G_kappa, params [kappa]
        u = y[0]; U = y[1]; v = y[2]; V = y[3]
        d = 1.0 - u
        if d <= 1e-9 or not isfinite(d):
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
        # nose_full, params [M, T, K, cos.., sin..]
        q = y[0]; pp = y[1]; s = y[2]; ps = y[3]
        if s <= 1e-9 or not isfinite(s):
            return 1
        M = p[0]; T = p[1]; K = <int>p[2]
        inv = 1.0 / s
        dy[0] = pp * inv * inv
        Vp = 0.0
        for k in range(K):
            Vp += (k + 1) * (-p[3 + k] * sin((k + 1) * q)
                             + p[3 + K + k] * cos((k + 1) * q))
        dy[1] = -Vp
        dy[2] = ps / M
        dy[3] = pp * pp * inv * inv * inv - T * inv
        return 0
    else:
        # nose_hoover_reduced, params [M, T]
        q = y[0]; rho = y[1]; xi = y[2]
        dy[0] = rho
        dy[1] = -q - xi * rho
        dy[2] = (rho * rho - p[1]) / p[0]
        return 0


cdef int _midpoint_step(int kind, const double* p, const double* y, double dt,
                        double* out, int dim) noexcept nogil:
    # the stage tolerance is 1e-13 per component, scaled by the component
    # magnitude (the unwrapped angle grows linearly with time, so an
    # absolute tolerance would drop below one ulp on long runs)
    cdef double m[4]
    cdef double f[4]
    cdef double tol[4]
    cdef double mn, diff
    cdef int i, it, st, converged
    for i in range(dim):
        m[i] = y[i]
        tol[i] = y[i] if y[i] >= 0.0 else -y[i]
        if tol[i] < 1.0:
            tol[i] = 1.0
        tol[i] = 1e-13 * tol[i]
    for it in range(50):
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


def rhs_eval(int kind, double[::1] params, double[::1] y):
    """(status, dy) for one state; status 0 ok, 1 domain violation."""
    cdef double dy[4]
    cdef int dim = y.shape[0]
    cdef int st = _rhs(kind, &params[0], &y[0], dy)
    out = np.empty(dim, dtype=float)
    cdef int i
    if st == 0:
        for i in range(dim):
            out[i] = dy[i]
    return st, out


def midpoint_step(int kind, double[::1] params, double[::1] y, double dt):
    """One implicit midpoint step; status 2 means the fixed point stalled
    (callers fall back to a Newton solve)."""
    cdef double ynext[4]
    cdef int dim = y.shape[0]
    cdef int st = _midpoint_step(kind, &params[0], &y[0], dt, ynext, dim)
    out = np.empty(dim, dtype=float)
    cdef int i
    if st == 0:
        for i in range(dim):
            out[i] = ynext[i]
    return st, out


def midpoint_run(int kind, double[::1] params, double[::1] y, double dt,
                 long n_steps, long record_every, double[:, ::1] out):
    """Integrate n_steps in place, recording after every record_every-th
    step.  Returns (status, steps_completed, records_written); on a nonzero
    status y holds the last completed state."""
    cdef long step, rec = 0
    cdef int dim = y.shape[0]
    cdef long cap = out.shape[0]
    cdef double ynext[4]
    cdef int st = 0, i
    with nogil:
        for step in range(n_steps):
            st = _midpoint_step(kind, &params[0], &y[0], dt, ynext, dim)
            if st:
                break
            for i in range(dim):
                y[i] = ynext[i]
            if record_every > 0 and (step + 1) % record_every == 0 and rec < cap:
                for i in range(dim):
                    out[rec, i] = y[i]
                rec += 1
    if st:
        return st, step, rec
    return 0, n_steps, rec
