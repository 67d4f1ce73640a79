"""Rotation numbers of section maps via weighted Birkhoff averaging.

Angles about the curve centroid are measured clockwise, the direction a
Hamiltonian libration advances in a (coordinate, momentum) plane, so forward
time gives positive rotation numbers for the stable sections studied here;
reversed orbits negate the rotation number mod 1.
"""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


class RotationError(Exception):
    pass


def birkhoff_weights(n: int) -> np.ndarray:
    """The exponential bump w(t) = exp(-1/(t(1-t))) sampled on (0, 1);
    weighted Birkhoff sums converge super-polynomially on Diophantine
    rotations."""
    t = (np.arange(n) + 1.0) / (n + 1.0)
    return np.exp(-1.0 / (t * (1.0 - t)))


def _increments(points) -> np.ndarray:
    from .sections import whiten
    rel, _ = whiten(points)
    theta = np.arctan2(-rel[:, 1], rel[:, 0])
    return np.mod(np.diff(theta), TWO_PI)


def rotation_number(points_or_record, min_points: int = 64):
    """(estimate, uncertainty) of the rotation number of an ordered point
    sequence on a closed invariant curve.

    The estimate is the weighted Birkhoff average of consecutive angle
    increments, reduced mod 1; the uncertainty is the circular distance to
    the half-sample estimate.  Requires at least min_points "curve" points.
    """
    record = None
    if hasattr(points_or_record, "curve_points"):
        record = points_or_record
        points = record.curve_points
    else:
        points = np.asarray(points_or_record, dtype=float)
    if record is not None and record.classification not in (None, "curve"):
        raise RotationError(
            f"rotation number undefined for {record.classification!r} sections")
    if len(points) < min_points:
        raise RotationError(f"need at least {min_points} section points")

    def estimate(pts):
        inc = _increments(pts)
        w = birkhoff_weights(len(inc))
        return float((w @ inc) / w.sum() / TWO_PI % 1.0)

    full = estimate(points)
    half = estimate(points[: len(points) // 2])
    delta = abs(full - half)
    uncertainty = min(delta, 1.0 - delta)
    if record is not None:
        record.rotation = full
        record.rotation_uncertainty = uncertainty
    return full, uncertainty


def xi1_rotation_oracle(W: float = 1.0, n_steps: int = 200000) -> float:
    """Independent oracle for the rotation number near the unit periodic
    orbit: integrate the variational equations of the radial block around
    sigma = |W|, Sigma = 0 over one angular return and convert the monodromy
    rotation angle to a rotation number.

    The radial linearization is d(sigma)' = dSigma, d(Sigma)' =
    -(3 W^2/sigma^4 - 1/sigma^2) dsigma with sigma = |W|; the angular return
    time is 2 pi sigma^2 / W.  For W = 1 this gives frac(sqrt(2)).
    """
    sigma = abs(W)
    omega2 = 3.0 * W * W / sigma ** 4 - 1.0 / sigma ** 2
    t_return = TWO_PI * sigma * sigma / abs(W)
    # classical RK4 on the linear system [ds, dS]' = [[0,1],[-omega2,0]]
    h = t_return / n_steps
    m = np.eye(2)
    a = np.array([[0.0, 1.0], [-omega2, 0.0]])
    for _ in range(n_steps):
        k1 = a @ m
        k2 = a @ (m + 0.5 * h * k1)
        k3 = a @ (m + 0.5 * h * k2)
        k4 = a @ (m + h * k3)
        m = m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    # monodromy of a rotation with frequency sqrt(omega2): rotation angle
    # theta with cos(theta) = tr(M)/2; orientation fixed clockwise-positive
    c = max(-1.0, min(1.0, 0.5 * float(np.trace(m))))
    theta = math.acos(c)
    return (theta / TWO_PI) % 1.0
