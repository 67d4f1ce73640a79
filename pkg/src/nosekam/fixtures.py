"""Frozen golden values and regression bounds.

Exact rationals here reproduce published normal-form coefficients; the float
bounds were measured once on the reference build and asserted thereafter.
Corrupting any entry must make the corresponding `verify` check fail.
"""
from fractions import Fraction

F = Fraction

# normal form of the thermostated free particle: alpha, beta, gamma
NOSE_ALPHA = F(-11, 24)
NOSE_BETA = F(1)
NOSE_GAMMA = F(1)

# generating-function coefficients, keyed by exponents over (x, y, U, V)
NOSE_NU_COEFFS = {
    (3, 0, 1, 0): F(55, 144),    # x^3 U
    (2, 0, 1, 1): F(-5, 6),      # x^2 U V
    (2, 0, 1, 0): F(-5, 6),      # x^2 U
    (1, 0, 1, 2): F(3, 8),       # x U V^2
    (1, 0, 1, 1): F(1, 2),       # x U V
    (1, 0, 3, 0): F(233, 288),   # x U^3
    (0, 0, 3, 1): F(-5, 9),      # U^3 V
    (0, 0, 3, 0): F(-5, 18),     # U^3
}

# slow expansion of the free-particle Hamiltonian, exponents over (u, v, U, V)
G0_NOSE_TERMS = {
    (2, 0, 0, 0): F(1),
    (3, 0, 0, 0): F(5, 3),
    (4, 0, 0, 0): F(9, 4),
    (0, 0, 2, 0): F(1, 2),
    (0, 0, 2, 1): F(1),
    (0, 0, 2, 2): F(3, 2),
}
G0_NOSE_CONSTANT = F(1, 2)

# thermostat-shape samples: (a, b) -> (alpha, beta, gamma), solver-confirmed
NOSE_LIKE_SAMPLES = {
    (F(0), F(0)): (F(-11, 24), F(1), F(1)),
    (F(2), F(0)): (F(-5, 24), F(0), F(-1, 2)),
}

# Hessian determinant constant term for the free-particle normal form
NOSE_HESSIAN_CONSTANT = F(-1, 12)

# quartic oscillator normal form I + c I^2 for the averaged slow system
OSC_BNF_A3 = F(2, 3)
OSC_BNF_A4 = F(3, 4)
OSC_BNF_COEFF = F(-13, 24)

# weak-coupling normal form kappa I + J + alpha I^2 + beta I J + gamma J^2
HATG_ALPHA_OVER_KAPPA = F(-13, 24)   # alpha = -13 kappa / 24
HATG_BETA = F(-1)
HATG_GAMMA_TIMES_KAPPA = F(-1, 2)    # gamma = -1 / (2 kappa)

# reduced Hamiltonian on the fixed energy level, exponents over (I, h)
HATG_REDUCED_J_OVER_KAPPA = {
    (0, 1): F(1),        # h
    (0, 2): F(1, 2),     # h^2 / 2
    (1, 0): F(-1),       # -I
    (2, 0): F(1, 24),    # I^2 / 24
}

# second-order slow expansion of the averaged oscillator (E symbolic):
# coefficient jets in (E, E/kappa); see averaging.maclaurin_expand
T2_U2_COEFF = {"E2": F(3, 16), "E_over_kappa": F(1), "const": F(-1, 2)}
T2_U1_COEFF = {"E2": F(1, 8), "E_over_kappa": F(1), "const": F(-1)}
T2_U0_COEFF = {"E2": F(1, 16), "E_over_kappa": F(1), "const": F(0)}

# fourth-order slow expansion at critical fast energy, exponents over (u, U)
T4_TERMS = {
    (2, 0): F(1, 2),
    (0, 2): F(1, 2),
    (3, 0): F(2, 3),
    (4, 0): F(3, 4),
}
T4_CONSTANT = F(1)

# exact angle-averaged Hamiltonian, the oracle side of the discrepancy log:
# E/(1-u) + kappa*(U^2/2 + E^2/(2^4 (1-u)^2) + ln(1-u))
AVERAGE_FAST_DENOM_POWER = 4    # printed as 2^6
AVERAGE_LEADING_DENOM = 1       # printed as E/(2(1-u)); oracle has E/(1-u)

# critical fast energy E(kappa) = kappa + 0*kappa^2 - kappa^3/8 + O(kappa^4)
CRITICAL_E_COEFFS = {1: F(1), 2: F(0), 3: F(-1, 8)}

# ---------------------------------------------------------------------------
# dynamics regression bounds, measured once and frozen (see test_dynamics)
# ---------------------------------------------------------------------------

# implicit midpoint on the rescaled thermostat, dt=1e-3, t=1e3, beta=1e-2
MIDPOINT_DRIFT_BOUND = 1e-6
# drift ratio when halving dt (second-order method)
MIDPOINT_ORDER_RATIO = (3.5, 4.5)
# conservation of the angular momentum W at beta = 0 over t = 1e3
W_DRIFT_BOUND = 1e-10
# Fourier-fit residual of a beta = 0 section (integrable case)
SECTION_RESIDUAL_BETA0 = 1e-6
# rotation number of the section map near the unit periodic orbit:
# frac(sqrt(2)) from the variational frequency ratio
ROTATION_XI1 = 0.41421356237309515
# fraction of grid cells classifying "curve" at beta in {1e-3, 1e-2}
CURVE_FRACTION_MIN = 0.8
# tail oscillation bound for normalized Birkhoff temperature averages
TEMPERATURE_TAIL_OSC = 1e-3
