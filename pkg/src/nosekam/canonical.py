"""Canonical transformations from mixed-variable generating functions.

Two mixed types are supported.  With the capitalization convention (X is the
momentum conjugate to x) and a map written as "old variables expressed in new
variables":

* ``OLD_MOMENTA_NEW_COORDS``: the generator g depends on the old momenta and
  the new coordinates; old coordinates are derivatives of g with respect to
  the old momenta, new momenta are derivatives with respect to the new
  coordinates.
* ``OLD_COORDS_NEW_MOMENTA``: the generator depends on the old coordinates
  and the new momenta; old momenta and new coordinates are the corresponding
  derivatives.

``induce_map`` inverts the implicit relations order by order in the jet ring,
solving an exact rational linear system for the leading block.  State tuples
are always interleaved as (q1, p1, q2, p2, ...).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .jets import GradedJet, JetSpace, sqrt1p
from .linsolve import invert_matrix


class CanonicalError(Exception):
    pass


class NotSolvableError(CanonicalError):
    """The generating function's leading block is singular."""


class DomainError(CanonicalError):
    """A point lies outside a map's domain of definition."""


class GeneratorKind(enum.Enum):
    OLD_MOMENTA_NEW_COORDS = "old-momenta/new-coords"
    OLD_COORDS_NEW_MOMENTA = "old-coords/new-momenta"


def _sqrt(x):
    """Exact square root for perfect rational squares, float otherwise."""
    if isinstance(x, Fraction):
        num = math.isqrt(x.numerator)
        den = math.isqrt(x.denominator)
        if num * num == x.numerator and den * den == x.denominator:
            return Fraction(num, den)
        return math.sqrt(float(x))
    if isinstance(x, int):
        r = math.isqrt(x)
        if r * r == x:
            return Fraction(r)
        return math.sqrt(x)
    return math.sqrt(x)


@dataclass(frozen=True)
class GeneratingFunction:
    """A mixed-variable generator given as a jet around an expansion point.

    ``body`` lives in the mixed space whose variables are the old-side mixed
    half (pair order) followed by the new-side mixed half; extra weight-0
    parameter variables may follow.  ``mixed_offsets`` records shifted
    variables: an entry {"W": 1} means the body's variable W stands for
    W_true - 1.
    """

    kind: GeneratorKind
    body: GradedJet
    old_pairs: tuple  # ((q, P) name pairs on the old side)
    new_pairs: tuple
    mixed_offsets: Mapping[str, Fraction] = field(default_factory=dict)
    name: str = ""

    def old_mixed_vars(self):
        if self.kind is GeneratorKind.OLD_MOMENTA_NEW_COORDS:
            return tuple(p for _, p in self.old_pairs)
        return tuple(q for q, _ in self.old_pairs)

    def new_mixed_vars(self):
        if self.kind is GeneratorKind.OLD_MOMENTA_NEW_COORDS:
            return tuple(q for q, _ in self.new_pairs)
        return tuple(p for _, p in self.new_pairs)

    def new_other_vars(self):
        """New-side variables not present in the generator (equation targets)."""
        if self.kind is GeneratorKind.OLD_MOMENTA_NEW_COORDS:
            return tuple(p for _, p in self.new_pairs)
        return tuple(q for q, _ in self.new_pairs)

    def old_other_vars(self):
        if self.kind is GeneratorKind.OLD_MOMENTA_NEW_COORDS:
            return tuple(q for q, _ in self.old_pairs)
        return tuple(p for _, p in self.old_pairs)


def identity_generator(pairs, max_degree=4, params=()) -> GeneratingFunction:
    """The generator sum(q_i * P_i) of the identity transformation."""
    old_pairs = tuple((q, p) for q, p in pairs)
    mixed = tuple(p for _, p in old_pairs) + tuple(q for q, _ in old_pairs)
    space = JetSpace.create(mixed + tuple(params), max_degree,
                            weights={v: 0 for v in params})
    body = space.zero()
    for q, p in old_pairs:
        body = body + space.var(p) * space.var(q)
    return GeneratingFunction(GeneratorKind.OLD_MOMENTA_NEW_COORDS, body,
                              old_pairs, old_pairs, {}, name="identity")


@dataclass
class CanonicalMap:
    """Old canonical variables expressed in terms of new ones.

    ``components`` maps each old variable name to a constant-free jet in the
    shifted new variables; ``old_offsets``/``new_offsets`` hold the expansion
    point.  ``forward`` (when present) is an exact closed-form evaluator used
    for sampling checks; jets back the exact series algebra.
    """

    old_names: tuple
    new_names: tuple
    components: dict | None = None
    old_offsets: dict = field(default_factory=dict)
    new_offsets: dict = field(default_factory=dict)
    forward: Callable | None = None
    inverse: Callable | None = None
    domain: Callable | None = None
    name: str = ""

    def old_offset(self, v):
        return self.old_offsets.get(v, Fraction(0))

    def new_offset(self, v):
        return self.new_offsets.get(v, Fraction(0))

    def in_domain(self, point) -> bool:
        return True if self.domain is None else bool(self.domain(point))

    def __call__(self, point):
        """Evaluate old variables at a new-side point (sequence in new_names
        order)."""
        if not self.in_domain(point):
            raise DomainError(f"point {point} outside domain of map {self.name!r}")
        if self.forward is not None:
            return tuple(self.forward(tuple(point)))
        vals = {v: x - self.new_offset(v) for v, x in zip(self.new_names, point)}
        out = []
        for v in self.old_names:
            jet = self.components[v]
            out.append(self.old_offset(v) + jet.evaluate(vals))
        return tuple(out)

    def component_jet(self, old_name) -> GradedJet:
        if self.components is None:
            raise CanonicalError(f"map {self.name!r} has no jet components")
        return self.components[old_name]

    def truncated(self, max_degree: int) -> "CanonicalMap":
        """Copy of the map with component jets truncated to max_degree."""
        comps = None
        if self.components is not None:
            comps = {k: v.truncate(max_degree) for k, v in self.components.items()}
        return CanonicalMap(self.old_names, self.new_names, comps,
                            dict(self.old_offsets), dict(self.new_offsets),
                            self.forward, self.inverse, self.domain, self.name)

    def pullback(self, hamiltonian: GradedJet) -> GradedJet:
        """Pull a jet Hamiltonian in the shifted old variables back through
        the map, yielding a jet in the shifted new variables."""
        if self.components is None:
            raise CanonicalError(f"map {self.name!r} has no jet components")
        bindings = {v: self.components[v] for v in hamiltonian.space.variables
                    if v in self.components}
        target = None
        for v in self.components:
            target = self.components[v].space
            break
        for v in hamiltonian.space.variables:
            if v not in bindings:
                bindings[v] = target.var(v)  # passive parameter
        return hamiltonian.substitute(bindings, space=target)


def induce_map(g: GeneratingFunction) -> CanonicalMap:
    """Build the canonical map defined implicitly by a generating function.

    Raises :class:`NotSolvableError` if the leading (linear) block of the
    implicit relations is singular at the expansion point.
    """
    body = g.body
    mixed_space = body.space
    solve_vars = g.old_mixed_vars()
    known_vars = g.new_mixed_vars()
    other_new = g.new_other_vars()
    other_old = g.old_other_vars()
    params = tuple(v for v in mixed_space.variables
                   if v not in solve_vars and v not in known_vars)
    md = mixed_space.max_degree

    # equations: other_new_i = d(body)/d(known_var_i)
    eqs = [body.polynomial_derivative(v) for v in known_vars]
    new_offsets = {}
    for i, (v_other, eq) in enumerate(zip(other_new, eqs)):
        c = eq.constant_term()
        if c != 0:
            new_offsets[v_other] = c
            eqs[i] = eq - mixed_space.constant(c)
    for v in known_vars:
        off = Fraction(g.mixed_offsets.get(v, 0))
        if off != 0:
            new_offsets[v] = off

    n = len(solve_vars)
    lam = [[Fraction(0)] * n for _ in range(n)]
    for i, eq in enumerate(eqs):
        for j, mv in enumerate(solve_vars):
            idx = mixed_space.index(mv)
            exp = tuple(1 if k == idx else 0 for k in range(len(mixed_space.variables)))
            lam[i][j] = eq.coefficient(exp)
    try:
        lam_inv = invert_matrix(lam)
    except Exception as exc:
        raise NotSolvableError(
            f"singular leading block for generator {g.name!r}: {exc}") from None

    # rho_i = eq_i minus its solve-variable linear part
    rhos = []
    for i, eq in enumerate(eqs):
        r = eq
        for j, mv in enumerate(solve_vars):
            if lam[i][j] != 0:
                r = r - mixed_space.var(mv) * lam[i][j]
        rhos.append(r)

    # target space: interleaved new pairs plus parameters, weights carried over
    new_names = tuple(v for pair in g.new_pairs for v in pair)
    weights = {}
    for q, p in g.new_pairs:
        wq = mixed_space.weight(q) if q in mixed_space.variables else None
        wp = mixed_space.weight(p) if p in mixed_space.variables else None
        w = wq if wq is not None else wp
        weights[q] = w if wq is None else wq
        weights[p] = w if wp is None else wp
    for v in params:
        weights[v] = mixed_space.weight(v)
    target = JetSpace.create(new_names + params, md, weights=weights)

    # fixed-point solve for the old-side mixed half
    sol = {v: target.zero() for v in solve_vars}
    base_bind = {v: target.var(v) for v in known_vars}
    base_bind.update({v: target.var(v) for v in params})
    for _ in range(md + 1):
        bind = dict(base_bind)
        bind.update(sol)
        new_sol = {}
        for i, mv in enumerate(solve_vars):
            acc = target.zero()
            for j in range(n):
                if lam_inv[i][j] != 0:
                    rhs_j = target.var(other_new[j]) - rhos[j].substitute(bind, space=target)
                    acc = acc + rhs_j * lam_inv[i][j]
            new_sol[mv] = acc
        if new_sol == sol:
            break
        sol = new_sol
    else:
        raise NotSolvableError(f"fixed point did not stabilize for {g.name!r}")

    # verify the implicit relations exactly in the truncated ring
    bind = dict(base_bind)
    bind.update(sol)
    for j, eq in enumerate(eqs):
        lhs = target.var(other_new[j])
        if eq.substitute(bind, space=target) != lhs:
            raise NotSolvableError(
                f"order-by-order inversion failed for {g.name!r} at {other_new[j]}")

    components = {}
    old_offsets = {}
    for v in solve_vars:
        components[v] = sol[v]
        off = Fraction(g.mixed_offsets.get(v, 0))
        if off != 0:
            old_offsets[v] = off
    for v_old, sv in zip(other_old, solve_vars):
        expr = body.polynomial_derivative(sv).substitute(bind, space=target)
        c = expr.constant_term()
        if c != 0:
            old_offsets[v_old] = c
            expr = expr - target.constant(c)
        components[v_old] = expr

    old_names = tuple(v for pair in g.old_pairs for v in pair)
    return CanonicalMap(old_names=old_names, new_names=new_names + params,
                        components=components, old_offsets=old_offsets,
                        new_offsets=new_offsets, name=g.name or "induced")


def compose(m1: CanonicalMap, m2: CanonicalMap) -> CanonicalMap:
    """Composite map expressing m1's old variables in m2's new variables.

    m1 maps B -> A and m2 maps C -> B, so m2's old side must coincide with
    m1's new side (same names and same expansion offsets).
    """
    core1 = tuple(v for v in m1.new_names if v in set(m2.old_names))
    if set(m2.old_names) != set(core1):
        raise CanonicalError(
            f"cannot compose: {m1.name!r} needs {m1.new_names}, "
            f"{m2.name!r} provides {m2.old_names}")
    for v in core1:
        if Fraction(m1.new_offset(v)) != Fraction(m2.old_offset(v)):
            raise CanonicalError(
                f"offset mismatch for {v!r} composing {m1.name!r} with {m2.name!r}")

    components = None
    if m1.components is not None and m2.components is not None:
        target = next(iter(m2.components.values())).space
        bindings = {v: m2.components[v] for v in core1}
        for v in m1.new_names:
            if v not in bindings:
                bindings[v] = target.var(v)  # passive parameter
        components = {}
        for v, jet in m1.components.items():
            components[v] = jet.substitute(bindings, space=target)

    forward = None
    if m1.forward is not None and m2.forward is not None:
        f1, f2 = m1.forward, m2.forward
        def forward(point, _f1=f1, _f2=f2):
            return _f1(tuple(_f2(tuple(point))))

    domain = None
    if m2.forward is not None and (m2.domain is not None or m1.domain is not None):
        def domain(point, _m1=m1, _m2=m2):
            if not _m2.in_domain(point):
                return False
            if _m1.domain is not None:
                return _m1.in_domain(_m2(tuple(point)))
            return True
    elif m2.domain is not None:
        domain = m2.domain

    return CanonicalMap(old_names=m1.old_names, new_names=m2.new_names,
                        components=components, old_offsets=dict(m1.old_offsets),
                        new_offsets=dict(m2.new_offsets), forward=forward,
                        domain=domain, name=f"{m1.name}*{m2.name}")


def symplectic_matrix(n_pairs: int) -> np.ndarray:
    """Canonical form for interleaved coordinates (q1, p1, q2, p2, ...)."""
    omega = np.zeros((2 * n_pairs, 2 * n_pairs))
    for k in range(n_pairs):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def symplectic_check(m: CanonicalMap, points, tol: float = 1e-7,
                     step: float = 1e-6) -> float:
    """Maximum deviation of J^T Omega J from Omega over the sample points.

    J is the central-difference Jacobian of the map at each point.  The
    returned deviation is compared against ``tol`` by callers; points outside
    the map's domain raise :class:`DomainError`.
    """
    dim = len(m.new_names)
    n_pairs = dim // 2
    omega = symplectic_matrix(n_pairs)
    worst = 0.0
    for point in points:
        point = np.asarray(point, dtype=float)
        if not m.in_domain(point):
            raise DomainError(f"sample point {point} outside domain of {m.name!r}")
        jac = np.empty((len(m.old_names), dim))
        for j in range(dim):
            dp = point.copy()
            dm = point.copy()
            dp[j] += step
            dm[j] -= step
            fp = np.asarray(m(tuple(float(x) for x in dp)), dtype=float)
            fm = np.asarray(m(tuple(float(x) for x in dm)), dtype=float)
            jac[:, j] = (fp - fm) / (2 * step)
        dev = jac.T @ symplectic_matrix(len(m.old_names) // 2) @ jac - omega
        worst = max(worst, float(np.max(np.abs(dev))))
    return worst


# ---------------------------------------------------------------------------
# the catalog of named maps
# ---------------------------------------------------------------------------


def nose_rescaling(M, T) -> CanonicalMap:
    """Rescaling (w, W, sigma, Sigma) -> (q, p, s, p_s) of the thermostat.

    q = sqrt(M) w, p = W/sqrt(M), s = sigma/sqrt(MT), p_s = sqrt(MT) Sigma.
    Exact over the rationals whenever M and MT are perfect squares.
    """
    M = Fraction(M) if not isinstance(M, float) else M
    T = Fraction(T) if not isinstance(T, float) else T
    if M <= 0 or T <= 0:
        raise DomainError("nose_rescaling needs M > 0 and T > 0")
    rM = _sqrt(M)
    rMT = _sqrt(M * T)

    def forward(point):
        w, W, sigma, Sigma = point
        return (rM * w, W / rM, sigma / rMT, rMT * Sigma)

    def inverse(point):
        q, p, s, ps = point
        return (q / rM, rM * p, rMT * s, ps / rMT)

    return CanonicalMap(old_names=("q", "p", "s", "ps"),
                        new_names=("w", "W", "sigma", "Sigma"),
                        forward=forward, inverse=inverse, name="rescale")


def polar_cartesian() -> CanonicalMap:
    """Point transformation (a, b) = (sigma cos w, sigma sin w) with its
    cotangent lift; requires sigma > 0."""

    def forward(point):
        w, W, sigma, Sigma = point
        if sigma <= 0:
            raise DomainError("polar map needs sigma > 0")
        cw, sw = math.cos(w), math.sin(w)
        a = sigma * cw
        b = sigma * sw
        A = Sigma * cw - (W / sigma) * sw
        B = Sigma * sw + (W / sigma) * cw
        return (a, A, b, B)

    def inverse(point):
        a, A, b, B = point
        sigma = math.hypot(a, b)
        if sigma <= 0:
            raise DomainError("polar inverse needs (a, b) != 0")
        w = math.atan2(b, a)
        Sigma = (a * A + b * B) / sigma
        W = a * B - b * A
        return (w, W, sigma, Sigma)

    def domain(point):
        return point[2] > 0

    return CanonicalMap(old_names=("a", "A", "b", "B"),
                        new_names=("w", "W", "sigma", "Sigma"),
                        forward=forward, inverse=inverse, domain=domain,
                        name="polar")


def fgen_generator(max_degree: int = 4) -> GeneratingFunction:
    """Generator (1-u) W Sigma + (1-W) v expanded around W = 1.

    Induces sigma = (1-u)(1-V), w = -v - U(1-u)/(1-V), Sigma = U/(V-1),
    W = 1-V, a symplectomorphism wherever V < 1.
    """
    space = JetSpace.create(("W", "Sigma", "u", "v"), max_degree)
    Wt = space.var("W")  # stands for W - 1
    S = space.var("Sigma")
    u = space.var("u")
    v = space.var("v")
    body = S + Wt * S - u * S - u * Wt * S - Wt * v
    return GeneratingFunction(GeneratorKind.OLD_MOMENTA_NEW_COORDS, body,
                              old_pairs=(("w", "W"), ("sigma", "Sigma")),
                              new_pairs=(("u", "U"), ("v", "V")),
                              mixed_offsets={"W": 1}, name="fgen")


def fgen_map(max_degree: int = 4) -> CanonicalMap:
    """Jet-backed map of :func:`fgen_generator` with exact closed forms."""
    m = induce_map(fgen_generator(max_degree))

    def forward(point):
        u, U, v, V = point
        if V >= 1:
            raise DomainError("fgen map needs V < 1")
        sigma = (1 - u) * (1 - V)
        w = -v - U * (1 - u) / (1 - V)
        Sigma = U / (V - 1)
        W = 1 - V
        return (w, W, sigma, Sigma)

    def inverse(point):
        w, W, sigma, Sigma = point
        if W == 0:
            raise DomainError("fgen inverse needs W != 0")
        V = 1 - W
        U = -Sigma * W
        u = 1 - sigma / W
        v = -w - Sigma * sigma / W
        return (u, U, v, V)

    def domain(point):
        return point[3] < 1

    m.forward = forward
    m.inverse = inverse
    m.domain = domain
    return m


def ho_sqrt_generator(max_degree: int = 4) -> GeneratingFunction:
    """Generator w V sqrt(sigma) + sigma U expanded around sigma = 1.

    Induces sigma = u, w = v/sqrt(u), Sigma = U + v V/(2u), W = V sqrt(u).
    """
    space = JetSpace.create(("w", "sigma", "U", "V"), max_degree)
    w = space.var("w")
    s = space.var("sigma")  # stands for sigma - 1
    U = space.var("U")
    V = space.var("V")
    body = U + s * U + w * V * sqrt1p(s)
    return GeneratingFunction(GeneratorKind.OLD_COORDS_NEW_MOMENTA, body,
                              old_pairs=(("w", "W"), ("sigma", "Sigma")),
                              new_pairs=(("u", "U"), ("v", "V")),
                              mixed_offsets={"sigma": 1}, name="ho-sqrt")


def ho_sqrt_map(max_degree: int = 4) -> CanonicalMap:
    # the generator body is itself a truncated series (sqrt expansion), so
    # solve one degree higher and truncate back to keep degree-max_degree
    # coefficients exact
    m = induce_map(ho_sqrt_generator(max_degree + 1)).truncated(max_degree)

    def forward(point):
        u, U, v, V = point
        if u <= 0:
            raise DomainError("ho-sqrt map needs u > 0")
        ru = _sqrt(u)
        return (v / ru, V * ru, u, U + v * V / (2 * u))

    def inverse(point):
        w, W, sigma, Sigma = point
        if sigma <= 0:
            raise DomainError("ho-sqrt inverse needs sigma > 0")
        rs = _sqrt(sigma)
        u = sigma
        U = Sigma - w * W / (2 * sigma)
        v = w * rs
        V = W / rs
        return (u, U, v, V)

    def domain(point):
        return point[0] > 0

    m.forward = forward
    m.inverse = inverse
    m.domain = domain
    return m


def flip_u_map(max_degree: int = 4) -> CanonicalMap:
    """The involution u -> 1 - u, U -> -U (identity on the fast pair).

    Old side is the (u, U, v, V) chart around u = 1; new side is the chart
    around u = 0, matching the weak-coupling Hamiltonian's expansion point.
    """
    space = JetSpace.create(("u", "U", "v", "V"), max_degree)

    components = {
        "u": -space.var("u"),
        "U": -space.var("U"),
        "v": space.var("v"),
        "V": space.var("V"),
    }

    def forward(point):
        u, U, v, V = point
        return (1 - u, -U, v, V)

    return CanonicalMap(old_names=("u", "U", "v", "V"),
                        new_names=("u", "U", "v", "V"),
                        components=components, old_offsets={"u": Fraction(1)},
                        forward=forward, inverse=forward, name="flip-u")


def identity_map(pairs, max_degree: int = 4) -> CanonicalMap:
    return induce_map(identity_generator(pairs, max_degree))


def builtin_maps() -> dict:
    """The named catalog used by the command line."""
    from .normal_form import nose_nu_map
    return {
        "rescale": lambda: nose_rescaling(1, 4),
        "polar": polar_cartesian,
        "fgen": fgen_map,
        "nu": nose_nu_map,
        "ho-sqrt": ho_sqrt_map,
        "flip-u": flip_u_map,
    }
