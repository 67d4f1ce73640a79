"""Exact truncated multivariate power series with weighted degrees.

A :class:`GradedJet` stores a polynomial truncated at a weighted total
degree, with arbitrary-precision rational coefficients.  Every symbolic
computation in this package (generating-function inversion, normal-form
solving, trigonometric averaging) is built on these jets, so all golden
coefficients come out as exact fractions.

Weights are per-variable nonnegative integers.  Weight-0 variables act as
symbolic parameters: they never contribute to the truncation degree, so a
jet can stay parametric in, say, a thermostat shape parameter while being
truncated in the phase-space variables.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

Rat = Fraction
Scalar = Union[int, Fraction]


class JetError(Exception):
    """Base class for jet-algebra errors."""


class IncompatibleJetsError(JetError):
    """Operands live in different jet spaces."""


class CompositionDomainError(JetError):
    """A composition would evaluate a series outside its formal domain."""


class UnknownVariableError(JetError):
    """A variable name is not present in the jet space."""


def _as_rat(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"jet coefficients must be exact rationals, got {type(c).__name__}")


@dataclass(frozen=True)
class JetSpace:
    """Ambient space of a jet: ordered variables, weights, truncation degree."""

    variables: tuple
    weights: tuple
    max_degree: int

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if len(self.variables) != len(set(self.variables)):
            raise JetError("duplicate variable names")
        if len(self.weights) != len(self.variables):
            raise JetError("weights must match variables")
        if any(w < 0 for w in self.weights):
            raise JetError("weights must be nonnegative")
        if self.max_degree < 0:
            raise JetError("max_degree must be nonnegative")

    @classmethod
    def create(cls, variables: Sequence[str], max_degree: int,
               weights: Mapping[str, int] | Sequence[int] | None = None) -> "JetSpace":
        variables = tuple(variables)
        if weights is None:
            ws = tuple(1 for _ in variables)
        elif isinstance(weights, Mapping):
            ws = tuple(int(weights.get(v, 1)) for v in variables)
        else:
            ws = tuple(int(w) for w in weights)
        return cls(variables, ws, int(max_degree))

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise UnknownVariableError(f"variable {name!r} not in space {self.variables}") from None

    def weight(self, name: str) -> int:
        return self.weights[self.index(name)]

    def degree(self, exponent: tuple) -> int:
        return sum(w * e for w, e in zip(self.weights, exponent))

    def zero(self) -> "GradedJet":
        return GradedJet(self, {})

    def one(self) -> "GradedJet":
        return self.constant(1)

    def constant(self, c) -> "GradedJet":
        c = _as_rat(c)
        if c == 0:
            return self.zero()
        return GradedJet(self, {(0,) * len(self.variables): c})

    def var(self, name: str, power: int = 1) -> "GradedJet":
        i = self.index(name)
        exp = tuple(power if j == i else 0 for j in range(len(self.variables)))
        if self.degree(exp) > self.max_degree:
            return self.zero()
        return GradedJet(self, {exp: Fraction(1)})

    def jet(self, terms: Mapping[tuple, Scalar]) -> "GradedJet":
        return GradedJet(self, {tuple(e): _as_rat(c) for e, c in terms.items()})

    def with_max_degree(self, max_degree: int) -> "JetSpace":
        return JetSpace(self.variables, self.weights, int(max_degree))

    def extend(self, variables: Sequence[str], weights: Sequence[int]) -> "JetSpace":
        return JetSpace(self.variables + tuple(variables),
                        self.weights + tuple(int(w) for w in weights),
                        self.max_degree)

    def drop(self, names: Iterable[str]) -> "JetSpace":
        names = set(names)
        keep = [(v, w) for v, w in zip(self.variables, self.weights) if v not in names]
        return JetSpace(tuple(v for v, _ in keep), tuple(w for _, w in keep), self.max_degree)


class GradedJet:
    """Truncated power series over a :class:`JetSpace`.

    Immutable after construction; stored sparsely with no zero coefficients.
    Two jets compare equal iff their spaces and term maps agree exactly.
    """

    __slots__ = ("space", "_terms", "_hash")

    def __init__(self, space: JetSpace, terms: Mapping[tuple, Fraction]):
        canon = {}
        nvars = len(space.variables)
        for exp, coeff in terms.items():
            coeff = _as_rat(coeff)
            if coeff == 0:
                continue
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise JetError(f"exponent {exp} has wrong length for {space.variables}")
            if any(e < 0 for e in exp):
                raise JetError(f"negative exponent in {exp}")
            if space.degree(exp) > space.max_degree:
                continue
            canon[exp] = coeff
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "_terms", canon)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("GradedJet is immutable")

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def sorted_items(self):
        return sorted(self._terms.items(), key=lambda kv: (self.space.degree(kv[0]), kv[0]))

    def coefficient(self, exp: tuple) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * len(self.space.variables), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def min_degree(self) -> int:
        """Weighted degree of the lowest-order term (max_degree + 1 if zero)."""
        if not self._terms:
            return self.space.max_degree + 1
        return min(self.space.degree(e) for e in self._terms)

    # -- ring operations ---------------------------------------------------

    def _check(self, other: "GradedJet") -> None:
        if self.space != other.space:
            raise IncompatibleJetsError(
                f"incompatible jet spaces: {self.space} vs {other.space}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.space.constant(other)
        elif not isinstance(other, GradedJet):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for exp, c in other._terms.items():
            s = out.get(exp, Fraction(0)) + c
            if s == 0:
                out.pop(exp, None)
            else:
                out[exp] = s
        return GradedJet(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedJet(self.space, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.space.constant(other)
        elif not isinstance(other, GradedJet):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_rat(other)
            if c == 0:
                return self.space.zero()
            return GradedJet(self.space, {e: k * c for e, k in self._terms.items()})
        if not isinstance(other, GradedJet):
            return NotImplemented
        self._check(other)
        space = self.space
        md = space.max_degree
        weights = space.weights
        degs_a = {e: space.degree(e) for e in self._terms}
        degs_b = {e: space.degree(e) for e in other._terms}
        out: dict = {}
        for ea, ca in self._terms.items():
            da = degs_a[ea]
            for eb, cb in other._terms.items():
                if da + degs_b[eb] > md:
                    continue
                exp = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(exp, Fraction(0)) + ca * cb
                if s == 0:
                    out.pop(exp, None)
                else:
                    out[exp] = s
        return GradedJet(space, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _as_rat(other)
        if c == 0:
            raise ZeroDivisionError("division of jet by zero")
        return self * (Fraction(1) / c)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise JetError("jet powers must be nonnegative integers")
        result = self.space.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, GradedJet):
            return NotImplemented
        return self.space == other.space and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            h = hash((self.space, tuple(sorted(self._terms.items()))))
            object.__setattr__(self, "_hash", h)
        return self._hash

    # -- truncation and regrading -------------------------------------------

    def truncate(self, max_degree: int) -> "GradedJet":
        """Project onto the quotient with the given (lower) truncation degree."""
        space = self.space.with_max_degree(max_degree)
        return GradedJet(space, self._terms)

    def with_max_degree(self, max_degree: int) -> "GradedJet":
        """Reinterpret the same terms in a space with a different bound.

        Raising the bound treats the jet as an exact polynomial; lowering it
        truncates.
        """
        return GradedJet(self.space.with_max_degree(max_degree), self._terms)

    def lift_to(self, space: JetSpace) -> "GradedJet":
        """Embed into a larger space containing all current variables."""
        idx = [space.index(v) for v in self.space.variables]
        n = len(space.variables)
        out = {}
        for exp, c in self._terms.items():
            e = [0] * n
            for i, p in zip(idx, exp):
                e[i] = p
            out[tuple(e)] = c
        return GradedJet(space, out)

    # -- calculus ------------------------------------------------------------

    def partial_derivative(self, name: str) -> "GradedJet":
        """Formal partial derivative; the truncation bound drops by the
        variable's weight, since differentiating the discarded remainder
        would contribute there."""
        i = self.space.index(name)
        w = self.space.weights[i]
        new_md = max(self.space.max_degree - w, 0)
        space = self.space.with_max_degree(new_md)
        out = {}
        for exp, c in self._terms.items():
            if exp[i] == 0:
                continue
            e = list(exp)
            k = e[i]
            e[i] = k - 1
            out[tuple(e)] = out.get(tuple(e), Fraction(0)) + c * k
        return GradedJet(space, out)

    def polynomial_derivative(self, name: str) -> "GradedJet":
        """Partial derivative treating the jet as an exact polynomial
        (truncation bound unchanged)."""
        i = self.space.index(name)
        out = {}
        for exp, c in self._terms.items():
            if exp[i] == 0:
                continue
            e = list(exp)
            k = e[i]
            e[i] = k - 1
            out[tuple(e)] = c * k
        return GradedJet(self.space, out)

    # -- composition -----------------------------------------------------------

    def substitute(self, bindings: Mapping[str, "GradedJet"],
                   space: JetSpace | None = None) -> "GradedJet":
        """Formal composition: replace every variable by its binding jet.

        All variables must be bound and all bindings must share one target
        space.  A variable of weight w >= 1 must be bound to a jet of minimum
        degree >= w (in particular, zero constant term), otherwise the source
        truncation would corrupt low-order target coefficients.  Weight-0
        variables may be bound to anything, constants included, because their
        powers are never truncated away.
        """
        src = self.space
        for v in src.variables:
            if v not in bindings:
                raise CompositionDomainError(f"no binding for variable {v!r}")
        target = space
        for v in src.variables:
            b = bindings[v]
            if not isinstance(b, GradedJet):
                raise CompositionDomainError(f"binding for {v!r} is not a jet")
            if target is None:
                target = b.space
            elif b.space != target:
                raise IncompatibleJetsError("bindings live in different spaces")
        if target is None:
            raise CompositionDomainError("empty source space needs an explicit target")
        if target.max_degree > src.max_degree:
            raise CompositionDomainError(
                "target truncation degree exceeds the source jet's accuracy")
        for v, w in zip(src.variables, src.weights):
            if w >= 1 and bindings[v].min_degree() < w:
                raise CompositionDomainError(
                    f"binding for weight-{w} variable {v!r} has degree "
                    f"{bindings[v].min_degree()} < {w}; truncation would be unsound")
        # cache powers of each binding up to the maximum needed exponent
        max_pow = {v: 0 for v in src.variables}
        for exp in self._terms:
            for v, e in zip(src.variables, exp):
                if e > max_pow[v]:
                    max_pow[v] = e
        powers = {}
        for v in src.variables:
            plist = [target.one()]
            b = bindings[v]
            for _ in range(max_pow[v]):
                plist.append(plist[-1] * b)
            powers[v] = plist
        result = target.zero()
        for exp, c in self._terms.items():
            term = target.constant(c)
            for v, e in zip(src.variables, exp):
                if e:
                    term = term * powers[v][e]
            result = result + term
        return result

    # -- evaluation --------------------------------------------------------------

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a point.  Exact if all values are int/Fraction."""
        for v in self.space.variables:
            if v not in values:
                raise UnknownVariableError(f"no value for variable {v!r}")
        total = None
        for exp, c in self.sorted_items():
            acc = 1
            for v, e in zip(self.space.variables, exp):
                if e:
                    acc = acc * values[v] ** e
            term = c * acc
            total = term if total is None else total + term
        if total is None:
            return Fraction(0)
        return total

    # -- presentation ----------------------------------------------------------

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for exp, c in self.sorted_items():
            mono = "*".join(
                (v if e == 1 else f"{v}^{e}")
                for v, e in zip(self.space.variables, exp) if e)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return f"GradedJet({self})"

    # -- serialization ------------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vars": list(self.space.variables),
            "weights": list(self.space.weights),
            "max_degree": self.space.max_degree,
            "terms": [
                {"exp": list(exp), "num": str(c.numerator), "den": str(c.denominator)}
                for exp, c in self.sorted_items()
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "GradedJet":
        space = JetSpace(tuple(data["vars"]), tuple(data["weights"]), int(data["max_degree"]))
        terms = {
            tuple(t["exp"]): Fraction(int(t["num"]), int(t["den"]))
            for t in data["terms"]
        }
        return cls(space, terms)

    @classmethod
    def from_json(cls, text: str) -> "GradedJet":
        return cls.from_json_dict(json.loads(text))


# -- analytic series -------------------------------------------------------------


def apply_series(coefficients: Callable[[int], Fraction], j: GradedJet) -> GradedJet:
    """Compose the power series sum_n c_n t^n with a constant-free jet."""
    if j.constant_term() != 0:
        raise CompositionDomainError(
            "series composition needs a zero constant term")
    md = j.space.max_degree
    if j.is_zero():
        n_max = 0
    else:
        n_max = md // max(j.min_degree(), 1)
    acc = j.space.constant(coefficients(n_max))
    for n in range(n_max - 1, -1, -1):
        acc = acc * j + j.space.constant(coefficients(n))
    return acc


def ln1p(j: GradedJet) -> GradedJet:
    """ln(1 + j) for a constant-free jet."""
    def c(n):
        return Fraction(0) if n == 0 else Fraction((-1) ** (n + 1), n)
    return apply_series(c, j)


def reciprocal_power(a: int, j: GradedJet) -> GradedJet:
    """(1 + j)^(-a) for a positive integer a and constant-free jet."""
    if a <= 0:
        raise JetError("reciprocal_power needs a positive exponent")

    def c(n):
        # binomial(-a, n) = (-1)^n * C(a+n-1, n)
        num = 1
        for i in range(n):
            num = num * (a + i)
        den = 1
        for i in range(1, n + 1):
            den *= i
        return Fraction((-1) ** n * num, den)
    return apply_series(c, j)


def reciprocal(j: GradedJet) -> GradedJet:
    return reciprocal_power(1, j)


def sqrt1p(j: GradedJet) -> GradedJet:
    """(1 + j)^(1/2) for a constant-free jet."""
    def c(n):
        acc = Fraction(1)
        half = Fraction(1, 2)
        for i in range(n):
            acc *= (half - i)
        den = 1
        for i in range(1, n + 1):
            den *= i
        return acc / den
    return apply_series(c, j)


def expj(j: GradedJet) -> GradedJet:
    """exp(j) for a constant-free jet."""
    def c(n):
        den = 1
        for i in range(1, n + 1):
            den *= i
        return Fraction(1, den)
    return apply_series(c, j)


ANALYTIC_FUNCTIONS = {
    "ln1p": ln1p,
    "sqrt1p": sqrt1p,
    "exp": expj,
}


def analytic_apply(f, j: GradedJet) -> GradedJet:
    """Apply a named analytic function (or reciprocal_power(a) via a tuple)."""
    if isinstance(f, str):
        if f in ANALYTIC_FUNCTIONS:
            return ANALYTIC_FUNCTIONS[f](j)
        raise JetError(f"unknown analytic function {f!r}")
    if isinstance(f, tuple) and len(f) == 2 and f[0] == "reciprocal_power":
        return reciprocal_power(int(f[1]), j)
    if callable(f):
        return f(j)
    raise JetError(f"cannot interpret analytic function spec {f!r}")


# -- symbolic parameters ----------------------------------------------------------


@dataclass(frozen=True)
class RationalParam:
    """A named exact-rational parameter carried as a weight-0 jet variable."""

    name: str
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", _as_rat(self.value))


def bind_params(j: GradedJet, params: Iterable[RationalParam]) -> GradedJet:
    """Substitute exact values for weight-0 parameter variables.

    Binding every parameter of a jet yields a jet with no free parameters.
    """
    params = list(params)
    names = {p.name for p in params}
    for p in params:
        if j.space.weight(p.name) != 0:
            raise JetError(f"parameter {p.name!r} must have weight 0")
    target = j.space.drop(names)
    bindings = {}
    for v in j.space.variables:
        if v in names:
            val = next(p.value for p in params if p.name == v)
            bindings[v] = target.constant(val)
        else:
            bindings[v] = target.var(v)
    return j.substitute(bindings, space=target)
