"""Exact polynomial functions and differential forms on R^N.

Coefficients are kept as :class:`fractions.Fraction` whenever the input is
exact (ints, Fractions, "p/q" strings) so that derivatives, exterior
derivatives and Lie derivatives are computed without rounding.  Floats are
accepted and propagate as floats.  Numerical evaluation goes through a
compiled monomial table (:class:`PolyStack`) shared by all polynomials of a
form.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

Coeff = Union[int, Fraction, float]
Exponent = tuple


def as_coeff(value) -> Union[Fraction, float]:
    """Normalize a scalar: exact inputs become Fractions, floats stay floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        return float(value)
    raise TypeError(f"unsupported coefficient type {type(value).__name__}")


@dataclass(frozen=True, eq=False)
class PolyMap:
    """Polynomial R^N -> R stored as ``{exponent tuple: coefficient}``."""

    ambient_dim: int
    terms: Mapping[Exponent, Coeff] = field(default_factory=dict)

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise ValueError("ambient_dim must be positive")
        clean: dict = {}
        for exps, c in dict(self.terms).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.ambient_dim:
                raise ValueError(
                    f"multi-index {exps} has length {len(exps)}, expected {self.ambient_dim}")
            if min(exps, default=0) < 0:
                raise ValueError(f"negative exponent in {exps}")
            clean[exps] = clean.get(exps, 0) + as_coeff(c)
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if v != 0})

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "PolyMap":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, c: Coeff) -> "PolyMap":
        return cls(n, {(0,) * n: c})

    @classmethod
    def coordinate(cls, n: int, i: int) -> "PolyMap":
        exps = [0] * n
        exps[i] = 1
        return cls(n, {tuple(exps): 1})

    @classmethod
    def linear(cls, row: Sequence[Coeff]) -> "PolyMap":
        """The linear function x -> row . x."""
        n = len(row)
        return cls(n, {tuple(int(i == j) for j in range(n)): c for i, c in enumerate(row)})

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "PolyMap":
        """Parse a polynomial expression such as ``"x1^2 + 1/2*y1^2 - 1"``."""
        import sympy

        syms = sympy.symbols(list(variables))
        expr = sympy.sympify(text.replace("^", "**"), locals=dict(zip(variables, syms)))
        poly = sympy.Poly(sympy.expand(expr), *syms)
        terms = {}
        for monom, c in poly.terms():
            if c.is_Rational:
                terms[monom] = Fraction(int(c.p), int(c.q))
            else:
                terms[monom] = float(c)
        return cls(len(variables), terms)

    # -- algebra ----------------------------------------------------------
    def _coerce(self, other) -> "PolyMap":
        if isinstance(other, PolyMap):
            if other.ambient_dim != self.ambient_dim:
                raise ValueError("ambient dimension mismatch")
            return other
        return PolyMap.constant(self.ambient_dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return PolyMap(self.ambient_dim, terms)

    __radd__ = __add__

    def __neg__(self):
        return PolyMap(self.ambient_dim, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PolyMap):
            try:
                c = as_coeff(other)
            except TypeError:
                return NotImplemented
            return PolyMap(self.ambient_dim, {k: c * v for k, v in self.terms.items()})
        other = self._coerce(other)
        terms: dict = {}
        for (ka, va), (kb, vb) in itertools.product(self.terms.items(), other.terms.items()):
            k = tuple(a + b for a, b in zip(ka, kb))
            terms[k] = terms.get(k, 0) + va * vb
        return PolyMap(self.ambient_dim, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PolyMap.constant(self.ambient_dim, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.terms == other.terms

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.terms.values())

    def derivative(self, i: int) -> "PolyMap":
        terms = {}
        for k, v in self.terms.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                terms[tuple(kk)] = v * k[i]
        return PolyMap(self.ambient_dim, terms)

    def differential(self) -> "Poly1Form":
        return Poly1Form(self.ambient_dim,
                         tuple(self.derivative(i) for i in range(self.ambient_dim)))

    def extend(self, n: int) -> "PolyMap":
        """Same polynomial viewed on R^n (n >= ambient_dim), ignoring extra variables."""
        pad = (0,) * (n - self.ambient_dim)
        return PolyMap(n, {k + pad: v for k, v in self.terms.items()})

    # -- evaluation -------------------------------------------------------
    @cached_property
    def _stack(self) -> "PolyStack":
        return PolyStack([self])

    def __call__(self, point) -> float:
        return float(self._stack(point)[0])

    evaluate = __call__

    def __repr__(self):
        if not self.terms:
            return f"PolyMap({self.ambient_dim}, 0)"
        parts = []
        for k, v in sorted(self.terms.items(), reverse=True):
            mon = "*".join(f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(k) if e)
            parts.append(f"{v}" + (f"*{mon}" if mon else ""))
        return f"PolyMap({self.ambient_dim}, {' + '.join(parts)})"


class PolyStack:
    """Several polynomials compiled onto one shared monomial table.

    ``stack(x)`` returns the vector of values; ``x`` may also be a batch of
    points with shape ``(P, N)``, giving a ``(P, len(polys))`` array.
    """

    def __init__(self, polys: Sequence[PolyMap], n: int | None = None):
        polys = list(polys)
        if n is None:
            if not polys:
                raise ValueError("empty stack needs an explicit dimension")
            n = polys[0].ambient_dim
        self.ambient_dim = n
        self.size = len(polys)
        monomials = sorted({k for p in polys for k in p.terms})
        index = {k: i for i, k in enumerate(monomials)}
        self.exps = np.array(monomials, dtype=np.int64).reshape(len(monomials), n)
        self.coeffs = np.zeros((len(monomials), len(polys)))
        for j, p in enumerate(polys):
            if p.ambient_dim != n:
                raise ValueError("ambient dimension mismatch in stack")
            for k, v in p.terms.items():
                self.coeffs[index[k], j] = float(v)
        self._max_exp = int(self.exps.max(initial=0))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise ValueError(f"point has dimension {x.shape[-1]}, expected {self.ambient_dim}")
        if not len(self.exps):
            return np.zeros(x.shape[:-1] + (self.size,))
        if self._max_exp <= 2:
            # products of low powers are faster than a general power table
            powers = np.stack([np.ones_like(x), x, x * x], axis=-2)
        else:
            powers = x[..., None, :] ** np.arange(self._max_exp + 1)[:, None]
        cols = np.arange(self.ambient_dim)
        mono = np.prod(powers[..., self.exps, cols], axis=-1)
        return mono @ self.coeffs


@dataclass(frozen=True, eq=False)
class Poly1Form:
    """1-form sum_j coefficients[j] dx_j with polynomial coefficients."""

    ambient_dim: int
    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if len(coeffs) != self.ambient_dim:
            raise ValueError(
                f"{len(coeffs)} coefficients given for ambient dimension {self.ambient_dim}")
        if any(c.ambient_dim != self.ambient_dim for c in coeffs):
            raise ValueError("coefficient polynomials live on a different space")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def standard(cls, n_complex: int) -> "Poly1Form":
        """sum_j (x_j dy_j - y_j dx_j) in interleaved coordinates (x1, y1, ..., xn, yn)."""
        n = 2 * n_complex
        coeffs = []
        for j in range(n_complex):
            x, y = 2 * j, 2 * j + 1
            coeffs.append(-PolyMap.coordinate(n, y))
            coeffs.append(PolyMap.coordinate(n, x))
        return cls(n, tuple(coeffs))

    def __add__(self, other: "Poly1Form"):
        return Poly1Form(self.ambient_dim,
                         tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "Poly1Form"):
        return self + (-1) * other

    def __mul__(self, f):
        """Multiply by a scalar or a polynomial function."""
        return Poly1Form(self.ambient_dim, tuple(c * f for c in self.coefficients))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly1Form):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and all(
            a == b for a, b in zip(self.coefficients, other.coefficients))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients)

    def interior(self, vector_field: Sequence[PolyMap]) -> PolyMap:
        """The function alpha(X) for a polynomial vector field X."""
        out = PolyMap.zero(self.ambient_dim)
        for c, x in zip(self.coefficients, vector_field):
            out = out + c * x
        return out

    def extend(self, n: int) -> "Poly1Form":
        pad = tuple(PolyMap.zero(n) for _ in range(n - self.ambient_dim))
        return Poly1Form(n, tuple(c.extend(n) for c in self.coefficients) + pad)

    @cached_property
    def _stack(self) -> PolyStack:
        return PolyStack(self.coefficients, self.ambient_dim)

    def at(self, point) -> np.ndarray:
        """Coefficient vector of the form at ``point``."""
        return self._stack(point)

    def __call__(self, point, vector) -> float:
        return eval_1form(self, point, vector)

    @cached_property
    def d(self) -> "Poly2Form":
        return exterior_derivative(self)


@dataclass(frozen=True, eq=False)
class Poly2Form:
    """2-form sum_{i<j} coefficients[(i, j)] dx_i ^ dx_j."""

    ambient_dim: int
    coefficients: Mapping[tuple, PolyMap]

    def __post_init__(self):
        clean = {}
        for (i, j), c in dict(self.coefficients).items():
            if not 0 <= i < j < self.ambient_dim:
                raise ValueError(f"index pair {(i, j)} must satisfy 0 <= i < j < N")
            if c.ambient_dim != self.ambient_dim:
                raise ValueError("coefficient polynomial lives on a different space")
            if not c.is_zero():
                clean[(i, j)] = c
        object.__setattr__(self, "coefficients", clean)

    def __eq__(self, other):
        if not isinstance(other, Poly2Form):
            return NotImplemented
        keys = set(self.coefficients) | set(other.coefficients)
        zero = PolyMap.zero(self.ambient_dim)
        return self.ambient_dim == other.ambient_dim and all(
            self.coefficients.get(k, zero) == other.coefficients.get(k, zero) for k in keys)

    __hash__ = None

    def __add__(self, other: "Poly2Form"):
        coeffs = dict(self.coefficients)
        for k, v in other.coefficients.items():
            coeffs[k] = coeffs[k] + v if k in coeffs else v
        return Poly2Form(self.ambient_dim, coeffs)

    def __mul__(self, c):
        return Poly2Form(self.ambient_dim, {k: v * c for k, v in self.coefficients.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.coefficients

    def entry(self, i: int, j: int) -> PolyMap:
        """Antisymmetric coefficient omega_ij as a polynomial."""
        if i == j:
            return PolyMap.zero(self.ambient_dim)
        if i < j:
            return self.coefficients.get((i, j), PolyMap.zero(self.ambient_dim))
        return -self.coefficients.get((j, i), PolyMap.zero(self.ambient_dim))

    def interior(self, vector_field: Sequence[PolyMap]) -> Poly1Form:
        """iota(X) omega, i.e. the 1-form v -> omega(X, v)."""
        n = self.ambient_dim
        coeffs = []
        for k in range(n):
            acc = PolyMap.zero(n)
            for i in range(n):
                w = self.entry(i, k)
                if not w.is_zero():
                    acc = acc + vector_field[i] * w
            coeffs.append(acc)
        return Poly1Form(n, tuple(coeffs))

    @cached_property
    def _pairs(self):
        return list(self.coefficients)

    @cached_property
    def _stack(self) -> PolyStack:
        return PolyStack([self.coefficients[k] for k in self._pairs], self.ambient_dim)

    def matrix(self, point) -> np.ndarray:
        """Antisymmetric matrix Omega with omega(u, v) = u^T Omega v."""
        n = self.ambient_dim
        out = np.zeros((n, n))
        if self._pairs:
            vals = self._stack(point)
            idx = np.array(self._pairs)
            out[idx[:, 0], idx[:, 1]] = vals
            out[idx[:, 1], idx[:, 0]] = -vals
        return out

    def __call__(self, point, u, v) -> float:
        return float(np.asarray(u) @ self.matrix(point) @ np.asarray(v))


def eval_1form(form: Poly1Form, point, vector) -> float:
    """alpha_point(vector) = sum_j coeff_j(point) * vector_j."""
    point = np.asarray(point, dtype=float)
    vector = np.asarray(vector, dtype=float)
    if point.shape != (form.ambient_dim,) or vector.shape != (form.ambient_dim,):
        raise ValueError(
            f"expected point and vector of dimension {form.ambient_dim}, "
            f"got {point.shape} and {vector.shape}")
    return float(form.at(point) @ vector)


def exterior_derivative(form: Poly1Form) -> Poly2Form:
    """d(sum a_j dx_j) = sum_{i<j} (d_i a_j - d_j a_i) dx_i ^ dx_j, exactly."""
    n = form.ambient_dim
    a = form.coefficients
    coeffs = {}
    for i, j in itertools.combinations(range(n), 2):
        c = a[j].derivative(i) - a[i].derivative(j)
        if not c.is_zero():
            coeffs[(i, j)] = c
    return Poly2Form(n, coeffs)


def linear_vector_field(matrix) -> tuple:
    """Components of x -> M x as exact linear polynomials."""
    rows = [[as_coeff(v) for v in row] for row in matrix]
    return tuple(PolyMap.linear(row) for row in rows)


def lie_derivative_linear(form: Poly1Form, matrix) -> Poly1Form:
    """L_X alpha for the linear field X(x) = M x, via Cartan's formula."""
    field_ = linear_vector_field(matrix)
    return form.d.interior(field_) + form.interior(field_).differential()


def directional_derivative_linear(f: PolyMap, matrix) -> PolyMap:
    """X(f) for X(x) = M x."""
    field_ = linear_vector_field(matrix)
    out = PolyMap.zero(f.ambient_dim)
    for i, x in enumerate(field_):
        out = out + f.derivative(i) * x
    return out


def squared_norm(n: int, coords: Iterable[int] | None = None) -> PolyMap:
    """sum of x_i^2 over ``coords`` (all coordinates by default)."""
    coords = range(n) if coords is None else coords
    out = PolyMap.zero(n)
    for i in coords:
        out = out + PolyMap.coordinate(n, i) ** 2
    return out
