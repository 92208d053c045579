"""Lie algebra data, coadjoint calculus, kernel algebras and the linear-algebra lemmas.

Pairing and sign conventions: dual elements are coordinate vectors in the
dual basis, and the infinitesimal coadjoint action is fixed by

    <ad†(A) mu, B> = <mu, [A, B]>.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import CatalogError, DimensionError, JacobiError
from .forms import as_coeff
from .linalg import RANK_RTOL, column_space, null_space, numerical_rank, projection_residual

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

INTEGRALITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    name: str
    basis_names: tuple
    structure_constants: tuple
    trace_form: Optional[tuple] = None

    def __post_init__(self):
        dim = len(self.basis_names)
        c = self.structure_constants
        if len(c) != dim or any(len(r) != dim or any(len(v) != dim for v in r) for r in c):
            raise CatalogError(f"{self.name}: structure constants must be {dim}x{dim}x{dim}")
        for i, j, k in itertools.product(range(dim), repeat=3):
            if not isinstance(c[i][j][k], Fraction):
                raise CatalogError(f"{self.name}: structure constants must be exact rationals")
            if c[i][j][k] != -c[j][i][k]:
                raise JacobiError(f"{self.name}: antisymmetry fails at c[{i}][{j}][{k}]")
        for i, j, k, m in itertools.product(range(dim), repeat=4):
            total = sum(c[i][j][l] * c[l][k][m] + c[j][k][l] * c[l][i][m]
                        + c[k][i][l] * c[l][j][m] for l in range(dim))
            if total != 0:
                raise JacobiError(
                    f"{self.name}: Jacobi identity fails for basis ({i}, {j}, {k}), "
                    f"component {m}: {total}")

    @classmethod
    def from_brackets(cls, name: str, basis: Sequence[str], brackets: Sequence,
                      trace_form=None) -> "LieAlgebraData":
        dim = len(basis)
        c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for i, j, k, value in brackets:
            v = as_coeff(value)
            if not isinstance(v, Fraction):
                raise CatalogError(f"{name}: bracket coefficient {value!r} is not exact")
            c[i][j][k] += v
            c[j][i][k] -= v
        nested = tuple(tuple(tuple(v) for v in row) for row in c)
        tf = None
        if trace_form is not None:
            tf = tuple(tuple(as_coeff(v) for v in row) for row in trace_form)
        return cls(name, tuple(basis), nested, tf)

    @classmethod
    def abelian(cls, n: int) -> "LieAlgebraData":
        return cls.from_brackets(f"abelian{n}", [f"t{i + 1}" for i in range(n)], [])

    @property
    def dim(self) -> int:
        return len(self.basis_names)

    @cached_property
    def c(self) -> np.ndarray:
        return np.array(self.structure_constants, dtype=float).reshape(self.dim, self.dim, self.dim)

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.c)

    def bracket(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(a, float), np.asarray(b, float), self.c)


def load_catalog(path: str | Path | None = None) -> dict:
    """Read the algebra catalog; raises JacobiError on corrupted structure constants."""
    if path is None:
        text = resources.files("contactred").joinpath("data/lie_catalog.toml").read_text()
    else:
        text = Path(path).read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise CatalogError(f"cannot parse catalog: {exc}") from exc
    out = {}
    for entry in data.get("algebra", []):
        alg = LieAlgebraData.from_brackets(entry["name"], entry["basis"],
                                           entry.get("brackets", []),
                                           entry.get("trace_form"))
        out[alg.name] = alg
    return out


@dataclass(frozen=True, eq=False)
class DualElement:
    algebra: LieAlgebraData
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1)
        if coords.shape != (self.algebra.dim,):
            raise DimensionError(
                f"dual element has {coords.size} coordinates, algebra has dim {self.algebra.dim}")
        object.__setattr__(self, "coords", coords)

    def pair(self, a) -> float:
        return float(self.coords @ np.asarray(a, float))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of R^n given by orthonormal columns."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, n: int | None = None, rtol: float = RANK_RTOL,
             scale: float | None = None) -> "Subspace":
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        n = vectors.shape[0] if n is None else n
        if vectors.size == 0:
            return cls(n, np.zeros((n, 0)))
        return cls(n, column_space(vectors, rtol=rtol, scale=scale))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, other: "Subspace", tol: float = 1e-10) -> bool:
        return projection_residual(self.basis, other.basis) < tol

    def equals(self, other: "Subspace", tol: float = 1e-10) -> bool:
        return self.dim == other.dim and self.contains(other, tol) and other.contains(self, tol)


@dataclass(frozen=True)
class HypothesisReport:
    dim_stabilizer: int
    dim_kernel_algebra: int
    sum_condition_holds: bool
    kernel_equals_stabilizer: bool
    mu_integral: Optional[bool] = None


def _mu_coords(algebra: LieAlgebraData, mu) -> np.ndarray:
    if isinstance(mu, DualElement):
        return mu.coords
    return DualElement(algebra, mu).coords


def coadjoint_matrix(algebra: LieAlgebraData, mu) -> np.ndarray:
    """Matrix C with ad†(A) mu = C A, i.e. C[b, i] = <mu, [e_i, e_b]>."""
    m = _mu_coords(algebra, mu)
    return np.einsum("ibk,k->bi", algebra.c, m)


def coadjoint_action(algebra: LieAlgebraData, a, mu) -> DualElement:
    a = np.asarray(a, dtype=float)
    if a.shape != (algebra.dim,):
        raise DimensionError("algebra vector has the wrong dimension")
    return DualElement(algebra, coadjoint_matrix(algebra, mu) @ a)


def _coadjoint_scale(algebra: LieAlgebraData, mu) -> float:
    return float(np.linalg.norm(_mu_coords(algebra, mu)) * np.max(np.abs(algebra.c), initial=0.0))


def coadjoint_stabilizer(algebra: LieAlgebraData, mu) -> Subspace:
    """Infinitesimal stabilizer g_mu = ker(A -> ad†(A) mu)."""
    cmat = coadjoint_matrix(algebra, mu)
    return Subspace(algebra.dim, null_space(cmat, scale=_coadjoint_scale(algebra, mu),
                                            ncols=algebra.dim))


def kernel_algebra(algebra: LieAlgebraData, mu) -> Subspace:
    """k_mu = ker(mu restricted to g_mu), with the ideal property verified."""
    m = _mu_coords(algebra, mu)
    stab = coadjoint_stabilizer(algebra, mu)
    row = m @ stab.basis
    if stab.dim == 0 or numerical_rank(row[None, :], scale=np.linalg.norm(m)) == 0:
        kern = stab.basis
    else:
        kern = stab.basis @ null_space(row[None, :], ncols=stab.dim)
    scale = max(1.0, float(np.linalg.norm(m))) * max(1.0, float(np.max(np.abs(algebra.c), initial=0)))
    for a in kern.T:
        for b in stab.basis.T:
            val = m @ algebra.bracket(a, b)
            if abs(val) > 1e-10 * scale:
                raise CatalogError(
                    f"{algebra.name}: kernel algebra is not an ideal in the stabilizer "
                    f"(<mu,[A,B]> = {val:.3e}); structure constants are inconsistent")
    return Subspace(algebra.dim, kern)


def annihilator_kernel(algebra: LieAlgebraData, mu) -> Subspace:
    """ker mu as a subspace of g."""
    m = _mu_coords(algebra, mu)
    if not np.any(m):
        return Subspace(algebra.dim, np.eye(algebra.dim))
    return Subspace(algebra.dim, null_space(m[None, :], ncols=algebra.dim))


def is_integral(mu, lattice) -> bool:
    """All pairings of mu with the lattice generators are integers."""
    m = np.asarray(mu, dtype=float)
    vals = np.asarray(lattice, dtype=float) @ m
    return bool(np.all(np.abs(vals - np.round(vals)) <= INTEGRALITY_TOL))


def check_reduction_hypotheses(algebra: LieAlgebraData, mu,
                               weight_lattice=None) -> HypothesisReport:
    """Stabilizer and kernel dimensions, ker mu + g_mu = g, and integrality.

    ``weight_lattice`` is a list of vectors of g (rows) whose exponentials
    are the identity, e.g. the standard basis for a torus whose generators
    have period 2*pi.
    """
    m = _mu_coords(algebra, mu)
    stab = coadjoint_stabilizer(algebra, mu)
    kern = kernel_algebra(algebra, mu)
    ker_mu = annihilator_kernel(algebra, mu)
    total = numerical_rank(np.hstack([ker_mu.basis, stab.basis]))
    integral = None if weight_lattice is None else is_integral(m, weight_lattice)
    return HypothesisReport(
        dim_stabilizer=stab.dim,
        dim_kernel_algebra=kern.dim,
        sum_condition_holds=total == algebra.dim,
        kernel_equals_stabilizer=kern.dim == stab.dim,
        mu_integral=integral,
    )


def _check_antisymmetric(form: np.ndarray) -> np.ndarray:
    form = np.asarray(form, dtype=float)
    if form.ndim != 2 or form.shape[0] != form.shape[1]:
        raise DimensionError("bilinear form must be a square matrix")
    if form.size and np.max(np.abs(form + form.T)) > 1e-12 * max(1.0, np.max(np.abs(form))):
        raise ValueError("bilinear form is not antisymmetric")
    return form


def bilinear_kernel(form, scale: float | None = None) -> Subspace:
    """ker omega = {v : omega(v, .) = 0} for an antisymmetric matrix.

    ``scale`` is the size of the form this one was restricted from, so that
    a restriction that is zero up to rounding is recognized as zero.
    """
    form = _check_antisymmetric(form)
    return Subspace(form.shape[0], null_space(form, scale=scale, ncols=form.shape[0]))


def restrict_form(form, sub: Subspace) -> np.ndarray:
    """Matrix of omega restricted to a subspace, in the subspace's basis."""
    return sub.basis.T @ np.asarray(form, float) @ sub.basis


def symplectic_perp(form, w: Subspace) -> Subspace:
    """W^omega = {v : omega(v, w) = 0 for all w in W} for a nondegenerate omega."""
    form = _check_antisymmetric(form)
    n = form.shape[0]
    if numerical_rank(form) < n:
        raise ValueError("symplectic_perp requires a nondegenerate form")
    if w.dim == 0:
        return Subspace(n, np.eye(n))
    return Subspace(n, null_space(w.basis.T @ form, ncols=n))


def orbit_tangent(algebra: LieAlgebraData, mu) -> Subspace:
    """T_mu(G.mu) = image of A -> ad†(A) mu, which equals the annihilator of g_mu."""
    return Subspace.span(coadjoint_matrix(algebra, mu), n=algebra.dim,
                         scale=_coadjoint_scale(algebra, mu))


def slice_tangent(algebra: LieAlgebraData, mu, inner_product=None) -> Subspace:
    """Tangent at mu of the cone R+ (mu + small ball in the complement of the orbit tangent)."""
    m = _mu_coords(algebra, mu)
    g = np.eye(algebra.dim) if inner_product is None else np.asarray(inner_product, float)
    orbit = orbit_tangent(algebra, mu)
    if orbit.dim:
        normal = null_space(orbit.basis.T @ g, ncols=algebra.dim)
    else:
        normal = np.eye(algebra.dim)
    return Subspace.span(np.hstack([normal, m[:, None]]), n=algebra.dim)


def slice_intersection_check(algebra: LieAlgebraData, mu, inner_product=None) -> bool:
    """True iff T_mu(G.mu) ∩ T_mu S = 0 for the standard dilation-invariant slice S.

    This is exactly what makes (R+ mu + ann(g_mu)) ∩ S collapse to the ray R+ mu.
    ``inner_product`` is a symmetric matrix on g* (identity by default).
    """
    orbit = orbit_tangent(algebra, mu)
    slc = slice_tangent(algebra, mu, inner_product)
    return numerical_rank(np.hstack([orbit.basis, slc.basis])) == orbit.dim + slc.dim


def dual_trace_form(algebra: LieAlgebraData) -> np.ndarray:
    """Inner product on g* induced by the algebra's trace form (inverse matrix)."""
    if algebra.trace_form is None:
        raise CatalogError(f"{algebra.name} has no trace form in the catalog")
    return np.linalg.inv(np.array(algebra.trace_form, dtype=float))
