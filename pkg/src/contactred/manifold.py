"""Polynomial constraint loci: tangent frames, Newton projection, level tangents."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DegenerateLevelError, OffManifoldError, SingularPointError
from .forms import PolyMap, PolyStack
from .linalg import RANK_RTOL, column_space, null_space

ON_MANIFOLD_TOL = 1e-8
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
# Accuracy floor for classifying near-singular directions of a sampled level
# set: a point within distance d of a degenerate stratum sees singular values
# of order d while its residual is of order d**2, so sqrt(NEWTON_TOL).
LEVEL_RTOL = 1e-6


class PolySystem:
    """A list of polynomial equations on R^n with compiled values and derivatives."""

    def __init__(self, polys: Sequence[PolyMap], n: int):
        self.polys = tuple(polys)
        self.n = n
        for p in self.polys:
            if p.ambient_dim != n:
                raise ValueError("polynomial dimension does not match system dimension")

    def __len__(self):
        return len(self.polys)

    @cached_property
    def _values(self) -> PolyStack:
        return PolyStack(self.polys, self.n)

    @cached_property
    def _jac(self) -> PolyStack:
        return PolyStack([p.derivative(j) for p in self.polys for j in range(self.n)], self.n)

    @cached_property
    def _hess(self) -> PolyStack:
        return PolyStack([p.derivative(i).derivative(j) for p in self.polys
                          for i in range(self.n) for j in range(self.n)], self.n)

    def values(self, x) -> np.ndarray:
        if not self.polys:
            return np.zeros(0)
        return self._values(x)

    def jacobian(self, x) -> np.ndarray:
        if not self.polys:
            return np.zeros((0, self.n))
        return self._jac(x).reshape(len(self.polys), self.n)

    def hessians(self, x) -> np.ndarray:
        if not self.polys:
            return np.zeros((0, self.n, self.n))
        return self._hess(x).reshape(len(self.polys), self.n, self.n)

    def residual(self, x) -> float:
        v = self.values(x)
        return float(np.max(np.abs(v))) if v.size else 0.0

    def extended(self, extra: Sequence[PolyMap]) -> "PolySystem":
        return PolySystem(self.polys + tuple(extra), self.n)


@dataclass(frozen=True, eq=False)
class EmbeddedManifold:
    """Zero locus of polynomial constraints in R^N with its expected dimension."""

    ambient_dim: int
    constraints: tuple
    expected_dim: int
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not 0 <= self.expected_dim <= self.ambient_dim:
            raise ValueError("expected_dim must lie between 0 and ambient_dim")

    @cached_property
    def system(self) -> PolySystem:
        return PolySystem(self.constraints, self.ambient_dim)

    def residual(self, point) -> float:
        return self.system.residual(point)

    def on_manifold(self, point, tol: float = ON_MANIFOLD_TOL) -> bool:
        return self.residual(point) <= tol

    def check_point(self, point, tol: float = ON_MANIFOLD_TOL) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.ambient_dim,):
            raise ValueError(f"point must have shape ({self.ambient_dim},)")
        r = self.residual(point)
        if r > tol:
            raise OffManifoldError(f"max constraint residual {r:.3e} exceeds {tol:.0e}")
        return point

    def jacobian(self, point) -> np.ndarray:
        return self.system.jacobian(point)

    def with_constraints(self, extra: Sequence[PolyMap], expected_dim: int,
                         name: str = "") -> "EmbeddedManifold":
        return EmbeddedManifold(self.ambient_dim, self.constraints + tuple(extra),
                                expected_dim, name or self.name)

    def project(self, point, max_iter: int = NEWTON_MAX_ITER, tol: float = NEWTON_TOL):
        return newton_project(self.system, point, max_iter=max_iter, tol=tol)


@dataclass(frozen=True, eq=False)
class TangentFrame:
    """Orthonormal basis (columns of ``basis``) of T_pM."""

    point: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def tangent_frame(manifold: EmbeddedManifold, point) -> TangentFrame:
    """Orthonormal nullspace of the constraint Jacobian via SVD."""
    point = manifold.check_point(point)
    n = manifold.ambient_dim
    if not manifold.constraints:
        return TangentFrame(point, np.eye(n))
    jac = manifold.jacobian(point)
    _, s, vt = np.linalg.svd(jac, full_matrices=True)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    if rank != n - manifold.expected_dim:
        raise SingularPointError(
            f"constraint Jacobian has rank {rank}, expected {n - manifold.expected_dim}")
    return TangentFrame(point, vt[rank:].T.copy())


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    converged: bool
    iterations: int


def newton_project(system: PolySystem, x0, max_iter: int = NEWTON_MAX_ITER,
                   tol: float = NEWTON_TOL, polish: bool = True) -> NewtonResult:
    """Damped minimum-norm Newton iteration onto {system = 0}.

    With ``polish`` the iteration continues after the residual drops below
    ``tol`` until the step itself is negligible, which drives points on
    degenerate (non-transverse) level sets much closer to the locus.
    """
    x = np.array(x0, dtype=float)
    if not len(system):
        return NewtonResult(x, 0.0, True, 0)
    c = system.values(x)
    res = float(np.max(np.abs(c)))
    if res < tol and not polish:
        return NewtonResult(x, res, True, 0)
    it = 0
    for it in range(1, max_iter + 1):
        if not np.all(np.isfinite(c)):
            break
        jac = system.jacobian(x)
        step = np.linalg.lstsq(jac, -c, rcond=None)[0]
        norm_c = float(np.linalg.norm(c))
        t = 1.0
        for _ in range(12):
            trial = x + t * step
            ct = system.values(trial)
            if np.all(np.isfinite(ct)) and np.linalg.norm(ct) < norm_c:
                break
            t *= 0.5
        else:
            t = 1.0
            trial = x + step
            ct = system.values(trial)
        x, c = trial, ct
        res = float(np.max(np.abs(c)))
        if res < tol and (not polish
                          or np.linalg.norm(t * step) <= 1e-14 * (1.0 + np.linalg.norm(x))):
            break
    converged = bool(np.isfinite(res) and res < tol)
    return NewtonResult(x, res, converged, it)


@dataclass
class LevelTangent:
    """Tangent space of a (possibly degenerate) polynomial level set at a point."""

    basis: np.ndarray
    regular: bool

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def level_tangent(system: PolySystem, point) -> LevelTangent:
    """Tangent space of {system = 0} at a sampled point.

    At regular points this is the Jacobian nullspace.  Where the Jacobian
    drops rank, every combination g of the equations annihilating the
    Jacobian has vanishing gradient, and its Hessian restricted to the
    Jacobian nullspace K constrains the tangent cone.  If each such Hessian
    is semidefinite on K (a clean, Morse-Bott type level) the tangent space
    is the common kernel; otherwise the level is singular and we raise.
    """
    point = np.asarray(point, dtype=float)
    n = system.n
    if not len(system):
        return LevelTangent(np.eye(n), True)
    jac = system.jacobian(point)
    u, s, vt = np.linalg.svd(jac, full_matrices=True)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > LEVEL_RTOL * top)) if top > 0 else 0
    kernel = vt[rank:].T
    left = u[:, rank:]
    if left.shape[1] == 0 or kernel.shape[1] == 0:
        return LevelTangent(kernel.copy(), True)
    hess = system.hessians(point)
    blocks = []
    for lam in left.T:
        q = kernel.T @ np.tensordot(lam, hess, axes=1) @ kernel
        q = 0.5 * (q + q.T)
        eig = np.linalg.eigvalsh(q)
        scale = float(np.max(np.abs(eig)))
        if scale <= RANK_RTOL * max(1.0, top):
            continue
        if eig[0] < -LEVEL_RTOL * scale and eig[-1] > LEVEL_RTOL * scale:
            raise DegenerateLevelError(
                "level set is singular and its second-order form is indefinite "
                f"(eigenvalues {eig[0]:.3e} .. {eig[-1]:.3e})")
        blocks.append(q / scale)
    if not blocks:
        return LevelTangent(kernel.copy(), False)
    inner = null_space(np.vstack(blocks), rtol=LEVEL_RTOL, ncols=kernel.shape[1])
    return LevelTangent(kernel @ inner, False)


def project_to_coordinates(basis: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the image of ``basis`` under dropping coordinates >= n."""
    return column_space(basis[:n], rtol=LEVEL_RTOL)
