"""Linear Lie algebra actions on R^N, contact moment maps and Reeb flows.

Convention: the generator of a basis element A acts by A_M(x) = M_A x and the
matrices satisfy [M_i, M_j] = sum_k c[i][j][k] M_k.  A weight-w circle factor
acts on a complex coordinate by the block [[0, -w], [w, 0]], so with the
standard form the moment map is sum_j w_j |z_j|^2.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .contact import ReebEvaluator
from .errors import DimensionError, IntegrationError, PreconditionError
from .forms import Poly1Form, PolyMap, as_coeff, linear_vector_field
from .lie import LieAlgebraData, Subspace, coadjoint_matrix
from .linalg import column_space, null_space
from .manifold import EmbeddedManifold, PolySystem, newton_project, tangent_frame

COMMUTATOR_TOL = 1e-12
CONFORMAL_TOL = 1e-10
REEB_STEP_FRACTION = 1e-3
REEB_PROJECT_ITER = 5
REEB_PROJECT_TOL = 1e-12
REEB_MAX_DRIFT = 1e-10


def _exact_matrix(m) -> tuple:
    return tuple(tuple(as_coeff(v) for v in row) for row in m)


@dataclass(frozen=True, eq=False)
class LinearAction:
    algebra: LieAlgebraData
    generator_matrices: tuple
    weight_matrix: Optional[tuple] = None

    def __post_init__(self):
        mats = tuple(_exact_matrix(m) for m in self.generator_matrices)
        object.__setattr__(self, "generator_matrices", mats)
        if len(mats) != self.algebra.dim:
            raise DimensionError(
                f"{len(mats)} generators for an algebra of dimension {self.algebra.dim}")
        n = len(mats[0]) if mats else 0
        if any(len(m) != n or any(len(r) != n for r in m) for m in mats):
            raise DimensionError("generator matrices must be square and of equal size")
        if self.weight_matrix is not None:
            object.__setattr__(self, "weight_matrix",
                               tuple(tuple(int(w) for w in row) for row in self.weight_matrix))
        m = self.matrices
        c = self.algebra.c
        for i, j in itertools.combinations(range(len(mats)), 2):
            comm = m[i] @ m[j] - m[j] @ m[i]
            expected = np.tensordot(c[i, j], m, axes=1)
            gap = float(np.max(np.abs(comm - expected), initial=0.0))
            if gap > COMMUTATOR_TOL * max(1.0, float(np.max(np.abs(m)))):
                raise DimensionError(
                    f"generators {i}, {j} do not represent the algebra bracket (gap {gap:.3e})")

    @property
    def ambient_dim(self) -> int:
        return len(self.generator_matrices[0])

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def is_torus(self) -> bool:
        return self.weight_matrix is not None

    @cached_property
    def matrices(self) -> np.ndarray:
        return np.array(self.generator_matrices, dtype=float).reshape(
            self.dim, self.ambient_dim, self.ambient_dim)

    def combination(self, a) -> np.ndarray:
        """Matrix of the algebra element with coordinates ``a``."""
        return np.tensordot(np.asarray(a, float), self.matrices, axes=1)

    def group_element(self, a, s: float = 1.0) -> np.ndarray:
        return expm(s * self.combination(a))

    def fields(self, point) -> np.ndarray:
        """Columns A_M(x) for each basis element, shape (N, dim)."""
        return np.einsum("inm,m->ni", self.matrices, np.asarray(point, float))


def rotation_block(w) -> list:
    return [[0, -w], [w, 0]]


def torus_action(weights) -> LinearAction:
    """Torus T^k acting on C^n; row r of ``weights`` gives the weights of circle factor r."""
    weights = [[int(w) for w in row] for row in weights]
    k, n = len(weights), len(weights[0])
    mats = []
    for row in weights:
        m = [[0] * (2 * n) for _ in range(2 * n)]
        for j, w in enumerate(row):
            m[2 * j][2 * j + 1] = -w
            m[2 * j + 1][2 * j] = w
        mats.append(m)
    return LinearAction(LieAlgebraData.abelian(k), tuple(mats), tuple(map(tuple, weights)))


def so3_on_c3(algebra: LieAlgebraData) -> LinearAction:
    """Real rotations of C^3 = R^3 + i R^3 acting on both real and imaginary parts."""
    mats = []
    for k in range(3):
        lk = np.zeros((3, 3), dtype=int)
        for i, j in itertools.permutations(range(3), 2):
            eps = _levi_civita(k, i, j)
            lk[i, j] = -eps
        mats.append(np.kron(lk, np.eye(2, dtype=int)).tolist())
    return LinearAction(algebra, tuple(mats))


def _levi_civita(i, j, k) -> int:
    return int(np.sign((j - i) * (k - i) * (k - j)))


def trivial_action(ambient_dim: int) -> LinearAction:
    return LinearAction(LieAlgebraData.abelian(1),
                        (tuple(tuple([0] * ambient_dim) for _ in range(ambient_dim)),))


def generator_field(action: LinearAction, basis_index: int, point) -> np.ndarray:
    if not 0 <= basis_index < action.dim:
        raise IndexError(f"basis index {basis_index} out of range for dimension {action.dim}")
    return action.matrices[basis_index] @ np.asarray(point, float)


@dataclass(frozen=True)
class MomentValue:
    coords: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


class MomentMap:
    """Components <Phi, e_i> = alpha(M_i x) as exact polynomials, compiled for evaluation."""

    def __init__(self, action: LinearAction, form: Poly1Form):
        if form.ambient_dim != action.ambient_dim:
            raise DimensionError("form and action live on different spaces")
        self.action = action
        self.form = form
        self.polys = tuple(form.interior(linear_vector_field(m))
                           for m in action.generator_matrices)
        self.system = PolySystem(self.polys, form.ambient_dim)

    def __call__(self, point) -> np.ndarray:
        return self.system.values(point)

    def jacobian(self, point) -> np.ndarray:
        return self.system.jacobian(point)


_MOMENT_CACHE: dict = {}


def moment_of(action: LinearAction, form: Poly1Form) -> MomentMap:
    """Cached MomentMap keyed on object identity (forms are unhashable)."""
    key = (id(action), id(form))
    hit = _MOMENT_CACHE.get(key)
    if hit is None or hit.action is not action or hit.form is not form:
        if len(_MOMENT_CACHE) > 256:
            _MOMENT_CACHE.clear()
        hit = _MOMENT_CACHE[key] = MomentMap(action, form)
    return hit


def moment_polys(action: LinearAction, form: Poly1Form) -> tuple:
    return moment_of(action, form).polys


def moment_map(action: LinearAction, form: Poly1Form, point) -> MomentValue:
    point = np.asarray(point, float)
    if point.shape != (action.ambient_dim,):
        raise DimensionError("point has the wrong dimension")
    return MomentValue(moment_of(action, form)(point))


def conformal_rescale(form: Poly1Form, f: PolyMap, points=None) -> Poly1Form:
    """f * alpha, after checking f > 0 at the supplied sample points."""
    if points is not None:
        for p in np.atleast_2d(np.asarray(points, float)):
            if f(p) <= 0:
                raise PreconditionError(f"rescaling function is not positive at {p}")
    return f * form


def conformal_moment_gap(action: LinearAction, form: Poly1Form, f: PolyMap, points) -> float:
    """max |Phi_{f alpha}(x) - f(x) Phi_alpha(x)| over the points."""
    scaled = conformal_rescale(form, f, points)
    gap = 0.0
    for p in np.atleast_2d(np.asarray(points, float)):
        lhs = moment_map(action, scaled, p).coords
        rhs = f(p) * moment_map(action, form, p).coords
        gap = max(gap, float(np.max(np.abs(lhs - rhs))))
    return gap


def symplectization_moment(action: LinearAction, form: Poly1Form, point, t: float) -> MomentValue:
    return MomentValue(np.exp(t) * moment_map(action, form, point).coords)


@dataclass(frozen=True)
class MomentDifferential:
    lhs: float
    rhs: float
    gap: float


def moment_differential_check(action: LinearAction, form: Poly1Form, point, v,
                              basis_index: int) -> MomentDifferential:
    """Compare d<Phi, A>(v) with d alpha(v, A_M(x)), both from exact derivatives."""
    point = np.asarray(point, float)
    v = np.asarray(v, float)
    grad = moment_of(action, form).jacobian(point)[basis_index]
    lhs = float(grad @ v)
    rhs = float(v @ form.d.matrix(point) @ generator_field(action, basis_index, point))
    return MomentDifferential(lhs, rhs, abs(lhs - rhs))


def infinitesimal_equivariance_gap(action: LinearAction, form: Poly1Form, point) -> float:
    """max over A, B of |d<Phi, B>(A_M) + <ad†(A) Phi, B>|.

    With A_M(x) = M_A x and M a homomorphism, the moment map of an
    invariant form satisfies d<Phi, B>(A_M) = -<ad†(A) Phi, B>.
    """
    point = np.asarray(point, float)
    mm = moment_of(action, form)
    lhs = mm.jacobian(point) @ action.fields(point)  # [B, A]
    rhs = coadjoint_matrix(action.algebra, mm(point))  # [B, A]
    return float(np.max(np.abs(lhs + rhs), initial=0.0))


def reeb_aligned_subspace(action: LinearAction, form: Poly1Form,
                          manifold: EmbeddedManifold, point) -> Subspace:
    """{A in g : A_M(x) in R Y(x)}."""
    from .contact import reeb_field
    y = reeb_field(manifold, form, point)
    fields = action.fields(point)
    sol = null_space(np.hstack([fields, -y[:, None]]),
                     scale=max(1.0, float(np.max(np.abs(fields), initial=0.0))))
    return Subspace.span(sol[: action.dim], n=action.dim)


def moment_image_annihilator(action: LinearAction, form: Poly1Form,
                             manifold: EmbeddedManifold, point) -> Subspace:
    """Annihilator in g of Im d(Phi)_x restricted to T_xM."""
    frame = tangent_frame(manifold, point)
    jac = moment_of(action, form).jacobian(frame.point)
    dphi = jac @ frame.basis
    # rank relative to the ambient derivative: on TM the restriction may be pure roundoff
    return Subspace(action.dim, null_space(dphi.T, ncols=action.dim,
                                           scale=float(np.linalg.norm(jac, 2))))


def reeb_flow(manifold: EmbeddedManifold, form: Poly1Form, point, horizon: float,
              step_fraction: float = REEB_STEP_FRACTION) -> np.ndarray:
    """RK4 trajectory of the Reeb field with Newton re-projection after each step.

    Returns the array of visited points, including the start.
    """
    x = manifold.check_point(point).copy()
    field = ReebEvaluator(manifold, form)
    n_steps = max(1, int(round(1.0 / step_fraction)))
    h = horizon / n_steps
    out = [x.copy()]
    for _ in range(n_steps):
        k1 = field(x)
        k2 = field(x + 0.5 * h * k1)
        k3 = field(x + 0.5 * h * k2)
        k4 = field(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if manifold.constraints:
            res = newton_project(manifold.system, x, max_iter=REEB_PROJECT_ITER,
                                 tol=REEB_PROJECT_TOL, polish=False)
            if res.residual > REEB_MAX_DRIFT:
                raise IntegrationError(
                    f"Reeb flow left the manifold (residual {res.residual:.3e})")
            x = res.x
        out.append(x.copy())
    return np.array(out)


def reeb_flow_level_invariance(action: LinearAction, form: Poly1Form,
                               manifold: EmbeddedManifold, point, horizon: float) -> float:
    """max_t |Phi(flow_t(x)) - Phi(x)| along the integrated Reeb orbit."""
    traj = reeb_flow(manifold, form, point, horizon)
    mm = moment_of(action, form)
    values = mm(traj)
    return float(np.max(np.abs(values - values[0]), initial=0.0))


def invariance_residuals(action: LinearAction, form: Poly1Form) -> list:
    """Exact Lie derivatives of the form along every generator (all zero when invariant)."""
    from .forms import lie_derivative_linear
    return [lie_derivative_linear(form, m) for m in action.generator_matrices]


def tangency_residuals(action: LinearAction, manifold: EmbeddedManifold) -> list:
    """Derivatives of every constraint along every generator, as exact polynomials.

    A generator is tangent when each derivative vanishes on the manifold; for
    the quadratic invariant constraints used here it vanishes identically.
    """
    from .forms import directional_derivative_linear
    return [directional_derivative_linear(c, m)
            for m in action.generator_matrices for c in manifold.constraints]
