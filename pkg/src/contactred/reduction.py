"""Reduction at the ray R+ mu, orbit types, the Albert quotient and dimension bookkeeping.

Numerical dimensions are tangent ranks at sampled points.  Sampling solves
the joint system {constraints, Phi(x) - s mu} in the unknowns (x, s) by
Newton projection from seeds on a bounding sphere; each seed draws from its
own stream so results do not depend on evaluation order or worker count.
"""
from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import sympy

from .actions import moment_of
from .contact import contact_check, reeb_field
from .errors import (DegenerateLevelError, DimensionMismatchError, NonRegularValueError,
                     NotTorusError, PreconditionError, ScenarioError)
from .forms import Poly1Form, PolyMap
from .lie import (HypothesisReport, Subspace, check_reduction_hypotheses, coadjoint_stabilizer,
                  is_integral, kernel_algebra)
from .linalg import (RANK_RTOL, column_space, max_principal_angle, null_space,
                     numerical_rank)
from .manifold import (LEVEL_RTOL, NEWTON_TOL, EmbeddedManifold, PolySystem, level_tangent,
                       newton_project, project_to_coordinates)

ACCEPT_RESIDUAL = 1e-10
MIN_RAY_PARAMETER = 1e-9
DEDUP_RADIUS = 1e-6
ZERO_COORD_TOL = 1e-6
AGREEMENT_FRACTION = 0.9
ANGLE_TOL = 1e-6
OVERSAMPLE_ROUNDS = 4
# stream family for strict-level sampling; ray sampling uses pattern bitmasks
LEVEL_STREAM_TAG = 1 << 16


def _mu_array(scenario, mu) -> np.ndarray:
    m = np.array([float(v) for v in np.atleast_1d(mu)], dtype=float)
    if m.shape != (scenario.algebra.dim,):
        raise ValueError(f"mu has {m.size} coordinates, algebra has dim {scenario.algebra.dim}")
    return m


def _form(scenario, form):
    return scenario.form if form is None else form


def _pattern_constraints(n: int, zero_coords: Sequence[int]) -> list:
    out = []
    for j in zero_coords:
        out.append(PolyMap.coordinate(n, 2 * j))
        out.append(PolyMap.coordinate(n, 2 * j + 1))
    return out


_SYSTEM_CACHE: dict = {}


def _cached(kind, objs, params, build):
    """Memoize compiled systems on object identity (forms are unhashable)."""
    key = (kind, tuple(id(o) for o in objs), params)
    hit = _SYSTEM_CACHE.get(key)
    if hit is None or any(a is not b for a, b in zip(hit[0], objs)):
        if len(_SYSTEM_CACHE) > 512:
            _SYSTEM_CACHE.clear()
        hit = _SYSTEM_CACHE[key] = (objs, build())
    return hit[1]


def ray_system(scenario, mu, form: Poly1Form | None = None, zero_coords=()) -> PolySystem:
    """Equations in (x, s): constraints, vanishing pattern coordinates, Phi(x) - s mu."""
    form = _form(scenario, form)
    m = _mu_array(scenario, mu)
    zero_coords = tuple(sorted(zero_coords))

    def build():
        n = scenario.manifold.ambient_dim
        polys = [c.extend(n + 1) for c in scenario.manifold.constraints]
        polys += [p.extend(n + 1) for p in _pattern_constraints(n, zero_coords)]
        s = PolyMap.coordinate(n + 1, n)
        for phi, mk in zip(moment_of(scenario.action, form).polys, m):
            polys.append(phi.extend(n + 1) - float(mk) * s)
        return PolySystem(polys, n + 1)

    return _cached("ray", (scenario, form), (tuple(m.tolist()), zero_coords), build)


def level_system(scenario, mu, form: Poly1Form | None = None, zero_coords=()) -> PolySystem:
    """Equations in x: constraints and Phi(x) - mu (the strict level)."""
    form = _form(scenario, form)
    m = _mu_array(scenario, mu)
    zero_coords = tuple(sorted(zero_coords))

    def build():
        n = scenario.manifold.ambient_dim
        polys = list(scenario.manifold.constraints) + _pattern_constraints(n, zero_coords)
        for phi, mk in zip(moment_of(scenario.action, form).polys, m):
            polys.append(phi - float(mk))
        return PolySystem(polys, n)

    return _cached("level", (scenario, form), (tuple(m.tolist()), zero_coords), build)


@dataclass
class SampleSet:
    scenario_id: str
    mu: np.ndarray
    points: np.ndarray
    ray_parameters: np.ndarray
    seed_indices: np.ndarray
    diagnostic: str = ""

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def empty(cls, scenario_id, mu, n, diagnostic="") -> "SampleSet":
        return cls(scenario_id, np.asarray(mu, float), np.zeros((0, n)), np.zeros(0),
                   np.zeros(0, dtype=int), diagnostic)

    def merged(self, other: "SampleSet") -> "SampleSet":
        return SampleSet(self.scenario_id, self.mu,
                         np.vstack([self.points, other.points]),
                         np.concatenate([self.ray_parameters, other.ray_parameters]),
                         np.concatenate([self.seed_indices, other.seed_indices]),
                         "; ".join(d for d in (self.diagnostic, other.diagnostic) if d))


def _seed_point(scenario, seed: int, tag: int, index: int, zero_coords) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(tag, index)))
    x = rng.standard_normal(scenario.manifold.ambient_dim)
    for j in zero_coords:
        x[2 * j:2 * j + 2] = 0.0
    norm = np.linalg.norm(x)
    if norm == 0.0:
        x[0], norm = 1.0, 1.0
    return scenario.bounding_radius * x / norm


def _pattern_tag(zero_coords) -> int:
    return sum(1 << j for j in zero_coords)


def _dedup(points: np.ndarray, order_key: np.ndarray) -> np.ndarray:
    """Indices kept by a greedy radius filter over a canonical lexicographic order."""
    if len(points) == 0:
        return np.zeros(0, dtype=int)
    order = np.lexsort(points.T[::-1])
    kept: list = []
    for i in order:
        if all(np.linalg.norm(points[i] - points[k]) >= DEDUP_RADIUS for k in kept):
            kept.append(i)
    kept = np.array(kept, dtype=int)
    return kept[np.argsort(order_key[kept], kind="stable")]


def _solve_ray_seed(scenario, system: PolySystem, m: np.ndarray, form, seed, tag, index,
                    zero_coords):
    x0 = _seed_point(scenario, seed, tag, index, zero_coords)
    phi = moment_of(scenario.action, form)(x0)
    s0 = float(phi @ m) / float(m @ m)
    if s0 <= 0:
        s0 = float(np.linalg.norm(phi)) / float(np.linalg.norm(m)) or 1e-3
    res = newton_project(system, np.append(x0, s0))
    if not res.converged or res.residual >= ACCEPT_RESIDUAL:
        return None
    if res.x[-1] <= MIN_RAY_PARAMETER:
        return None
    return res.x


def sample_level_ray(scenario, mu, n_samples: int, seed: int = 0, workers: int = 1,
                     zero_coords: Sequence[int] = (), form: Poly1Form | None = None) -> SampleSet:
    """Up to ``n_samples`` distinct points of Phi^-1(R+ mu), optionally inside a zero pattern."""
    if scenario.action is None:
        raise ScenarioError(f"{scenario.id} is a bookkeeping scenario and cannot be sampled")
    m = _mu_array(scenario, mu)
    if not np.any(m):
        raise ValueError("mu must be nonzero for ray sampling")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    form = _form(scenario, form)
    zero_coords = tuple(sorted(zero_coords))
    system = ray_system(scenario, m, form, zero_coords)
    tag = _pattern_tag(zero_coords)
    n = scenario.manifold.ambient_dim
    sols: list = []
    idx: list = []

    def solve(i):
        return _solve_ray_seed(scenario, system, m, form, seed, tag, i, zero_coords)

    kept = np.zeros(0, dtype=int)
    pts = np.zeros((0, n + 1))
    for rnd in range(OVERSAMPLE_ROUNDS):
        batch = range(rnd * n_samples, (rnd + 1) * n_samples)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(solve, batch))
        else:
            results = [solve(i) for i in batch]
        for i, r in zip(batch, results):
            if r is not None:
                sols.append(r)
                idx.append(i)
        if not sols:
            break  # a full round without a solution: treat the set as empty
        pts = np.array(sols)
        kept = _dedup(pts[:, :n], np.array(idx))
        if len(kept) >= n_samples:
            break
    if len(kept) == 0:
        return SampleSet.empty(scenario.id, m, n,
                               f"no seed converged to Phi = s mu with s > 0 "
                               f"(zero pattern {list(zero_coords)})")
    kept = kept[:n_samples]
    diag = "" if len(kept) == n_samples else f"only {len(kept)} distinct samples found"
    return SampleSet(scenario.id, m, pts[kept, :n].copy(), pts[kept, n].copy(),
                     np.array(idx)[kept], diag)


def ray_parameter(scenario, mu, point, form=None) -> float:
    m = _mu_array(scenario, mu)
    phi = moment_of(scenario.action, _form(scenario, form))(point)
    return float(phi @ m) / float(m @ m)


def ray_membership(scenario, mu, point, form=None, tol: float = 1e-8) -> bool:
    """Phi(x) lies on the open ray R+ mu (to tolerance relative to |Phi|)."""
    m = _mu_array(scenario, mu)
    phi = moment_of(scenario.action, _form(scenario, form))(point)
    s = float(phi @ m) / float(m @ m)
    return bool(s > MIN_RAY_PARAMETER and np.linalg.norm(phi - s * m) <= tol * max(1.0, abs(s)))


# -- pointwise checks -------------------------------------------------------

def _moment_derivative_on_frame(scenario, point, form=None) -> tuple:
    """d(Phi)_x on a tangent frame, and the norm of the ambient Jacobian as its scale."""
    from .manifold import tangent_frame
    frame = tangent_frame(scenario.manifold, point)
    jac = moment_of(scenario.action, _form(scenario, form)).jacobian(frame.point)
    return jac @ frame.basis, float(np.linalg.norm(jac, 2))


def transversality_check(scenario, mu, point, form=None) -> bool:
    """rank [Im d(Phi)_x | mu] = dim g*."""
    m = _mu_array(scenario, mu)
    d, scale = _moment_derivative_on_frame(scenario, point, form)
    stacked = np.hstack([d / max(scale, 1e-300), (m / np.linalg.norm(m))[:, None]])
    return numerical_rank(stacked, RANK_RTOL, scale=1.0) == len(m)


def _kernel_fields(scenario, mu, point) -> tuple:
    kern = kernel_algebra(scenario.algebra, _mu_array(scenario, mu))
    fields = scenario.action.fields(point) @ kern.basis
    scale = float(np.linalg.norm(point)) * max(1.0, float(np.max(np.abs(scenario.action.matrices))))
    return kern, fields, scale


def locally_free_check(scenario, mu, point) -> bool:
    """The k_mu generators at x are linearly independent."""
    kern, fields, scale = _kernel_fields(scenario, mu, point)
    if kern.dim == 0:
        return True
    return numerical_rank(fields, RANK_RTOL, scale=scale) == kern.dim


def _kernel_orbit(scenario, mu, point) -> np.ndarray:
    _, fields, scale = _kernel_fields(scenario, mu, point)
    if fields.shape[1] == 0:
        return np.zeros((len(point), 0))
    return column_space(fields, RANK_RTOL, scale=scale)


def ray_tangent(scenario, mu, point, form=None, zero_coords=()) -> tuple:
    """Orthonormal basis of T_zZ (Z the ray preimage, possibly inside a zero pattern)."""
    system = ray_system(scenario, mu, form, zero_coords)
    s = ray_parameter(scenario, mu, point, form)
    lt = level_tangent(system, np.append(point, s))
    return project_to_coordinates(lt.basis, len(point)), lt.regular


@dataclass(frozen=True)
class ReducedKernel:
    kernel_dim: int
    orbit_dim: int
    principal_angle: float
    ok: bool


def _reduced_kernel(scenario, mu, point, form, tz) -> ReducedKernel:
    form = _form(scenario, form)
    a = form.at(point) @ tz
    w = tz @ null_space(a[None, :], ncols=tz.shape[1]) if np.any(a) else tz
    omega = form.d.matrix(point)
    gram = w.T @ omega @ w
    gram = 0.5 * (gram - gram.T)
    kern = w @ null_space(gram, RANK_RTOL, scale=float(np.linalg.norm(omega, 2)),
                          ncols=w.shape[1])
    orbit = _kernel_orbit(scenario, mu, point)
    angle = max_principal_angle(kern, orbit)
    ok = kern.shape[1] == orbit.shape[1] and angle < ANGLE_TOL
    return ReducedKernel(kern.shape[1], orbit.shape[1], float(angle), bool(ok))


def reduced_kernel_check(scenario, mu, point, form=None) -> ReducedKernel:
    """ker(d alpha on T_zZ ∩ ker alpha) against the k_mu-orbit directions."""
    if not transversality_check(scenario, mu, point, form):
        raise PreconditionError("Phi is not transverse to R+ mu at this point")
    if not locally_free_check(scenario, mu, point):
        raise PreconditionError("the kernel group does not act locally freely at this point")
    tz, _ = ray_tangent(scenario, mu, point, form)
    return _reduced_kernel(scenario, mu, point, form, tz)


# -- dimensions -------------------------------------------------------------

def _agreed(values: Sequence, what: str) -> int:
    counts = Counter(values)
    if not counts:
        raise DimensionMismatchError(f"no samples to measure {what}")
    value, count = max(counts.items(), key=lambda kv: (kv[1], -1 if kv[0] is None else kv[0]))
    if value is None or count < AGREEMENT_FRACTION * len(values):
        raise DimensionMismatchError(
            f"{what}: samples disagree ({dict(sorted(counts.items(), key=str))})")
    return int(value)


@dataclass(frozen=True)
class QuotientDims:
    z_dim: int
    orbit_dim: int
    quotient_dim: int
    mode: str


def bookkeeping_quotient(scenario, mu) -> QuotientDims:
    declared = scenario.declared
    if "dim_M" not in declared:
        raise ScenarioError(f"{scenario.id} declares no dim_M for bookkeeping")
    if not declared.get("locally_free", False):
        raise PreconditionError("bookkeeping needs a declared locally free kernel action")
    d = scenario.algebra.dim
    z_dim = int(declared["dim_M"]) - (d - 1)
    orbit = kernel_algebra(scenario.algebra, _mu_array(scenario, mu)).dim
    return QuotientDims(z_dim, orbit, z_dim - orbit, "bookkeeping")


def measure_quotient(scenario, mu, samples: SampleSet, form=None) -> QuotientDims:
    """dim Z minus the k_mu orbit dimension, each agreed on by 90% of samples.

    When every sample is transverse the numeric dim Z is cross-checked
    against dim M - (dim g* - 1).
    """
    if scenario.action is None:
        return bookkeeping_quotient(scenario, mu)
    if len(samples) == 0:
        raise DimensionMismatchError(f"{scenario.id}: no samples on the level ray")
    z_dims, orbit_dims, transverse = [], [], []
    for p in samples.points:
        try:
            tz, _ = ray_tangent(scenario, mu, p, form)
            z_dims.append(tz.shape[1])
        except DegenerateLevelError:
            z_dims.append(None)
        orbit_dims.append(_kernel_orbit(scenario, mu, p).shape[1])
        transverse.append(transversality_check(scenario, mu, p, form))
    z_dim = _agreed(z_dims, "dim Z")
    orbit = _agreed(orbit_dims, "kernel orbit dimension")
    if all(transverse):
        formula = scenario.manifold.expected_dim - (scenario.algebra.dim - 1)
        if formula != z_dim:
            raise DimensionMismatchError(
                f"{scenario.id}: measured dim Z = {z_dim}, formula gives {formula}")
    return QuotientDims(z_dim, orbit, z_dim - orbit, "sampled")


def quotient_dimension(scenario, mu, samples: SampleSet | None = None, n_samples: int = 50,
                       seed: int = 0) -> int:
    if scenario.action is None:
        return bookkeeping_quotient(scenario, mu).quotient_dim
    if samples is None:
        samples = sample_level_ray(scenario, mu, n_samples, seed)
    return measure_quotient(scenario, mu, samples).quotient_dim


# -- orbit types ------------------------------------------------------------

def _hnf(cols: np.ndarray) -> tuple:
    """Canonical basis (Hermite normal form) of the lattice spanned by integer columns."""
    if cols.size == 0 or not np.any(cols):
        return ()
    from sympy.matrices.normalforms import hermite_normal_form
    h = hermite_normal_form(sympy.Matrix(cols.astype(int).tolist()))
    return tuple(tuple(int(v) for v in h.row(i)) for i in range(h.rows))


def _isotropy_type(cols: np.ndarray, k: int) -> str:
    """T^(k - r) x Z/d_1 x ... for the subgroup {theta : W'^T theta in Z^n'}."""
    if cols.size == 0 or not np.any(cols):
        return f"T^{k}"
    from sympy.matrices.normalforms import invariant_factors
    mat = sympy.Matrix(cols.astype(int).tolist())
    r = mat.rank()
    factors = [abs(int(f)) for f in invariant_factors(mat) if f != 0]
    parts = [f"T^{k - r}"] if k - r else []
    parts += [f"Z/{f}" for f in factors if f > 1]
    return " x ".join(parts) if parts else "trivial"


def _in_lattice(hnf_basis: tuple, col: np.ndarray) -> bool:
    if not np.any(col):
        return True
    if not hnf_basis:
        return False
    base = np.array(hnf_basis, dtype=int)
    return _hnf(np.hstack([base, col[:, None].astype(int)])) == hnf_basis


@dataclass(frozen=True)
class IsotropyLabel:
    zero_coords: tuple
    lattice_hnf: tuple
    isotropy: str

    def key(self) -> tuple:
        return (self.zero_coords, self.lattice_hnf)


def isotropy_label(scenario, point) -> IsotropyLabel:
    """Isotropy of the torus at ``point``.

    The lattice comes from the weight columns of the nonzero coordinates;
    ``zero_coords`` is the canonical pattern of M_H (coordinates moved by H),
    so points with equal isotropy share one label whatever their own zeros.
    """
    weights = np.array(scenario.action.weight_matrix, dtype=int)
    k, n = weights.shape
    mod = np.hypot(point[0::2], point[1::2])
    observed = [j for j in range(n) if mod[j] <= ZERO_COORD_TOL]
    cols = weights[:, [j for j in range(n) if j not in observed]]
    hnf = _hnf(cols)
    moved = tuple(j for j in range(n) if not _in_lattice(hnf, weights[:, j]))
    return IsotropyLabel(moved, hnf, _isotropy_type(cols, k))


def fixed_coordinates(scenario, label: IsotropyLabel) -> tuple:
    """Complex coordinates moved by the isotropy group; they vanish on M_H."""
    weights = np.array(scenario.action.weight_matrix, dtype=int)
    return tuple(j for j in range(weights.shape[1])
                 if not _in_lattice(label.lattice_hnf, weights[:, j]))


def fixed_point_manifold(scenario, label: IsotropyLabel, point) -> EmbeddedManifold:
    moved = fixed_coordinates(scenario, label)
    n = scenario.manifold.ambient_dim
    extra = _pattern_constraints(n, moved)
    jac = np.vstack([scenario.manifold.jacobian(point),
                     np.array([np.eye(n)[2 * j + r] for j in moved for r in (0, 1)]).reshape(-1, n)])
    dim = n - numerical_rank(jac)
    return scenario.manifold.with_constraints(extra, dim, f"{scenario.manifold.name}_H")


@dataclass
class StratumRecord:
    isotropy_label: IsotropyLabel
    sample_indices: list
    stratum_dim: int
    orbit_dim: int
    quotient_dim: int
    contact_on_stratum: bool
    diagnostic: str = ""


def _stratum_point_data(scenario, mu, point, label, form):
    moved = fixed_coordinates(scenario, label)
    mh = fixed_point_manifold(scenario, label, point)
    contact = contact_check(mh, _form(scenario, form), point).is_contact
    try:
        tz, _ = ray_tangent(scenario, mu, point, form, zero_coords=moved)
    except DegenerateLevelError:
        return None, None, False
    rk = _reduced_kernel(scenario, mu, point, form, tz)
    quotient = tz.shape[1] - rk.orbit_dim
    return tz.shape[1], rk.orbit_dim, bool(contact and rk.ok and quotient % 2 == 1)


def orbit_type_partition(scenario, mu, samples: SampleSet, form=None) -> list:
    """Group samples by torus isotropy; per stratum dimensions and contactness."""
    if scenario.action is None or not scenario.action.is_torus:
        raise NotTorusError(f"{scenario.id}: orbit types are computed for torus actions only")
    groups: dict = {}
    labels: dict = {}
    for i, p in enumerate(samples.points):
        lab = isotropy_label(scenario, p)
        groups.setdefault(lab.key(), []).append(i)
        labels[lab.key()] = lab
    out = []
    for key in sorted(groups, key=lambda k: (len(k[0]), k)):
        idx = groups[key]
        lab = labels[key]
        data = [_stratum_point_data(scenario, mu, samples.points[i], lab, form) for i in idx]
        diag = ""
        try:
            sdim = _agreed([d[0] for d in data], "stratum dimension")
            odim = _agreed([d[1] for d in data], "stratum orbit dimension")
        except DimensionMismatchError as exc:
            sdim = odim = -1
            diag = str(exc)
        contact = all(d[2] for d in data)
        qdim = sdim - odim if sdim >= 0 else -1
        out.append(StratumRecord(lab, list(idx), sdim, odim, qdim, bool(contact and sdim >= 0),
                                 diag))
    return out


def zero_patterns(n_complex: int) -> list:
    """All proper subsets of complex coordinates, by size then lexicographically."""
    return [p for r in range(n_complex) for p in itertools.combinations(range(n_complex), r)]


def sample_strata(scenario, mu, n_per_pattern: int, seed: int = 0, workers: int = 1,
                  form=None) -> SampleSet:
    """Ray samples from every zero pattern (the empty pattern is the generic sample)."""
    total = None
    for pattern in zero_patterns(scenario.n_complex):
        part = sample_level_ray(scenario, mu, n_per_pattern, seed, workers, pattern, form)
        total = part if total is None else total.merged(part)
    return total


# -- Albert reduction -------------------------------------------------------

@dataclass(frozen=True)
class AlbertRecord:
    level_dim: int
    albert_orbit_dim: int
    albert_quotient_dim: int
    level_regular: bool
    n_samples: int


def sample_level(scenario, mu, n_samples: int, seed: int = 0, workers: int = 1,
                 form=None) -> np.ndarray:
    """Distinct points of the strict level Phi^-1(mu)."""
    if scenario.action is None:
        raise ScenarioError(f"{scenario.id} is a bookkeeping scenario and cannot be sampled")
    system = level_system(scenario, mu, form)
    n = scenario.manifold.ambient_dim
    tag = LEVEL_STREAM_TAG

    def solve(i):
        x0 = _seed_point(scenario, seed, tag, i, ())
        res = newton_project(system, x0)
        return res.x if res.converged and res.residual < ACCEPT_RESIDUAL else None

    sols, idx = [], []
    kept = np.zeros(0, dtype=int)
    for rnd in range(OVERSAMPLE_ROUNDS):
        batch = range(rnd * n_samples, (rnd + 1) * n_samples)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(solve, batch))
        else:
            results = [solve(i) for i in batch]
        for i, r in zip(batch, results):
            if r is not None:
                sols.append(r)
                idx.append(i)
        if not sols:
            break
        kept = _dedup(np.array(sols), np.array(idx))
        if len(kept) >= n_samples:
            break
    if not sols:
        return np.zeros((0, n))
    return np.array(sols)[kept[:n_samples]]


def albert_generators(scenario, mu, point, form=None) -> np.ndarray:
    """Columns A_M(z) - <mu, A> Y(z) for the algebra basis."""
    form = _form(scenario, form)
    m = _mu_array(scenario, mu)
    y = reeb_field(scenario.manifold, form, point)
    return scenario.action.fields(point) - np.outer(y, m)


def albert_reduce(scenario, mu, n_samples: int = 40, seed: int = 0, workers: int = 1,
                  form=None, points=None) -> AlbertRecord:
    """Dimensions of Phi^-1(mu) / H where H integrates the Albert generators.

    Levels that are critical but clean (the level set is a manifold whose
    tangent space is cut out to second order) are accepted and reported with
    ``level_regular = False``; levels that are singular raise.
    """
    form = _form(scenario, form)
    m = _mu_array(scenario, mu)
    if points is None:
        points = sample_level(scenario, m, n_samples, seed, workers, form)
    if len(points) == 0:
        raise NonRegularValueError(f"{scenario.id}: level Phi = {m.tolist()} is empty")
    system = level_system(scenario, m, form)
    level_dims, orbit_dims, regular = [], [], True
    for p in points:
        try:
            lt = level_tangent(system, p)
        except DegenerateLevelError as exc:
            raise NonRegularValueError(f"{scenario.id}: mu = {m.tolist()} is not a regular "
                                       f"value and the level is singular: {exc}") from exc
        regular = regular and lt.regular
        level_dims.append(lt.dim)
        gens = albert_generators(scenario, m, p, form)
        projected = lt.basis @ (lt.basis.T @ gens)
        scale = max(float(np.max(np.linalg.norm(scenario.action.fields(p), axis=0))),
                    float(np.max(np.abs(m))) * float(np.linalg.norm(reeb_field(
                        scenario.manifold, form, p))))
        orbit_dims.append(numerical_rank(projected, LEVEL_RTOL, scale=scale))
    level_dim = _agreed(level_dims, "level dimension")
    orbit = max(orbit_dims)
    return AlbertRecord(level_dim, orbit, level_dim - orbit, regular, len(points))


# -- Guillemin-Sternberg bookkeeping -----------------------------------------

@dataclass(frozen=True)
class GSReport:
    integral: Optional[bool]
    orbit_dim: int
    fiber_dim: int
    gs_total_dim: int


def gs_dimension_report(scenario, mu, orbit_dim: int | None = None,
                        fiber_dim: int | None = None) -> GSReport:
    """Integrality of mu and dim of the GS quotient = fiber (contact quotient) + orbit."""
    m = _mu_array(scenario, mu)
    if orbit_dim is None:
        orbit_dim = scenario.algebra.dim - coadjoint_stabilizer(scenario.algebra, m).dim
    if fiber_dim is None:
        fiber_dim = quotient_dimension(scenario, m)
    lattice = scenario.weight_lattice
    integral = None if lattice is None else is_integral(m, lattice)
    return GSReport(integral, int(orbit_dim), int(fiber_dim), int(fiber_dim + orbit_dim))


# -- aggregate --------------------------------------------------------------

@dataclass
class ReductionReport:
    """Everything a run computed; field order is the JSON field order."""

    scenario_id: str
    mu: list
    n_samples: int
    seed: int
    checks: list
    sample_count: Optional[int] = None
    sample_diagnostic: str = ""
    hypothesis: Optional[HypothesisReport] = None
    transversality_rate: Optional[float] = None
    locally_free_rate: Optional[float] = None
    trans_free_disagreements: Optional[int] = None
    reduced_kernel_ok: Optional[bool] = None
    reduced_kernel_max_angle: Optional[float] = None
    z_dim: Optional[int] = None
    orbit_dim: Optional[int] = None
    quotient_dim: Optional[int] = None
    quotient_is_contact: Optional[bool] = None
    strata: Optional[list] = None
    albert: Optional[AlbertRecord] = None
    witness_residuals: Optional[dict] = None
    gs_dims: Optional[GSReport] = None
    reeb_flow_deviation: Optional[float] = None
    skipped: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

MANIFOLD_STREAM_TAG = 1 << 17


def sample_manifold(scenario, n_samples: int, seed: int = 0) -> np.ndarray:
    """Points of M from projected bounding-sphere seeds (no level condition)."""
    out = []
    for i in range(n_samples):
        x0 = _seed_point(scenario, seed, MANIFOLD_STREAM_TAG, i, ())
        res = newton_project(scenario.manifold.system, x0)
        if res.converged:
            out.append(res.x)
    return np.array(out).reshape(-1, scenario.manifold.ambient_dim)
