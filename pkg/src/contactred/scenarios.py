"""Scenario registry and scenario files.

A scenario bundles a manifold, an invariant 1-form and a linear action, and
is validated when built: every generator must preserve the form and be
tangent to the constraints, both checked as exact polynomial identities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Mapping, Optional

import numpy as np

from .actions import (LinearAction, invariance_residuals, so3_on_c3, tangency_residuals,
                      torus_action, trivial_action)
from .errors import ScenarioError
from .forms import Poly1Form, PolyMap, as_coeff, squared_norm
from .lie import LieAlgebraData, load_catalog
from .manifold import EmbeddedManifold

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass(frozen=True, eq=False)
class Scenario:
    id: str
    algebra: LieAlgebraData
    manifold: Optional[EmbeddedManifold] = None
    form: Optional[Poly1Form] = None
    action: Optional[LinearAction] = None
    n_complex: int = 0
    bounding_radius: float = 1.0
    default_mus: tuple = ()
    declared: Mapping = field(default_factory=dict)
    witnesses: Mapping = field(default_factory=dict)
    weight_lattice: Optional[tuple] = None
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "declared", MappingProxyType(dict(self.declared)))
        object.__setattr__(self, "witnesses", MappingProxyType(
            {k: np.asarray(v, dtype=float) for k, v in dict(self.witnesses).items()}))
        if self.action is None:
            return
        if self.action.algebra is not self.algebra:
            raise ScenarioError(f"{self.id}: action and scenario use different algebras")
        for i, lie in enumerate(invariance_residuals(self.action, self.form)):
            if not lie.is_zero():
                bad = next(c for c in lie.coefficients if not c.is_zero())
                raise ScenarioError(
                    f"{self.id}: generator {i} does not preserve the form; "
                    f"Lie derivative has coefficient {bad}")
        for poly in tangency_residuals(self.action, self.manifold):
            if not poly.is_zero():
                raise ScenarioError(
                    f"{self.id}: a generator is not tangent to the constraints; "
                    f"derivative along it is {poly}")

    @property
    def is_bookkeeping(self) -> bool:
        return self.action is None

    def with_form(self, form: Poly1Form, suffix: str = "") -> "Scenario":
        """Same scenario with another invariant form (validated again)."""
        return Scenario(self.id + suffix, self.algebra, self.manifold, form, self.action,
                        self.n_complex, self.bounding_radius, self.default_mus,
                        dict(self.declared), dict(self.witnesses), self.weight_lattice,
                        self.description)


def ellipsoid(coeffs, name: str = "") -> EmbeddedManifold:
    """{sum_j a_j |z_j|^2 = 1} in C^n with interleaved real coordinates."""
    n = 2 * len(coeffs)
    poly = PolyMap.constant(n, -1)
    for j, a in enumerate(coeffs):
        poly = poly + as_coeff(a) * squared_norm(n, (2 * j, 2 * j + 1))
    return EmbeddedManifold(n, (poly,), n - 1, name)


def _bounding_radius(coeffs) -> float:
    return math.sqrt(1.0 / min(float(as_coeff(a)) for a in coeffs))


def torus_scenario(sid: str, coeffs, weights, mus, witnesses=None,
                   description: str = "") -> Scenario:
    action = torus_action(weights)
    k = len(weights)
    return Scenario(
        id=sid, algebra=action.algebra, manifold=ellipsoid(coeffs, sid),
        form=Poly1Form.standard(len(coeffs)), action=action, n_complex=len(coeffs),
        bounding_radius=_bounding_radius(coeffs),
        default_mus=tuple(tuple(Fraction(as_coeff(v)) for v in mu) for mu in mus),
        witnesses=witnesses or {}, weight_lattice=tuple(tuple(int(i == j) for j in range(k))
                                                         for i in range(k)),
        description=description)


def _e1(catalog):
    return torus_scenario("E1", [1, 2, 2], [[1, -1, -1]], [[1]],
                          description="ellipsoid |z1|^2 + 2|z2|^2 + 2|z3|^2 = 1, weights (1,-1,-1)")


def _e2(catalog):
    torus_point = (math.sqrt(14) / 3, 0.0, math.sqrt(1 / 18), 0.0, math.sqrt(0.5), 0.0)
    return torus_scenario("E2", ["1/2", 1, "1/3"], [[1, -1, -1]], [[1]],
                          witnesses={"three_torus": torus_point},
                          description="ellipsoid |z1|^2/2 + |z2|^2 + |z3|^2/3 = 1, "
                                      "weights (1,-1,-1)")


def _s3(catalog):
    return torus_scenario("S3", [1, 1], [[1, 1]], [[1], [-1]],
                          description="unit sphere in C^2, diagonal circle (Hopf action)")


def _s5_t2(catalog):
    return torus_scenario("S5-T2", [1, 1, 1], [[1, 1, 1], [0, 1, -1]], [[2, 1], [1, 0]],
                          description="unit sphere in C^3, 2-torus with weight rows "
                                      "(1,1,1) and (0,1,-1)")


def _s5_t3(catalog):
    return torus_scenario("S5-T3", [1, 1, 1], [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                          [[1, 1, 1], [1, 0, 0]],
                          description="unit sphere in C^3, coordinatewise 3-torus")


def _s5_so3(catalog):
    algebra = catalog["so3"]
    return Scenario(
        id="S5-SO3", algebra=algebra, manifold=ellipsoid([1, 1, 1], "S5-SO3"),
        form=Poly1Form.standard(3), action=so3_on_c3(algebra), n_complex=3,
        bounding_radius=1.0, default_mus=((Fraction(0), Fraction(0), Fraction(1)),),
        description="unit sphere in C^3 = R^3 + iR^3 with real rotations acting diagonally")


def _darboux(catalog):
    n = 3
    form = Poly1Form(n, (PolyMap.zero(n), PolyMap.coordinate(n, 0), PolyMap.constant(n, 1)))
    action = trivial_action(n)
    return Scenario(id="R3-darboux", algebra=action.algebra,
                    manifold=EmbeddedManifold(n, (), n, "R3"), form=form, action=action,
                    bounding_radius=1.0, default_mus=((Fraction(1),),),
                    description="R^3 with dz + x dy and the trivial circle action")


def _sl2(catalog):
    return Scenario(id="SL2-bookkeeping", algebra=catalog["sl2"],
                    default_mus=((Fraction(0), Fraction(0), Fraction(1)),),
                    declared={"dim_M": 7, "locally_free": True, "kernel_closed": True,
                              "proper": True},
                    description="SL(2,R) acting on T*SL(2,R) x R; nilpotent mu paired by "
                                "trace (dimension bookkeeping only)")


REGISTRY: dict[str, Callable] = {
    "E1": _e1,
    "E2": _e2,
    "S3": _s3,
    "S5-T2": _s5_t2,
    "S5-T3": _s5_t3,
    "S5-SO3": _s5_so3,
    "R3-darboux": _darboux,
    "SL2-bookkeeping": _sl2,
}


def scenario_ids() -> list:
    return list(REGISTRY)


_LOADED: dict = {}


def load_scenario(ref: str | Path, catalog: str | Path | None = None) -> Scenario:
    """Registry id or path to a scenario TOML file; validated on construction."""
    key = (str(ref), None if catalog is None else str(catalog))
    if key in _LOADED:
        return _LOADED[key]
    if str(ref) in REGISTRY:
        scen = REGISTRY[str(ref)](load_catalog(catalog))
    elif Path(ref).suffix == ".toml" and Path(ref).exists():
        return scenario_from_file(Path(ref))
    else:
        raise ScenarioError(f"unknown scenario {ref!r}; known ids: {', '.join(REGISTRY)}")
    _LOADED[key] = scen
    return scen


def scenario_from_file(path: Path) -> Scenario:
    """Torus-on-ellipsoid scenario from TOML.

    Keys: ``id``, ``ellipsoid`` (coefficients a_j, exact as "p/q" strings),
    ``weights`` (one integer row per circle factor), ``mu`` (list of default
    mu vectors) and optional ``description``.
    """
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    for key in ("id", "ellipsoid", "weights"):
        if key not in data:
            raise ScenarioError(f"{path}: missing key {key!r}")
    weights = data["weights"]
    if any(len(row) != len(data["ellipsoid"]) for row in weights):
        raise ScenarioError(f"{path}: weight rows must have one entry per coordinate")
    return torus_scenario(data["id"], data["ellipsoid"], weights, data.get("mu", []),
                          description=data.get("description", ""))
