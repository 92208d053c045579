"""The acceptance suite behind ``contactred check-all``.

Each criterion returns a :class:`CriterionResult` whose ``evidence`` holds
the numbers it was judged on; the combined report is serialized
deterministically so that repeated runs can be compared byte for byte.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog

from .actions import (moment_differential_check, moment_map, reeb_flow,
                      reeb_flow_level_invariance)
from .errors import ContactReductionError
from .forms import PolyMap, squared_norm
from .lie import (Subspace, bilinear_kernel, check_reduction_hypotheses, restrict_form,
                  symplectic_perp)
from .linalg import max_principal_angle, projection_residual
from .manifold import tangent_frame
from .reduction import (_reduced_kernel, albert_reduce, bookkeeping_quotient, level_system,
                        locally_free_check, measure_quotient, orbit_type_partition,
                        ray_membership, ray_tangent, sample_level, sample_level_ray,
                        sample_manifold, sample_strata, transversality_check, zero_patterns)
from .report import dumps
from .runner import RunConfig, report_json, run
from .scenarios import Scenario, load_scenario, scenario_ids

LEMMA_TOL = 1e-10


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    evidence: dict = field(default_factory=dict)


@dataclass
class SuiteContext:
    seed: int = 0
    workers: int = 1
    catalog: Optional[str] = None

    def scenario(self, sid: str) -> Scenario:
        return load_scenario(sid, self.catalog)

    def rng(self, *key) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=key))


# -- 1, 2: the ellipsoid example -------------------------------------------

def criterion_1(ctx: SuiteContext) -> CriterionResult:
    e1 = ctx.scenario("E1")
    pts = sample_level(e1, [1], 40, ctx.seed, ctx.workers)
    rec = albert_reduce(e1, [1], points=pts)
    mod = np.hypot(pts[:, 2::2], pts[:, 3::2])
    max_off = float(np.max(mod[:, 1:])) if len(pts) else math.inf
    ok = (rec.level_dim, rec.albert_orbit_dim, rec.albert_quotient_dim) == (1, 0, 1) \
        and max_off < 1e-6 and len(pts) > 0
    return CriterionResult(1, "E1 Albert reduction is the circle", ok,
                           f"level dim {rec.level_dim}, orbit dim {rec.albert_orbit_dim}, "
                           f"quotient dim {rec.albert_quotient_dim}, max |z2|,|z3| = {max_off:.2e} "
                           f"over {len(pts)} samples",
                           {"albert": rec, "max_off_axis_modulus": max_off})


def criterion_2(ctx: SuiteContext) -> CriterionResult:
    e2 = ctx.scenario("E2")
    rec = albert_reduce(e2, [1], 40, ctx.seed, ctx.workers)
    witness = e2.witnesses["three_torus"]
    manifold_res = e2.manifold.residual(witness)
    phi_res = abs(float(moment_map(e2.action, e2.form, witness).coords[0]) - 1.0)
    ok = rec.level_dim == 4 and rec.albert_quotient_dim == 3 and max(manifold_res, phi_res) < 1e-10
    return CriterionResult(2, "E2 Albert quotient has dimension 3 and contains the 3-torus", ok,
                           f"level dim {rec.level_dim}, quotient dim {rec.albert_quotient_dim}, "
                           f"witness residuals {manifold_res:.1e} / {phi_res:.1e}",
                           {"albert": rec, "witness_constraint_residual": manifold_res,
                            "witness_moment_residual": phi_res})


# -- 3: sl(2) bookkeeping ---------------------------------------------------

def criterion_3(ctx: SuiteContext) -> CriterionResult:
    sl2 = ctx.scenario("SL2-bookkeeping")
    mu = [float(v) for v in sl2.default_mus[0]]
    hyp = check_reduction_hypotheses(sl2.algebra, mu)
    dims = bookkeeping_quotient(sl2, mu)
    contact = dims.quotient_dim % 2 == 1
    ok = (hyp.kernel_equals_stabilizer and hyp.dim_kernel_algebra == 1
          and not hyp.sum_condition_holds and dims.quotient_dim == 4 and not contact)
    return CriterionResult(3, "SL(2,R): k_mu = g_mu, sum condition fails, quotient 4 (not contact)",
                           ok, f"dim k_mu = {hyp.dim_kernel_algebra}, k_mu = g_mu: "
                               f"{hyp.kernel_equals_stabilizer}, ker mu + g_mu = g: "
                               f"{hyp.sum_condition_holds}, quotient dim {dims.quotient_dim}",
                           {"hypothesis": hyp, "quotient_dim": dims.quotient_dim,
                            "is_contact": contact})


# -- 4: transversality versus local freeness ------------------------------

TRANS_FREE_CASES = (("E1", (1,)), ("E2", (1,)), ("S3", (1,)), ("S5-T2", (2, 1)),
                    ("S5-T2", (1, 0)), ("S5-T3", (1, 1, 1)), ("S5-T3", (1, 0, 0)),
                    ("S5-SO3", (0, 0, 1)))
GENERIC_SAMPLES = 150
PATTERN_SAMPLES = 20


def trans_free_samples(ctx: SuiteContext, sid: str, mu):
    scen = ctx.scenario(sid)
    samples = sample_level_ray(scen, mu, GENERIC_SAMPLES, ctx.seed, ctx.workers)
    if scen.action.is_torus:
        for pattern in zero_patterns(scen.n_complex)[1:]:
            samples = samples.merged(sample_level_ray(scen, mu, PATTERN_SAMPLES, ctx.seed,
                                                      ctx.workers, pattern))
    return scen, samples


def criterion_4(ctx: SuiteContext) -> CriterionResult:
    rows = {}
    total = disagreements = 0
    locus_failures = 0
    for sid, mu in TRANS_FREE_CASES:
        scen, s = trans_free_samples(ctx, sid, mu)
        trans = [transversality_check(scen, mu, p) for p in s.points]
        free = [locally_free_check(scen, mu, p) for p in s.points]
        bad = sum(a != b for a, b in zip(trans, free))
        total += len(s)
        disagreements += bad
        if (sid, mu) == ("S5-T2", (1, 0)):
            locus_failures = sum(not a and not b for a, b in zip(trans, free))
        rows[f"{sid} mu={list(mu)}"] = {"samples": len(s), "transverse": sum(trans),
                                        "locally_free": sum(free), "disagreements": bad}
    ok = disagreements == 0 and total >= 1000 and locus_failures > 0
    return CriterionResult(4, "transversality agrees with local freeness of the kernel group", ok,
                           f"{total} points, {disagreements} disagreements, {locus_failures} "
                           f"points on the S5/T2 failure locus",
                           {"cases": rows, "total": total, "disagreements": disagreements,
                            "failure_locus_points": locus_failures})


# -- 5: Reeb flow -----------------------------------------------------------

def criterion_5(ctx: SuiteContext) -> CriterionResult:
    e2 = ctx.scenario("E2")
    seeds = sample_manifold(e2, 20, ctx.seed)
    devs = [reeb_flow_level_invariance(e2.action, e2.form, e2.manifold, p, 1.0) for p in seeds]
    s3 = ctx.scenario("S3")
    start = sample_manifold(s3, 1, ctx.seed)[0]
    traj = reeb_flow(s3.manifold, s3.form, start, 2 * math.pi)
    closure = float(np.max(np.abs(traj[-1] - start)))
    phi = np.array([moment_map(s3.action, s3.form, p).coords for p in traj])
    hopf_dev = float(np.max(np.abs(phi - phi[0])))
    worst = max(devs)
    ok = len(devs) == 20 and worst < 1e-6 and closure < 1e-8 and hopf_dev < 1e-8
    return CriterionResult(5, "Reeb flow preserves the moment map; Hopf orbits close", ok,
                           f"E2 max deviation {worst:.2e} over {len(devs)} seeds; S3 closure "
                           f"{closure:.2e}, moment drift {hopf_dev:.2e}",
                           {"e2_deviations": devs, "s3_closure": closure, "s3_moment_drift": hopf_dev})


# -- 6: differential of the moment map ---------------------------------------

def criterion_6(ctx: SuiteContext) -> CriterionResult:
    rows = {}
    worst = 0.0
    for k, sid in enumerate(scenario_ids()):
        scen = ctx.scenario(sid)
        if scen.is_bookkeeping:
            continue
        rng = ctx.rng(6, k)
        pts = sample_manifold(scen, 100, ctx.seed)
        gaps = []
        for p in pts:
            frame = tangent_frame(scen.manifold, p)
            v = frame.basis @ rng.standard_normal(frame.dim)
            i = int(rng.integers(scen.algebra.dim))
            gaps.append(moment_differential_check(scen.action, scen.form, p, v, i).gap)
        rows[sid] = {"triples": len(gaps), "max_gap": max(gaps)}
        worst = max(worst, max(gaps))
    ok = worst < 1e-10 and all(r["triples"] == 100 for r in rows.values())
    return CriterionResult(6, "d<Phi, A>(v) = d alpha(v, A_M) at random triples", ok,
                           f"max gap {worst:.2e} over {len(rows)} scenarios", {"scenarios": rows})


# -- 7: reduced kernel ------------------------------------------------------

def criterion_7(ctx: SuiteContext) -> CriterionResult:
    scen = ctx.scenario("S5-T2")
    mu = (2, 1)
    s = sample_level_ray(scen, mu, 60, ctx.seed, ctx.workers)
    results = []
    for p in s.points:
        if transversality_check(scen, mu, p) and locally_free_check(scen, mu, p):
            tz, _ = ray_tangent(scen, mu, p)
            results.append(_reduced_kernel(scen, mu, p, None, tz))
    passed = sum(r.ok for r in results)
    dims = measure_quotient(scen, mu, s)
    angle = max(r.principal_angle for r in results) if results else math.inf
    ok = passed >= 50 and passed == len(s) and dims.quotient_dim == 3
    return CriterionResult(7, "reduced kernel equals the kernel-group orbit on S5/T2, mu=(2,1)",
                           ok, f"{passed}/{len(s)} samples pass, max angle {angle:.1e}, "
                               f"quotient dim {dims.quotient_dim}",
                           {"passed": passed, "samples": len(s), "max_angle": angle,
                            "quotient_dim": dims.quotient_dim})


# -- 8: conformal invariance -------------------------------------------------

CONFORMAL_CASES = (("E2", (1,)), ("S5-T2", (2, 1)), ("S5-SO3", (0, 0, 1)))


def conformal_factor(n: int) -> PolyMap:
    """1 + |z|^2 / 4."""
    return PolyMap.constant(n, 1) + squared_norm(n) * PolyMap.constant(n, "1/4")


def _dimension_profile(scen, mu, samples, strata_samples):
    dims = measure_quotient(scen, mu, samples)
    profile = {"z_dim": dims.z_dim, "orbit_dim": dims.orbit_dim,
               "quotient_dim": dims.quotient_dim}
    if strata_samples is not None:
        profile["strata"] = [
            [list(r.isotropy_label.zero_coords), r.stratum_dim, r.orbit_dim, r.quotient_dim,
             r.contact_on_stratum]
            for r in orbit_type_partition(scen, mu, strata_samples)]
    return profile


def criterion_8(ctx: SuiteContext) -> CriterionResult:
    rows = {}
    all_ok = True
    for sid, mu in CONFORMAL_CASES:
        scen = ctx.scenario(sid)
        f = conformal_factor(scen.manifold.ambient_dim)
        scaled = scen.with_form(f * scen.form, "+conformal")
        own = sample_level_ray(scen, mu, 40, ctx.seed, ctx.workers)
        other = sample_level_ray(scaled, mu, 40, ctx.seed, ctx.workers)
        generic = sample_manifold(scen, 40, ctx.seed)
        pts = np.vstack([own.points, other.points, generic])
        member = [ray_membership(scen, mu, p) for p in pts]
        member_f = [ray_membership(scaled, mu, p) for p in pts]
        mismatched = sum(a != b for a, b in zip(member, member_f))
        flags = [(transversality_check(scen, mu, p), locally_free_check(scen, mu, p))
                 for p in own.points]
        flags_f = [(transversality_check(scaled, mu, p), locally_free_check(scaled, mu, p))
                   for p in own.points]
        strata = sample_strata(scen, mu, 10, ctx.seed, ctx.workers) if scen.action.is_torus \
            else None
        prof = _dimension_profile(scen, mu, own, strata)
        prof_f = _dimension_profile(scaled, mu, other, strata)
        ok = mismatched == 0 and flags == flags_f and prof == prof_f
        all_ok &= ok
        rows[f"{sid} mu={list(mu)}"] = {"points": len(pts), "members": sum(member),
                                        "membership_mismatches": mismatched,
                                        "flags_equal": flags == flags_f,
                                        "dimensions": prof, "dimensions_rescaled": prof_f}
    return CriterionResult(8, "level-ray membership and reduction dimensions are conformally "
                              "invariant", all_ok,
                           "; ".join(f"{k}: {v['membership_mismatches']} mismatches, dims equal "
                                     f"{v['dimensions'] == v['dimensions_rescaled']}"
                                     for k, v in rows.items()),
                           {"cases": rows})


# -- 9: linear-algebra lemmas -------------------------------------------------

def random_splitting_instance(rng: np.random.Generator):
    """(omega, X) with V = X + W omega-orthogonal and ker omega inside ker omega|_X.

    Built in adapted coordinates (X block, W block with nondegenerate
    omega_W) and then moved by a random change of basis.
    """
    dx = int(rng.integers(1, 5))
    dw = 2 * int(rng.integers(0, 3))
    rx = 2 * int(rng.integers(0, dx // 2 + 1))
    a = rng.standard_normal((dx, rx))
    jx = np.zeros((rx, rx))
    for i in range(0, rx, 2):
        jx[i, i + 1], jx[i + 1, i] = 1.0, -1.0
    omega_x = a @ jx @ a.T
    jw = np.zeros((dw, dw))
    for i in range(0, dw, 2):
        jw[i, i + 1], jw[i + 1, i] = 1.0, -1.0
    b = rng.standard_normal((dw, dw)) + 3 * np.eye(dw)
    omega_w = b @ jw @ b.T
    n = dx + dw
    block = np.zeros((n, n))
    block[:dx, :dx] = omega_x
    block[dx:, dx:] = omega_w
    p = rng.standard_normal((n, n)) + 2 * np.eye(n)
    pinv = np.linalg.inv(p)
    omega = pinv.T @ block @ pinv
    omega = 0.5 * (omega - omega.T)
    x_basis = p[:, :dx]
    return omega, Subspace.span(x_basis, n=n)


def kernel_splitting_residual(omega, x: Subspace) -> float:
    """Distance between ker omega and the embedded ker of omega restricted to X."""
    full = bilinear_kernel(omega)
    restricted = bilinear_kernel(restrict_form(omega, x), scale=np.linalg.norm(omega, 2))
    embedded = Subspace.span(x.basis @ restricted.basis, n=x.ambient_dim) \
        if restricted.dim else Subspace(x.ambient_dim, np.zeros((x.ambient_dim, 0)))
    if full.dim != embedded.dim:
        return math.inf
    return max(projection_residual(full.basis, embedded.basis),
               projection_residual(embedded.basis, full.basis))


def random_isotropic_instance(rng: np.random.Generator):
    """(omega, W) with omega symplectic on R^2n and W isotropic."""
    n = int(rng.integers(1, 4))
    j = np.zeros((2 * n, 2 * n))
    for i in range(n):
        j[2 * i, 2 * i + 1], j[2 * i + 1, 2 * i] = 1.0, -1.0
    p = rng.standard_normal((2 * n, 2 * n)) + 2 * np.eye(2 * n)
    omega = p.T @ j @ p
    omega = 0.5 * (omega - omega.T)
    k = int(rng.integers(0, n + 1))
    pinv = np.linalg.inv(p)
    cols = pinv[:, [2 * i for i in range(k)]]
    if k:
        cols = cols @ (rng.standard_normal((k, k)) + 2 * np.eye(k))
    w = Subspace.span(cols, n=2 * n) if k else Subspace(2 * n, np.zeros((2 * n, 0)))
    return omega, w


def isotropic_kernel_residual(omega, w: Subspace) -> float:
    """Distance between ker(omega restricted to W^omega) and W."""
    perp = symplectic_perp(omega, w)
    ker = bilinear_kernel(restrict_form(omega, perp), scale=np.linalg.norm(omega, 2))
    embedded = perp.basis @ ker.basis
    if ker.dim != w.dim:
        return math.inf
    if w.dim == 0:
        return 0.0
    return max(projection_residual(w.basis, embedded), projection_residual(embedded, w.basis))


def criterion_9(ctx: SuiteContext) -> CriterionResult:
    rng = ctx.rng(9)
    split = [kernel_splitting_residual(*random_splitting_instance(rng)) for _ in range(500)]
    iso = [isotropic_kernel_residual(*random_isotropic_instance(rng)) for _ in range(500)]
    ok = max(split) < LEMMA_TOL and max(iso) < LEMMA_TOL
    return CriterionResult(9, "kernel splitting and isotropic kernel lemmas on random instances",
                           ok, f"max residuals {max(split):.1e} (splitting), {max(iso):.1e} "
                               f"(isotropic), 500 instances each",
                           {"splitting_max": max(split), "isotropic_max": max(iso)})


# -- 10: orbit types ----------------------------------------------------------

def ellipsoid_coefficients(scen: Scenario) -> list:
    poly = scen.manifold.constraints[0]
    n = scen.manifold.ambient_dim
    out = []
    for j in range(scen.n_complex):
        exps = [0] * n
        exps[2 * j] = 2
        out.append(float(poly.terms.get(tuple(exps), 0)))
    return out


def realizable_patterns(scen: Scenario, mu) -> list:
    """Zero patterns P for which some point of the level ray has exactly z_j = 0 for j in P.

    Linear program in r_j = |z_j|^2 and the ray parameter s: maximize t with
    r_j >= t off P, s >= t, sum a_j r_j = 1, W r = s mu.
    """
    a = ellipsoid_coefficients(scen)
    w = np.array(scen.action.weight_matrix, dtype=float)
    k, n = w.shape
    mu = np.asarray(mu, float)
    out = []
    for pattern in zero_patterns(n):
        # variables: r_0..r_{n-1}, s, t
        c = np.zeros(n + 2)
        c[-1] = -1.0
        a_eq = [np.concatenate([a, [0.0, 0.0]])]
        b_eq = [1.0]
        for row, m in zip(w, mu):
            a_eq.append(np.concatenate([row, [-m, 0.0]]))
            b_eq.append(0.0)
        for j in pattern:
            e = np.zeros(n + 2)
            e[j] = 1.0
            a_eq.append(e)
            b_eq.append(0.0)
        a_ub, b_ub = [], []
        for j in range(n):
            if j not in pattern:
                e = np.zeros(n + 2)
                e[j], e[-1] = -1.0, 1.0
                a_ub.append(e)
                b_ub.append(0.0)
        e = np.zeros(n + 2)
        e[n], e[-1] = -1.0, 1.0
        a_ub.append(e)
        b_ub.append(0.0)
        bounds = [(0, None)] * n + [(0, None), (None, 1.0)]
        res = linprog(c, A_ub=np.array(a_ub), b_ub=b_ub, A_eq=np.array(a_eq), b_eq=b_eq,
                      bounds=bounds, method="highs")
        if res.status == 0 and -res.fun > 1e-9:
            out.append(tuple(pattern))
    return out


def criterion_10(ctx: SuiteContext) -> CriterionResult:
    scen = ctx.scenario("S5-T3")
    mu = (1, 1, 1)
    expected = realizable_patterns(scen, mu)
    s = sample_strata(scen, mu, 20, ctx.seed, ctx.workers)
    strata = orbit_type_partition(scen, mu, s)
    indices = sorted(i for r in strata for i in r.sample_indices)
    disjoint_exhaustive = indices == list(range(len(s)))
    contact = all(r.contact_on_stratum for r in strata)
    patterns = [r.isotropy_label.zero_coords for r in strata]
    ok = len(strata) == len(expected) and sorted(patterns) == sorted(expected) \
        and contact and disjoint_exhaustive
    return CriterionResult(10, "orbit-type partition of T3 on S5 at mu=(1,1,1)", ok,
                           f"{len(strata)} strata, {len(expected)} realizable patterns, "
                           f"contact on every stratum: {contact}, partition: {disjoint_exhaustive}",
                           {"strata": [[list(r.isotropy_label.zero_coords), r.isotropy_label.isotropy,
                                        len(r.sample_indices), r.stratum_dim, r.quotient_dim,
                                        r.contact_on_stratum] for r in strata],
                            "realizable_patterns": [list(p) for p in expected]})


# -- 11: determinism ---------------------------------------------------------

DETERMINISM_CONFIGS = (
    ("S5-T2", "2,1", "hypotheses,transversality,reduced_kernel,strata,gs"),
    ("S5-T2", "1,0", "transversality,strata"),
    ("E2", "1", "albert,gs"),
    ("S5-SO3", "0,0,1", "hypotheses,transversality,reduced_kernel"),
)


def determinism_reports(ctx: SuiteContext, workers: int) -> list:
    out = []
    for sid, mu, checks in DETERMINISM_CONFIGS:
        cfg = RunConfig(sid, mu, n_samples=60, seed=ctx.seed, checks=checks, workers=workers,
                        catalog=ctx.catalog)
        out.append(report_json(run(cfg)))
    return out


def criterion_11(ctx: SuiteContext) -> CriterionResult:
    first = determinism_reports(ctx, 1)
    again = determinism_reports(ctx, 1)
    parallel = determinism_reports(ctx, 4)
    same = first == again
    same_parallel = first == parallel
    return CriterionResult(11, "reports are byte-identical across runs and worker counts",
                           same and same_parallel,
                           f"repeat identical: {same}, 1 vs 4 workers identical: {same_parallel}",
                           {"reports": len(first), "repeat_identical": same,
                            "parallel_identical": same_parallel})


CRITERIA: dict[int, Callable[[SuiteContext], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11,
}


def run_criterion(number: int, ctx: SuiteContext) -> CriterionResult:
    try:
        return CRITERIA[number](ctx)
    except ContactReductionError as exc:
        return CriterionResult(number, f"criterion {number}", False,
                               f"{type(exc).__name__}: {exc}")


def check_all(seed: int = 0, workers: int = 1, only=None, catalog: str | None = None,
              out: str | Path | None = None, echo: Callable[[str], None] | None = None) -> list:
    """Run the acceptance criteria; optionally write the combined JSON report."""
    ctx = SuiteContext(seed, workers, catalog)
    if catalog is not None:
        from .lie import load_catalog
        load_catalog(catalog)  # fail fast on a corrupted catalog
    numbers = sorted(CRITERIA) if only is None else sorted(only)
    results = []
    for k in numbers:
        t0 = time.perf_counter()
        res = run_criterion(k, ctx)
        results.append(res)
        if echo is not None:
            echo(f"[{'PASS' if res.passed else 'FAIL'}] {k:2d}. {res.title}: {res.detail} "
                 f"({time.perf_counter() - t0:.1f}s)")
    if out is not None:
        Path(out).write_text(suite_json(results, seed))
    return results


def suite_json(results: list, seed: int) -> str:
    return dumps({"seed": seed,
                  "passed": all(r.passed for r in results),
                  "criteria": [{"number": r.number, "title": r.title, "passed": r.passed,
                                "detail": r.detail, "evidence": r.evidence} for r in results]})
