"""Run configurations and the check pipeline behind ``contactred run``."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .actions import reeb_flow_level_invariance
from .errors import ContactReductionError, ScenarioError
from .forms import as_coeff
from .lie import check_reduction_hypotheses, kernel_algebra
from .reduction import (ReductionReport, _reduced_kernel, albert_reduce, gs_dimension_report,
                        level_system, locally_free_check, measure_quotient, orbit_type_partition,
                        ray_tangent, sample_level_ray, sample_manifold, sample_strata,
                        transversality_check, zero_patterns)
from .report import dumps
from .scenarios import Scenario, load_scenario

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CHECK_ORDER = ("hypotheses", "transversality", "reduced_kernel", "strata", "albert", "gs",
               "reeb_flow")
SAMPLED_CHECKS = {"transversality", "reduced_kernel", "strata", "albert", "reeb_flow"}
REEB_FLOW_POINTS = 5
REEB_FLOW_HORIZON = 1.0
REEB_FLOW_TOL = 1e-6
WITNESS_TOL = 1e-10
ALBERT_SAMPLES = 40


def parse_mu(text) -> tuple:
    """"2,1" or ["2", "1/3"] into exact coordinates (floats stay floats)."""
    if isinstance(text, str):
        parts = [p for p in text.replace(",", " ").split() if p]
    else:
        parts = list(text)
    out = []
    for p in parts:
        if isinstance(p, str):
            try:
                out.append(Fraction(p.strip()))
            except ValueError:
                out.append(float(p))
        else:
            out.append(as_coeff(p))
    return tuple(out)


def parse_checks(text) -> tuple:
    if isinstance(text, str):
        names = [c.strip() for c in text.split(",") if c.strip()]
    else:
        names = list(text)
    unknown = [c for c in names if c not in CHECK_ORDER]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {', '.join(CHECK_ORDER)}")
    return tuple(c for c in CHECK_ORDER if c in names)


@dataclass
class RunConfig:
    scenario: str
    mu: Optional[tuple] = None
    n_samples: int = 200
    seed: int = 0
    checks: tuple = ()
    output: Optional[str] = None
    workers: int = 1
    catalog: Optional[str] = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.mu is not None:
            self.mu = parse_mu(self.mu)
        self.checks = parse_checks(self.checks)

    @classmethod
    def from_toml(cls, path: str | Path) -> "RunConfig":
        """Read a run configuration.

        ::

            scenario = "S5-T2"
            n_samples = 100
            seed = 0
            output = "s5t2.json"
            [mu]
            coords = ["2", "1"]
            [checks]
            enabled = ["hypotheses", "transversality", "reduced_kernel"]
        """
        data = tomllib.loads(Path(path).read_text())
        if "scenario" not in data:
            raise ValueError(f"{path}: missing 'scenario'")
        return cls(
            scenario=data["scenario"],
            mu=data.get("mu", {}).get("coords"),
            n_samples=int(data.get("n_samples", 200)),
            seed=int(data.get("seed", 0)),
            checks=tuple(data.get("checks", {}).get("enabled", ())),
            output=data.get("output"),
            workers=int(data.get("workers", 1)),
            catalog=data.get("catalog"),
        )


def resolve_mu(scenario: Scenario, mu) -> np.ndarray:
    if mu is None:
        if not scenario.default_mus:
            raise ScenarioError(f"{scenario.id} has no default mu; pass one explicitly")
        mu = scenario.default_mus[0]
    m = np.array([float(v) for v in mu])
    if m.shape != (scenario.algebra.dim,):
        raise ValueError(f"mu has {m.size} coordinates but {scenario.id} needs "
                         f"{scenario.algebra.dim}")
    return m


def _fail(report: ReductionReport, check: str, message: str):
    report.failures.append(f"{check}: {message}")


def run(config: RunConfig, scenario: Scenario | None = None) -> ReductionReport:
    """Execute the requested checks in dependency order and collect the results."""
    scen = scenario if scenario is not None else load_scenario(config.scenario, config.catalog)
    mu = resolve_mu(scen, config.mu)
    report = ReductionReport(scen.id, mu.tolist(), config.n_samples, config.seed,
                             list(config.checks))
    samples = None

    def need_samples():
        nonlocal samples
        if samples is None:
            samples = sample_level_ray(scen, mu, config.n_samples, config.seed, config.workers)
            report.sample_count = len(samples)
            report.sample_diagnostic = samples.diagnostic
        return samples

    for check in config.checks:
        if scen.is_bookkeeping and check in SAMPLED_CHECKS - {"reduced_kernel"}:
            report.skipped.append(f"{check}: bookkeeping scenario has no sampled manifold")
            continue
        try:
            _CHECKS[check](scen, mu, config, report, need_samples)
        except ContactReductionError as exc:
            _fail(report, check, f"{type(exc).__name__}: {exc}")
    return report


def _check_hypotheses(scen, mu, config, report, need_samples):
    report.hypothesis = check_reduction_hypotheses(scen.algebra, mu, scen.weight_lattice)


def _check_transversality(scen, mu, config, report, need_samples):
    s = need_samples()
    if len(s) == 0:
        return
    trans = [transversality_check(scen, mu, p) for p in s.points]
    free = [locally_free_check(scen, mu, p) for p in s.points]
    report.transversality_rate = sum(trans) / len(trans)
    report.locally_free_rate = sum(free) / len(free)
    report.trans_free_disagreements = sum(a != b for a, b in zip(trans, free))
    if report.trans_free_disagreements:
        _fail(report, "transversality",
              f"transversality and local freeness disagree at "
              f"{report.trans_free_disagreements} samples")


def _check_reduced_kernel(scen, mu, config, report, need_samples):
    if scen.is_bookkeeping:
        dims = measure_quotient(scen, mu, None)
    else:
        s = need_samples()
        if len(s) == 0:
            _fail(report, "reduced_kernel", "the level ray has no samples")
            return
        good = [p for p in s.points
                if transversality_check(scen, mu, p) and locally_free_check(scen, mu, p)]
        if not good:
            _fail(report, "reduced_kernel", "no sample is transverse with a locally free kernel")
            return
        results = []
        for p in good:
            tz, _ = ray_tangent(scen, mu, p)
            results.append(_reduced_kernel(scen, mu, p, None, tz))
        report.reduced_kernel_ok = all(r.ok for r in results)
        report.reduced_kernel_max_angle = max(r.principal_angle for r in results)
        if not report.reduced_kernel_ok:
            bad = sum(not r.ok for r in results)
            _fail(report, "reduced_kernel",
                  f"kernel of d alpha differs from the kernel-group orbit at {bad} samples")
        dims = measure_quotient(scen, mu, s)
    report.z_dim, report.orbit_dim, report.quotient_dim = dims.z_dim, dims.orbit_dim, \
        dims.quotient_dim
    report.quotient_is_contact = dims.quotient_dim % 2 == 1
    if scen.is_bookkeeping:
        report.reduced_kernel_ok = report.quotient_is_contact
    if not report.quotient_is_contact:
        _fail(report, "reduced_kernel",
              f"quotient dimension {dims.quotient_dim} is even, so the quotient is not contact")


def _check_strata(scen, mu, config, report, need_samples):
    n_patterns = len(zero_patterns(scen.n_complex))
    per = max(5, config.n_samples // max(1, n_patterns))
    s = sample_strata(scen, mu, per, config.seed, config.workers)
    strata = orbit_type_partition(scen, mu, s)
    report.strata = strata
    seen = sorted(i for r in strata for i in r.sample_indices)
    if seen != list(range(len(s))):
        _fail(report, "strata", "orbit-type partition is not disjoint and exhaustive")
    for r in strata:
        if r.diagnostic:
            _fail(report, "strata", r.diagnostic)
        elif not r.contact_on_stratum:
            _fail(report, "strata", f"stratum {r.isotropy_label.zero_coords} is not contact")


def _check_albert(scen, mu, config, report, need_samples):
    n = min(config.n_samples, ALBERT_SAMPLES)
    report.albert = albert_reduce(scen, mu, n, config.seed, config.workers)
    system = level_system(scen, mu)
    report.witness_residuals = {name: system.residual(p) for name, p in scen.witnesses.items()}
    for name, r in report.witness_residuals.items():
        if r > WITNESS_TOL:
            _fail(report, "albert", f"witness {name} misses the level by {r:.3e}")


def _check_gs(scen, mu, config, report, need_samples):
    fiber = report.quotient_dim
    report.gs_dims = gs_dimension_report(scen, mu, fiber_dim=fiber) if fiber is not None \
        else gs_dimension_report(scen, mu)


def _check_reeb_flow(scen, mu, config, report, need_samples):
    points = sample_manifold(scen, min(config.n_samples, REEB_FLOW_POINTS), config.seed)
    dev = max(reeb_flow_level_invariance(scen.action, scen.form, scen.manifold, p,
                                         REEB_FLOW_HORIZON) for p in points)
    report.reeb_flow_deviation = dev
    if dev >= REEB_FLOW_TOL:
        _fail(report, "reeb_flow", f"moment map drifts by {dev:.3e} along the Reeb flow")


_CHECKS = {
    "hypotheses": _check_hypotheses,
    "transversality": _check_transversality,
    "reduced_kernel": _check_reduced_kernel,
    "strata": _check_strata,
    "albert": _check_albert,
    "gs": _check_gs,
    "reeb_flow": _check_reeb_flow,
}


def report_dict(report: ReductionReport) -> dict:
    from .report import to_plain
    out = to_plain(report)
    if report.strata is not None:
        out["strata"] = [
            {"isotropy_label": {"zero_coords": list(r.isotropy_label.zero_coords),
                                "lattice_hnf": [list(row) for row in r.isotropy_label.lattice_hnf],
                                "isotropy": r.isotropy_label.isotropy},
             "sample_indices": list(r.sample_indices),
             "stratum_dim": r.stratum_dim, "orbit_dim": r.orbit_dim,
             "quotient_dim": r.quotient_dim, "contact_on_stratum": r.contact_on_stratum,
             "diagnostic": r.diagnostic}
            for r in report.strata]
    out["passed"] = report.passed
    return out


def report_json(report: ReductionReport) -> str:
    return dumps(report_dict(report))


def summary_lines(report: ReductionReport) -> list:
    lines = [f"scenario {report.scenario_id}  mu = {report.mu}  checks: "
             f"{', '.join(report.checks) or '(none)'}"]
    if report.sample_count is not None:
        lines.append(f"  samples on the level ray: {report.sample_count}"
                     + (f" ({report.sample_diagnostic})" if report.sample_diagnostic else ""))
    if report.hypothesis is not None:
        h = report.hypothesis
        lines.append(f"  dim g_mu = {h.dim_stabilizer}, dim k_mu = {h.dim_kernel_algebra}, "
                     f"ker mu + g_mu = g: {h.sum_condition_holds}, integral: {h.mu_integral}")
    if report.transversality_rate is not None:
        lines.append(f"  transverse {report.transversality_rate:.3f}, locally free "
                     f"{report.locally_free_rate:.3f}, disagreements "
                     f"{report.trans_free_disagreements}")
    if report.quotient_dim is not None:
        lines.append(f"  dim Z = {report.z_dim}, orbit dim = {report.orbit_dim}, quotient dim = "
                     f"{report.quotient_dim} ({'contact' if report.quotient_is_contact else 'not contact'})")
    if report.strata is not None:
        for r in report.strata:
            lines.append(f"  stratum zeros={list(r.isotropy_label.zero_coords)} "
                         f"isotropy {r.isotropy_label.isotropy}: {len(r.sample_indices)} samples, "
                         f"quotient dim {r.quotient_dim}, contact {r.contact_on_stratum}")
    if report.albert is not None:
        a = report.albert
        lines.append(f"  Albert: level dim {a.level_dim}, orbit dim {a.albert_orbit_dim}, "
                     f"quotient dim {a.albert_quotient_dim}, regular level {a.level_regular}")
    if report.gs_dims is not None:
        g = report.gs_dims
        lines.append(f"  GS: integral {g.integral}, fiber {g.fiber_dim} + orbit {g.orbit_dim} "
                     f"= {g.gs_total_dim}")
    if report.reeb_flow_deviation is not None:
        lines.append(f"  Reeb flow moment drift {report.reeb_flow_deviation:.3e}")
    for s in report.skipped:
        lines.append(f"  skipped {s}")
    for f in report.failures:
        lines.append(f"  FAIL {f}")
    lines.append("  PASS" if report.passed else "  FAILED")
    return lines


def write_report(report: ReductionReport, path: str | Path) -> None:
    Path(path).write_text(report_json(report))
