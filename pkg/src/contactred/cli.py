"""Command line: ``contactred run | list | check-all``.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for usage errors and scenario or catalog load errors.
"""
from __future__ import annotations

import argparse
import sys

from .errors import CatalogError, ContactReductionError, ScenarioError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contactred",
                                     description="Contact reduction checks on polynomial "
                                                 "manifolds with linear group actions.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run checks on one scenario")
    run_p.add_argument("scenario", nargs="?", help="registry id or scenario .toml file")
    run_p.add_argument("--config", help="run configuration (.toml)")
    run_p.add_argument("--mu", help='coordinates of mu, e.g. "2,1" or "1/2,0"')
    run_p.add_argument("--samples", type=int, help="number of level-ray samples (default 200)")
    run_p.add_argument("--seed", type=int, help="random seed (default 0)")
    run_p.add_argument("--checks", help="comma separated subset of: hypotheses, transversality, "
                                        "reduced_kernel, strata, albert, gs, reeb_flow")
    run_p.add_argument("--out", help="path of the JSON report (default <scenario>.report.json)")
    run_p.add_argument("--workers", type=int, help="threads used for sampling (default 1)")
    run_p.add_argument("--catalog", help="alternative Lie algebra catalog (.toml)")

    sub.add_parser("list", help="list registry scenarios")

    all_p = sub.add_parser("check-all", help="run the acceptance suite")
    all_p.add_argument("--seed", type=int, default=0)
    all_p.add_argument("--workers", type=int, default=1)
    all_p.add_argument("--out", help="path of the combined JSON report")
    all_p.add_argument("--only", help="comma separated criterion numbers")
    all_p.add_argument("--catalog", help="alternative Lie algebra catalog (.toml)")
    return parser


def _cmd_list() -> int:
    from .scenarios import load_scenario, scenario_ids
    for sid in scenario_ids():
        scen = load_scenario(sid)
        mus = ", ".join("(" + ", ".join(str(v) for v in mu) + ")" for mu in scen.default_mus)
        print(f"{sid:16s} {scen.description}  [mu: {mus}]")
    return EXIT_OK


def _cmd_run(args) -> int:
    from .runner import RunConfig, run, summary_lines, write_report
    if args.config:
        cfg = RunConfig.from_toml(args.config)
    elif args.scenario:
        cfg = RunConfig(args.scenario)
    else:
        raise ValueError("give a scenario id or --config")
    overrides = {"scenario": args.scenario, "mu": args.mu, "n_samples": args.samples,
                 "seed": args.seed, "output": args.out, "workers": args.workers,
                 "catalog": args.catalog}
    fields = {k: v for k, v in vars(cfg).items()}
    fields.update({k: v for k, v in overrides.items() if v is not None})
    if args.checks is not None:
        fields["checks"] = args.checks
    cfg = RunConfig(**fields)
    report = run(cfg)
    for line in summary_lines(report):
        print(line)
    # the report is written even when checks fail; without --out it goes next to the caller
    path = cfg.output or f"{report.scenario_id}.report.json"
    write_report(report, path)
    print(f"report written to {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_check_all(args) -> int:
    from .acceptance import CRITERIA, check_all
    only = None
    if args.only:
        only = [int(v) for v in args.only.split(",") if v.strip()]
        unknown = [k for k in only if k not in CRITERIA]
        if unknown:
            raise ValueError(f"unknown criteria {unknown}")
    results = check_all(seed=args.seed, workers=args.workers, only=only, catalog=args.catalog,
                        out=args.out, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria pass"
          + (f"; failing: {failed}" if failed else ""))
    if args.out:
        print(f"report written to {args.out}")
    return EXIT_OK if not failed else EXIT_FAIL


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_check_all(args)
    except (CatalogError, ScenarioError, ValueError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContactReductionError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
