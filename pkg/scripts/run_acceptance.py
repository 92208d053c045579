"""Run the acceptance suite and write the combined JSON report.

    python3 scripts/run_acceptance.py --out acceptance.json --workers 2
"""
import argparse
import sys
from dataclasses import dataclass
from typing import Optional

from contactred.acceptance import check_all


@dataclass
class AcceptanceConfig:
    seed: int = 0
    workers: int = 1
    out: Optional[str] = "acceptance.json"
    only: Optional[tuple] = None


def main(cfg: AcceptanceConfig) -> int:
    results = check_all(cfg.seed, cfg.workers, cfg.only, out=cfg.out, echo=print)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria pass; report in {cfg.out}")
    return 0 if n_pass == len(results) else 1


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="acceptance.json")
    p.add_argument("--only", help="comma separated criterion numbers")
    a = p.parse_args()
    only = tuple(int(v) for v in a.only.split(",")) if a.only else None
    sys.exit(main(AcceptanceConfig(a.seed, a.workers, a.out, only)))
