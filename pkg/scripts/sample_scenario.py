"""Sample a level ray and tabulate pointwise checks and dimensions.

    python3 scripts/sample_scenario.py S5-T2 --mu 2,1 --samples 100
    python3 scripts/sample_scenario.py S5-T2 --mu 1,0 --strata
"""
import argparse
from collections import Counter
from dataclasses import dataclass

import numpy as np

from contactred.reduction import (isotropy_label, locally_free_check, measure_quotient,
                                  orbit_type_partition, reduced_kernel_check, sample_level_ray,
                                  sample_strata, transversality_check)
from contactred.errors import ContactReductionError
from contactred.runner import parse_mu
from contactred.scenarios import load_scenario


@dataclass
class SampleConfig:
    scenario: str = "S5-T2"
    mu: str = "2,1"
    samples: int = 100
    seed: int = 0
    strata: bool = False


def main(cfg: SampleConfig) -> None:
    scen = load_scenario(cfg.scenario)
    mu = np.array([float(v) for v in parse_mu(cfg.mu)])
    if cfg.strata and scen.action.is_torus:
        samples = sample_strata(scen, mu, max(5, cfg.samples // 2 ** scen.n_complex), cfg.seed)
    else:
        samples = sample_level_ray(scen, mu, cfg.samples, cfg.seed)
    print(f"{scen.id}: {scen.description}")
    print(f"mu = {mu.tolist()}, {len(samples)} points on the level ray"
          + (f" ({samples.diagnostic})" if samples.diagnostic else ""))
    if not len(samples):
        return
    s = samples.ray_parameters
    print(f"ray parameter s: min {s.min():.4g}, median {np.median(s):.4g}, max {s.max():.4g}")

    trans = [transversality_check(scen, mu, x) for x in samples.points]
    free = [locally_free_check(scen, mu, x) for x in samples.points]
    print(f"transverse: {sum(trans)}/{len(trans)}, locally free: {sum(free)}/{len(free)}, "
          f"disagreements: {sum(a != b for a, b in zip(trans, free))}")

    angles = []
    for x, ok in zip(samples.points, trans):
        if ok:
            angles.append(reduced_kernel_check(scen, mu, x).principal_angle)
    if angles:
        print(f"reduced kernel principal angle: max {max(angles):.2e} over {len(angles)} points")
    try:
        dims = measure_quotient(scen, mu, samples)
        print(f"dim Z = {dims.z_dim}, kernel orbit dim = {dims.orbit_dim}, "
              f"quotient dim = {dims.quotient_dim}")
    except ContactReductionError as exc:
        print(f"dimensions not agreed: {exc}")

    if scen.action.is_torus:
        print("isotropy types:", dict(Counter(isotropy_label(scen, x).isotropy
                                              for x in samples.points)))
        for r in orbit_type_partition(scen, mu, samples):
            print(f"  stratum zeros={list(r.isotropy_label.zero_coords)} "
                  f"{r.isotropy_label.isotropy}: {len(r.sample_indices)} points, "
                  f"dim {r.stratum_dim}, quotient {r.quotient_dim}, "
                  f"contact {r.contact_on_stratum}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("scenario", nargs="?", default="S5-T2")
    p.add_argument("--mu", default="2,1")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strata", action="store_true", help="also sample every zero pattern")
    a = p.parse_args()
    main(SampleConfig(a.scenario, a.mu, a.samples, a.seed, a.strata))
