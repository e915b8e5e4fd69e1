"""Compare the disagreement detectors with their parametric characterizations on a grid."""
import argparse
import itertools
from dataclasses import dataclass

import numpy as np

from artifact import agreement as AG


@dataclass
class SweepConfig:
    points: int = 11
    local_samples: int = 1000
    seed: int = 0


def main(cfg: SweepConfig):
    grid = np.linspace(0, 1, cfg.points)
    stats = {"ccd": [0, 0, 0], "sd": [0, 0, 0]}  # valid, agree, positive
    for r, s, t, u in itertools.product(grid, repeat=4):
        for kind, build, detect, expect in (
            ("ccd", AG.nsccd_table, AG.common_certainty_of_disagreement, AG.nsccd_expected),
            ("sd", AG.nssd_table, AG.singular_disagreement, AG.nssd_expected),
        ):
            rows = build(r, s, t, u)
            if not AG.table_valid(rows):
                continue
            got = detect(AG.from_table(rows)).value
            st = stats[kind]
            st[0] += 1
            st[1] += got == expect(r, s, t, u)
            st[2] += got
    for kind, (n, agree, pos) in stats.items():
        print(f"{kind}: {n} valid tables, {agree} match the characterization, {pos} positive")
    rng = np.random.default_rng(cfg.seed)
    hits = 0
    for _ in range(cfg.local_samples):
        ab = AG.AgreementBox(AG.random_correlated_local_box(rng))
        hits += AG.common_certainty_of_disagreement(ab).value or AG.singular_disagreement(ab).value
    print(f"local boxes with a disagreement verdict: {hits} / {cfg.local_samples}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=11)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    main(SweepConfig(points=a.points, seed=a.seed))
