"""Build biseparable decompositions near their thresholds and report the verdicts."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from artifact import entanglement as E
from artifact import states as S


@dataclass
class ScanConfig:
    d: int = 2
    points: int = 9
    span: float = 0.05  # relative distance on each side of the threshold
    tree_K: int = 18


def scan(kind, make, p_star, cfg):
    for p in p_star * np.linspace(1 - cfg.span, 1 + cfg.span, cfg.points):
        if p > 1:
            continue
        dec = E.bisep_decomposition(make(p), kind)
        if dec:
            rep = dec.verify()
            status = f"ok={rep['ok']} terms={rep['n_terms']} err={rep['reconstruction_error']:.1e}"
        else:
            status = f"infeasible: {dec.constraint}"
        print(f"  {kind:8} p={p:.5f}  {status}")


def main(cfg: ScanConfig):
    d = cfg.d
    cases = [
        ("lambda", lambda p: S.lambda_graph(d, p), E.thresholds("lambda_bisep", d=d)),
        ("triangle", lambda p: S.triangle_graph(d, p), E.thresholds("triangle_bisep", d=d)),
        ("tree", lambda p: S.path_graph(cfg.tree_K, d, p), cfg.tree_K / (cfg.tree_K + d)),
    ]
    for kind, make, p_star in cases:
        print(f"{kind}: threshold {p_star:.6f}")
        scan(kind, make, p_star, cfg)
    K = E.polygon_min_edges(0.5, d)
    dec = E.bisep_decomposition(S.polygon_graph(K, d, 0.5), "polygon")
    print(f"polygon p=0.5: K_min={K}, decomposition ok={bool(dec) and dec.verify()['ok']}")
    print(f"lambda closed form check: {(1 + 2 * math.sqrt(2)) / 7:.6f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--points", type=int, default=9)
    a = ap.parse_args()
    main(ScanConfig(d=a.d, points=a.points))
