"""Print the closed-form visibility thresholds for a range of local dimensions."""
import argparse
from dataclasses import dataclass

from artifact import entanglement as E


@dataclass
class TableConfig:
    d_max: int = 6
    tree_p: tuple = (0.5, 0.8, 0.9, 0.95)


def main(cfg: TableConfig):
    keys = ["lambda_bisep", "lambda_gme_uniform", "triangle_bisep", "triangle_gme", "entanglement", "steering"]
    print("d  " + "  ".join(f"{k:>18}" for k in keys))
    for d in range(2, cfg.d_max + 1):
        print(f"{d:<2} " + "  ".join(f"{E.thresholds(k, d=d):18.6f}" for k in keys))
    print()
    print("p      tree K_min  polygon K_min (d=2)")
    for p in cfg.tree_p:
        print(f"{p:<6} {E.thresholds('tree_min_edges', p=p, d=2):>11}  {E.polygon_min_edges(p, 2):>13}")
    print()
    print("n  complete-graph GME visibility")
    for n in range(3, 9):
        print(f"{n}  {E.thresholds('complete_graph_gme', n=n):.6f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-max", type=int, default=6)
    main(TableConfig(d_max=ap.parse_args().d_max))
