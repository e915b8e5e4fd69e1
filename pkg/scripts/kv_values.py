"""Exact local values of small Khot-Vishnoi games against the classical bound."""
import argparse
from dataclasses import dataclass

from artifact import kvgames as KV


@dataclass
class KVConfig:
    etas: tuple = (0.05, 0.1, 0.25, 0.4, 0.5)
    star_K: int = 3


def main(cfg: KVConfig):
    print("v  eta    local max  bound     normalization")
    for v in (2, 4):
        for eta in cfg.etas:
            g = KV.kv_game(v, eta)
            res = KV.kv_local_max(g)
            print(f"{v}  {eta:<5}  {res.value:.6f}   {KV.kv_classical_bound(v, eta):.6f}  "
                  f"{KV.normalization(g.coefficients()):.6f}")
    g = KV.kv_game(2, 0.25)
    for K in range(1, cfg.star_K + 1):
        print(f"star K={K}: normalization {KV.normalization(KV.star_kv(g, K).coeffs):.6f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--star-K", type=int, default=3)
    main(KVConfig(star_K=ap.parse_args().star_K))
