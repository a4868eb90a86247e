"""Defect identity and involution residuals as tuples approach the boundary."""

import argparse
from dataclasses import dataclass

import numpy as np

from polyball import autgroup as ag
from polyball import tuples as T


@dataclass
class Config:
    n_vec: tuple = (2, 1)
    dimH: int = 4
    gauges: tuple = (0.1, 0.5, 0.9, 0.99, 0.999)
    trials: int = 20
    seed: int = 0


def run(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    print(f"pattern {cfg.n_vec}, dimH {cfg.dimH}")
    print(f"{'gauge':>7} {'defect identity':>16} {'involution':>12}")
    for m in cfg.gauges:
        dfi = inv = 0.0
        for _ in range(cfg.trials):
            X = T.random_tuple(cfg.n_vec, cfg.dimH, m, seed=rng)
            a = ag.random_automorphism(cfg.n_vec, rng, 0.9)
            dfi = max(dfi, ag.defect_identity_residual(a, X))
            mo = ag.Automorphism.moebius([l.lam for l in a.lam])
            inv = max(inv, T.distance(ag.apply(mo, ag.apply(mo, X)), X))
        print(f"{m:7.3f} {dfi:16.2e} {inv:12.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=list(Config.n_vec))
    ap.add_argument("--dimH", type=int, default=Config.dimH)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    run(Config(n_vec=tuple(a.n), dimH=a.dimH, seed=a.seed))
