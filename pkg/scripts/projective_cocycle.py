"""Scan of the projective-representation residuals against |lambda| on the unary model.

The truncated composition operator loses accuracy as |lambda| grows because
its columns carry Taylor mass beyond the cap; this script shows where.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from polyball import autgroup as ag
from polyball import fock as F


@dataclass
class Config:
    caps: int = 30
    margin: int = 10
    radii: tuple = (0.01, 0.03, 0.05, 0.1, 0.2, 0.3)
    seed: int = 0


def unary(lam, phase):
    return ag.Automorphism((0,), (np.array([[phase]]),), (np.array([lam]),))


def run(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    fock = F.build_truncated_fock((1,), (cfg.caps,))
    print(f"caps {cfg.caps}, margin {cfg.margin}")
    print(f"{'|lam|':>6} {'conjugation':>12} {'unitarity':>12} {'cocycle':>12} {'||c|-1|':>10}")
    for r in cfg.radii:
        a, b = (unary(r * np.exp(2j * np.pi * rng.uniform()), np.exp(2j * np.pi * rng.uniform()))
                for _ in range(2))
        rep = ag.projective_residuals(a, fock, cfg.margin)
        co = ag.cocycle(a, b, fock, cfg.margin)
        print(f"{r:6.2f} {rep.conjugation:12.2e} {rep.unitarity:12.2e} {co.residual:12.2e}"
              f" {abs(abs(co.c) - 1):10.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--caps", type=int, default=Config.caps)
    ap.add_argument("--margin", type=int, default=Config.margin)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    run(Config(caps=a.caps, margin=a.margin, seed=a.seed))
