"""Metric between an automorphism and perturbations of its triple, and the sigma gap."""

import argparse
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from polyball import autgroup as ag
from polyball import fock as F


@dataclass
class Config:
    n_vec: tuple = (2, 2)
    caps: int = 3
    steps: int = 5
    seed: int = 0


def run(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    fock = F.build_truncated_fock(cfg.n_vec, (cfg.caps,) * len(cfg.n_vec))
    a = ag.random_automorphism(cfg.n_vec, rng, 0.5, permute=False)
    H = [(lambda h: (h + h.conj().T) / 2)(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
         for n in cfg.n_vec]
    for m in range(1, cfg.steps + 1):
        eps = 10.0 ** -m
        b = ag.Automorphism(a.sigma, tuple(u @ sla.expm(1j * eps * h) for u, h in zip(a.U, H)),
                            tuple(l.lam + 0.1 * eps for l in a.lam))
        print(f"eps 1e-{m}: metric {ag.metric(b, a, fock):.3e}")
    if len(set(cfg.n_vec)) < len(cfg.n_vec):
        i = next(i for i in range(len(cfg.n_vec)) if cfg.n_vec.count(cfg.n_vec[i]) > 1)
        j = next(j for j in range(i + 1, len(cfg.n_vec)) if cfg.n_vec[j] == cfg.n_vec[i])
        sigma = list(range(len(cfg.n_vec)))
        sigma[i], sigma[j] = j, i
        swapped = ag.Automorphism(tuple(sigma), a.U, tuple(l.lam for l in a.lam))
        print(f"sigma swap {i}<->{j}: sup distance {ag.sup_distance(swapped, a, fock):.3f}")
    print(f"components of Aut: {ag.component_count(cfg.n_vec)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=list(Config.n_vec))
    ap.add_argument("--caps", type=int, default=Config.caps)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    run(Config(n_vec=tuple(a.n), caps=a.caps, seed=a.seed))
