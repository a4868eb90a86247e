"""Block norms of two geometric series on the truncated model, below and above the radius."""

import argparse
from dataclasses import dataclass

from polyball import fock as F
from polyball import series as sr


@dataclass
class Config:
    unary_degree: int = 40
    binary_caps: int = 6
    factors: tuple = (0.5, 0.9, 1.1, 1.5)


def run(cfg: Config) -> None:
    cases = [
        ("2^p unary", sr.from_function((1,), cfg.unary_degree, lambda mw: 2.0 ** len(mw[0])),
         F.build_truncated_fock((1,), (cfg.unary_degree,))),
        ("all-ones binary", sr.from_function((2,), cfg.binary_caps + 1, lambda mw: 1.0),
         F.build_truncated_fock((2,), (cfg.binary_caps,))),
    ]
    for name, s, fock in cases:
        g = sr.hadamard_radius(s)
        print(f"{name}: gamma = {g!r}")
        for t in cfg.factors:
            norms = sr.model_block_norms(s, fock, t * g)
            top = fock.deg_vec[0]
            print(f"  r = {t:.2f} gamma  block norm at degree {top}: {norms[top]:.3e}"
                  f"  ({'decays' if norms[top] < norms[1] else 'grows'})")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--unary-degree", type=int, default=Config.unary_degree)
    ap.add_argument("--binary-caps", type=int, default=Config.binary_caps)
    a = ap.parse_args()
    run(Config(a.unary_degree, a.binary_caps))
