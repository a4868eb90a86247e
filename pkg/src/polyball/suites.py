"""Verification suites behind ``polyball verify``.

Every suite takes a numpy Generator and returns named checks; a check passes
when its residual does not exceed its tolerance.
"""

from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, List, Optional

import numpy as np

from . import autgroup as ag
from . import freeword as fw
from . import series as sr
from .berezin import ampliate, berezin_kernel, berezin_transform, exact_caps
from .fock import build_truncated_fock, model_tuple
from .tuples import OpTuple, distance, random_scalar_point, random_tuple


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def _interior_tuple(n_vec, dimH, rng, lo=0.2, hi=0.9):
    return random_tuple(n_vec, dimH, float(rng.uniform(lo, hi)), seed=rng)


DEFECT_PATTERNS = ((1,), (2,), (3,), (1, 1), (2, 1), (2, 2), (1, 2, 1))


def suite_defect(rng, caps: Optional[int] = None, pairs: int = 50) -> List[Check]:
    """Möbius involution and the boundary defect identity on random pairs."""
    inv, dfi, k1 = 0.0, 0.0, 0.0
    for t in range(pairs):
        n_vec = DEFECT_PATTERNS[t % len(DEFECT_PATTERNS)]
        X = _interior_tuple(n_vec, 4, rng)
        a = ag.random_automorphism(n_vec, rng, max_norm=0.9)
        dfi = max(dfi, ag.defect_identity_residual(a, X))
        m = ag.Automorphism.moebius([l.lam for l in a.lam])
        inv = max(inv, distance(ag.apply(m, ag.apply(m, X)), X))
    for _ in range(10):
        X = _interior_tuple((2,), 3, rng)
        lp = ag.BallPoint(random_scalar_point((2,), rng, 0.9)[0])
        Y = ag.moebius_apply(lp, X.X[0])
        row, lam = X.row_matrix(0), lp.lam[None, :]
        eye = np.eye(X.dimH)
        A = np.linalg.inv(eye - row @ np.kron(lam.conj().T, eye))  # (I - X lam^*)^(-1)
        lhs = eye - sum(y @ y.conj().T for y in Y)
        rhs = lp.delta ** 2 * A @ (eye - row @ row.conj().T) @ A.conj().T
        k1 = max(k1, float(np.linalg.norm(lhs - rhs, 2)))
    return [Check("defect_identity", dfi, 1e-9), Check("involution", inv, 1e-9),
            Check("single_ball_identity", k1, 1e-9)]


SCHWARZ_CASES = (((1,), (40,)), ((2,), (6,)), ((1, 1), (12, 12)))


def suite_schwarz(rng, caps: Optional[int] = None, count: int = 50) -> List[Check]:
    """||F(X)|| against m(X) times the truncated sup-norm, plus the scalar equality case."""
    ratio = 0.0
    for t in range(count):
        n_vec, deg = SCHWARZ_CASES[t % len(SCHWARZ_CASES)]
        if caps is not None:
            deg = (caps,) * len(n_vec)
        fock = build_truncated_fock(n_vec, deg)
        F = sr.random_polynomial(n_vec, 2, rng, zero_constant=True)
        X = _interior_tuple(n_vec, 3, rng, 0.1, 0.95)
        rep = sr.schwarz_margin(F, X, fock)
        ratio = max(ratio, rep.value_norm / (rep.minkowski * rep.sup_estimate))
    fock = build_truncated_fock((1,), (40,))
    rep = sr.schwarz_margin(sr.coordinate((1,), 0, 0), OpTuple.from_scalar([[0.3]]), fock)
    eq = max(abs(rep.value_norm - 0.3), abs(rep.minkowski - 0.3))
    return [Check("schwarz_ratio", ratio, 1.05), Check("equality_case", eq, 1e-12)]


BEREZIN_CASES = (((2,), 4), ((1,), 4), ((2, 1), 6), ((1, 1), 4), ((1, 1, 1), 6))


def suite_berezin(rng, caps: Optional[int] = None, count: int = 20) -> List[Check]:
    """Exact kernel identities for jointly nilpotent tuples."""
    iso = inter = recon = 0.0
    for t in range(count):
        n_vec, dimH = BEREZIN_CASES[t % len(BEREZIN_CASES)]
        X = random_tuple(n_vec, dimH, float(rng.uniform(0.3, 0.95)), nilpotent=True, seed=rng)
        need = exact_caps(X)
        fock = build_truncated_fock(n_vec, tuple(max(c, caps or 3) for c in need))
        K = berezin_kernel(X, fock)
        S = model_tuple(fock)
        iso = max(iso, float(np.linalg.norm(K.matrix.conj().T @ K.matrix - np.eye(dimH), 2)))
        for i, j in ((i, j) for i in range(X.k) for j in range(n_vec[i])):
            lhs = K.matrix @ X.X[i][j].conj().T
            rhs = ampliate(K, S.X[i][j].conj().T)
            inter = max(inter, float(np.abs(lhs - rhs).max()))
        words = [mw for mw in fock.basis if fw.degree(mw) <= 3]
        for a, b in product(words, words):
            if fw.degree(a) + fw.degree(b) > 3:
                continue
            g = S.monomial(a) @ S.monomial(b).conj().T
            want = X.monomial(a) @ X.monomial(b).conj().T
            recon = max(recon, float(np.abs(berezin_transform(K, g) - want).max()))
    return [Check("isometry", iso, 1e-12), Check("intertwining", inter, 1e-12),
            Check("reconstruction", recon, 1e-11)]


def _small_unary(rng, scale):
    phase = np.exp(2j * np.pi * rng.uniform())
    lam = scale * rng.uniform(0.5, 1.0) * np.exp(2j * np.pi * rng.uniform())
    return ag.Automorphism((0,), (np.array([[phase]]),), (np.array([lam]),))


def suite_projective(rng, caps: Optional[int] = None, margin: int = 10,
                     lam_scale: float = 0.05) -> List[Check]:
    """Unary projective representation: conjugation, unitarity and cocycle."""
    fock = build_truncated_fock((1,), (caps or 30,))
    margin = min(margin, fock.deg_vec[0])
    a, b = _small_unary(rng, lam_scale), _small_unary(rng, lam_scale)
    Ua = ag.projective_unitary(a, fock)
    rep = ag.projective_residuals(a, fock, margin, Ua)
    co = ag.cocycle(a, b, fock, margin)
    ident = ag.projective_unitary(ag.Automorphism.identity((1,)), fock)
    return [Check("conjugation", rep.conjugation, 1e-6),
            Check("unitarity", rep.unitarity, 1e-6),
            Check("cocycle_scalar", co.residual, 1e-6),
            Check("cocycle_modulus", abs(abs(co.c) - 1.0), 1e-6),
            Check("identity_unitary", float(np.abs(ident - np.eye(fock.dim)).max()), 1e-12)]


COUNT_PATTERNS = ((1,), (2, 2), (1, 2), (3, 3, 3), (1, 1, 2), (2, 1, 2), (1, 2, 3),
                  (2, 2, 2, 1), (1, 1, 1, 1), (3, 1, 3, 1))


def _count_oracle(n_vec):
    # brute force over all permutations preserving the pattern
    from itertools import permutations
    return sum(1 for p in permutations(range(len(n_vec)))
               if all(n_vec[p[i]] == n_vec[i] for i in range(len(n_vec))))


def suite_metric(rng, caps: Optional[int] = None) -> List[Check]:
    """Component counts, convergence along parameter sequences, and sigma jumps."""
    cnt = max(abs(ag.component_count(n) - _count_oracle(n)) for n in COUNT_PATTERNS)
    n_vec = (2, 2)
    fock = build_truncated_fock(n_vec, (caps or 3,) * 2)
    a = ag.random_automorphism(n_vec, rng, 0.5, permute=False)
    dl = [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(2)]
    H = [(lambda h: (h + h.conj().T) / 2)(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
         for _ in range(2)]
    dists = []
    for m in (1, 2, 3):
        eps = 10.0 ** (-m)
        am = ag.Automorphism(a.sigma, tuple(u @ _expm_i(eps * h) for u, h in zip(a.U, H)),
                             tuple(l.lam + eps * 0.1 * d for l, d in zip(a.lam, dl)))
        dists.append(ag.metric(am, a, fock))
    ratio = max(dists[1] / dists[0], dists[2] / dists[1])
    swapped = ag.Automorphism((1, 0), a.U, tuple(l.lam for l in a.lam))
    jump = ag.sup_distance(swapped, a, fock)
    return [Check("component_count", float(cnt), 0.0),
            Check("convergence_ratio", float(ratio), 0.2),
            Check("sigma_gap", max(0.0, 1.0 - jump), 0.1)]


def _expm_i(h):
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


SUITES: Dict[str, Callable] = {
    "defect": suite_defect,
    "schwarz": suite_schwarz,
    "berezin": suite_berezin,
    "projective": suite_projective,
    "metric": suite_metric,
}
