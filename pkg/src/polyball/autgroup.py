"""Free holomorphic automorphisms of the polyball.

Every automorphism is stored as a canonical triple (sigma, U, lambda) and acts
as ``p_sigma o Phi_U o Psi_lambda``: the Möbius involution ``Psi_{lambda_i}``
on each row, then right multiplication of row ``i`` by ``U_i``, then output
row ``i`` taken from row ``sigma(i)``. Permutations are zero-based.

Compositions and inverses are refactored numerically: the base point is
found by scalar evaluation, and the remaining linear part is read off a
Jacobian at the origin.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from .berezin import berezin_kernel, berezin_transform
from .config import DEFAULT, METRIC_R_GRID
from .errors import (DefectRankNotOne, FactorizationFailed, InputError, ResolventSingular,
                     ShapeMismatch)
from .fock import TruncFock, model_tuple
from .tuples import OpTuple, defect

ScalarPoint = List[np.ndarray]


@dataclass(frozen=True)
class BallPoint:
    lam: np.ndarray
    delta: float = field(init=False)
    delta_star: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lam, dtype=complex)).copy()
        lam.setflags(write=False)
        nrm2 = float(np.vdot(lam, lam).real)
        if nrm2 >= (1 - 1e-12) ** 2:
            raise InputError(f"base point norm {math.sqrt(nrm2):.6g} is not below 1")
        n = lam.size
        delta = math.sqrt(1 - nrm2)
        # (I - lam^* lam)^(1/2) acts as delta on lam^* and as 1 on its complement
        ds = np.eye(n, dtype=complex)
        if nrm2 > 0:
            ds = ds + (delta - 1) * np.outer(lam.conj(), lam) / nrm2
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "delta_star", ds)

    @property
    def n(self) -> int:
        return self.lam.size


def moebius_apply(lp: BallPoint, row: Sequence[np.ndarray],
                  cond_limit: float = DEFAULT.resolvent_cond) -> List[np.ndarray]:
    """Psi_lambda(Y) = lambda - Delta_lambda (I - sum conj(lambda_i) Y_i)^(-1) [Y_1..Y_n] Delta_lambda*."""
    if len(row) != lp.n:
        raise ShapeMismatch(f"row of length {len(row)} for base point in C^{lp.n}")
    m = row[0].shape[0]
    eye = np.eye(m, dtype=complex)
    R = eye - sum(c.conjugate() * y for c, y in zip(lp.lam, row))
    if m == 1:
        if abs(R[0, 0]) < 1.0 / cond_limit:
            raise ResolventSingular("scalar resolvent vanishes")
        RY = [y / R[0, 0] for y in row]
    else:
        if np.linalg.cond(R) > cond_limit:
            raise ResolventSingular(f"resolvent condition number exceeds {cond_limit:.0e}")
        RY = np.split(np.linalg.solve(R, np.hstack(row)), lp.n, axis=1)
    ds = lp.delta_star
    out = []
    for j in range(lp.n):
        acc = sum(RY[i] * ds[i, j] for i in range(lp.n) if ds[i, j] != 0)
        out.append(lp.lam[j] * eye - lp.delta * acc)
    return out


def moebius_scalar(lp: BallPoint, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    denom = 1 - np.dot(lp.lam.conj(), z)
    if abs(denom) < 1.0 / DEFAULT.resolvent_cond:
        raise ResolventSingular("scalar resolvent vanishes")
    return lp.lam - lp.delta / denom * (z @ lp.delta_star)


@dataclass(frozen=True)
class Automorphism:
    sigma: Tuple[int, ...]
    U: Tuple[np.ndarray, ...]
    lam: Tuple[BallPoint, ...]

    def __post_init__(self):
        sigma = tuple(int(s) for s in self.sigma)
        U = tuple(np.array(u, dtype=complex) for u in self.U)
        lam = tuple(l if isinstance(l, BallPoint) else BallPoint(l) for l in self.lam)
        k = len(sigma)
        if sorted(sigma) != list(range(k)):
            raise InputError(f"sigma {sigma} is not a permutation of 0..{k - 1}")
        if len(U) != k or len(lam) != k:
            raise ShapeMismatch("sigma, U and lambda must have the same length")
        n_vec = tuple(l.n for l in lam)
        for i, u in enumerate(U):
            if u.shape != (n_vec[i], n_vec[i]):
                raise ShapeMismatch(f"U_{i} has shape {u.shape}, expected n_{i} = {n_vec[i]}")
            if np.linalg.norm(u.conj().T @ u - np.eye(n_vec[i]), 2) > 1e-10:
                raise InputError(f"U_{i} is not unitary")
            u.setflags(write=False)
        for i in range(k):
            if n_vec[sigma[i]] != n_vec[i]:
                raise InputError(
                    f"sigma maps factor {sigma[i]} of size {n_vec[sigma[i]]} "
                    f"onto factor {i} of size {n_vec[i]}")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "lam", lam)

    @property
    def n_vec(self) -> Tuple[int, ...]:
        return tuple(l.n for l in self.lam)

    @property
    def k(self) -> int:
        return len(self.sigma)

    @property
    def base_point(self) -> ScalarPoint:
        """Psi^{-1}(0)."""
        return [l.lam.copy() for l in self.lam]

    @classmethod
    def identity(cls, n_vec: Sequence[int]) -> "Automorphism":
        k = len(n_vec)
        return cls(tuple(range(k)), tuple(-np.eye(n) for n in n_vec),
                   tuple(np.zeros(n) for n in n_vec))

    @classmethod
    def moebius(cls, lams: Sequence[Sequence[complex]]) -> "Automorphism":
        """The involution Psi_lambda (sigma = id, U = I)."""
        lams = [np.atleast_1d(np.asarray(l, dtype=complex)) for l in lams]
        return cls(tuple(range(len(lams))), tuple(np.eye(l.size) for l in lams), tuple(lams))

    def close_to(self, other: "Automorphism", atol: float) -> bool:
        return self.sigma == other.sigma and triple_distance(self, other) <= atol


def triple_distance(a: Automorphism, b: Automorphism) -> float:
    """Max parameter deviation between two triples with equal sigma (inf otherwise)."""
    if a.sigma != b.sigma or a.n_vec != b.n_vec:
        return math.inf
    du = max(np.abs(x - y).max() for x, y in zip(a.U, b.U))
    dl = max((np.abs(x.lam - y.lam).max() for x, y in zip(a.lam, b.lam)), default=0.0)
    return float(max(du, dl))


def random_automorphism(n_vec: Sequence[int], rng, max_norm: float = 0.6,
                        permute: bool = True) -> Automorphism:
    """Random triple: Haar unitaries, base points of norm below ``max_norm``, and a
    uniformly random size-preserving permutation."""
    from scipy.stats import unitary_group

    k = len(n_vec)
    sigma = list(range(k))
    if permute:
        groups = {}
        for i, n in enumerate(n_vec):
            groups.setdefault(n, []).append(i)
        for idx in groups.values():
            perm = rng.permutation(idx)
            for src, dst in zip(idx, perm):
                sigma[src] = int(dst)
    U = [unitary_group.rvs(n, random_state=rng) if n > 1
         else np.array([[np.exp(2j * np.pi * rng.uniform())]]) for n in n_vec]
    lam = []
    for n in n_vec:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lam.append(v / np.linalg.norm(v) * max_norm * rng.uniform())
    return Automorphism(tuple(sigma), tuple(U), tuple(lam))


# application

def _check_n(a: Automorphism, n_vec):
    if tuple(n_vec) != a.n_vec:
        raise ShapeMismatch(f"automorphism over {a.n_vec} applied to tuple over {tuple(n_vec)}")


def _linear_rows(a: Automorphism, rows):
    """p_sigma o Phi_U applied to rows (lists of matrices)."""
    mixed = []
    for i, row in enumerate(rows):
        U = a.U[i]
        mixed.append([sum(row[l] * U[l, j] for l in range(len(row))) for j in range(len(row))])
    return [mixed[a.sigma[i]] for i in range(a.k)]


def apply(a: Automorphism, X: OpTuple) -> OpTuple:
    _check_n(a, X.n_vec)
    rows = [moebius_apply(l, X.X[i]) for i, l in enumerate(a.lam)]
    return OpTuple(a.n_vec, _linear_rows(a, rows), validate=False)


def apply_scalar(a: Automorphism, z: Sequence[np.ndarray]) -> ScalarPoint:
    _check_n(a, [len(np.atleast_1d(zi)) for zi in z])
    w = [moebius_scalar(l, zi) @ a.U[i] for i, (l, zi) in enumerate(zip(a.lam, z))]
    return [w[a.sigma[i]] for i in range(a.k)]


def apply_inverse_scalar(a: Automorphism, z: Sequence[np.ndarray]) -> ScalarPoint:
    """Psi_lambda o Phi_{U^*} o p_{sigma^{-1}} at a scalar point."""
    _check_n(a, [len(np.atleast_1d(zi)) for zi in z])
    unperm = [None] * a.k
    for i in range(a.k):
        unperm[a.sigma[i]] = np.asarray(z[i], dtype=complex)
    return [moebius_scalar(l, unperm[i] @ a.U[i].conj().T) for i, l in enumerate(a.lam)]


def apply_to_model(a: Automorphism, fock: TruncFock, side: str = "left",
                   r: float = 1.0) -> OpTuple:
    """Boundary function Psi(rS) on the truncated model."""
    _check_n(a, fock.n_vec)
    S = model_tuple(fock, side)
    return apply(a, S.scale(r) if r != 1.0 else S)


def row_isometry_residual(Psi_hat: OpTuple, fock: TruncFock,
                          margin: Optional[int] = None) -> Tuple[float, ...]:
    """||P (Psi_i^* Psi_i - I) P|| per row, P the block of degree <= caps - margin."""
    if margin is None:
        margin = default_margin(fock)
    idx = fock.interior_indices(margin)
    out = []
    for row in Psi_hat.X:
        cols = np.hstack([m[:, idx] for m in row])
        gram = cols.conj().T @ cols
        out.append(float(np.linalg.norm(gram - np.eye(gram.shape[0]), 2)))
    return tuple(out)


def default_margin(fock: TruncFock) -> int:
    return DEFAULT.margin_unary if all(n == 1 for n in fock.n_vec) else DEFAULT.margin


# group law

def _flatten(z: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.atleast_1d(np.asarray(zi, dtype=complex)) for zi in z])


def _split(v: np.ndarray, n_vec) -> ScalarPoint:
    return [np.array(p) for p in np.split(v, np.cumsum(n_vec)[:-1])]


def jacobian_at_zero(fn: Callable[[ScalarPoint], ScalarPoint], n_vec: Sequence[int],
                     step: float = DEFAULT.fd_step) -> np.ndarray:
    """Complex Jacobian L at the origin, row convention fn(z) ~ fn(0) + z L.

    Central differences with one Richardson refinement.
    """
    N = int(sum(n_vec))
    L = np.zeros((N, N), dtype=complex)

    def diff(t, h):
        e = np.zeros(N, dtype=complex)
        e[t] = h
        return (_flatten(fn(_split(e, n_vec))) - _flatten(fn(_split(-e, n_vec)))) / (2 * h)

    for t in range(N):
        L[t] = (4 * diff(t, step / 2) - diff(t, step)) / 3
    return L


def factor_linear_part(L: np.ndarray, n_vec: Sequence[int],
                       tol: float = DEFAULT.factor_tol) -> Tuple[Tuple[int, ...], Tuple[np.ndarray, ...]]:
    """Split L into (sigma, U) with block (sigma(i), i) = U_{sigma(i)} and zeros elsewhere."""
    n_vec = tuple(n_vec)
    k = len(n_vec)
    off = np.concatenate([[0], np.cumsum(n_vec)])
    L = np.asarray(L, dtype=complex)
    if L.shape != (off[-1], off[-1]):
        raise ShapeMismatch(f"linear part of shape {L.shape} over {n_vec}")
    blk = lambda s, i: L[off[s]:off[s + 1], off[i]:off[i + 1]]
    sigma = []
    U = [None] * k
    for i in range(k):
        live = [s for s in range(k) if np.abs(blk(s, i)).max() > tol]
        if len(live) != 1:
            raise FactorizationFailed(f"output block {i} depends on input blocks {live}")
        s = live[0]
        if n_vec[s] != n_vec[i]:
            raise FactorizationFailed(f"block ({s}, {i}) is not square")
        B = blk(s, i)
        u, _ = sla.polar(B)
        if np.abs(B - u).max() > tol:
            raise FactorizationFailed(f"block ({s}, {i}) is not unitary within {tol:g}")
        sigma.append(s)
        U[s] = u
    if sorted(sigma) != list(range(k)):
        raise FactorizationFailed(f"block pattern {sigma} is not a permutation")
    return tuple(sigma), tuple(U)


def _validation_points(n_vec, count=20, seed=0):
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        pts.append([(rng.standard_normal(n) + 1j * rng.standard_normal(n))
                    / math.sqrt(2 * n) * 0.5 * rng.uniform() for n in n_vec])
    return pts


def refactor(fn: Callable[[ScalarPoint], ScalarPoint], base: ScalarPoint, n_vec: Sequence[int],
             fd_step: float = DEFAULT.fd_step, tol: float = DEFAULT.factor_tol,
             validate_tol: float = DEFAULT.validate_tol) -> Automorphism:
    """Canonical triple of a scalar automorphism ``fn`` with ``fn(base) = 0``."""
    lam = BallPoint  # alias for readability below
    pts = [lam(b) for b in base]
    shifted = lambda z: fn([moebius_scalar(p, zi) for p, zi in zip(pts, z)])
    L = jacobian_at_zero(shifted, n_vec, fd_step)
    sigma, U = factor_linear_part(L, n_vec, tol)
    out = Automorphism(sigma, U, tuple(p.lam for p in pts))
    worst = 0.0
    for z in _validation_points(n_vec):
        worst = max(worst, float(np.abs(_flatten(apply_scalar(out, z)) - _flatten(fn(z))).max()))
    if worst > validate_tol:
        raise FactorizationFailed(f"refactored triple misses the map by {worst:.3e}")
    return out


def compose(a1: Automorphism, a2: Automorphism, fd_step: float = DEFAULT.fd_step) -> Automorphism:
    """Canonical triple of a1 o a2."""
    if a1.n_vec != a2.n_vec:
        raise ShapeMismatch("automorphisms over different n_vec")
    base = apply_inverse_scalar(a2, apply_inverse_scalar(a1, [np.zeros(n) for n in a1.n_vec]))
    return refactor(lambda z: apply_scalar(a1, apply_scalar(a2, z)), base, a1.n_vec, fd_step)


def inverse(a: Automorphism, fd_step: float = DEFAULT.fd_step) -> Automorphism:
    base = apply_scalar(a, [np.zeros(n) for n in a.n_vec])
    return refactor(lambda z: apply_inverse_scalar(a, z), base, a.n_vec, fd_step)


# defect identity

def defect_identity_residual(a: Automorphism, X: OpTuple) -> float:
    """|| Delta_{Psi(X)}(I) - c R^{-1} Delta_X(I) R^{-*} ||, R = prod_i (I - sum conj(lam_ij) X_ij)."""
    _check_n(a, X.n_vec)
    lhs = defect(apply(a, X))
    eye = np.eye(X.dimH, dtype=complex)
    Rinv = eye
    for l, row in zip(a.lam, X.X):
        R = eye - sum(c.conjugate() * x for c, x in zip(l.lam, row))
        Rinv = Rinv @ np.linalg.inv(R)
    scale = float(np.prod([l.delta ** 2 for l in a.lam]))
    rhs = scale * Rinv @ defect(X) @ Rinv.conj().T
    return float(np.linalg.norm(lhs - rhs, 2))


# metric and components

def sup_distance(a1: Automorphism, a2: Automorphism, fock: TruncFock,
                 r_grid: Sequence[float] = METRIC_R_GRID) -> float:
    """max_r ||Psi_1(rS) - Psi_2(rS)|| with rows concatenated, a lower estimate."""
    best = 0.0
    for r in r_grid:
        P1, P2 = apply_to_model(a1, fock, r=r), apply_to_model(a2, fock, r=r)
        gram = 0
        for row1, row2 in zip(P1.X, P2.X):
            for x, y in zip(row1, row2):
                d = x - y
                gram = gram + d @ d.conj().T
        best = max(best, math.sqrt(max(float(np.linalg.norm(gram, 2)), 0.0)))
    return best


def metric(a1: Automorphism, a2: Automorphism, fock: TruncFock,
           r_grid: Sequence[float] = METRIC_R_GRID) -> float:
    if a1.n_vec != a2.n_vec:
        raise ShapeMismatch("automorphisms over different n_vec")
    base = float(np.linalg.norm(_flatten(a1.base_point) - _flatten(a2.base_point)))
    return sup_distance(a1, a2, fock, r_grid) + base


def component_count(n_vec: Sequence[int]) -> int:
    out = 1
    for mult in Counter(n_vec).values():
        out *= math.factorial(mult)
    return out


# projective representation

def projective_unitary(a: Automorphism, fock: TruncFock,
                       rank_tol: float = DEFAULT.rank_tol) -> np.ndarray:
    """U_Psi with U_Psi^* e_beta = Psi_beta Delta^(1/2) v0 on the truncated model.

    The defect of the boundary function has rank one; its unit eigenvector v0
    is phased to have positive vacuum component.
    """
    Psi_hat = apply_to_model(a, fock)
    w = np.linalg.eigvalsh(defect(Psi_hat))
    rank = int(np.sum(w > rank_tol))
    if rank != 1:
        raise DefectRankNotOne(f"boundary defect has numerical rank {rank}")
    K = berezin_kernel(Psi_hat, fock, cutoff=rank_tol)
    return K.matrix


@dataclass(frozen=True)
class ProjectiveReport:
    unitarity: float
    conjugation: float


def projective_residuals(a: Automorphism, fock: TruncFock, margin: Optional[int] = None,
                         U: Optional[np.ndarray] = None) -> ProjectiveReport:
    """Interior-block residuals of U^*U - I and U^* S_ij U - Psi_ij."""
    if margin is None:
        margin = default_margin(fock)
    if U is None:
        U = projective_unitary(a, fock)
    idx = fock.interior_indices(margin)
    sub = lambda m: m[np.ix_(idx, idx)]
    uni = float(np.linalg.norm(sub(U.conj().T @ U) - np.eye(len(idx)), 2))
    S = model_tuple(fock)
    Psi_hat = apply(a, S)
    conj = 0.0
    for srow, prow in zip(S.X, Psi_hat.X):
        for s, p in zip(srow, prow):
            conj = max(conj, float(np.linalg.norm(sub(U.conj().T @ s @ U - p), 2)))
    return ProjectiveReport(uni, conj)


@dataclass(frozen=True)
class CocycleReport:
    c: complex
    residual: float


def cocycle(a: Automorphism, b: Automorphism, fock: TruncFock,
            margin: Optional[int] = None) -> CocycleReport:
    """c with U_a U_b = c U_{a o b}, from the interior block of U_a U_b U_{a o b}^*."""
    if margin is None:
        margin = default_margin(fock)
    ab = compose(a, b)
    M = projective_unitary(a, fock) @ projective_unitary(b, fock) @ projective_unitary(ab, fock).conj().T
    idx = fock.interior_indices(margin)
    Mi = M[np.ix_(idx, idx)]
    c = complex(np.mean(np.diag(Mi)))
    return CocycleReport(c, float(np.linalg.norm(Mi - c * np.eye(len(idx)), 2)))


def scalar_group_iso(a: Automorphism, z: Sequence[np.ndarray], fock: TruncFock) -> ScalarPoint:
    """Berezin transform at the scalar point z of every boundary-function entry."""
    Psi_hat = apply_to_model(a, fock)
    K = berezin_kernel(OpTuple.from_scalar(z), fock)
    return [np.array([berezin_transform(K, m)[0, 0] for m in row]) for row in Psi_hat.X]
