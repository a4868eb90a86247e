"""Noncommutative Berezin kernels and transforms over a truncated Fock model.

The kernel of X maps H into F ⊗ D, with D the closed range of the defect
Delta_X(I)^(1/2):

    K_X h = sum_beta e_beta ⊗ Delta_X(I)^(1/2) X_beta^* h

where beta runs over the basis multiwords of the truncated Fock space. Rows of
the kernel matrix are ordered Fock slot first, defect slot second, so block
``b`` occupies rows ``b*r .. b*r + r - 1``.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT
from .errors import KernelNotUnitary, NotInClosedBall, ShapeMismatch
from .fock import TruncFock
from .tuples import Membership, OpTuple, Purity, classify, cp_map_apply, defect, is_pure


@dataclass(frozen=True)
class BerezinKernel:
    source: OpTuple
    fock: TruncFock
    defect_rank: int
    matrix: np.ndarray
    defect_basis: np.ndarray
    # sqrt ||Phi_i^(d_i+1)(I)|| per factor; zero when the cap exceeds the nilpotency order
    tail_bound: Tuple[float, ...]

    @property
    def blocks(self) -> np.ndarray:
        """Kernel as an array of shape (fock.dim, defect_rank, dimH)."""
        return self.matrix.reshape(self.fock.dim, self.defect_rank, self.source.dimH)


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # first entry of non-negligible modulus made real positive
    out = vecs.copy()
    for c in range(out.shape[1]):
        col = out[:, c]
        idx = int(np.argmax(np.abs(col) > 1e-8 * np.abs(col).max()))
        out[:, c] = col * (abs(col[idx]) / col[idx])
    return out


def defect_factor(X: OpTuple, cutoff: float = DEFAULT.defect_cutoff):
    """Return (basis V, D) with Delta_X(I)^(1/2) = V D in defect coordinates.

    ``V`` is dimH x r with orthonormal columns spanning the defect range; ``D``
    is the r x dimH coordinate form of the square root.
    """
    delta = defect(X)
    w, v = np.linalg.eigh((delta + delta.conj().T) / 2)
    keep = w > cutoff
    V = _fix_phase(v[:, keep][:, ::-1])
    roots = np.sqrt(w[keep][::-1])
    return V, roots[:, None] * V.conj().T


def exact_caps(X: OpTuple, tol: float = 1e-26) -> Tuple[int, ...]:
    """Smallest per-factor caps at which the kernel of a nilpotent tuple is exact.

    Factor i needs cap p_i - 1 where Phi_i^{p_i}(I) = 0. The test is on
    ||Phi^p(I)|| = ||X^p||^2, hence the squared default tolerance.
    """
    rep = is_pure(X, tol=tol, max_power=X.dimH + 1)
    if any(f is not Purity.PURE for f in rep.factors):
        raise ValueError("tuple is not jointly nilpotent")
    return tuple(max(p - 1, 0) for p in rep.powers)


def berezin_kernel(X: OpTuple, fock: TruncFock, cutoff: float = DEFAULT.defect_cutoff,
                   tol: float = DEFAULT.eig_tol) -> BerezinKernel:
    if X.n_vec != fock.n_vec:
        raise ShapeMismatch(f"tuple over {X.n_vec} but Fock space over {fock.n_vec}")
    if classify(X, tol).cls is Membership.OUTSIDE:
        raise NotInClosedBall("tuple lies outside the closed polyball")
    V, D = defect_factor(X, cutoff)
    r = V.shape[1]
    K = np.empty((fock.dim, r, X.dimH), dtype=complex)
    for b, mw in enumerate(fock.basis):
        K[b] = D @ X.monomial(mw).conj().T
    tails = []
    for i in range(X.k):
        Y = np.eye(X.dimH, dtype=complex)
        for _ in range(fock.deg_vec[i] + 1):
            Y = cp_map_apply(X.X[i], Y)
        tails.append(float(np.sqrt(max(np.linalg.norm(Y, 2), 0.0))))
    return BerezinKernel(X, fock, r, K.reshape(fock.dim * r, X.dimH), V, tuple(tails))


def _as_operator(g):
    if sp.issparse(g):
        return g.tocsr()
    return np.asarray(g, dtype=complex)


def ampliate(K: BerezinKernel, g) -> np.ndarray:
    """(g ⊗ I_D) K for g acting on the Fock space (or already on Fock ⊗ D)."""
    g = _as_operator(g)
    dim, r, m = K.fock.dim, K.defect_rank, K.source.dimH
    if g.shape == (dim, dim):
        out = g @ K.matrix.reshape(dim, r * m)
        return np.asarray(out).reshape(dim * r, m)
    if g.shape == (dim * r, dim * r):
        return np.asarray(g @ K.matrix)
    raise ShapeMismatch(f"operator of shape {g.shape} does not act on Fock dim {dim}")


def berezin_transform(K: BerezinKernel, g) -> np.ndarray:
    """B_X[g] = K^* (g ⊗ I) K."""
    return K.matrix.conj().T @ ampliate(K, g)


def _margin_indices(fock: TruncFock, margin: Union[int, Sequence[int]]) -> np.ndarray:
    caps = np.array(fock.deg_vec) - np.broadcast_to(np.asarray(margin), (fock.k,))
    return np.flatnonzero(np.all(fock.multidegrees <= caps, axis=1))


def unitarity_residuals(K: BerezinKernel, margin: Union[int, Sequence[int]] = 0):
    """(||K^*K - I||, ||P(KK^* - I)P||) with P the Fock block of degree <= caps - margin."""
    m = K.source.dimH
    iso = float(np.linalg.norm(K.matrix.conj().T @ K.matrix - np.eye(m), 2))
    rows = (_margin_indices(K.fock, margin)[:, None] * K.defect_rank
            + np.arange(K.defect_rank)[None, :]).ravel()
    Kp = K.matrix[rows]
    co = Kp @ Kp.conj().T - np.eye(len(rows))
    return iso, float(np.linalg.norm(co, 2)) if len(rows) else 0.0


def kernel_is_unitary(K: BerezinKernel, tol: float = 1e-10,
                      margin: Union[int, Sequence[int]] = 0) -> bool:
    iso, co = unitarity_residuals(K, margin)
    return iso <= tol and co <= tol


def berezin_implemented_automorphism(K: BerezinKernel, g, tol: float = 1e-8,
                                     margin: Union[int, Sequence[int]] = 0) -> np.ndarray:
    """Gamma(g) = K^*(g ⊗ I)K, a *-homomorphism once K is unitary."""
    if not kernel_is_unitary(K, tol, margin):
        iso, co = unitarity_residuals(K, margin)
        raise KernelNotUnitary(f"kernel residuals {iso:.3e}, {co:.3e} exceed {tol:.1e}")
    return berezin_transform(K, g)
