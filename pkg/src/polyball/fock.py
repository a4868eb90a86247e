"""Truncated tensor products of full Fock spaces and their model operators.

Each factor keeps words of length at most ``d_i``. Creation operators
annihilate top-degree vectors instead of wrapping them, so the truncated model
is jointly nilpotent and polynomial identities of degree at most ``d_i`` hold
exactly. Analytic functions of the left model compress exactly, because the
span of vectors above the cap is invariant under left creation.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from . import freeword as fw
from .config import DEFAULT
from .errors import IndexOutOfRange, ShapeMismatch, SizeOverflow


@dataclass(frozen=True)
class TruncFock:
    n_vec: Tuple[int, ...]
    deg_vec: Tuple[int, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_vec", tuple(int(n) for n in self.n_vec))
        object.__setattr__(self, "deg_vec", tuple(int(d) for d in self.deg_vec))
        object.__setattr__(self, "dim", fw.multiword_count(self.n_vec, self.deg_vec))

    @property
    def k(self) -> int:
        return len(self.n_vec)

    @property
    def factor_dims(self) -> Tuple[int, ...]:
        return tuple(fw.word_count(n, d) for n, d in zip(self.n_vec, self.deg_vec))

    @cached_property
    def basis(self) -> Tuple[fw.MultiWord, ...]:
        return fw.enumerate_multiwords(self.n_vec, self.deg_vec)

    @cached_property
    def multidegrees(self) -> np.ndarray:
        """Array of shape (dim, k) with the per-factor degree of every basis vector."""
        per_factor = [
            np.array([len(w) for w in fw.enumerate_words(n, d)])
            for n, d in zip(self.n_vec, self.deg_vec)
        ]
        grids = np.meshgrid(*per_factor, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def index(self, mw: fw.MultiWord) -> int:
        return fw.basis_index(mw, self.n_vec, self.deg_vec)

    def interior_indices(self, margin: int) -> np.ndarray:
        """Basis positions whose degree in every factor is at most ``d_i - margin``."""
        caps = np.array(self.deg_vec) - margin
        return np.flatnonzero(np.all(self.multidegrees <= caps, axis=1))

    def to_dict(self):
        return {"n": list(self.n_vec), "d": list(self.deg_vec)}


def build_truncated_fock(n_vec: Sequence[int], deg_vec: Sequence[int],
                         max_dim: int = DEFAULT.max_dim) -> TruncFock:
    if len(n_vec) != len(deg_vec):
        raise ShapeMismatch("n_vec and deg_vec lengths differ")
    if any(n < 1 for n in n_vec) or any(d < 0 for d in deg_vec):
        raise ValueError("alphabet sizes must be >= 1 and caps >= 0")
    dim = fw.multiword_count(n_vec, deg_vec)
    if dim > max_dim:
        raise SizeOverflow(f"truncated Fock dimension {dim} exceeds limit {max_dim}")
    return TruncFock(tuple(n_vec), tuple(deg_vec))


@dataclass(frozen=True)
class ModelOperator:
    matrix: object  # ndarray or scipy.sparse matrix
    i: int
    j: int
    side: str


def _factor_word_operator(n: int, d: int, word: fw.Word, side: str) -> sp.csr_matrix:
    words = fw.enumerate_words(n, d)
    size = len(words)
    rows, cols = [], []
    if side == "left":
        suffix_of = lambda w: tuple(word) + w
    elif side == "right":
        rev = tuple(reversed(word))
        suffix_of = lambda w: w + rev
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    for col, w in enumerate(words):
        if len(w) + len(word) <= d:
            rows.append(fw.word_index(suffix_of(w), n))
            cols.append(col)
    data = np.ones(len(rows), dtype=complex)
    return sp.csr_matrix((data, (rows, cols)), shape=(size, size))


def _ampliate(f: TruncFock, factors):
    out = sp.identity(1, dtype=complex, format="csr")
    for m in factors:
        out = sp.kron(out, m, format="csr")
    return out


def _finish(mat, f: TruncFock, sparse: Optional[bool]):
    if sparse is None:
        sparse = f.dim > DEFAULT.sparse_threshold
    return mat if sparse else mat.toarray()


def word_operator(f: TruncFock, mw: fw.MultiWord, side: str = "left",
                  sparse: Optional[bool] = None):
    """Matrix of ``S_(mw)`` (or the right analogue) on the truncated space."""
    if len(mw) != f.k:
        raise ShapeMismatch(f"multiword has {len(mw)} parts, expected {f.k}")
    factors = []
    for i, (n, d) in enumerate(zip(f.n_vec, f.deg_vec)):
        if any(not 0 <= a < n for a in mw[i]):
            raise IndexOutOfRange(f"letter outside alphabet of factor {i}")
        if mw[i]:
            factors.append(_factor_word_operator(n, d, mw[i], side))
        else:
            factors.append(sp.identity(fw.word_count(n, d), dtype=complex, format="csr"))
    return _finish(_ampliate(f, factors), f, sparse)


def creation_operator(f: TruncFock, i: int, j: int, side: str = "left",
                      sparse: Optional[bool] = None) -> ModelOperator:
    """Ampliated creation operator for letter ``j`` of factor ``i`` (both zero-based)."""
    if not 0 <= i < f.k:
        raise IndexOutOfRange(f"factor index {i} outside [0, {f.k})")
    if not 0 <= j < f.n_vec[i]:
        raise IndexOutOfRange(f"letter {j} outside [0, {f.n_vec[i]})")
    mw = tuple((j,) if t == i else () for t in range(f.k))
    return ModelOperator(word_operator(f, mw, side, sparse), i, j, side)


def basis_vector(f: TruncFock, mw: fw.MultiWord) -> np.ndarray:
    v = np.zeros(f.dim, dtype=complex)
    v[f.index(mw)] = 1.0
    return v


def vacuum(f: TruncFock) -> np.ndarray:
    return basis_vector(f, fw.unit(f.k))


def model_tuple(f: TruncFock, side: str = "left"):
    """The universal model (S_{i,j}) as a dense :class:`~polyball.tuples.OpTuple`."""
    from .tuples import OpTuple

    rows = [
        [creation_operator(f, i, j, side, sparse=False).matrix for j in range(f.n_vec[i])]
        for i in range(f.k)
    ]
    return OpTuple(f.n_vec, rows, validate=False)

