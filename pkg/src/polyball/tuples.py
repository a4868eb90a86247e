"""Operator tuples on finite-dimensional spaces and polyball geometry.

An :class:`OpTuple` holds k rows of square matrices; entries of different rows
must commute. The completely positive map of row ``i`` is
``Y -> sum_j X_ij Y X_ij^*`` and the defect maps are compositions of
``id - Phi_i`` over a subset of the rows.
"""

import enum
import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import freeword as fw
from .config import DEFAULT
from .errors import CommutationViolation, DegenerateSample, ShapeMismatch


def _opnorm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    if a.shape[0] == 1 and a.shape[1] == 1:
        return float(abs(a[0, 0]))
    return float(np.linalg.norm(a, 2))


class OpTuple:
    """k rows of dimH x dimH complex matrices, rows cross-commuting."""

    def __init__(self, n_vec: Sequence[int], X, validate: bool = True,
                 tol: float = DEFAULT.commute_tol):
        self.n_vec = tuple(int(n) for n in n_vec)
        rows = []
        if len(X) != len(self.n_vec):
            raise ShapeMismatch(f"got {len(X)} rows for n_vec {self.n_vec}")
        dimH = None
        for i, row in enumerate(X):
            if len(row) != self.n_vec[i]:
                raise ShapeMismatch(f"row {i} has {len(row)} entries, expected {self.n_vec[i]}")
            mats = []
            for a in row:
                a = np.array(a, dtype=complex)
                if a.ndim == 0:
                    a = a.reshape(1, 1)
                if a.ndim != 2 or a.shape[0] != a.shape[1]:
                    raise ShapeMismatch(f"entry of row {i} is not square: shape {a.shape}")
                if dimH is None:
                    dimH = a.shape[0]
                elif a.shape[0] != dimH:
                    raise ShapeMismatch("entries have different sizes")
                a.setflags(write=False)
                mats.append(a)
            rows.append(tuple(mats))
        self.X = tuple(rows)
        self.dimH = dimH
        self._words: Dict[Tuple[int, fw.Word], np.ndarray] = {}
        if validate:
            self.check_commutation(tol)

    @property
    def k(self) -> int:
        return len(self.n_vec)

    def __repr__(self):
        return f"OpTuple(n={self.n_vec}, dimH={self.dimH})"

    def check_commutation(self, tol: float = DEFAULT.commute_tol) -> None:
        bad = []
        for s, t in itertools.combinations(range(self.k), 2):
            for j, a in enumerate(self.X[s]):
                for p, b in enumerate(self.X[t]):
                    c = a @ b - b @ a
                    if _opnorm(c) > tol * max(1.0, _opnorm(a) * _opnorm(b)):
                        bad.append(((s, j), (t, p)))
        if bad:
            raise CommutationViolation(
                f"{len(bad)} cross-row pairs fail to commute, first {bad[0]}", bad)

    # constructors

    @classmethod
    def zeros(cls, n_vec: Sequence[int], dimH: int) -> "OpTuple":
        z = np.zeros((dimH, dimH), dtype=complex)
        return cls(n_vec, [[z] * n for n in n_vec], validate=False)

    @classmethod
    def from_scalar(cls, z: Sequence[Sequence[complex]]) -> "OpTuple":
        """A point of the scalar polyball, one vector per factor."""
        rows = [[np.array([[c]], dtype=complex) for c in np.atleast_1d(zi)] for zi in z]
        return cls([len(r) for r in rows], rows, validate=False)

    def to_scalar(self) -> List[np.ndarray]:
        if self.dimH != 1:
            raise ShapeMismatch("tuple is not scalar")
        return [np.array([a[0, 0] for a in row]) for row in self.X]

    # transformations

    def map_entries(self, fn) -> "OpTuple":
        return OpTuple(self.n_vec, [[fn(a) for a in row] for row in self.X], validate=False)

    def scale(self, c: complex) -> "OpTuple":
        return self.map_entries(lambda a: c * a)

    def scale_rows(self, r_vec: Sequence[float]) -> "OpTuple":
        return OpTuple(self.n_vec, [[r * a for a in row] for r, row in zip(r_vec, self.X)],
                       validate=False)

    def scale_entries(self, z: Sequence[Sequence[complex]]) -> "OpTuple":
        return OpTuple(self.n_vec, [[c * a for c, a in zip(zi, row)] for zi, row in zip(z, self.X)],
                       validate=False)

    def row_matrix(self, i: int) -> np.ndarray:
        """The row operator [X_i1 ... X_in] from H^n to H."""
        return np.hstack(self.X[i])

    def allclose(self, other: "OpTuple", atol: float) -> bool:
        return distance(self, other) <= atol

    # words

    def word(self, i: int, word: fw.Word) -> np.ndarray:
        """X_{i,w} = X_{i,w_0} X_{i,w_1} ... (identity for the empty word)."""
        key = (i, tuple(word))
        hit = self._words.get(key)
        if hit is not None:
            return hit
        if not word:
            out = np.eye(self.dimH, dtype=complex)
        else:
            out = self.X[i][word[0]] @ self.word(i, word[1:])
        self._words[key] = out
        return out

    def monomial(self, mw: fw.MultiWord) -> np.ndarray:
        out = None
        for i, w in enumerate(mw):
            if not w:
                continue
            m = self.word(i, w)
            out = m if out is None else out @ m
        return np.eye(self.dimH, dtype=complex) if out is None else out


def distance(a: OpTuple, b: OpTuple) -> float:
    """Largest entrywise operator-norm difference between two tuples."""
    if a.n_vec != b.n_vec:
        raise ShapeMismatch("tuples over different n_vec")
    return max(_opnorm(x - y) for ra, rb in zip(a.X, b.X) for x, y in zip(ra, rb))


def cp_map_apply(x_row: Sequence[np.ndarray], Y: np.ndarray) -> np.ndarray:
    Y = np.asarray(Y, dtype=complex)
    out = np.zeros_like(Y)
    for a in x_row:
        if a.shape[1] != Y.shape[0] or a.shape[0] != Y.shape[1]:
            raise ShapeMismatch(f"operator {a.shape} incompatible with {Y.shape}")
        out += a @ Y @ a.conj().T
    return (out + out.conj().T) / 2


def defect(X: OpTuple, p_vec: Optional[Sequence[int]] = None,
           Y: Optional[np.ndarray] = None) -> np.ndarray:
    """Apply (id - Phi_{X_i}) for every i with p_i = 1 to ``Y`` (default I)."""
    if p_vec is None:
        p_vec = (1,) * X.k
    if len(p_vec) != X.k or any(p not in (0, 1) for p in p_vec):
        raise ShapeMismatch(f"p_vec must be k={X.k} values in {{0, 1}}, got {p_vec}")
    D = np.eye(X.dimH, dtype=complex) if Y is None else np.asarray(Y, dtype=complex)
    # (id - Phi_1) o ... o (id - Phi_k): the innermost factor k acts first
    for i in reversed(range(X.k)):
        if p_vec[i]:
            D = D - cp_map_apply(X.X[i], D)
    return D


def row_norm(X: OpTuple, i: int) -> float:
    """Row-contraction norm ||sum_j X_ij X_ij^*||^(1/2)."""
    return float(np.sqrt(max(_opnorm(cp_map_apply(X.X[i], np.eye(X.dimH))), 0.0)))


def tuple_norm(X: OpTuple) -> float:
    """||Phi_1(I) + ... + Phi_k(I)||^(1/2)."""
    total = sum(cp_map_apply(row, np.eye(X.dimH)) for row in X.X)
    return float(np.sqrt(_opnorm(total)))


class Membership(enum.Enum):
    INTERIOR = "Interior"
    CLOSED_BOUNDARY = "ClosedBoundary"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class MembershipReport:
    cls: Membership
    min_defect_eig: float
    max_row_norm_sq: float
    min_partial_eig: float

    @property
    def boundary_width(self) -> float:
        """Distance of the deciding quantities from their thresholds."""
        return min(abs(self.min_defect_eig), abs(1.0 - self.max_row_norm_sq),
                   abs(self.min_partial_eig))


def _min_eig(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((h + h.conj().T) / 2)[0])


def _row_norms_sq(X: OpTuple) -> List[float]:
    I = np.eye(X.dimH, dtype=complex)
    return [_opnorm(cp_map_apply(row, I)) for row in X.X]


def _classify_scaled(X: OpTuple, r: float, tol: float,
                     rows_sq: Optional[List[float]] = None) -> MembershipReport:
    """Classify X/r.

    The factors (id - Phi_i / r^2) are applied one after another rather than
    expanded, so products of small defects keep their relative accuracy.
    """
    s = 1.0 / (r * r)
    full = (1,) * X.k
    min_partial = np.inf
    min_full = np.inf
    I = np.eye(X.dimH, dtype=complex)
    for p in itertools.product((0, 1), repeat=X.k):
        if not any(p):
            continue
        D = I
        for i in reversed(range(X.k)):
            if p[i]:
                D = D - s * cp_map_apply(X.X[i], D)
        e = _min_eig(D)
        min_partial = min(min_partial, e)
        if p == full:
            min_full = e
    if rows_sq is None:
        rows_sq = _row_norms_sq(X)
    rows = max(rows_sq) * s
    if min_partial < -tol:
        cls = Membership.OUTSIDE
    elif min_full > tol and rows < 1.0 - tol:
        cls = Membership.INTERIOR
    else:
        cls = Membership.CLOSED_BOUNDARY
    return MembershipReport(cls, min_full, rows, min_partial)


def classify(X: OpTuple, tol: float = DEFAULT.eig_tol) -> MembershipReport:
    return _classify_scaled(X, 1.0, tol)


def membership(X: OpTuple, tol: float = DEFAULT.eig_tol) -> Membership:
    return classify(X, tol).cls


class Purity(enum.Enum):
    PURE = "pure"
    NOT_PURE = "not_pure"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class PurityReport:
    factors: Tuple[Purity, ...]
    powers: Tuple[int, ...]
    norms: Tuple[float, ...]

    @property
    def overall(self) -> Purity:
        if all(f is Purity.PURE for f in self.factors):
            return Purity.PURE
        if any(f is Purity.NOT_PURE for f in self.factors):
            return Purity.NOT_PURE
        return Purity.UNDETERMINED


def is_pure(X: OpTuple, tol: float = 1e-12, max_power: int = 200) -> PurityReport:
    """Track ||Phi_i^q(I)|| per row until it drops below ``tol``.

    A row whose norm stops decreasing is reported as not pure; one still
    decreasing at ``max_power`` is undetermined.
    """
    factors, powers, norms = [], [], []
    I = np.eye(X.dimH, dtype=complex)
    for i in range(X.k):
        Y, prev, status, q = I, 1.0, Purity.UNDETERMINED, 0
        stalled = 0
        for q in range(1, max_power + 1):
            Y = cp_map_apply(X.X[i], Y)
            nrm = _opnorm(Y)
            if nrm < tol:
                status = Purity.PURE
                break
            stalled = stalled + 1 if nrm >= prev * (1 - 1e-12) else 0
            if stalled >= 3:
                status = Purity.NOT_PURE
                break
            prev = nrm
        else:
            nrm = _opnorm(Y)
        factors.append(status)
        powers.append(q)
        norms.append(float(nrm))
    return PurityReport(tuple(factors), tuple(powers), tuple(norms))


def minkowski(X: OpTuple, tol: float = DEFAULT.bisect_tol) -> float:
    """Gauge inf{r > 0 : X in r B_n}, by bisection on the exact interior test."""
    rows_sq = _row_norms_sq(X)
    rows = [np.sqrt(v) for v in rows_sq]
    if max(rows) == 0.0:
        return 0.0
    lo, hi = 0.0, 2.0 * max(rows) + 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _classify_scaled(X, mid, 0.0, rows_sq).cls is Membership.INTERIOR:
            hi = mid
        else:
            lo = mid
    return float(hi)


# sampling

def _kron_slots(dimH: int, k: int) -> Optional[Tuple[int, ...]]:
    """Most balanced factorization of dimH into k integers >= 2, if any."""
    best = None

    def rec(rem, parts):
        nonlocal best
        if len(parts) == k - 1:
            if rem >= 2:
                cand = tuple(parts + [rem])
                if best is None or max(cand) - min(cand) < max(best) - min(best):
                    best = cand
            return
        for f in range(2, rem + 1):
            if rem % f == 0:
                rec(rem // f, parts + [f])

    rec(dimH, [])
    return best


def _random_complex(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _sample_rows(n_vec, dimH, nilpotent, rng, mode):
    k = len(n_vec)
    slots = _kron_slots(dimH, k) if mode in ("auto", "kron") else None
    if mode == "kron" and slots is None:
        raise ValueError(f"dimH={dimH} does not split into {k} slots of size >= 2")
    if slots is not None:
        rows = []
        for i, n in enumerate(n_vec):
            row = []
            for _ in range(n):
                a = _random_complex(rng, (slots[i], slots[i]))
                if nilpotent:
                    a = np.tril(a, -1)
                mats = [np.eye(m) for m in slots]
                mats[i] = a
                out = mats[0]
                for m in mats[1:]:
                    out = np.kron(out, m)
                row.append(out)
            rows.append(row)
        return rows
    base = _random_complex(rng, (dimH, dimH))
    if nilpotent:
        base = np.tril(base, -1)
    powers = [np.linalg.matrix_power(base, p) for p in range(4)]
    rows = []
    for n in n_vec:
        row = []
        for _ in range(n):
            c = _random_complex(rng, 4)
            if nilpotent:
                c[0] = 0.0
            row.append(sum(ci * pi for ci, pi in zip(c, powers)))
        rows.append(row)
    return rows


def random_tuple(n_vec: Sequence[int], dimH: int, target_m: float, nilpotent: bool = False,
                 seed=None, mode: str = "auto", max_tries: int = 10) -> OpTuple:
    """Cross-commuting tuple with Minkowski gauge ``target_m``.

    Commuting families are built structurally: either each row acts on its own
    Kronecker slot of H, or every entry is a polynomial in one shared matrix.
    With ``nilpotent`` the entries are strictly lower triangular.
    """
    if not 0.0 < target_m < 1.0:
        raise ValueError(f"target_m must lie in (0, 1), got {target_m}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_tries):
        X = OpTuple(n_vec, _sample_rows(n_vec, dimH, nilpotent, rng, mode), validate=False)
        m = minkowski(X)
        if m < 1e-12:
            continue
        X = X.scale(target_m / m)
        X.check_commutation()
        return X
    raise DegenerateSample(f"no nondegenerate sample for n={tuple(n_vec)}, dimH={dimH}")


def random_scalar_point(n_vec: Sequence[int], rng, max_norm: float = 0.9) -> List[np.ndarray]:
    """Point of the scalar polyball with each factor norm below ``max_norm``."""
    out = []
    for n in n_vec:
        v = _random_complex(rng, n)
        v *= max_norm * rng.uniform() ** (1.0 / (2 * n)) / np.linalg.norm(v)
        out.append(v)
    return out
