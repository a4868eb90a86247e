"""Free power series sum_(alpha) A_(alpha) ⊗ Z_(alpha) over a polyball.

Coefficients are stored sparsely by multiword. A series is either an honest
polynomial (``truncated=False``), or the stored head of an infinite series
(``truncated=True``); the flag decides how radii, divergence and composition
treat the unstored tail.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import freeword as fw
from .config import DEFAULT
from .errors import (ConstantTermAmbiguity, Diverging, IndexOutOfRange, NotInClosedBall,
                     ShapeMismatch, ZeroConstantTermViolated)
from .fock import TruncFock, word_operator
from .tuples import Membership, OpTuple, classify, minkowski, tuple_norm


def _opnorm(a) -> float:
    a = np.atleast_2d(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _sparse_opnorm(a) -> float:
    # drop zero rows and columns, then dense SVD when small and Lanczos otherwise
    a = a.tocsr()
    a = a[np.flatnonzero(a.getnnz(axis=1))][:, np.flatnonzero(a.getnnz(axis=0))]
    if min(a.shape) <= 256 or a.nnz == 0:
        return _opnorm(a.toarray())
    try:
        v0 = np.ones(min(a.shape))
        return float(spla.svds(a.tocsc(), k=1, v0=v0, ncv=min(32, min(a.shape) - 1), tol=0,
                               return_singular_vectors=False)[0])
    except spla.ArpackError:
        return _opnorm(a.toarray())


@dataclass(frozen=True)
class FreeSeries:
    n_vec: Tuple[int, ...]
    coeff: Mapping[fw.MultiWord, np.ndarray]
    shape: Tuple[int, ...] = ()
    truncated: bool = False

    def __post_init__(self):
        n_vec = tuple(int(n) for n in self.n_vec)
        shape = tuple(self.shape)
        clean = {}
        for mw, c in self.coeff.items():
            mw = tuple(tuple(int(a) for a in w) for w in mw)
            if len(mw) != len(n_vec):
                raise ShapeMismatch(f"multiword {mw} does not have {len(n_vec)} parts")
            for i, w in enumerate(mw):
                if any(not 0 <= a < n_vec[i] for a in w):
                    raise IndexOutOfRange(f"letter outside alphabet in {mw}")
            c = np.asarray(c, dtype=complex)
            if c.shape != shape:
                raise ShapeMismatch(f"coefficient shape {c.shape} differs from {shape}")
            clean[mw] = clean.get(mw, 0) + c
        object.__setattr__(self, "n_vec", n_vec)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "coeff", clean)

    @property
    def k(self) -> int:
        return len(self.n_vec)

    @property
    def max_degree(self) -> int:
        """Largest stored total degree (-1 for the empty series)."""
        return max((fw.degree(mw) for mw in self.coeff), default=-1)

    def zero_coeff(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    @property
    def constant(self) -> np.ndarray:
        return self.coeff.get(fw.unit(self.k), self.zero_coeff())

    def by_multidegree(self) -> Dict[Tuple[int, ...], List[Tuple[fw.MultiWord, np.ndarray]]]:
        out = defaultdict(list)
        for mw in sorted(self.coeff, key=lambda m: (fw.degree(m), m)):
            out[fw.multidegree(mw)].append((mw, self.coeff[mw]))
        return dict(out)

    def by_total_degree(self) -> Dict[int, List[Tuple[fw.MultiWord, np.ndarray]]]:
        out = defaultdict(list)
        for mw in sorted(self.coeff, key=lambda m: (fw.degree(m), m)):
            out[fw.degree(mw)].append((mw, self.coeff[mw]))
        return dict(out)

    # arithmetic

    def _new(self, coeff, truncated=None) -> "FreeSeries":
        return FreeSeries(self.n_vec, coeff, self.shape,
                          self.truncated if truncated is None else truncated)

    def __add__(self, other: "FreeSeries") -> "FreeSeries":
        _check_same(self, other)
        out = dict(self.coeff)
        for mw, c in other.coeff.items():
            out[mw] = out.get(mw, 0) + c
        return self._new(out, self.truncated or other.truncated)

    def __sub__(self, other: "FreeSeries") -> "FreeSeries":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "FreeSeries":
        return self._new({mw: c * a for mw, a in self.coeff.items()})

    def prune(self, atol: float = 0.0) -> "FreeSeries":
        return self._new({mw: a for mw, a in self.coeff.items() if np.abs(a).max(initial=0) > atol})

    def truncate(self, max_total_degree: int) -> "FreeSeries":
        kept = {mw: a for mw, a in self.coeff.items() if fw.degree(mw) <= max_total_degree}
        return self._new(kept, self.truncated or len(kept) < len(self.coeff))


def _check_same(a: FreeSeries, b: FreeSeries):
    if a.n_vec != b.n_vec or a.shape != b.shape:
        raise ShapeMismatch("series over different alphabets or coefficient shapes")


# constructors

def constant(n_vec: Sequence[int], c) -> FreeSeries:
    c = np.asarray(c, dtype=complex)
    return FreeSeries(tuple(n_vec), {fw.unit(len(n_vec)): c}, c.shape)


def coordinate(n_vec: Sequence[int], i: int, j: int) -> FreeSeries:
    """The series Z_{i,j} (zero-based indices)."""
    mw = tuple((j,) if t == i else () for t in range(len(n_vec)))
    return FreeSeries(tuple(n_vec), {mw: 1.0})


def monomial(n_vec: Sequence[int], mw: fw.MultiWord, c=1.0) -> FreeSeries:
    c = np.asarray(c, dtype=complex)
    return FreeSeries(tuple(n_vec), {mw: c}, c.shape)


def from_function(n_vec: Sequence[int], max_total_degree: int, fn, truncated: bool = True,
                  shape=()) -> FreeSeries:
    """Series whose coefficient at ``mw`` is ``fn(mw)`` for total degree up to the cutoff."""
    coeff = {}
    for q in range(max_total_degree + 1):
        for p in fw.multidegrees_of_total(len(n_vec), q):
            for mw in fw.multiwords_of_multidegree(n_vec, p):
                coeff[mw] = fn(mw)
    return FreeSeries(tuple(n_vec), coeff, tuple(shape), truncated)


def random_polynomial(n_vec: Sequence[int], degree: int, rng, shape=(),
                      zero_constant: bool = False, density: float = 1.0) -> FreeSeries:
    coeff = {}
    for q in range(0 if not zero_constant else 1, degree + 1):
        for p in fw.multidegrees_of_total(len(n_vec), q):
            for mw in fw.multiwords_of_multidegree(n_vec, p):
                if rng.uniform() <= density:
                    coeff[mw] = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / 2
    return FreeSeries(tuple(n_vec), coeff, tuple(shape))


# norms and evaluation

def _gram(terms) -> np.ndarray:
    g = 0
    for _, a in terms:
        a2 = np.atleast_2d(a)
        g = g + a2.conj().T @ a2
    return np.atleast_2d(g)


def homogeneous_norm(s: FreeSeries, p_vec: Sequence[int]) -> float:
    """||sum_{|alpha_i| = p_i} A^* A||^(1/2)."""
    terms = [(mw, a) for mw, a in s.coeff.items() if fw.multidegree(mw) == tuple(p_vec)]
    if not terms:
        return 0.0
    return math.sqrt(_opnorm(_gram(terms)))


def _log2_homogeneous_norm(terms) -> float:
    g = _opnorm(_gram(terms))
    return 0.5 * math.log2(g) if g > 0 else -math.inf


def degree_norms(s: FreeSeries) -> Dict[int, float]:
    """max_{|p| = q} homogeneous_norm(p) for every stored total degree q."""
    out = {}
    for p, terms in s.by_multidegree().items():
        q = sum(p)
        out[q] = max(out.get(q, 0.0), math.sqrt(_opnorm(_gram(terms))))
    return dict(sorted(out.items()))


def _kron(a: np.ndarray, m):
    if a.ndim == 0:
        return a * m
    if sp.issparse(m):
        return sp.kron(sp.csr_matrix(a), m, format="csr")
    return np.kron(a, m)


def _block(terms, mono, scale=1.0):
    out = None
    for mw, a in terms:
        t = _kron(a, mono(mw))
        out = t if out is None else out + t
    return out * scale


@dataclass(frozen=True)
class EvalResult:
    value: np.ndarray
    last_block_norm: float
    degree: int
    block_norms: Tuple[float, ...]


def block_norms(s: FreeSeries, X: OpTuple) -> Dict[int, float]:
    """Operator norm of each homogeneous block sum_{|alpha| = q} A ⊗ X_alpha."""
    return {q: _opnorm(_block(terms, X.monomial))
            for q, terms in s.by_total_degree().items()}


def evaluate(s: FreeSeries, X: OpTuple, max_total_degree: Optional[int] = None,
             tol: float = 1e-14) -> EvalResult:
    """Sum homogeneous blocks in increasing total degree.

    Polynomials are summed in full. For a truncated series summation stops
    after three consecutive stored blocks of norm below ``tol``, and raises
    :class:`Diverging` when the last five block norms strictly increase.
    """
    if X.n_vec != s.n_vec:
        raise ShapeMismatch(f"series over {s.n_vec} evaluated at tuple over {X.n_vec}")
    out_shape = tuple(d * X.dimH for d in (s.shape or (1, 1)))
    value = np.zeros(out_shape, dtype=complex)
    norms: List[float] = []
    small, last_q = 0, -1
    for q, terms in s.by_total_degree().items():
        if max_total_degree is not None and q > max_total_degree:
            break
        b = _block(terms, X.monomial)
        value = value + b
        nb = _opnorm(b)
        norms.append(nb)
        last_q = q
        if s.truncated:
            small = small + 1 if nb < tol else 0
            if small >= 3:
                break
    if s.truncated and len(norms) >= 5 and all(
            norms[-5 + t] < norms[-4 + t] for t in range(4)):
        raise Diverging(f"block norms increase up to degree {last_q}: {norms[-5:]}")
    return EvalResult(value, norms[-1] if norms else 0.0, last_q, tuple(norms))


def evaluate_on_model(s: FreeSeries, fock: TruncFock, r_vec: Sequence[float],
                      sparse: bool = False):
    """F(r S) = sum r^(alpha) A ⊗ S_(alpha) on the truncated model."""
    if fock.n_vec != s.n_vec:
        raise ShapeMismatch("series and Fock space over different alphabets")
    r_vec = np.broadcast_to(np.asarray(r_vec, dtype=float), (s.k,))
    q_out = (s.shape or (1, 1))
    total = sp.csr_matrix((q_out[0] * fock.dim, q_out[1] * fock.dim), dtype=complex)
    for mw, a in s.coeff.items():
        if any(len(w) > d for w, d in zip(mw, fock.deg_vec)):
            continue  # annihilates the truncated space
        w = float(np.prod([r ** len(wi) for r, wi in zip(r_vec, mw)]))
        total = total + _kron(a * w, word_operator(fock, mw, "left", sparse=True))
    return total if sparse else total.toarray()


def model_norm(s: FreeSeries, fock: TruncFock, r_vec: Sequence[float]) -> float:
    """Truncated sup-norm estimate ||F(rS)||, a lower bound of M(r)."""
    return _opnorm(evaluate_on_model(s, fock, r_vec))


def model_block_norms(s: FreeSeries, fock: TruncFock, scale: float) -> Dict[int, float]:
    """Block norms of s at Y = scale * S on the truncated model."""
    out = {}
    op = lambda mw: word_operator(fock, mw, "left", sparse=True)
    for q, terms in s.by_total_degree().items():
        kept = [(mw, a) for mw, a in terms
                if all(len(w) <= d for w, d in zip(mw, fock.deg_vec))]
        if not kept:
            out[q] = 0.0
            continue
        b = _block(kept, op, scale ** q)
        out[q] = _sparse_opnorm(b) if sp.issparse(b) else _opnorm(b)
    return out


# convergence

def hadamard_radius(s: FreeSeries, max_total_degree: Optional[int] = None) -> float:
    """Estimate of the polyball radius of convergence.

    1/gamma is approximated by the largest ``homogeneous_norm(p)^(1/|p|)`` over
    total degrees in the upper half of the stored range. Computed in base-2 log
    space so that exact powers of two give exact radii.
    """
    if not s.truncated:
        return math.inf
    top = s.max_degree if max_total_degree is None else min(max_total_degree, s.max_degree)
    if top < 1:
        return math.inf
    q_min = min(max(2, top // 2), top)
    worst = -math.inf
    for p, terms in s.by_multidegree().items():
        q = sum(p)
        if q_min <= q <= top:
            worst = max(worst, _log2_homogeneous_norm(terms) / q)
    if worst == -math.inf:
        return math.inf
    return 2.0 ** (-worst)


@dataclass(frozen=True)
class AbelResult:
    bounded: bool
    bound: float
    witness: Optional[Tuple[int, ...]]


def abel_bounded_on(s: FreeSeries, r_vec: Sequence[float],
                    max_total_degree: Optional[int] = None) -> AbelResult:
    """Check boundedness of r^(2p) ||sum A^*A|| over stored multidegrees p != 0.

    Bounded means the upper half of the degree range never exceeds the maximum
    over the lower half; otherwise the multidegree of the largest upper value
    is returned as witness.
    """
    r_vec = np.broadcast_to(np.asarray(r_vec, dtype=float), (s.k,))
    top = s.max_degree if max_total_degree is None else min(max_total_degree, s.max_degree)
    vals = {}
    for p, terms in s.by_multidegree().items():
        if 1 <= sum(p) <= top:
            vals[p] = float(np.prod(r_vec ** (2 * np.array(p)))) * _opnorm(_gram(terms))
    if not vals:
        return AbelResult(True, 0.0, None)
    half = max(1, top // 2)
    low = max((v for p, v in vals.items() if sum(p) <= half), default=0.0)
    high_p = max((p for p in vals if sum(p) > half), key=lambda p: vals[p], default=None)
    bound = max(vals.values())
    if high_p is not None and vals[high_p] > low * (1 + 1e-12):
        return AbelResult(False, bound, high_p)
    return AbelResult(True, bound, None)


@dataclass(frozen=True)
class CauchyEntry:
    p_vec: Tuple[int, ...]
    lhs: float
    rhs: float
    ok: bool


@dataclass(frozen=True)
class CauchyReport:
    passed: bool
    model_norm: float
    entries: Tuple[CauchyEntry, ...]

    @property
    def violations(self):
        return tuple(e for e in self.entries if not e.ok)


def cauchy_check(s: FreeSeries, r_vec: Sequence[float], fock: TruncFock,
                 slack: float = DEFAULT.slack) -> CauchyReport:
    r_vec = np.broadcast_to(np.asarray(r_vec, dtype=float), (s.k,))
    if np.any(r_vec <= 0) or np.any(r_vec >= 1):
        raise ValueError("radii must lie in (0, 1)")
    M = model_norm(s, fock, r_vec)
    entries = []
    for p, terms in s.by_multidegree().items():
        lhs = math.sqrt(_opnorm(_gram(terms)))
        rhs = (1 + slack) * M / float(np.prod(r_vec ** np.array(p)))
        entries.append(CauchyEntry(p, lhs, rhs, bool(lhs <= rhs)))
    return CauchyReport(all(e.ok for e in entries), M, tuple(entries))


# calculus

def free_partial_derivative(s: FreeSeries, i: int, j: int) -> FreeSeries:
    """Delete one occurrence of letter j from word i, summed over occurrences."""
    if not 0 <= i < s.k or not 0 <= j < s.n_vec[i]:
        raise IndexOutOfRange(f"no variable Z_({i},{j}) over {s.n_vec}")
    out = {}
    for mw, a in s.coeff.items():
        w = mw[i]
        for t, letter in enumerate(w):
            if letter == j:
                new = mw[:i] + (w[:t] + w[t + 1:],) + mw[i + 1:]
                out[new] = out.get(new, 0) + a
    return s._new(out)


def multiply(a: FreeSeries, b: FreeSeries, max_total_degree: Optional[int] = None) -> FreeSeries:
    """Product with Z_(alpha) Z_(beta) = Z_(alpha beta); b must be scalar-valued
    unless a is."""
    if a.n_vec != b.n_vec:
        raise ShapeMismatch("series over different alphabets")
    if a.shape and b.shape:
        raise ShapeMismatch("only one factor may carry matrix coefficients")
    out = {}
    cut = False
    for ma, ca in a.coeff.items():
        da = fw.degree(ma)
        for mb, cb in b.coeff.items():
            if max_total_degree is not None and da + fw.degree(mb) > max_total_degree:
                cut = True
                continue
            mw = fw.concat(ma, mb)
            out[mw] = out.get(mw, 0) + ca * cb
    shape = a.shape or b.shape
    return FreeSeries(a.n_vec, out, shape, a.truncated or b.truncated or cut)


def compose(f: FreeSeries, g: Sequence[Sequence[FreeSeries]],
            max_total_degree: int) -> FreeSeries:
    """Substitute Z_{i,j} -> g[i][j] in f and regroup up to ``max_total_degree``.

    Letters of factor 0 are substituted first, then factor 1, and so on, matching
    the monomial order used by :func:`evaluate`.
    """
    if len(g) != f.k or any(len(row) != n for row, n in zip(g, f.n_vec)):
        raise ShapeMismatch(f"substitution rows do not match {f.n_vec}")
    flat = [gij for row in g for gij in row]
    if not flat:
        raise ShapeMismatch("empty substitution")
    n_vec = flat[0].n_vec
    for gij in flat:
        if gij.n_vec != n_vec:
            raise ShapeMismatch("substituted series over different alphabets")
        if gij.shape:
            raise ShapeMismatch("substituted series must be scalar-valued")
    has_constant = any(np.any(gij.constant != 0) for gij in flat)
    if f.truncated and has_constant:
        raise ConstantTermAmbiguity(
            "an infinite series cannot absorb substitutions with nonzero constant term")
    # degree of every kept term grows by at least the minimal degree of g
    one = FreeSeries(n_vec, {fw.unit(len(n_vec)): 1.0})
    cache: Dict[Tuple[int, fw.Word], FreeSeries] = {}

    def word_power(i, w):
        key = (i, w)
        if key not in cache:
            cache[key] = one if not w else multiply(g[i][w[0]], word_power(i, w[1:]),
                                                    max_total_degree)
        return cache[key]

    out: Dict[fw.MultiWord, np.ndarray] = {}
    cut = False
    for mw, a in f.coeff.items():
        if not has_constant and fw.degree(mw) > max_total_degree:
            cut = True
            continue
        term = one
        for i, w in enumerate(mw):
            if w:
                term = multiply(term, word_power(i, w), max_total_degree)
        cut = cut or term.truncated
        for m2, c in term.coeff.items():
            out[m2] = out.get(m2, 0) + c * a
    truncated = f.truncated or cut or any(gij.truncated for gij in flat)
    return FreeSeries(n_vec, out, f.shape, truncated)


def substitute_tuple(g: Sequence[Sequence[FreeSeries]], X: OpTuple) -> OpTuple:
    """Evaluate every entry of a substitution family at X."""
    rows = [[evaluate(gij, X).value for gij in row] for row in g]
    return OpTuple([len(r) for r in rows], rows, validate=False)


# Schwarz

@dataclass(frozen=True)
class SchwarzReport:
    value_norm: float
    minkowski: float
    sup_estimate: float
    tuple_norm: float
    passed: bool
    gauge_below_norm: bool


def schwarz_margin(F: FreeSeries, X: OpTuple, fock: TruncFock, slack: float = DEFAULT.slack,
                   r: float = 0.999, gauge_tol: float = 1e-14) -> SchwarzReport:
    """Compare ||F(X)|| with m(X) times the truncated sup-norm of F."""
    if np.any(F.constant != 0):
        raise ZeroConstantTermViolated("F(0) must vanish")
    if classify(X).cls is not Membership.INTERIOR:
        raise NotInClosedBall("Schwarz bound requires an interior point")
    value = _opnorm(evaluate(F, X).value)
    m = minkowski(X, gauge_tol)
    sup = model_norm(F, fock, r) if F.coeff else 0.0
    nx = tuple_norm(X)
    return SchwarzReport(value, m, sup, nx, bool(value <= (1 + slack) * m * sup),
                         bool(m <= nx * (1 + 1e-12)))
