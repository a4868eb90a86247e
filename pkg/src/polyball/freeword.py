"""Words over free semigroups and multi-indices labelling Fock basis vectors.

A word is a tuple of letters ``0 <= j < n``; the empty tuple is the unit.
A multiword is a tuple of k words, word ``i`` over an alphabet of size
``n_vec[i]``. Letters are zero-based in memory and one-based on the wire
(see :mod:`polyball.jsonio`).

Enumeration order is degree first, then lexicographic, per factor; multiwords
are the row-major Cartesian product of the per-factor enumerations.
"""

from functools import lru_cache
from itertools import product
from typing import Sequence, Tuple

from .errors import DegreeExceeded, ShapeMismatch

Word = Tuple[int, ...]
MultiWord = Tuple[Word, ...]


def word_count(alphabet_size: int, max_degree: int) -> int:
    """Number of words of length at most ``max_degree``."""
    if alphabet_size == 1:
        return max_degree + 1
    return (alphabet_size ** (max_degree + 1) - 1) // (alphabet_size - 1)


def _check_alphabet(alphabet_size: int, max_degree: int) -> None:
    if alphabet_size < 1:
        raise ValueError(f"alphabet_size must be >= 1, got {alphabet_size}")
    if max_degree < 0:
        raise ValueError(f"max_degree must be >= 0, got {max_degree}")


@lru_cache(maxsize=128)
def enumerate_words(alphabet_size: int, max_degree: int) -> Tuple[Word, ...]:
    _check_alphabet(alphabet_size, max_degree)
    out = []
    for p in range(max_degree + 1):
        out.extend(product(range(alphabet_size), repeat=p))
    return tuple(out)


def word_index(word: Sequence[int], alphabet_size: int) -> int:
    """Position of ``word`` in :func:`enumerate_words` (independent of the cap)."""
    p = len(word)
    offset = word_count(alphabet_size, p - 1) if p > 0 else 0
    rank = 0
    for letter in word:
        if not 0 <= letter < alphabet_size:
            raise ValueError(f"letter {letter} outside alphabet of size {alphabet_size}")
        rank = rank * alphabet_size + letter
    return offset + rank


def _check_vectors(n_vec, deg_vec):
    if len(n_vec) != len(deg_vec):
        raise ShapeMismatch(f"n_vec has {len(n_vec)} entries, deg_vec has {len(deg_vec)}")


def multiword_count(n_vec: Sequence[int], deg_vec: Sequence[int]) -> int:
    _check_vectors(n_vec, deg_vec)
    total = 1
    for n, d in zip(n_vec, deg_vec):
        _check_alphabet(n, d)
        total *= word_count(n, d)
    return total


def enumerate_multiwords(n_vec: Sequence[int], deg_vec: Sequence[int]) -> Tuple[MultiWord, ...]:
    _check_vectors(n_vec, deg_vec)
    factors = [enumerate_words(n, d) for n, d in zip(n_vec, deg_vec)]
    return tuple(product(*factors))


def basis_index(mw: MultiWord, n_vec: Sequence[int], deg_vec: Sequence[int]) -> int:
    _check_vectors(n_vec, deg_vec)
    if len(mw) != len(n_vec):
        raise ShapeMismatch(f"multiword has {len(mw)} parts, expected {len(n_vec)}")
    index = 0
    for word, n, d in zip(mw, n_vec, deg_vec):
        if len(word) > d:
            raise DegreeExceeded(f"word {word} has degree {len(word)} > cap {d}")
        index = index * word_count(n, d) + word_index(word, n)
    return index


def degree(mw: MultiWord) -> int:
    return sum(len(w) for w in mw)


def multidegree(mw: MultiWord) -> Tuple[int, ...]:
    return tuple(len(w) for w in mw)


def concat(a: MultiWord, b: MultiWord) -> MultiWord:
    """Per-factor concatenation: the monomial product ``Z_(a) Z_(b)``."""
    return tuple(x + y for x, y in zip(a, b))


def unit(k: int) -> MultiWord:
    return ((),) * k


def words_of_degree(alphabet_size: int, p: int) -> Tuple[Word, ...]:
    return tuple(product(range(alphabet_size), repeat=p))


def multiwords_of_multidegree(n_vec: Sequence[int], p_vec: Sequence[int]) -> Tuple[MultiWord, ...]:
    return tuple(product(*(words_of_degree(n, p) for n, p in zip(n_vec, p_vec))))


def multidegrees_of_total(k: int, q: int):
    """All k-tuples of nonnegative integers summing to q, lexicographic."""
    if k == 1:
        yield (q,)
        return
    for first in range(q, -1, -1):
        for rest in multidegrees_of_total(k - 1, q - first):
            yield (first,) + rest
