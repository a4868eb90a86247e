"""JSON wire formats.

Complex numbers are ``[re, im]`` pairs, matrices are row-major nested lists of
pairs. Letters, factor indices and permutations are one-based on the wire and
zero-based in memory.
"""

import json
import math
from typing import Any, Dict, List

import numpy as np

from .autgroup import Automorphism
from .errors import InputError, ShapeMismatch
from .fock import TruncFock, build_truncated_fock
from .series import FreeSeries
from .tuples import OpTuple


def _num(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def encode_complex(c) -> List[float]:
    c = complex(c)
    return [_num(c.real), _num(c.imag)]


def decode_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise InputError(f"expected [re, im] pair, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def encode_vector(v) -> List[List[float]]:
    return [encode_complex(c) for c in np.atleast_1d(v)]


def decode_vector(v) -> np.ndarray:
    if not isinstance(v, list):
        raise InputError("vector must be a list of [re, im] pairs")
    return np.array([decode_complex(c) for c in v], dtype=complex)


def encode_matrix(m) -> List[List[List[float]]]:
    m = np.atleast_2d(np.asarray(m))
    return [[encode_complex(c) for c in row] for row in m]


def decode_matrix(m) -> np.ndarray:
    if not isinstance(m, list) or not all(isinstance(r, list) for r in m):
        raise InputError("matrix must be a list of rows")
    rows = [[decode_complex(c) for c in r] for r in m]
    if len({len(r) for r in rows}) > 1:
        raise ShapeMismatch("matrix rows have different lengths")
    return np.array(rows, dtype=complex).reshape(len(rows), len(rows[0]) if rows else 0)


def _require(d: Dict[str, Any], *keys):
    if not isinstance(d, dict):
        raise InputError("expected a JSON object")
    missing = [k for k in keys if k not in d]
    if missing:
        raise InputError(f"missing keys: {', '.join(missing)}")


# multiwords

def encode_multiword(mw) -> List[List[int]]:
    return [[a + 1 for a in w] for w in mw]


def decode_multiword(v):
    if not isinstance(v, list) or not all(isinstance(w, list) for w in v):
        raise InputError(f"multiword must be a list of letter lists, got {v!r}")
    return tuple(tuple(int(a) - 1 for a in w) for w in v)


# domain objects

def fock_to_json(f: TruncFock):
    return f.to_dict()


def fock_from_json(d) -> TruncFock:
    _require(d, "n", "d")
    return build_truncated_fock(d["n"], d["d"])


def tuple_to_json(X: OpTuple):
    return {"n": list(X.n_vec), "dimH": X.dimH,
            "X": [[encode_matrix(a) for a in row] for row in X.X]}


def tuple_from_json(d) -> OpTuple:
    _require(d, "n", "X")
    X = OpTuple(d["n"], [[decode_matrix(a) for a in row] for row in d["X"]])
    if "dimH" in d and int(d["dimH"]) != X.dimH:
        raise ShapeMismatch(f"dimH {d['dimH']} disagrees with matrices of size {X.dimH}")
    return X


def series_to_json(s: FreeSeries):
    terms = []
    for mw in sorted(s.coeff, key=lambda m: (sum(len(w) for w in m), m)):
        c = s.coeff[mw]
        terms.append({"mw": encode_multiword(mw),
                      "coeff": encode_complex(c) if not s.shape else encode_matrix(c)})
    out = {"n": list(s.n_vec), "shape": list(s.shape), "terms": terms}
    if s.truncated:
        out["truncated"] = True
    return out


def series_from_json(d) -> FreeSeries:
    _require(d, "n", "terms")
    shape = tuple(d.get("shape", []))
    coeff = {}
    for t in d["terms"]:
        _require(t, "mw", "coeff")
        mw = decode_multiword(t["mw"])
        c = decode_complex(t["coeff"]) if not shape else decode_matrix(t["coeff"])
        coeff[mw] = coeff.get(mw, 0) + c
    return FreeSeries(tuple(d["n"]), coeff, shape, bool(d.get("truncated", False)))


def automorphism_to_json(a: Automorphism):
    return {"sigma": [s + 1 for s in a.sigma],
            "U": [encode_matrix(u) for u in a.U],
            "lambda": [encode_vector(l.lam) for l in a.lam]}


def automorphism_from_json(d) -> Automorphism:
    _require(d, "sigma", "U", "lambda")
    return Automorphism(tuple(int(s) - 1 for s in d["sigma"]),
                        tuple(decode_matrix(u) for u in d["U"]),
                        tuple(decode_vector(l) for l in d["lambda"]))


def scalar_point_to_json(z):
    return [encode_vector(zi) for zi in z]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)


def load_arg(text: str):
    """Inline JSON when ``text`` starts with '{' or '[', else a file path."""
    stripped = text.lstrip()
    try:
        if stripped.startswith(("{", "[")):
            return json.loads(stripped)
        with open(text) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    except OSError as exc:
        raise InputError(f"cannot read {text}: {exc}") from exc
