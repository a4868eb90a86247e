import json

import numpy as np
import pytest

from polyball import autgroup as ag
from polyball import jsonio as jio
from polyball import series as sr
from polyball import tuples as T
from polyball.errors import InputError


def test_matrix_round_trip(rng):
    m = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    wire = jio.encode_matrix(m)
    assert wire[0][0] == [m[0, 0].real, m[0, 0].imag]
    assert np.array_equal(jio.decode_matrix(json.loads(json.dumps(wire))), m)


def test_tuple_round_trip(rng):
    X = T.random_tuple((2, 1), 3, 0.5, seed=rng)
    d = jio.tuple_to_json(X)
    assert d["n"] == [2, 1] and d["dimH"] == 3
    assert T.distance(jio.tuple_from_json(d), X) == 0


def test_series_round_trip_one_based():
    s = sr.FreeSeries((2, 1), {((0, 1), ()): 1 + 2j, ((), (0,)): -1.0}, truncated=True)
    d = jio.series_to_json(s)
    assert {"mw": [[1, 2], []], "coeff": [1.0, 2.0]} in d["terms"]
    back = jio.series_from_json(d)
    assert back.coeff == s.coeff and back.truncated


def test_automorphism_round_trip(rng):
    a = ag.random_automorphism((2, 2, 1), rng)
    d = jio.automorphism_to_json(a)
    assert sorted(d["sigma"]) == [1, 2, 3]
    b = jio.automorphism_from_json(json.loads(jio.dumps(d)))
    assert b.sigma == a.sigma and ag.triple_distance(a, b) == 0


def test_malformed():
    with pytest.raises(InputError):
        jio.load_arg("{not json")
    with pytest.raises(InputError):
        jio.tuple_from_json({"n": [1]})
    with pytest.raises(InputError):
        jio.decode_complex([1, 2, 3])


def test_infinity_encoding():
    assert jio._num(float("inf")) == "inf"
