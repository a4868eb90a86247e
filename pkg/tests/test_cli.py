import json
import subprocess
import sys

import numpy as np
import pytest

from polyball import autgroup as ag
from polyball import cli
from polyball import jsonio as jio
from polyball import series as sr


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def geometric_file(tmp_path):
    s = sr.from_function((1,), 12, lambda mw: 2.0 ** len(mw[0]))
    return write(tmp_path, "geo.json", jio.series_to_json(s))


class TestRadius:
    def test_geometric(self, tmp_path, capsys):
        code, out, _ = run(["radius", geometric_file(tmp_path)], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["gamma"] == 0.5
        assert rep["per_degree"][3] == {"degree": 3, "norm": 8.0}

    def test_polynomial_and_empty(self, capsys):
        code, out, _ = run(["radius", '{"n": [2], "terms": [{"mw": [[1, 2]], "coeff": [1, 0]}]}'], capsys)
        assert code == 0 and json.loads(out)["gamma"] == "inf"
        code, out, _ = run(["radius", '{"n": [2], "terms": []}'], capsys)
        assert json.loads(out)["gamma"] == "inf"

    def test_malformed(self, capsys):
        code, _, err = run(["radius", '{"n": [2], "terms": [{"mw": 5}]}'], capsys)
        assert code == 2 and "error" in json.loads(err)


class TestMembership:
    def test_zero(self, capsys):
        code, out, _ = run(["membership", '{"n": [1], "X": [[[[[0, 0]]]]]}'], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["class"] == "Interior" and rep["minkowski"] == 0.0

    def test_strict_inclusion(self, capsys):
        t = [[[0, 0], [0, 0]], [[0.8, 0], [0, 0]]]
        code, out, _ = run(["membership", json.dumps({"n": [1, 1], "X": [[t], [t]]})], capsys)
        rep = json.loads(out)
        assert rep["class"] == "Outside" and rep["minkowski"] > 1

    def test_scalar(self, capsys):
        X = {"n": [2, 3], "X": [[[[[0.3, 0]]], [[[0.4, 0]]]], [[[[0.5, 0]]], [[[0, 0]]], [[[0, 0]]]]]}
        _, out, _ = run(["membership", json.dumps(X)], capsys)
        assert json.loads(out)["minkowski"] == pytest.approx(0.5, abs=1e-7)

    def test_commutation_violation(self, capsys):
        a = [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]
        b = [[[0, 0], [0, 0]], [[1, 0], [0, 0]]]
        code, _, err = run(["membership", json.dumps({"n": [1, 1], "X": [[a], [b]]})], capsys)
        assert code == 2
        assert json.loads(err)["pairs"] == [[[1, 1], [2, 1]]]


class TestAut:
    def test_invert_involution(self, tmp_path, capsys):
        m = ag.Automorphism.moebius([[0.3, 0.1j]])
        code, out, _ = run(["aut", "invert", write(tmp_path, "m.json", jio.automorphism_to_json(m))], capsys)
        back = jio.automorphism_from_json(json.loads(out)["automorphism"])
        assert code == 0 and ag.triple_distance(back, m) <= 1e-9

    def test_compose_with_inverse(self, tmp_path, capsys, rng):
        a = ag.random_automorphism((2, 2), rng)
        inv = ag.inverse(a)
        fa = write(tmp_path, "a.json", jio.automorphism_to_json(a))
        fi = write(tmp_path, "i.json", jio.automorphism_to_json(inv))
        code, out, _ = run(["aut", "compose", fa, fi], capsys)
        back = jio.automorphism_from_json(json.loads(out)["automorphism"])
        assert code == 0 and ag.triple_distance(back, ag.Automorphism.identity((2, 2))) <= 1e-8

    def test_apply_identity(self, tmp_path, capsys):
        ident = write(tmp_path, "id.json", jio.automorphism_to_json(ag.Automorphism.identity((1,))))
        X = {"n": [1], "dimH": 1, "X": [[[[[0.25, 0.5]]]]]}
        code, out, _ = run(["aut", "apply", ident, json.dumps(X)], capsys)
        assert code == 0 and json.loads(out)["tuple"] == X

    def test_numerical_failure(self, tmp_path, capsys):
        m = write(tmp_path, "m.json", jio.automorphism_to_json(ag.Automorphism.moebius([[0.5]])))
        code, _, err = run(["aut", "apply", m, '{"n": [1], "X": [[[[[2, 0]]]]]}'], capsys)
        assert code == 3 and json.loads(err)["error"] == "ResolventSingular"


class TestVerify:
    def test_defect_suite_passes(self, capsys):
        code, out, _ = run(["verify", "--suite", "defect"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["pass"] and rep["seed"] == 0
        assert all(c["residual"] <= 1e-9 for c in rep["checks"])

    def test_forced_failure(self, capsys):
        code, out, _ = run(["verify", "--suite", "berezin", "--tol-scale", "1e-20"], capsys)
        assert code == 1 and not json.loads(out)["pass"]

    def test_seed_sources(self, monkeypatch, tmp_path, capsys):
        monkeypatch.setenv("POLYBALL_SEED", "17")
        _, out, _ = run(["verify", "--suite", "metric"], capsys)
        assert json.loads(out)["seed"] == 17
        cfg = write(tmp_path, "cfg.json", {"seed": 3, "suite": "metric"})
        _, out, _ = run(["verify", "--config", cfg, "--seed", "5"], capsys)
        assert json.loads(out)["seed"] == 5

    def test_suite_independent_of_selection(self, capsys):
        _, one, _ = run(["verify", "--suite", "metric", "--seed", "4"], capsys)
        _, everything, _ = run(["verify", "--suite", "all", "--seed", "4"], capsys)
        picked = [c for c in json.loads(everything)["checks"] if c["name"].startswith("metric.")]
        assert picked == json.loads(one)["checks"]

    def test_unknown_flag(self, capsys):
        assert cli.main(["verify", "--suite", "nope"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "polyball", "membership", '{"n": [1], "X": [[[[[0, 0]]]]]}'],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["class"] == "Interior"
