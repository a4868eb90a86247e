"""The ten acceptance criteria, each at its stated tolerance and time budget.

A one-line PASS/FAIL summary per criterion is printed at the end of the run.
"""

import json
import math
import time
from contextlib import contextmanager
from itertools import permutations, product

import numpy as np
import scipy.linalg as sla

from conftest import ACCEPTANCE_RESULTS
from polyball import autgroup as ag
from polyball import berezin as B
from polyball import cli
from polyball import fock as F
from polyball import freeword as fw
from polyball import jsonio as jio
from polyball import series as sr
from polyball import tuples as T

PATTERNS = [(1,), (2,), (3,), (1, 1), (2, 1), (2, 2), (1, 2, 1), (3, 3)]


@contextmanager
def criterion(n, budget):
    state = {"detail": ""}
    t0 = time.perf_counter()
    ok = False
    try:
        yield state
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        within = elapsed < budget
        ACCEPTANCE_RESULTS[n] = (ok and within, f"{state['detail']} [{elapsed:.2f}s / {budget}s]")
    assert within, f"criterion {n} took {elapsed:.2f}s, budget {budget}s"


def flat(z):
    return np.concatenate([np.atleast_1d(v) for v in z])


def test_01_moebius_involution():
    rng = np.random.default_rng(1)
    with criterion(1, 10) as st:
        worst = 0.0
        for t in range(100):
            n_vec = PATTERNS[t % len(PATTERNS)]
            X = T.random_tuple(n_vec, int(rng.integers(1, 7)), float(rng.uniform(0.05, 0.97)), seed=rng)
            assert T.membership(X) is T.Membership.INTERIOR
            m = ag.Automorphism.moebius(T.random_scalar_point(n_vec, rng, 0.95))
            worst = max(worst, T.distance(ag.apply(m, ag.apply(m, X)), X))
        st["detail"] = f"max ||Psi(Psi(X)) - X|| = {worst:.2e}"
        assert worst <= 1e-9


def test_02_defect_identity():
    rng = np.random.default_rng(2)
    with criterion(2, 10) as st:
        worst = 0.0
        for t in range(50):
            n_vec = PATTERNS[t % len(PATTERNS)]
            X = T.random_tuple(n_vec, int(rng.integers(2, 7)), float(rng.uniform(0.05, 0.97)), seed=rng)
            a = ag.random_automorphism(n_vec, rng, 0.95)
            worst = max(worst, ag.defect_identity_residual(a, X))
        # single ball: I - Psi Psi^* = Delta^2 (I - X lam^*)^(-1) (I - X X^*) (I - lam X^*)^(-1)
        single = 0.0
        for _ in range(20):
            X = T.random_tuple((3,), 4, float(rng.uniform(0.05, 0.97)), seed=rng)
            lp = ag.BallPoint(T.random_scalar_point((3,), rng, 0.95)[0])
            row, eye = X.row_matrix(0), np.eye(4)
            A = np.linalg.inv(eye - row @ np.kron(lp.lam[:, None].conj(), eye))
            lhs = eye - sum(y @ y.conj().T for y in ag.moebius_apply(lp, X.X[0]))
            rhs = lp.delta ** 2 * A @ (eye - row @ row.conj().T) @ A.conj().T
            single = max(single, float(np.linalg.norm(lhs - rhs, 2)))
            a = ag.Automorphism.moebius([lp.lam])
            single = max(single, ag.defect_identity_residual(a, X))
        st["detail"] = f"product form {worst:.2e}, single ball {single:.2e}"
        assert worst <= 1e-9 and single <= 1e-9


def test_03_berezin_exactness():
    rng = np.random.default_rng(3)
    cases = [((2,), 4), ((1,), 4), ((2, 1), 6), ((1, 1), 4), ((3,), 3), ((1, 1, 1), 6)]
    with criterion(3, 10) as st:
        iso = inter = recon = 0.0
        for t in range(24):
            n_vec, dimH = cases[t % len(cases)]
            X = T.random_tuple(n_vec, dimH, float(rng.uniform(0.3, 0.99)), nilpotent=True, seed=rng)
            f = F.build_truncated_fock(n_vec, tuple(max(3, c) for c in B.exact_caps(X)))
            K = B.berezin_kernel(X, f)
            S = F.model_tuple(f)
            iso = max(iso, float(np.abs(K.matrix.conj().T @ K.matrix - np.eye(dimH)).max()))
            for i in range(X.k):
                for j in range(n_vec[i]):
                    d = K.matrix @ X.X[i][j].conj().T - B.ampliate(K, S.X[i][j].conj().T)
                    inter = max(inter, float(np.abs(d).max()))
            words = [mw for mw in f.basis if fw.degree(mw) <= 3]
            for a, b in product(words, words):
                if fw.degree(a) + fw.degree(b) <= 3:
                    g = S.monomial(a) @ S.monomial(b).conj().T
                    d = B.berezin_transform(K, g) - X.monomial(a) @ X.monomial(b).conj().T
                    recon = max(recon, float(np.abs(d).max()))
        st["detail"] = f"K*K-I {iso:.1e}, intertwining {inter:.1e}, reconstruction {recon:.1e}"
        assert iso <= 1e-12 and inter <= 1e-12 and recon <= 1e-11


def test_04_hadamard_radius():
    with criterion(4, 5) as st:
        unary = sr.from_function((1,), 40, lambda mw: 2.0 ** len(mw[0]))
        binary = sr.from_function((2,), 10, lambda mw: 1.0)
        g1, g2 = sr.hadamard_radius(unary), sr.hadamard_radius(binary)
        assert g1 == 0.5
        assert abs(g2 - 1 / math.sqrt(2)) <= 1e-12
        verdicts = []
        for s, g, f in ((unary, g1, F.build_truncated_fock((1,), (40,))),
                        (binary, g2, F.build_truncated_fock((2,), (6,)))):
            below = list(sr.model_block_norms(s, f, 0.9 * g).values())[1:f.deg_vec[0] + 1]
            above = list(sr.model_block_norms(s, f, 1.1 * g).values())[1:f.deg_vec[0] + 1]
            ratios_below = [b / a for a, b in zip(below, below[1:])]
            ratios_above = [b / a for a, b in zip(above, above[1:])]
            verdicts.append(max(ratios_below) < 1 and below[-1] < below[0])
            verdicts.append(min(ratios_above) > 1 and above[-1] > above[0])
        st["detail"] = f"gamma {g1}, {g2:.15f}; dichotomy {verdicts}"
        assert all(verdicts)


def test_05_coefficient_bound():
    rng = np.random.default_rng(5)
    with criterion(5, 30) as st:
        worst = -np.inf
        for t in range(20):
            degree = int(rng.integers(2, 6))
            shape = () if t % 2 == 0 else (2, 2)
            p = sr.random_polynomial((1,), degree, rng, shape=shape)
            f = F.build_truncated_fock((1,), (degree + 30,))
            p = p.scale(1.0 / sr.model_norm(p, f, 1.0))
            A0 = np.atleast_2d(p.constant)
            gap = np.eye(A0.shape[1]) - A0.conj().T @ A0
            total = np.zeros_like(gap)
            for q in range(1, degree + 1):
                blk = [(mw, a) for mw, a in p.coeff.items() if fw.degree(mw) == q]
                gram = sum((np.atleast_2d(a).conj().T @ np.atleast_2d(a) for _, a in blk), np.zeros_like(gap))
                total = total + gram
                # per degree, and for the running sum over degrees
                worst = max(worst, np.linalg.eigvalsh(gram - gap).max(), np.linalg.eigvalsh(total - gap).max())
        st["detail"] = f"max eig(sum A*A - (I - A0*A0)) = {worst:.2e} (slack 0.02)"
        assert worst <= 0.02


def test_06_schwarz():
    rng = np.random.default_rng(6)
    cases = [((1,), (40,)), ((2,), (6,)), ((1, 1), (12, 12))]
    with criterion(6, 30) as st:
        worst = 0.0
        for t in range(50):
            n_vec, caps = cases[t % len(cases)]
            f = F.build_truncated_fock(n_vec, caps)
            p = sr.random_polynomial(n_vec, int(rng.integers(1, 4)), rng, zero_constant=True)
            X = T.random_tuple(n_vec, int(rng.integers(1, 5)), float(rng.uniform(0.05, 0.97)), seed=rng)
            rep = sr.schwarz_margin(p, X, f)
            assert rep.passed and rep.gauge_below_norm
            worst = max(worst, rep.value_norm / (rep.minkowski * rep.sup_estimate))
        eq = sr.schwarz_margin(sr.coordinate((1,), 0, 0), T.OpTuple.from_scalar([[0.3]]),
                               F.build_truncated_fock((1,), (40,)))
        dev = max(abs(eq.value_norm - 0.3), abs(eq.minkowski - 0.3))
        st["detail"] = f"max ||F(X)||/(m M) = {worst:.3f}; equality case deviation {dev:.1e}"
        assert worst <= 1.05 and dev <= 1e-12


def test_07_group_law():
    rng = np.random.default_rng(7)
    pats = [(2, 2), (1, 1), (1, 2, 1), (3, 3), (2, 1, 2), (2,)]
    with criterion(7, 20) as st:
        worst, swaps = 0.0, 0
        for t in range(30):
            n_vec = pats[t % len(pats)]
            a, b, c = (ag.random_automorphism(n_vec, rng) for _ in range(3))
            swaps += a.sigma != tuple(range(len(n_vec)))
            ab, ai = ag.compose(a, b), ag.inverse(a)
            left, right = ag.compose(ab, c), ag.compose(a, ag.compose(b, c))
            for _ in range(20):
                z = T.random_scalar_point(n_vec, rng, 0.95)
                nested = flat(ag.apply_scalar(a, ag.apply_scalar(b, z)))
                worst = max(worst,
                            np.abs(flat(ag.apply_scalar(ab, z)) - nested).max(),
                            np.abs(flat(ag.apply_scalar(ai, ag.apply_scalar(a, z))) - flat(z)).max(),
                            np.abs(flat(ag.apply_scalar(left, z)) - flat(ag.apply_scalar(right, z))).max())
        L = np.eye(4, dtype=complex)
        L[1, 2] = 1e-3
        rejected = False
        try:
            ag.factor_linear_part(L, (2, 2))
        except ag.FactorizationFailed:
            rejected = True
        st["detail"] = f"max residual {worst:.1e} over 30 triples ({swaps} with sigma != id); rejection {rejected}"
        assert worst <= 1e-7 and swaps > 0 and rejected


def test_08_projective_representation():
    rng = np.random.default_rng(8)
    f = F.build_truncated_fock((1,), (30,))
    idx = f.interior_indices(10)
    with criterion(8, 20) as st:
        conj = coc = mod = 0.0
        S = F.model_tuple(f).X[0][0]
        for _ in range(5):
            pair = []
            for _ in range(2):
                lam = 0.05 * rng.uniform(0.2, 1) * np.exp(2j * np.pi * rng.uniform())
                pair.append(ag.Automorphism((0,), (np.array([[np.exp(2j * np.pi * rng.uniform())]]),),
                                            (np.array([lam]),)))
            a, b = pair
            U = ag.projective_unitary(a, f)
            P = ag.apply_to_model(a, f).X[0][0]
            conj = max(conj, np.linalg.norm((U.conj().T @ S @ U - P)[np.ix_(idx, idx)], 2))
            rep = ag.cocycle(a, b, f, 10)
            coc, mod = max(coc, rep.residual), max(mod, abs(abs(rep.c) - 1))
        st["detail"] = f"conjugation {conj:.1e}, cocycle c*I residual {coc:.1e}, ||c|-1| {mod:.1e} (|lambda| <= 0.05)"
        assert conj <= 1e-6 and coc <= 1e-6 and mod <= 1e-6


def test_09_metric_topology():
    rng = np.random.default_rng(9)
    pats = [(1,), (2, 2), (1, 2), (3, 3, 3), (1, 1, 2), (2, 1, 2), (1, 2, 3), (2, 2, 2, 1),
            (1, 1, 1, 1), (3, 1, 3, 1)]
    with criterion(9, 10) as st:
        for n in pats:
            brute = sum(all(n[p[i]] == n[i] for i in range(len(n))) for p in permutations(range(len(n))))
            assert ag.component_count(n) == brute == math.prod(math.factorial(n.count(v)) for v in set(n))
        f = F.build_truncated_fock((2, 2), (3, 3))
        a = ag.random_automorphism((2, 2), rng, 0.5, permute=False)
        d = []
        for m in (1, 2, 3):
            eps = 10.0 ** -m
            U = tuple(u @ sla.expm(1j * eps * np.diag([1.0, -0.5])) for u in a.U)
            d.append(ag.metric(ag.Automorphism(a.sigma, U, tuple(l.lam + 0.1 * eps for l in a.lam)), a, f))
        swapped = ag.Automorphism((1, 0), a.U, tuple(l.lam for l in a.lam))
        gap = ag.sup_distance(swapped, a, f)
        st["detail"] = f"metric along sequence {[f'{x:.1e}' for x in d]}; sigma gap {gap:.3f}"
        assert d[0] > 5 * d[1] > 25 * d[2] > 0
        assert gap >= 0.9


def test_10_cli_contract(capsys, tmp_path):
    with criterion(10, 10) as st:
        outs = []
        for _ in range(2):
            code = cli.main(["verify", "--suite", "defect", "--seed", "11"])
            outs.append((code, capsys.readouterr().out))
        assert outs[0] == outs[1] and outs[0][0] == 0
        codes = {0: outs[0][0]}
        codes[1] = cli.main(["verify", "--suite", "metric", "--tol-scale", "1e-20"])
        codes[2] = cli.main(["membership", "{broken"])
        moeb = tmp_path / "m.json"
        moeb.write_text(json.dumps(jio.automorphism_to_json(ag.Automorphism.moebius([[0.5]]))))
        codes[3] = cli.main(["aut", "apply", str(moeb), '{"n": [1], "X": [[[[[2, 0]]]]]}'])
        capsys.readouterr()
        st["detail"] = f"byte-identical reports; exit codes {codes}"
        assert all(k == v for k, v in codes.items())
