import numpy as np
import pytest

from polyball import fock as F
from polyball import freeword as fw
from polyball.errors import DegreeExceeded, IndexOutOfRange, SizeOverflow
from polyball.tuples import Membership, classify, defect


@pytest.mark.parametrize("n,d,dim", [((2,), (2,), 7), ((1, 1), (3, 3), 16), ((2, 1), (1, 2), 9)])
def test_dimensions(n, d, dim):
    assert F.build_truncated_fock(n, d).dim == dim


def test_size_overflow():
    with pytest.raises(SizeOverflow):
        F.build_truncated_fock((3, 3), (8, 8), max_dim=10_000)


def test_unary_shift_matrix():
    f = F.build_truncated_fock((1,), (3,))
    S = F.creation_operator(f, 0, 0).matrix
    assert np.array_equal(S, np.eye(4, k=-1))


def test_distinct_letters_have_orthogonal_ranges():
    f = F.build_truncated_fock((2,), (2,))
    S1 = F.creation_operator(f, 0, 0).matrix
    S2 = F.creation_operator(f, 0, 1).matrix
    assert np.array_equal(S1.conj().T @ S2, np.zeros((7, 7)))
    # S* S is the projection onto degrees below the cap
    low = np.diag((f.multidegrees[:, 0] < 2).astype(float))
    assert np.array_equal(S1.conj().T @ S1, low)


def test_creation_prepends_letter():
    f = F.build_truncated_fock((2, 2), (2, 2))
    S = F.creation_operator(f, 1, 1).matrix
    e = F.basis_vector(f, ((0,), (0,)))
    assert np.array_equal(S @ e, F.basis_vector(f, ((0,), (1, 0))))
    top = F.basis_vector(f, ((), (0, 1)))
    assert not np.any(S @ top)


def test_right_creation_appends_letter():
    f = F.build_truncated_fock((2,), (2,))
    R = F.creation_operator(f, 0, 1, side="right").matrix
    assert np.array_equal(R @ F.basis_vector(f, ((0,),)), F.basis_vector(f, ((0, 1),)))


def test_cross_factor_double_commutation():
    f = F.build_truncated_fock((2, 1), (2, 3))
    S = F.model_tuple(f)
    for a in S.X[0]:
        for b in S.X[1]:
            assert np.array_equal(a @ b, b @ a)
            assert np.array_equal(a @ b.conj().T, b.conj().T @ a)


def test_left_right_commute_on_interior():
    f = F.build_truncated_fock((2,), (4,))
    L = F.model_tuple(f, "left")
    R = F.model_tuple(f, "right")
    idx = f.interior_indices(2)
    for a in L.X[0]:
        for b in R.X[0]:
            c = (a @ b - b @ a)[:, idx]
            assert np.array_equal(c, np.zeros_like(c))


def test_row_contraction_residual_is_projection():
    f = F.build_truncated_fock((2, 1), (2, 2))
    S = F.model_tuple(f)
    for row in S.X:
        res = np.eye(f.dim) - sum(a @ a.conj().T for a in row)
        assert np.allclose(res @ res, res, atol=0)
        assert np.linalg.eigvalsh(res).min() >= -1e-15


def test_model_in_closed_ball():
    f = F.build_truncated_fock((2, 1), (2, 3))
    S = F.model_tuple(f)
    for p in [(0, 1), (1, 0), (1, 1)]:
        assert np.linalg.eigvalsh(defect(S, p)).min() >= -1e-14
    assert classify(S).cls is Membership.CLOSED_BOUNDARY


def test_basis_vectors_and_errors():
    f = F.build_truncated_fock((2,), (2,))
    v = F.vacuum(f)
    assert v[0] == 1 and v.sum() == 1
    B = np.array([F.basis_vector(f, mw) for mw in f.basis])
    assert np.array_equal(B @ B.conj().T, np.eye(f.dim))
    with pytest.raises(DegreeExceeded):
        F.basis_vector(f, ((0, 0, 0),))
    with pytest.raises(IndexOutOfRange):
        F.creation_operator(f, 1, 0)
    with pytest.raises(IndexOutOfRange):
        F.creation_operator(f, 0, 2)


def test_sparse_dense_agree():
    f = F.build_truncated_fock((2, 2), (3, 2))
    mw = ((1, 0), (1,))
    dense = F.word_operator(f, mw, sparse=False)
    sparse = F.word_operator(f, mw, sparse=True)
    assert np.abs(dense - sparse.toarray()).max() <= 1e-13


def test_word_operator_is_product_of_creations():
    f = F.build_truncated_fock((2,), (3,))
    S = F.model_tuple(f)
    assert np.array_equal(F.word_operator(f, ((0, 1, 1),)), S.X[0][0] @ S.X[0][1] @ S.X[0][1])
