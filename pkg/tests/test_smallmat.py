import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as nps

from shiftkrylov import smallmat
from shiftkrylov.errors import InvalidInputError, SingularityError

from conftest import random_complex


def test_qr_pythagorean_column():
    Q, R = smallmat.qr_factor(np.array([[3.0], [4.0]]))
    assert np.allclose(np.abs(R), [[5], [0]])
    assert np.allclose(np.abs(Q[:, 0]), [0.6, 0.8])
    assert np.allclose(Q[:, 0] * R[0, 0], [3, 4])


def test_qr_of_identity_columns():
    M = np.eye(6)[:, :5]
    Q, R = smallmat.qr_factor(M)
    # LAPACK may flip signs; Q R must reproduce M and R be "diagonal" identity up to sign
    assert np.allclose(np.abs(R), M)
    assert np.allclose(np.abs(Q), np.eye(6))
    assert np.allclose(Q @ R, M)


def test_qr_random_hessenberg(rng):
    M = np.triu(random_complex(rng, 6, 5), -1)
    Q, R = smallmat.qr_factor(M)
    assert np.linalg.norm(Q.conj().T @ Q - np.eye(6)) <= 1e-12 * 6
    # elementwise recomposition
    recomposed = np.array([[sum(Q[i, l] * R[l, j] for l in range(6)) for j in range(5)] for i in range(6)])
    assert np.linalg.norm(recomposed - M) <= 1e-12 * np.linalg.norm(M)
    assert np.allclose(np.tril(R, -1), 0)


def test_qr_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        smallmat.qr_factor(np.array([[np.nan], [1.0]]))


def test_least_squares_orthogonal_split():
    d, res = smallmat.least_squares(np.array([[1.0], [0.0]]), np.array([2.0, 3.0]))
    assert np.allclose(d, [2]) and np.isclose(res, 3)


def test_least_squares_rhs_orthogonal_to_range():
    M = np.array([[1.0, 0], [0, 1], [0, 0]])
    d, res = smallmat.least_squares(M, np.array([0, 0, 5.0]))
    assert np.allclose(d, 0) and np.isclose(res, 5)


def test_least_squares_matches_normal_equations(rng):
    M = random_complex(rng, 7, 4)
    b = random_complex(rng, 7)
    d, res = smallmat.least_squares(M, b)
    dn = np.linalg.solve(M.conj().T @ M, M.conj().T @ b)
    assert np.linalg.norm(d - dn) <= 1e-10 * np.linalg.norm(dn)
    assert np.isclose(res, np.linalg.norm(b - M @ dn), rtol=1e-10)


def test_least_squares_rank_deficient_names_column():
    M = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    with pytest.raises(SingularityError) as ei:
        smallmat.least_squares(M, np.ones(3))
    assert ei.value.index == 1


def test_solve_square_examples(rng):
    b = rng.standard_normal(4)
    assert np.allclose(smallmat.solve_square(np.eye(4), b), b)
    assert np.allclose(smallmat.solve_square(np.diag([2.0, 4.0]), np.array([2.0, 8.0])), [1, 2])
    M = random_complex(rng, 8, 8) + 8 * np.eye(8)
    b = random_complex(rng, 8)
    x = smallmat.solve_square(M, b)
    assert np.linalg.norm(M @ x - b) <= 1e-12 * np.linalg.norm(b)


def test_solve_square_singular():
    with pytest.raises(SingularityError):
        smallmat.solve_square(np.array([[1.0, 1.0], [1.0, 1.0]]), np.ones(2))


def test_small_eig_examples(rng):
    w, V = smallmat.small_eig(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(sorted(w.real), [1, 2, 3])
    for j in range(3):
        # coordinate eigenvector e_{lambda}
        assert np.allclose(np.abs(V[:, j]), np.eye(3)[int(round(w[j].real)) - 1])
    w, _ = smallmat.small_eig(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert np.allclose(sorted(w.imag), [-1, 1]) and np.allclose(w.real, 0)
    M = random_complex(rng, 10, 10)
    w, V = smallmat.small_eig(M)
    for j in range(10):
        assert np.linalg.norm(M @ V[:, j] - w[j] * V[:, j]) <= 1e-10 * np.linalg.norm(M, 2)
        assert np.isclose(np.linalg.norm(V[:, j]), 1)


tall = st.integers(2, 9).flatmap(
    lambda p: st.integers(1, p).flatmap(
        lambda q: nps.arrays(np.float64, (p, q), elements=st.floats(-10, 10, allow_subnormal=False))))


@settings(max_examples=60, deadline=None)
@given(tall)
def test_qr_properties(M):
    Q, R = smallmat.qr_factor(M)
    nM = max(np.linalg.norm(M), 1e-300)
    assert np.linalg.norm(Q.conj().T @ M - R) <= 1e-12 * max(nM, 1)
    assert np.linalg.norm(Q.conj().T @ Q - np.eye(M.shape[0])) <= 1e-12 * M.shape[0]


@settings(max_examples=60, deadline=None)
@given(tall, st.integers(0, 2**31))
def test_least_squares_residual_orthogonality(M, seed):
    b = np.random.default_rng(seed).standard_normal(M.shape[0])
    try:
        d, res = smallmat.least_squares(M, b)
    except SingularityError:
        return
    if np.linalg.cond(M) > 1e6:
        return
    assert np.linalg.norm(M.T @ (b - M @ d)) <= 1e-10 * np.linalg.norm(M) * np.linalg.norm(b)
