import numpy as np
import pytest

from pdboson.errors import InvalidArgument
from pdboson.linalg import (RngStream, check_unitary, extract_submatrix, haar_random_unitary,
                            product_with_permuted_conjugate, unitarity_error)


def test_dimension_one_is_a_phase():
    U = haar_random_unitary(1, RngStream(3))
    assert U.shape == (1, 1)
    assert abs(abs(U[0, 0]) - 1.0) < 1e-12


@pytest.mark.parametrize("N", [2, 8, 25])
@pytest.mark.parametrize("seed", [0, 1, 99])
def test_unitary(N, seed):
    assert unitarity_error(haar_random_unitary(N, RngStream(seed))) < 1e-10


@pytest.mark.parametrize("N", [0, -1, 2.5])
def test_bad_dimension(N):
    with pytest.raises(InvalidArgument):
        haar_random_unitary(N, RngStream(0))


def test_streams_reproduce_and_differ():
    a = haar_random_unitary(6, RngStream(5, 2))
    b = haar_random_unitary(6, RngStream(5, 2))
    c = haar_random_unitary(6, RngStream(5, 3))
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def _ensemble(N, trials, phase_fix=True):
    gen = np.random.default_rng(1234)
    out = np.empty((trials, N, N), dtype=complex)
    for t in range(trials):
        if phase_fix:
            out[t] = haar_random_unitary(N, gen)
        else:
            z = gen.standard_normal((N, N)) + 1j * gen.standard_normal((N, N))
            out[t] = np.linalg.qr(z)[0]
    return out


def test_haar_second_moment():
    U = _ensemble(16, 10000)
    vals = np.abs(U[:, 0, 0]) ** 2
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    assert abs(vals.mean() - 1 / 16) < 5 * se


def test_haar_mean_vanishes_and_naive_qr_does_not():
    fixed = _ensemble(4, 10000)[:, 0, 0]
    naive = _ensemble(4, 10000, phase_fix=False)[:, 0, 0]
    for part in (fixed.real, fixed.imag):
        assert abs(part.mean()) < 5 * part.std(ddof=1) / 100
    # Householder QR leaves a sign bias on the diagonal
    assert abs(naive.real.mean()) > 5 * naive.real.std(ddof=1) / 100


def test_check_unitary_rejects():
    with pytest.raises(InvalidArgument):
        check_unitary(np.ones((2, 2)))
    with pytest.raises(InvalidArgument):
        check_unitary(np.eye(3)[:2])
    with pytest.raises(InvalidArgument):
        check_unitary(np.array([[np.nan]]))


def test_submatrix_identity():
    assert np.array_equal(extract_submatrix(np.eye(3), [0, 1], [0, 1]), np.eye(2))


def test_submatrix_repeats_rows():
    U = haar_random_unitary(4, RngStream(1))
    M = extract_submatrix(U, [0, 0], [1, 2])
    assert np.array_equal(M[0], M[1])
    assert np.array_equal(M[0], U[0, [1, 2]])


def test_submatrix_direct_lookup():
    U = haar_random_unitary(5, RngStream(2))
    M = extract_submatrix(U, [2, 0], [1, 3])
    for i, s in enumerate([2, 0]):
        for k, d in enumerate([1, 3]):
            assert M[i, k] == U[s, d]


@pytest.mark.parametrize("rows,cols", [([0, 9], [0, 1]), ([0], [0, 1]), ([-1, 0], [0, 1])])
def test_submatrix_errors(rows, cols):
    with pytest.raises(InvalidArgument):
        extract_submatrix(np.eye(3), rows, cols)


def test_product_identity_sigma():
    A = haar_random_unitary(3, RngStream(4))
    assert np.allclose(product_with_permuted_conjugate(A, A, [0, 1, 2]), np.abs(A) ** 2)


def test_product_swap():
    A = np.arange(4.0).reshape(2, 2) + 1j
    B = A * 2
    out = product_with_permuted_conjugate(A, B, [1, 0])
    assert np.allclose(out, A * np.conj(B[::-1]))


def test_product_elementwise(rng):
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    sigma = (1, 2, 0)
    out = product_with_permuted_conjugate(A, B, sigma)
    for i in range(3):
        for k in range(3):
            assert out[i, k] == pytest.approx(A[i, k] * complex(B[sigma[i], k]).conjugate(), rel=1e-14)


def test_product_shape_mismatch():
    with pytest.raises(InvalidArgument):
        product_with_permuted_conjugate(np.eye(2), np.eye(3), [0, 1])
    with pytest.raises(InvalidArgument):
        product_with_permuted_conjugate(np.eye(2), np.eye(2), [0, 0])
