"""Haar-random interferometers, submatrices and the elementwise interference product."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class RngStream:
    """Reproducible child stream keyed by ``(seed, index)``.

    Parallel workers build the stream for trial ``index`` themselves, so the
    draws never depend on how trials are scheduled.
    """

    seed: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.index),))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise InvalidArgument(f"cannot build a random generator from {rng!r}")


def haar_random_unitary(N: int, rng=None) -> np.ndarray:
    """Draw an ``N x N`` unitary from the Haar measure.

    Ginibre matrix -> QR -> rescale each column of Q by the phase of the
    matching diagonal entry of R. Without the phase fix the QR output is
    biased and not Haar distributed.
    """
    if int(N) != N or N < 1:
        raise InvalidArgument(f"dimension must be a positive integer, got {N!r}")
    gen = _as_generator(rng)
    z = (gen.standard_normal((N, N)) + 1j * gen.standard_normal((N, N))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def unitarity_error(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def check_unitary(U, tol: float = UNITARITY_TOL) -> np.ndarray:
    """Return ``U`` as a complex array, raising if it is not square and unitary."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidArgument(f"unitary must be square, got shape {U.shape}")
    if not np.all(np.isfinite(U)):
        raise InvalidArgument("matrix has non-finite entries")
    err = unitarity_error(U)
    if err >= tol:
        raise InvalidArgument(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
    return U


def extract_submatrix(U, input_modes, output_modes) -> np.ndarray:
    """Rows from ``input_modes``, columns from ``output_modes``; repeats duplicate."""
    U = np.asarray(U)
    rows = np.asarray(list(input_modes), dtype=np.intp)
    cols = np.asarray(list(output_modes), dtype=np.intp)
    if rows.shape != cols.shape:
        raise InvalidArgument(
            f"input and output mode lists differ in length ({rows.size} vs {cols.size})")
    for idx, dim in ((rows, U.shape[0]), (cols, U.shape[1])):
        if idx.size and (idx.min() < 0 or idx.max() >= dim):
            raise InvalidArgument(f"mode index out of range for dimension {dim}: {idx.tolist()}")
    return U[np.ix_(rows, cols)]


def product_with_permuted_conjugate(A, B, sigma) -> np.ndarray:
    """Entry ``(i, k)`` is ``A[i, k] * conj(B[sigma[i], k])``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2:
        raise InvalidArgument(f"shape mismatch: {A.shape} vs {B.shape}")
    sigma = np.asarray(sigma, dtype=np.intp)
    if sorted(sigma.tolist()) != list(range(A.shape[0])):
        raise InvalidArgument(f"{sigma.tolist()} is not a permutation of the rows")
    return A * np.conj(B[sigma])
