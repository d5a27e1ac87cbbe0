"""Matrix permanents.

``permanent_definition`` is the factorial-cost oracle. ``permanent_fast`` and
``permanent_batch`` run Glynn's formula in Gray-code order, O(2^n n), either
through a numba kernel or a vectorised numpy path (see ``_jit``).
"""
import itertools
from functools import lru_cache

import numpy as np

from . import _jit
from .errors import InvalidArgument, SizeLimitError

DEFINITION_MAX_N = 9
_NUMPY_CHUNK = 1 << 14


def _square(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"permanent needs a square matrix, got shape {A.shape}")
    return A


@lru_cache(maxsize=None)
def _permutation_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)


def permanent_definition(A) -> complex:
    """Sum over all n! permutations of the products of entries."""
    A = _square(A)
    n = A.shape[0]
    if n > DEFINITION_MAX_N:
        raise SizeLimitError(f"definitional permanent limited to n <= {DEFINITION_MAX_N}, got {n}")
    if n == 0:
        return complex(1.0)
    table = _permutation_table(n)
    terms = A[np.arange(n), table]  # (n!, n)
    return complex(np.prod(terms, axis=1).sum())


# --------------------------------------------------------------------------
# Glynn kernels
# --------------------------------------------------------------------------

@_jit.njit
def _glynn_into(A, colsum):
    # callers handle n == 0; colsum is scratch space of length n
    n = A.shape[0]
    for c in range(n):
        acc = A[0, c]
        for r in range(1, n):
            acc += A[r, c]
        colsum[c] = acc
    total = colsum[0]
    for c in range(1, n):
        total *= colsum[c]
    sign = 1.0
    old = 0
    for k in range(1, 1 << (n - 1)):
        gray = k ^ (k >> 1)
        diff = gray ^ old
        row = 1
        while diff > 1:
            diff >>= 1
            row += 1
        if gray & (1 << (row - 1)):
            for c in range(n):
                colsum[c] -= 2.0 * A[row, c]
        else:
            for c in range(n):
                colsum[c] += 2.0 * A[row, c]
        sign = -sign
        prod = colsum[0]
        for c in range(1, n):
            prod *= colsum[c]
        total += sign * prod
        old = gray
    return total / (1 << (n - 1))


@_jit.njit
def _glynn_kernel(A):
    return _glynn_into(A, np.empty(A.shape[0], dtype=A.dtype))


@_jit.njit
def _glynn_batch_kernel(As):
    out = np.empty(As.shape[0], dtype=As.dtype)
    colsum = np.empty(As.shape[2], dtype=As.dtype)
    for b in range(As.shape[0]):
        out[b] = _glynn_into(As[b], colsum)
    return out


@lru_cache(maxsize=None)
def _glynn_signs(n: int):
    """Delta vectors (first entry fixed to +1) and their sign products."""
    k = np.arange(1 << (n - 1), dtype=np.int64)
    bits = (k[:, None] >> np.arange(n - 1)) & 1
    deltas = np.ones((k.size, n))
    deltas[:, 1:] = 1.0 - 2.0 * bits
    return deltas, np.prod(deltas, axis=1)


def _glynn_numpy(A: np.ndarray):
    n = A.shape[0]
    if n == 0:
        return A.dtype.type(1)
    deltas, signs = _glynn_signs(n)
    total = A.dtype.type(0)
    for start in range(0, deltas.shape[0], _NUMPY_CHUNK):
        d = deltas[start:start + _NUMPY_CHUNK]
        total = total + np.dot(signs[start:start + _NUMPY_CHUNK], np.prod(d @ A, axis=1))
    return total / (1 << (n - 1))


def _glynn_batch_numpy(As: np.ndarray) -> np.ndarray:
    n = As.shape[-1]
    if n == 0:
        return np.ones(As.shape[0], dtype=As.dtype)
    deltas, signs = _glynn_signs(n)
    sums = np.einsum("dk,bkj->bdj", deltas, As)
    return np.prod(sums, axis=2) @ signs / (1 << (n - 1))


def _dispatch_dtype(A: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(A):
        return np.ascontiguousarray(A, dtype=np.complex128)
    return np.ascontiguousarray(A, dtype=np.float64)


def permanent_fast(A):
    """Exact permanent by Glynn's formula with Gray-code row updates."""
    A = _dispatch_dtype(_square(A))
    if A.shape[0] == 0:
        return A.dtype.type(1)
    if _jit.USE_NUMBA:
        return A.dtype.type(_glynn_kernel(A))
    return A.dtype.type(_glynn_numpy(A))


def permanent_batch(As) -> np.ndarray:
    """Permanents of a stack of square matrices, shape ``(..., n, n) -> (...)``."""
    As = np.asarray(As)
    if As.ndim < 2 or As.shape[-1] != As.shape[-2]:
        raise InvalidArgument(f"expected a stack of square matrices, got shape {As.shape}")
    lead = As.shape[:-2]
    n = As.shape[-1]
    flat = _dispatch_dtype(As.reshape((int(np.prod(lead)), n, n)))
    if n == 0:
        out = np.ones(flat.shape[0], dtype=flat.dtype)
    elif _jit.USE_NUMBA:
        out = _glynn_batch_kernel(flat)
    else:
        out = np.empty(flat.shape[0], dtype=flat.dtype)
        step = max(1, _NUMPY_CHUNK >> (n - 1))
        for start in range(0, flat.shape[0], step):
            out[start:start + step] = _glynn_batch_numpy(flat[start:start + step])
    return out.reshape(lead)


def permanent_positive(A) -> float:
    """Exact permanent of a real nonnegative matrix.

    Roundoff in the alternating Glynn sum can leave a tiny negative value for
    matrices whose permanent is zero; it is clipped to 0.
    """
    A = _square(A)
    if np.iscomplexobj(A):
        if np.any(A.imag != 0):
            raise InvalidArgument("permanent_positive requires real entries")
        A = A.real
    A = np.asarray(A, dtype=np.float64)
    if np.any(A < 0) or not np.all(np.isfinite(A)):
        raise InvalidArgument("permanent_positive requires finite nonnegative entries")
    return max(float(permanent_fast(A)), 0.0)
