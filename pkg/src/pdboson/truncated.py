"""Truncated-series simulation: Fock, grouped superposition and grouped GBS forms.

All grouped forms enumerate the same object. Write ``W[k, s] = U[s, phi_k]``
for detector ``k`` and source ``s``. A term of the exact pair sum assigns each
detector a source on the bra side (``a_k``) and on the ket side (``b_k``).
Detectors with ``a_k != b_k`` form the set ``rho`` of size ``j``; on them the
assignment defines a fixed-point-free partial permutation ``sigma_p: A -> B``
of source modes. The ``rho`` rows contribute an interference permanent and the
remaining rows a permanent of moduli squared over the sources left free.
"""
import itertools
import math

import numpy as np

from .combinatorics import FOCK, GBS, SBS, PartialPermutation, biphoton_partner, derangements
from .errors import DivergenceError, InvalidArgument, SizeLimitError
from .exact import check_output, coefficient_series
from .models import FockProduct, check_overlap
from .permanents import permanent_batch, permanent_fast, permanent_positive

SIGMA_MAX_PAIRS = 2 * 10 ** 6
GBS_BRUTEFORCE_MAX = 10 ** 4


def error_bound(x: float, k: int) -> float:
    """Haar-averaged truncation error in units of ``m!/N^m``."""
    x = float(x)
    if k < 0:
        raise InvalidArgument("truncation order k must be >= 0")
    if x == 1.0:
        raise DivergenceError("error bound diverges at x = 1")
    if not 0.0 <= x < 1.0:
        raise InvalidArgument(f"overlap must lie in [0, 1), got {x}")
    return math.sqrt(x ** (2 * (k + 1)) / (1.0 - x * x))


def _check_k(k, m):
    if int(k) != k or not 0 <= k <= m:
        raise InvalidArgument(f"truncation k={k} outside [0, {m}]")
    return int(k)


def _powers(x, k):
    return float(x) ** np.arange(k + 1)


# --------------------------------------------------------------------------
# Fock
# --------------------------------------------------------------------------

def truncated_prob_fock(U, input, output, x, k) -> float:
    model = input if isinstance(input, FockProduct) else FockProduct(tuple(input))
    x = check_overlap(x)
    series = coefficient_series(U, model, output)
    return series.evaluate(x, _check_k(k, series.m))


def laplace_series_fock(U, input_modes, output, k=None) -> np.ndarray:
    """Coefficients ``c_0..c_k`` from the Laplace-expanded Fock form.

    Rows ``S`` of size ``j`` are deranged by ``delta`` and paired with detector
    columns ``rho``; the block permanent multiplies the moduli-squared
    permanent of the complementary rows and columns. Cost is factorial, so this
    serves as a reference for small ``m``.
    """
    U = np.asarray(U, dtype=complex)
    output = check_output(output, U.shape[0])
    M = U[np.ix_(list(input_modes), list(output))]
    m = M.shape[0]
    if m != len(output):
        raise InvalidArgument("input and output photon numbers differ")
    k = m if k is None else _check_k(k, m)
    M2 = np.abs(M) ** 2
    rows = range(m)
    c = np.zeros(k + 1)
    for j in range(k + 1):
        if j > 0 and derangements(j) == 0:
            continue
        total = 0j
        for S in itertools.combinations(rows, j):
            Sbar = [i for i in rows if i not in S]
            for delta in itertools.permutations(S):
                if any(a == b for a, b in zip(S, delta)):
                    continue
                for rho in itertools.combinations(rows, j):
                    rbar = [i for i in rows if i not in rho]
                    block = M[np.ix_(S, rho)] * np.conj(M[np.ix_(delta, rho)])
                    total += permanent_fast(block) * permanent_fast(M2[np.ix_(Sbar, rbar)])
        c[j] = total.real
    return c


# --------------------------------------------------------------------------
# Shared enumeration
# --------------------------------------------------------------------------

def _detector_weights(U, n, output):
    U = np.asarray(U, dtype=complex)
    N = U.shape[0]
    if n > N:
        raise InvalidArgument(f"{n} sources but U has dimension {N}")
    output = check_output(output, N)
    W = U[:n, list(output)].T  # (m, n): detectors x sources
    return W, len(output)


def _sigma_parts(n, j):
    """Fixed-point-free partial permutations of size ``j`` over ``range(n)``."""
    work = math.comb(n, j) * math.perm(n, j)
    if work > SIGMA_MAX_PAIRS:
        raise SizeLimitError(f"{work} partial permutations of size {j} over {n} modes exceeds the guard")
    for dom in itertools.combinations(range(n), j):
        for img in itertools.permutations(range(n), j):
            if all(a != b for a, b in zip(dom, img)):
                yield dom, img


def _quantum_blocks(W, rhos, dom, img):
    """Interference matrices ``Q[r, l, i] = W[rho_l, A_i] conj(W[rho_l, B_i])``."""
    Wr = W[rhos]  # (R, j, n)
    return Wr[:, :, list(dom)] * np.conj(Wr[:, :, list(img)])


def _index_array(rows, width):
    rows = list(rows)
    return np.array(rows, dtype=np.intp).reshape(len(rows), width)


def _complement(size, chosen):
    chosen = set(chosen)
    return [i for i in range(size) if i not in chosen]


# --------------------------------------------------------------------------
# Superposition sources
# --------------------------------------------------------------------------

def build_m_fp(Mabs, sigma_p, rho, n, m, j) -> np.ndarray:
    """Moduli-squared matrix with the ``rho`` rows and the columns touched by
    ``sigma_p`` removed, padded with rows of ones to a square.

    ``Perm(result) / pad!`` sums the permanents over every choice of sources
    for the remaining photons that avoids the touched columns. When domain and
    image are disjoint, ``2j`` columns go and ``pad = n - m - j``; when they
    overlap (e.g. a transposition) fewer columns go and ``pad`` grows.
    """
    Mabs = np.asarray(Mabs, dtype=float)
    if Mabs.shape != (m, n):
        raise InvalidArgument(f"expected an {m}x{n} matrix, got {Mabs.shape}")
    if not isinstance(sigma_p, PartialPermutation):
        sigma_p = PartialPermutation(*sigma_p)
    rho = tuple(int(r) for r in rho)
    if len(sigma_p) != j or len(rho) != j or len(set(rho)) != j:
        raise InvalidArgument("sigma_p and rho must both have size j")
    if sigma_p.fixed_positions:
        raise InvalidArgument("sigma_p must have no fixed points")
    touched = sigma_p.touched()
    if any(r < 0 or r >= m for r in rho) or any(s < 0 or s >= n for s in touched):
        raise InvalidArgument("rho rows or sigma_p columns out of range")
    cols = _complement(n, touched)
    pad = len(cols) - (m - j)
    if pad < 0:
        raise InvalidArgument(
            f"{m - j} remaining photons cannot be placed on {len(cols)} free sources")
    body = Mabs[np.ix_(_complement(m, rho), cols)]
    return np.vstack([body, np.ones((pad, len(cols)))])


def _sigma_groups(n, j, rest):
    """Partial permutations grouped by how many columns they touch, dropping
    those that leave fewer than ``rest`` free sources."""
    groups = {}
    for dom, img in _sigma_parts(n, j):
        touched = set(dom) | set(img)
        if n - len(touched) >= rest:
            free = [s for s in range(n) if s not in touched]
            groups.setdefault(len(touched), []).append((dom, img, free))
    return groups


def sbs_grouped_terms(U, n, output, k=None) -> np.ndarray:
    """Per-order sums ``t_j`` with ``P'(x) = sum_{j <= k} t_j x^j``.

    Batched form of ``build_m_fp``: for every ``rho`` and every ``sigma_p``
    touching the same number of columns the padded matrices share a shape,
    so their permanents go through one call.
    """
    W, m = _detector_weights(U, n, output)
    if m > n:
        raise InvalidArgument(f"cannot detect {m} photons from {n} sources")
    k = m if k is None else _check_k(k, m)
    Mabs = np.abs(W) ** 2
    norm = 1.0 / math.comb(n, m)
    terms = np.zeros(k + 1)
    for j in range(k + 1):
        rho_list = list(itertools.combinations(range(m), j))
        rhos = _index_array(rho_list, j)
        rests = _index_array([_complement(m, r) for r in rho_list], m - j)
        Wr = W[rhos]  # (R, j, n)
        total = 0.0
        for t, group in _sigma_groups(n, j, m - j).items():
            doms = _index_array([g[0] for g in group], j)
            imgs = _index_array([g[1] for g in group], j)
            frees = _index_array([g[2] for g in group], n - t)
            # Q[r, p, l, i] = W[rho_l, dom_i] conj(W[rho_l, img_i])
            Q = np.moveaxis(Wr[:, :, doms] * np.conj(Wr[:, :, imgs]), 2, 1)
            quantum = permanent_batch(Q)  # (R, P)
            pad = n - t - (m - j)
            body = Mabs[rests[:, None, :, None], frees[None, :, None, :]]  # (R, P, m-j, n-t)
            ones = np.ones(body.shape[:2] + (pad, n - t))
            classical = permanent_batch(np.concatenate([body, ones], axis=2)).real
            total += float(np.sum(quantum * classical).real) / math.factorial(pad)
        terms[j] = norm * total
    return terms


def sbs_grouped_prob(U, n, output, x, k) -> float:
    x = check_overlap(x)
    terms = sbs_grouped_terms(U, n, output, k)
    return float(np.dot(terms, _powers(x, len(terms) - 1)))


# --------------------------------------------------------------------------
# Weak-squeezing Gaussian sources
# --------------------------------------------------------------------------

def build_m_gfp(Mabs, n, m) -> np.ndarray:
    """``[[Mbar, 0], [P, S]]`` with ``P`` block-diagonal 2x2 ones and ``S``
    rows alternating +1 / -1."""
    Mabs = np.asarray(Mabs, dtype=float)
    if n % 2 or m % 2:
        raise InvalidArgument(f"n and m must be even, got n={n}, m={m}")
    if m > n or Mabs.shape != (m, n):
        raise InvalidArgument(f"expected an {m}x{n} matrix with m <= n, got {Mabs.shape}")
    P = np.kron(np.eye(n // 2), np.ones((2, 2)))
    S = np.ones((n, m))
    S[1::2] = -1.0
    top = np.hstack([Mabs, np.zeros((m, m))])
    return np.vstack([top, np.hstack([P, S])])


def gfp_normalization(n, m) -> int:
    """Signed factor relating ``Perm(M_gfp)`` to ``gbs_classical_bruteforce``.

    Each of the ``m/2`` biphotons left to the ``S`` block contributes
    ``Perm([[1, 1], [-1, -1]]) = -2`` and the ``(n - m)/2`` unused ``P`` blocks
    each contribute 2, with ``m!`` orderings of the ``S`` columns. A plain
    ``2^m m!`` never matches.
    """
    if n % 2 or m % 2 or m > n:
        raise InvalidArgument(f"need even m <= n, got n={n}, m={m}")
    return (-1) ** (m // 2) * math.factorial(m) * 2 ** ((n - m) // 2)


def _biphoton_unions(n, size):
    return [tuple(x for s in c for x in (2 * s, 2 * s + 1))
            for c in itertools.combinations(range(n // 2), size // 2)]


def gbs_classical_bruteforce(Mabs, n, m) -> float:
    """Sum of positive permanents over all biphoton-closed column sets."""
    Mabs = np.asarray(Mabs, dtype=float)
    if n % 2 or m % 2:
        raise InvalidArgument(f"n and m must be even, got n={n}, m={m}")
    if Mabs.shape != (m, n):
        raise InvalidArgument(f"expected an {m}x{n} matrix, got {Mabs.shape}")
    if math.comb(n // 2, m // 2) > GBS_BRUTEFORCE_MAX:
        raise SizeLimitError(f"C({n // 2}, {m // 2}) column sets exceeds {GBS_BRUTEFORCE_MAX}")
    return sum(permanent_positive(Mabs[:, list(cols)]) for cols in _biphoton_unions(n, m))


def _closed(modes) -> bool:
    return all(biphoton_partner(s) in modes for s in modes)


def _gbs_free_sets(n, dom, img, size):
    """Sets ``F`` with ``A u F`` and ``B u F`` both biphoton-closed, ``F``
    disjoint from ``A u B`` and ``|F| = size``."""
    A, B = set(dom), set(img)
    used = A | B
    forced = {biphoton_partner(s) for s in A} - A
    forced |= {biphoton_partner(s) for s in B} - B
    if forced & used or len(forced) > size:
        return []
    if not _closed(A | forced) or not _closed(B | forced):
        return []
    blocked = used | forced
    free_pairs = [s for s in range(n // 2) if 2 * s not in blocked and 2 * s + 1 not in blocked]
    extra = size - len(forced)
    if extra % 2:
        return []
    out = []
    for c in itertools.combinations(free_pairs, extra // 2):
        out.append(tuple(sorted(forced | {x for s in c for x in (2 * s, 2 * s + 1)})))
    return out


def gbs_grouped_terms(U, n, output, k=None) -> np.ndarray:
    """Per-order sums ``t_j`` of the grouped GBS form."""
    if n % 2:
        raise InvalidArgument(f"GBS needs an even number of modes, got {n}")
    W, m = _detector_weights(U, n, output)
    if m % 2 or m > n:
        raise InvalidArgument(f"need even m <= n, got m={m}, n={n}")
    k = m if k is None else _check_k(k, m)
    Mabs = np.abs(W) ** 2
    norm = 1.0 / math.comb(n // 2, m // 2)
    terms = np.zeros(k + 1)
    for j in range(k + 1):
        rhos = list(itertools.combinations(range(m), j))
        rho_arr = _index_array(rhos, j)
        total = 0.0
        for dom, img in _sigma_parts(n, j):
            free = _gbs_free_sets(n, dom, img, m - j)
            if not free:
                continue
            quantum = permanent_batch(_quantum_blocks(W, rho_arr, dom, img))
            classical = np.empty(len(rhos))
            for r, rho in enumerate(rhos):
                rest = Mabs[_complement(m, rho)]
                stack = np.stack([rest[:, list(F)] for F in free])
                classical[r] = permanent_batch(stack).real.sum()
            total += float(np.dot(quantum, classical).real)
        terms[j] = norm * total
    return terms


def gbs_truncated_prob(U, n, output, x, k) -> float:
    x = check_overlap(x)
    terms = gbs_grouped_terms(U, n, output, k)
    return float(np.dot(terms, _powers(x, len(terms) - 1)))


def truncated_prob(U, model, output, x, k) -> float:
    """Dispatch on the model kind."""
    if model.kind == FOCK:
        return truncated_prob_fock(U, model, output, x, k)
    if model.kind == SBS:
        return sbs_grouped_prob(U, model.n, output, x, k)
    if model.kind == GBS:
        return gbs_truncated_prob(U, model.n, output, x, k)
    raise InvalidArgument(f"unknown model kind {model.kind!r}")


def truncated_terms(U, model, output, k=None) -> np.ndarray:
    if model.kind == FOCK:
        c = coefficient_series(U, model, output).c
        return c if k is None else c[:_check_k(k, len(c) - 1) + 1]
    if model.kind == SBS:
        return sbs_grouped_terms(U, model.n, output, k)
    if model.kind == GBS:
        return gbs_grouped_terms(U, model.n, output, k)
    raise InvalidArgument(f"unknown model kind {model.kind!r}")
