"""Exact output probabilities at arbitrary distinguishability.

Every probability is the pair sum

    P = sum_{p,q} c_p c_q sum_{sigma in S_m} x^J Perm(M_p o conj(M_q)[sigma])

where ``J`` counts photon rows whose source in ``xi_p`` differs from the
source of the row it is paired with in ``xi_q``. Grouping terms by ``J``
gives the coefficient series ``P(x) = sum_j c_j x^j``.
"""
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .combinatorics import FOCK, GBS, SBS
from .errors import InvalidArgument, SizeLimitError, UnsupportedError
from .models import FockProduct, check_overlap, configuration_arrays, photon_number
from .permanents import permanent_batch

FOCK_MAX_M = 8
GENERAL_MAX_COST = 10 ** 7
ORACLE_MAX_PHOTONS = 3
ORACLE_MAX_N = 8
REAL_RTOL = 1e-10
REAL_ATOL = 1e-14

_BATCH = 1 << 16


@dataclass(frozen=True)
class CoefficientSeries:
    """``c[j]`` multiplies ``x**j``."""

    c: np.ndarray

    @property
    def m(self) -> int:
        return len(self.c) - 1

    def evaluate(self, x: float, k=None) -> float:
        k = self.m if k is None else k
        if not 0 <= k <= self.m:
            raise InvalidArgument(f"truncation k={k} outside [0, {self.m}]")
        powers = float(x) ** np.arange(k + 1)
        return float(np.dot(self.c[:k + 1], powers))


def check_output(output, N: int) -> tuple:
    out = tuple(int(d) for d in output)
    if len(set(out)) != len(out):
        raise UnsupportedError(f"output pattern {out} has a collision; only collision-free outputs are modelled")
    if any(d < 0 or d >= N for d in out):
        raise InvalidArgument(f"output modes {out} out of range for N={N}")
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _perm_table(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.intp).reshape(-1, m)


def _pair_series(U, modes, amps, output):
    """Coefficient sums grouped by mismatch count, plus an imaginary residue check."""
    C, m = modes.shape
    if m == 0:
        return np.array([float(np.sum(amps) ** 2)]), 0.0, 1.0
    Ms = U[modes[:, :, None], np.asarray(output)[None, None, :]]  # (C, m, m)
    conjM = np.conj(Ms)
    perms = _perm_table(m)
    weight = np.outer(amps, amps)
    re = np.zeros(m + 1)
    im = np.zeros(m + 1)
    scale = 0.0
    step = max(1, _BATCH // (C * C))
    for start in range(0, len(perms), step):
        chunk = perms[start:start + step]  # (S, m)
        # A[p, q, s, i, k] = M_p[i, k] * conj(M_q[sigma_s(i), k])
        A = Ms[:, None, None, :, :] * conjM[None, :, chunk, :]
        vals = permanent_batch(A) * weight[:, :, None]
        J = (modes[:, None, None, :] != modes[None, :, chunk]).sum(axis=-1)
        J = J.ravel()
        vals = vals.ravel()
        re += np.bincount(J, weights=vals.real, minlength=m + 1)
        im += np.bincount(J, weights=vals.imag, minlength=m + 1)
        scale += float(np.abs(vals).sum())
    return re, float(np.abs(im).max()), scale


def _check_real(re, im_residue, scale):
    if im_residue > REAL_RTOL * max(scale, float(np.abs(re).sum())) + REAL_ATOL:
        raise ArithmeticError(
            f"imaginary residue {im_residue:.3g} too large for a probability of scale {scale:.3g}")


def _series_for(U, model, output, m=None, guard=True) -> CoefficientSeries:
    U = np.asarray(U, dtype=complex)
    N = U.shape[0]
    if model.kind == FOCK:
        m = photon_number(model)
        if guard and m > FOCK_MAX_M:
            raise SizeLimitError(f"exact Fock probability limited to m <= {FOCK_MAX_M}")
        if any(s >= N for s in model.modes):
            raise InvalidArgument("input mode out of range")
    else:
        m = photon_number(model, len(output) if m is None else m)
        if model.n > N:
            raise InvalidArgument(f"model uses {model.n} input modes but U has {N}")
    output = check_output(output, N)
    if len(output) != m:
        raise InvalidArgument(f"output pattern has {len(output)} photons, expected {m}")
    modes, amps = configuration_arrays(model, m)
    if guard and len(amps) * math.factorial(m) > GENERAL_MAX_COST:
        raise SizeLimitError(
            f"{len(amps)} configurations x {m}! permutations exceeds the cost guard {GENERAL_MAX_COST}")
    re, im_residue, scale = _pair_series(U, modes, amps, output)
    _check_real(re, im_residue, scale)
    return CoefficientSeries(re)


def coefficient_series(U, model, output) -> CoefficientSeries:
    return _series_for(U, model, output)


def exact_prob_general(U, model, output, x) -> float:
    x = check_overlap(x)
    return coefficient_series(U, model, output).evaluate(x)


def exact_prob_fock(U, input, output, x) -> float:
    """Exact probability for a product of single photons in ``input`` modes."""
    model = input if isinstance(input, FockProduct) else FockProduct(tuple(input))
    return exact_prob_general(U, model, output, x)


# --------------------------------------------------------------------------
# Independent oracle: explicit multimode state vector with internal states
# --------------------------------------------------------------------------

def _input_terms(model, m):
    """``m``-photon sector of the input state as (coefficient, creation modes) terms."""
    if model.kind == FOCK:
        return [(1.0, tuple(model.modes))]
    if model.kind == SBS:
        amp = math.sin(model.alpha) ** m * math.cos(model.alpha) ** (model.n - m)
        return [(amp, c) for c in itertools.combinations(range(model.n), m)]
    if model.kind == GBS:
        lam = -np.exp(1j * model.phase) * math.tanh(model.r)
        pairs = m // 2
        pref = lam ** pairs / math.cosh(model.r) ** (model.n // 2)
        terms = []
        for combo in itertools.combinations_with_replacement(range(model.n // 2), pairs):
            counts = [combo.count(s) for s in set(combo)]
            # |j, j> = (a^dag b^dag)^j / j! |0>
            coef = pref / math.prod(math.factorial(c) for c in counts)
            terms.append((coef, tuple(x for s in combo for x in (2 * s, 2 * s + 1))))
        return terms
    raise InvalidArgument(f"unknown model kind {model.kind!r}")


def fock_space_oracle(U, model, output, x) -> float:
    """Probability of ``output`` from an explicit state vector.

    Each photon from source mode ``s`` carries the internal state
    ``sqrt(x)|common> + sqrt(1-x)|s>``. The interferometer acts on the
    spatial label only; internal states are traced out at the detectors and
    the result is conditioned on the ``m``-photon sector.
    """
    x = check_overlap(x)
    U = np.asarray(U, dtype=complex)
    N = U.shape[0]
    output = check_output(output, N)
    m = len(output)
    if m > ORACLE_MAX_PHOTONS or N > ORACLE_MAX_N:
        raise SizeLimitError(
            f"state-vector oracle limited to {ORACLE_MAX_PHOTONS} photons and N <= {ORACLE_MAX_N}")
    photon_number(model, m)

    D = N + 1  # internal basis: common state plus one private state per input mode
    internal = np.zeros((N, D))
    internal[:, 0] = math.sqrt(x)
    internal[np.arange(N), 1 + np.arange(N)] = math.sqrt(1.0 - x)
    # creation operator of a photon from input s, after U, over (out mode, internal)
    created = (U[:, :, None] * internal[:, None, :]).reshape(N, N * D)

    psi = np.zeros((N * D,) * m, dtype=complex)
    for coef, sources in _input_terms(model, m):
        term = np.array(coef, dtype=complex)
        for s in sources:
            term = np.multiply.outer(term, created[s])
        psi += term

    axes_perms = list(itertools.permutations(range(m)))
    norm2 = sum(np.vdot(psi, np.transpose(psi, p)) for p in axes_perms).real
    if norm2 <= 0:
        raise ArithmeticError("input state has no weight in the requested photon sector")

    shaped = psi.reshape((N, D) * m)
    amp = np.zeros((D,) * m, dtype=complex)
    for p in axes_perms:
        # tensor factor i sits at detector output[p[i]]
        idx = []
        for i in range(m):
            idx.extend([output[p[i]], slice(None)])
        block = shaped[tuple(idx)]
        amp += np.transpose(block, np.argsort(p))
    return float(np.sum(np.abs(amp) ** 2) / norm2)
