"""Haar-ensemble Monte Carlo of the coefficients ``c_j`` and the analytic references."""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .combinatorics import FOCK, GBS, SBS, count_covariance_gbs, count_covariance_sbs, rencontres
from .errors import InvalidArgument
from .exact import coefficient_series
from .linalg import RngStream, haar_random_unitary
from .models import build_model, photon_number, source_modes
from .permanents import permanent_batch

CHUNK = 64


def var_r_analytic(m: int, j: int, N: int) -> float:
    """Haar variance of a single interference term with ``j`` non-fixed rows."""
    if not 0 <= j <= m:
        raise InvalidArgument(f"need 0 <= j <= m, got j={j}, m={m}")
    if N < 1:
        raise InvalidArgument("N must be positive")
    num = math.e * math.comb(m, j) * math.factorial(m - j) ** 2 * math.factorial(j)
    return num / (2.0 * float(N) ** (2 * m))


def var_cj_bound_fock(m: int, N: int) -> float:
    return math.factorial(m) ** 2 / float(N) ** (2 * m)


def covariance_count(kind: str, n: int, m: int, j: int) -> int:
    if kind == SBS:
        return count_covariance_sbs(n, m, j)
    if kind == GBS:
        return count_covariance_gbs(n, m, j)
    if kind == FOCK:
        return rencontres(m, m - j)
    raise InvalidArgument(f"unknown model kind {kind!r}")


def amplitude_weight(kind: str, n: int, m: int) -> float:
    """``c_p^4``: every covarying pair of terms carries four equal amplitudes."""
    if kind == SBS:
        return 1.0 / math.comb(n, m) ** 2
    if kind == GBS:
        return 1.0 / math.comb(n // 2, m // 2) ** 2
    return 1.0


def predicted_var_cj(kind: str, n: int, m: int, j: int, N: int) -> float:
    """Covarying-pair count times amplitude weight times ``var(R)``."""
    return covariance_count(kind, n, m, j) * amplitude_weight(kind, n, m) * var_r_analytic(m, j, N)


class StreamingMoments:
    """Welford accumulator over vectors, with third and fourth central moments
    (for the standard error of the variance) and the co-moment matrix."""

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)
        self.m3 = np.zeros(dim)
        self.m4 = np.zeros(dim)
        self.comoment = np.zeros((dim, dim))

    def push(self, x):
        x = np.asarray(x, dtype=float)
        n1 = self.count
        self.count += 1
        n = self.count
        delta = x - self.mean
        dn = delta / n
        dn2 = dn * dn
        term1 = delta * dn * n1
        self.mean = self.mean + dn
        self.comoment += np.outer(delta, x - self.mean)
        self.m4 += term1 * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * self.m2 - 4 * dn * self.m3
        self.m3 += term1 * dn * (n - 2) - 3 * dn * self.m2
        self.m2 += term1

    def extend(self, rows):
        for row in rows:
            self.push(row)

    @property
    def variance(self) -> np.ndarray:
        return self.m2 / (self.count - 1)

    @property
    def mean_se(self) -> np.ndarray:
        return np.sqrt(self.variance / self.count)

    @property
    def variance_se(self) -> np.ndarray:
        n = self.count
        mu4 = self.m4 / n
        var = self.variance
        return np.sqrt(np.maximum(mu4 - var ** 2 * (n - 3) / (n - 1), 0.0) / n)

    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.comoment))
        with np.errstate(invalid="ignore", divide="ignore"):
            corr = self.comoment / np.outer(sd, sd)
        return np.where(np.outer(sd, sd) > 0, corr, 0.0)


@dataclass
class MomentReport:
    kind: str
    m: int
    n: int
    N: int
    trials: int
    seed: int
    mean: np.ndarray
    mean_se: np.ndarray
    var: np.ndarray
    var_se: np.ndarray
    mean_abs: np.ndarray
    mean_abs_se: np.ndarray
    correlation: np.ndarray
    var_r: np.ndarray = field(init=False)
    counts: list = field(init=False)
    predicted_var: np.ndarray = field(init=False)
    var_cj_bound: float = field(init=False)

    def __post_init__(self):
        js = range(self.m + 1)
        self.var_r = np.array([var_r_analytic(self.m, j, self.N) for j in js])
        self.counts = [covariance_count(self.kind, self.n, self.m, j) for j in js]
        self.predicted_var = np.array(
            [predicted_var_cj(self.kind, self.n, self.m, j, self.N) for j in js])
        self.var_cj_bound = var_cj_bound_fock(self.m, self.N)

    def rows(self) -> list:
        """One self-describing record per ``j``."""
        out = []
        for j in range(self.m + 1):
            out.append({
                "model": self.kind, "m": self.m, "n": self.n, "N": self.N,
                "trials": self.trials, "seed": self.seed, "j": j,
                "mean": float(self.mean[j]), "mean_se": float(self.mean_se[j]),
                "var": float(self.var[j]), "var_se": float(self.var_se[j]),
                "mean_abs": float(self.mean_abs[j]), "mean_abs_se": float(self.mean_abs_se[j]),
                "var_r_analytic": float(self.var_r[j]), "covariance_count": int(self.counts[j]),
                "predicted_var": float(self.predicted_var[j]),
                "var_cj_bound": float(self.var_cj_bound),
            })
        return out


def _resolve_model(model, n, m):
    if isinstance(model, str):
        model = build_model(model, n=n if model != FOCK else m)
    photon_number(model, m)
    return model


def _coefficients(model, m, N, seed, start, stop) -> np.ndarray:
    out = np.empty((stop - start, m + 1))
    output = tuple(range(m))
    for i, t in enumerate(range(start, stop)):
        U = haar_random_unitary(N, RngStream(seed, t))
        out[i] = coefficient_series(U, model, output).c
    return out


def coefficient_samples(model, m, N, trials, seed, workers=1):
    """Yield per-trial coefficient vectors in chunks, always in trial order."""
    bounds = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]
    if workers <= 1:
        for start, stop in bounds:
            yield _coefficients(model, m, N, seed, start, stop)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_coefficients, model, m, N, seed, a, b) for a, b in bounds]
        for fut in futures:
            yield fut.result()


def estimate_moments(model, m, n, N, trials, seed, workers=1) -> MomentReport:
    """Per-``j`` moments of ``c_j`` over ``trials`` Haar unitaries.

    The output pattern is fixed to the first ``m`` modes. Trial ``t`` uses
    ``RngStream(seed, t)`` and results are folded in trial order, so the report
    does not depend on ``workers``.
    """
    if trials < 2:
        raise InvalidArgument("need at least two trials")
    model = _resolve_model(model, n, m)
    n = source_modes(model)
    if N < max(n, m):
        raise InvalidArgument(f"N={N} too small for {n} sources and {m} detectors")
    raw = StreamingMoments(m + 1)
    absolute = StreamingMoments(m + 1)
    for chunk in coefficient_samples(model, m, N, trials, seed, workers):
        raw.extend(chunk)
        absolute.extend(np.abs(chunk))
    return MomentReport(
        kind=model.kind, m=m, n=n, N=N, trials=trials, seed=seed,
        mean=raw.mean, mean_se=raw.mean_se, var=raw.variance, var_se=raw.variance_se,
        mean_abs=absolute.mean, mean_abs_se=absolute.mean_se, correlation=raw.correlation())


def odd_neighbor_ratios(mean_abs) -> dict:
    """``mean|c_j| / mean(mean|c_{j-1}|, mean|c_{j+1}|)`` for odd ``j`` with both neighbours."""
    mean_abs = np.asarray(mean_abs)
    out = {}
    for j in range(1, len(mean_abs) - 1, 2):
        ref = 0.5 * (mean_abs[j - 1] + mean_abs[j + 1])
        out[j] = float(mean_abs[j] / ref) if ref > 0 else float("nan")
    return out


@dataclass
class SawtoothReport:
    n: int
    m: int
    N: int
    trials: int
    seed: int
    mean_abs: np.ndarray
    ratios: dict
    control_mean_abs: np.ndarray
    control_ratios: dict

    @property
    def suppressed(self) -> bool:
        return bool(self.ratios) and all(r < 1.0 for r in self.ratios.values())


def sawtooth_check(n, m, N, trials, seed, workers=1) -> SawtoothReport:
    """GBS mean ``|c_j|`` against a Fock control with the same ``m`` and ``N``."""
    if n % 2 or m % 2:
        raise InvalidArgument(f"n and m must be even, got n={n}, m={m}")
    gbs = estimate_moments(GBS, m, n, N, trials, seed, workers)
    fock = estimate_moments(FOCK, m, m, N, trials, seed, workers)
    return SawtoothReport(n, m, N, trials, seed, gbs.mean_abs, odd_neighbor_ratios(gbs.mean_abs),
                          fock.mean_abs, odd_neighbor_ratios(fock.mean_abs))


def sample_interference_terms(xi_p, xi_q, N, trials, seed) -> np.ndarray:
    """``Perm(M_p o conj(M_q))`` over Haar unitaries, detectors fixed to the first ``m`` modes.

    ``xi_q`` is the already-permuted configuration, so the number of positions
    where it differs from ``xi_p`` is the order ``j`` of the term.
    """
    xi_p = np.asarray(xi_p, dtype=np.intp)
    xi_q = np.asarray(xi_q, dtype=np.intp)
    if xi_p.shape != xi_q.shape:
        raise InvalidArgument("configurations must have equal length")
    m = len(xi_p)
    out = np.empty(trials, dtype=complex)
    for t in range(trials):
        U = haar_random_unitary(N, RngStream(seed, t))[:, :m]
        out[t] = permanent_batch(U[xi_p] * np.conj(U[xi_q]))
    return out
