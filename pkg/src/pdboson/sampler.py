"""Metropolis independence sampling from truncated quasiprobabilities."""
import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .combinatorics import FOCK
from .errors import InitializationError, InvalidArgument, SizeLimitError
from .exact import coefficient_series
from .linalg import RngStream
from .models import check_overlap, configuration_arrays, photon_number
from .permanents import permanent_positive
from .truncated import _check_k, truncated_terms

ENUMERATION_MAX = 10 ** 5
INIT_ATTEMPTS = 1000
PROPOSAL_BLOCK = 4096
PROPOSAL_MAX_BLOCKS = 1000


@dataclass
class SampleResult:
    samples: list
    acceptance_rate: float
    steps: int


@dataclass
class TruncatedDistribution:
    probs: dict
    clipped_mass: float  # negative weight removed, relative to the kept positive weight


def _photons(model, m):
    return photon_number(model, m if model.kind != FOCK else None)


class _Proposal:
    """Distinguishable-particle transmission, conditioned on no collisions."""

    def __init__(self, U, model, m, gen):
        U = np.asarray(U, dtype=complex)
        self.N = U.shape[0]
        self.modes, amps = configuration_arrays(model, m)
        self.weights = amps ** 2
        self.T = np.abs(U) ** 2
        self.cdf = np.cumsum(self.T, axis=1)
        self.cdf[:, -1] = np.inf  # guard against roundoff at the tail
        self.gen = gen
        self._buffer = []
        self._cache = {}

    def _refill(self):
        gen = self.gen
        m = self.modes.shape[1]
        for _ in range(PROPOSAL_MAX_BLOCKS):
            cfg = gen.choice(len(self.weights), size=PROPOSAL_BLOCK, p=self.weights)
            u = gen.random((PROPOSAL_BLOCK, m))
            det = (u[:, :, None] >= self.cdf[self.modes[cfg]]).sum(axis=-1)
            det.sort(axis=1)
            ok = np.all(np.diff(det, axis=1) > 0, axis=1)
            if ok.any():
                self._buffer = [tuple(int(d) for d in row) for row in det[ok]][::-1]
                return
        raise InitializationError("proposal never produced a collision-free pattern")

    def draw(self) -> tuple:
        if not self._buffer:
            self._refill()
        return self._buffer.pop()

    def weight(self, phi) -> float:
        """Unnormalized proposal probability of ``phi``."""
        if phi not in self._cache:
            cols = list(phi)
            self._cache[phi] = sum(
                w * permanent_positive(self.T[np.ix_(row, cols)])
                for w, row in zip(self.weights, self.modes))
        return self._cache[phi]


class _Target:
    def __init__(self, U, model, x, k, m):
        self.U, self.model, self.x, self.k, self.m = U, model, x, k, m
        self._cache = {}

    def __call__(self, phi) -> float:
        if phi not in self._cache:
            terms = truncated_terms(self.U, self.model, phi, self.k)
            value = float(np.dot(terms, self.x ** np.arange(len(terms))))
            self._cache[phi] = max(value, 0.0)
        return self._cache[phi]


def mcmc_sample(U, model, x, k, count, burn_in=1000, thinning=1, seed=0, m=None) -> SampleResult:
    """Independence chain targeting ``max(P'(phi, k), 0)``.

    Proposals route each photon of a randomly chosen configuration through
    ``|U|^2`` and are redrawn until collision-free. ``m`` is required for the
    superposition and Gaussian models.
    """
    x = check_overlap(x)
    m = _photons(model, m)
    k = _check_k(k, m)
    if count < 0 or burn_in < 0 or thinning < 1:
        raise InvalidArgument("need count >= 0, burn_in >= 0 and thinning >= 1")
    U = np.asarray(U, dtype=complex)
    if m > U.shape[0]:
        raise InvalidArgument(f"{m} photons cannot be collision-free on {U.shape[0]} detectors")
    gen = RngStream(seed).generator()
    proposal = _Proposal(U, model, m, gen)
    target = _Target(U, model, x, k, m)

    for _ in range(INIT_ATTEMPTS):
        state = proposal.draw()
        w_state = target(state) / proposal.weight(state)
        if w_state > 0:
            break
    else:
        raise InitializationError(f"no proposal with positive target in {INIT_ATTEMPTS} attempts")

    samples = []
    accepted = 0
    steps = burn_in + count * thinning
    for step in range(steps):
        cand = proposal.draw()
        p_cand = target(cand)
        if p_cand > 0:
            w_cand = p_cand / proposal.weight(cand)
            if w_cand >= w_state or gen.random() * w_state < w_cand:
                state, w_state = cand, w_cand
                accepted += 1
        if step >= burn_in and (step - burn_in) % thinning == thinning - 1:
            samples.append(state)
    return SampleResult(samples, accepted / steps if steps else 0.0, steps)


def total_variation(p: dict, q: dict, fill_missing=False) -> float:
    for name, d in (("p", p), ("q", q)):
        total = math.fsum(d.values())
        if abs(total - 1.0) > 1e-9:
            raise InvalidArgument(f"distribution {name} sums to {total}, not 1")
    keys = set(p) | set(q)
    if not fill_missing and (set(p) != keys or set(q) != keys):
        raise InvalidArgument("distributions have different supports")
    return 0.5 * math.fsum(abs(p.get(o, 0.0) - q.get(o, 0.0)) for o in keys)


def _patterns(N, m):
    total = math.comb(N, m)
    if total > ENUMERATION_MAX:
        raise SizeLimitError(f"C({N}, {m}) = {total} patterns exceeds {ENUMERATION_MAX}")
    return list(itertools.combinations(range(N), m))


def _normalize(weights: dict) -> dict:
    total = math.fsum(weights.values())
    if total <= 0:
        raise ArithmeticError("distribution has no positive weight")
    return {o: w / total for o, w in weights.items()}


def exact_distribution(U, model, x, N=None, m=None) -> dict:
    """Exact probabilities of every collision-free pattern, renormalized."""
    x = check_overlap(x)
    U = np.asarray(U, dtype=complex)
    if N is not None and N != U.shape[0]:
        raise InvalidArgument(f"N={N} does not match U of dimension {U.shape[0]}")
    m = _photons(model, m)
    raw = {phi: coefficient_series(U, model, phi).evaluate(x) for phi in _patterns(U.shape[0], m)}
    return _normalize(raw)


def truncated_distribution(U, model, x, k, m=None) -> TruncatedDistribution:
    """The sampler's target: ``P'`` clipped at zero and renormalized."""
    x = check_overlap(x)
    U = np.asarray(U, dtype=complex)
    m = _photons(model, m)
    k = _check_k(k, m)
    raw = {}
    for phi in _patterns(U.shape[0], m):
        terms = truncated_terms(U, model, phi, k)
        raw[phi] = float(np.dot(terms, x ** np.arange(len(terms))))
    kept = math.fsum(max(v, 0.0) for v in raw.values())
    clipped = math.fsum(max(0.0, -v) for v in raw.values())
    probs = _normalize({o: max(v, 0.0) for o, v in raw.items()})
    return TruncatedDistribution(probs, clipped / kept)


def empirical_distribution(samples) -> dict:
    if not samples:
        raise InvalidArgument("no samples")
    counts = Counter(tuple(s) for s in samples)
    return {o: c / len(samples) for o, c in counts.items()}
