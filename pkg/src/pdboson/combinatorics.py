"""Partial permutations, pairing rules and covariance-term counting.

Modes are 0-indexed. A permutation ``sigma`` acts on a tuple by moving the
entry at position ``i`` to position ``sigma[i]``, so with ``xi = (2, 3, 4)``
and ``sigma = (1, 2, 0)`` we get ``sigma(xi) = (4, 2, 3)``.
"""
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidArgument

FOCK = "fock"
SBS = "sbs"
GBS = "gbs"
MODEL_KINDS = (FOCK, SBS, GBS)


@dataclass(frozen=True)
class SourceConfiguration:
    """Sorted source modes that emitted the detected photons."""

    modes: tuple

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(sorted(int(s) for s in self.modes)))

    @property
    def m(self) -> int:
        return len(self.modes)

    @property
    def multiplicity(self) -> int:
        return math.prod(math.factorial(c) for c in Counter(self.modes).values())


@dataclass(frozen=True)
class PartialPermutation:
    """Two-line map ``domain[i] -> image[i]`` between two mode lists."""

    domain: tuple
    image: tuple

    def __post_init__(self):
        dom = tuple(int(a) for a in self.domain)
        img = tuple(int(b) for b in self.image)
        if len(dom) != len(img):
            raise InvalidArgument("domain and image must have equal length")
        if len(set(dom)) != len(dom) or len(set(img)) != len(img):
            raise InvalidArgument("partial permutation must not repeat a mode")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "image", img)

    def __len__(self):
        return len(self.domain)

    @property
    def fixed_positions(self) -> frozenset:
        return frozenset(i for i, (a, b) in enumerate(zip(self.domain, self.image)) if a == b)

    @property
    def nonfixed_count(self) -> int:
        return len(self) - len(self.fixed_positions)

    def nonfixed_part(self) -> "PartialPermutation":
        keep = [i for i in range(len(self)) if i not in self.fixed_positions]
        return PartialPermutation(tuple(self.domain[i] for i in keep),
                                  tuple(self.image[i] for i in keep))

    def inverse(self) -> "PartialPermutation":
        return PartialPermutation(self.image, self.domain)

    def pairs(self) -> frozenset:
        return frozenset(zip(self.domain, self.image))

    def touched(self) -> frozenset:
        return frozenset(self.domain) | frozenset(self.image)


def apply_permutation(sigma, seq) -> tuple:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(len(seq))):
        raise InvalidArgument(f"{sigma} is not a permutation of {len(seq)} positions")
    out = [None] * len(seq)
    for i, target in enumerate(sigma):
        out[target] = seq[i]
    return tuple(out)


def fixed_points(pp: PartialPermutation):
    """Fixed positions of ``pp`` together with its fixed-point-free part."""
    return pp.fixed_positions, pp.nonfixed_part()


def check_pairing_rules(xi_p, xi_q, sigma, chi_r, chi_s, tau):
    """Whether the interference terms ``(xi_p, sigma(xi_q))`` and
    ``(chi_r, tau(chi_s))`` carry opposite phases and so covary.

    This holds iff the non-fixed part of the first partial permutation is
    the inverse of the non-fixed part of the second. Returns
    ``(holds, rho)`` where ``rho[i]`` is the position on the chi side matched
    to position ``i`` on the xi side (``None`` when the rules fail).
    """
    left = PartialPermutation(tuple(xi_p), apply_permutation(sigma, tuple(xi_q)))
    right = PartialPermutation(tuple(chi_r), apply_permutation(tau, tuple(chi_s)))
    if len(left) != len(right):
        raise InvalidArgument("all configurations must hold the same photon number")

    free_right = [i for i in range(len(right)) if i not in right.fixed_positions]
    by_pair = {(right.image[i], right.domain[i]): i for i in free_right}
    rho = [None] * len(left)
    used = set()
    for i in range(len(left)):
        if i in left.fixed_positions:
            continue
        i_r = by_pair.get((left.domain[i], left.image[i]))
        if i_r is None or i_r in used:
            return False, None
        rho[i] = i_r
        used.add(i_r)
    if len(used) != len(free_right):
        return False, None
    spare = iter(sorted(right.fixed_positions))
    for i in sorted(left.fixed_positions):
        rho[i] = next(spare)
    return True, tuple(rho)


@lru_cache(maxsize=None)
def derangements(k: int) -> int:
    if k < 0:
        raise InvalidArgument("derangement count needs k >= 0")
    a, b = 1, 0  # D(0), D(1)
    if k == 0:
        return a
    for i in range(2, k + 1):
        a, b = b, (i - 1) * (a + b)
    return b


def rencontres(m: int, f: int) -> int:
    """Permutations of ``m`` elements with exactly ``f`` fixed points."""
    if m < 0 or f < 0 or f > m:
        raise InvalidArgument(f"rencontres number needs 0 <= f <= m, got m={m}, f={f}")
    return math.comb(m, f) * derangements(m - f)


def _check_order(n, m, j):
    if not (0 <= j <= m <= n):
        raise InvalidArgument(f"need 0 <= j <= m <= n, got n={n}, m={m}, j={j}")


def count_covariance_sbs(n: int, m: int, j: int) -> int:
    """Closed-form (upper-bound) count of covarying term pairs at order ``j``.

    Over-counts partial permutations that acquire extra fixed points, so the
    exact count from ``covariance_count_bruteforce`` never exceeds it.
    """
    _check_order(n, m, j)
    return (math.comb(n, m) * math.comb(m, j) * math.comb(n - m + j, j)
            * math.comb(n - j, m - j) * math.factorial(j))


def count_covariance_gbs(n: int, m: int, j: int) -> int:
    """SBS count with biphoton substitutions ``n -> n/2``, ``m -> m/2``, ``j -> ceil(j/2)``."""
    if n % 2 or m % 2:
        raise InvalidArgument(f"GBS needs even mode and photon numbers, got n={n}, m={m}")
    _check_order(n, m, j)
    h, m2, n2 = (j + 1) // 2, m // 2, n // 2
    return (math.factorial(j) * math.comb(n2, m2) * math.comb(m2, h)
            * math.comb(n2 - m2 + h, h) * math.comb(n2 - h, m2 - h))


def biphoton_partner(mode: int) -> int:
    return mode ^ 1


def enumerate_configurations(kind: str, n: int, m: int, modes=None) -> list:
    """All source configurations of ``m`` photons.

    ``sbs``: every m-subset of ``range(n)``. ``gbs``: unions of ``m/2``
    distinct biphotons ``{2s, 2s+1}`` over ``n`` modes. ``fock``: the single
    configuration ``modes``.
    """
    if kind == FOCK:
        if modes is None:
            modes = range(m)
        cfg = SourceConfiguration(tuple(modes))
        if m is not None and len(cfg.modes) != m:
            raise InvalidArgument(f"Fock input has {len(cfg.modes)} photons, not {m}")
        return [cfg]
    if m < 0 or m > n:
        raise InvalidArgument(f"cannot draw {m} photons from {n} sources")
    if kind == SBS:
        return [SourceConfiguration(c) for c in itertools.combinations(range(n), m)]
    if kind == GBS:
        if m % 2 or n % 2:
            raise InvalidArgument(f"GBS needs even mode and photon numbers, got n={n}, m={m}")
        return [SourceConfiguration(tuple(x for s in c for x in (2 * s, 2 * s + 1)))
                for c in itertools.combinations(range(n // 2), m // 2)]
    raise InvalidArgument(f"unknown model kind {kind!r}")


def covariance_count_bruteforce(kind: str, n: int, m: int) -> dict:
    """Exact number of sextuples ``(p, q, sigma, r, s, tau)`` obeying the
    pairing rules, keyed by the non-fixed size ``j``.

    Groups the ``(xi_p, sigma(xi_q))`` side by its fixed-point-free part so the
    pair count is a sum of products rather than a sextuple loop.
    """
    configs = [c.modes for c in enumerate_configurations(kind, n, m)]
    perms = list(itertools.permutations(range(m)))
    sides = Counter()
    for p in configs:
        for q in configs:
            for sigma in perms:
                pp = PartialPermutation(p, apply_permutation(sigma, q)).nonfixed_part()
                sides[pp.pairs()] += 1
    counts = Counter()
    for pairs, mult in sides.items():
        inverse = frozenset((b, a) for a, b in pairs)
        counts[len(pairs)] += mult * sides.get(inverse, 0)
    return {j: counts.get(j, 0) for j in range(m + 1)}
