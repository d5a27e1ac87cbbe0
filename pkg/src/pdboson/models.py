"""Input-state families and the uniform-overlap distinguishability model.

All amplitudes are post-selected on exactly ``m`` detected photons, so the
emission parameters (``alpha`` for superposition sources, ``r`` and the pump
phase for squeezers) drop out of every probability. They are kept as model
metadata, e.g. for the expected photon number.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .combinatorics import FOCK, GBS, SBS, SourceConfiguration, enumerate_configurations
from .errors import InvalidArgument


@dataclass(frozen=True)
class FockProduct:
    modes: tuple
    kind: str = field(default=FOCK, init=False)

    def __post_init__(self):
        modes = tuple(int(s) for s in self.modes)
        if len(set(modes)) != len(modes):
            raise InvalidArgument("Fock input modes must be distinct")
        if any(s < 0 for s in modes):
            raise InvalidArgument("mode indices must be nonnegative")
        object.__setattr__(self, "modes", modes)

    @property
    def n(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class Superposition:
    """``n`` sources each emitting ``cos(alpha)|0> + sin(alpha)|1>``."""

    n: int
    alpha: float = math.pi / 4
    kind: str = field(default=SBS, init=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument("need at least one source")

    @property
    def mean_photons(self) -> float:
        return self.n * math.sin(self.alpha) ** 2


@dataclass(frozen=True)
class GaussianWeak:
    """Two-mode squeezers on mode pairs ``(2s, 2s+1)``; ``n`` counts modes."""

    n: int
    r: float = 0.1
    phase: float = 0.0
    kind: str = field(default=GBS, init=False)

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise InvalidArgument(f"GBS needs an even, positive number of modes, got {self.n}")
        if self.r < 0:
            raise InvalidArgument("squeezing parameter must be nonnegative")

    @property
    def mean_photons(self) -> float:
        return self.n * math.sinh(self.r) ** 2


@dataclass(frozen=True)
class DistinguishabilityModel:
    """Uniform pairwise overlap ``x`` between photons from different sources."""

    x: float

    def __post_init__(self):
        check_overlap(self.x)

    def gram(self, size: int) -> np.ndarray:
        return self.x + (1.0 - self.x) * np.eye(size)


@dataclass(frozen=True)
class ConfigurationAmplitude:
    configuration: SourceConfiguration
    amplitude: float


def check_overlap(x) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise InvalidArgument(f"overlap must lie in [0, 1], got {x}")
    return x


def overlap(a: int, b: int, x: float) -> float:
    x = check_overlap(x)
    return 1.0 if a == b else x


def photon_number(model, m=None) -> int:
    """Number of detected photons implied by ``model`` (and ``m`` when needed)."""
    if model.kind == FOCK:
        if m is not None and m != len(model.modes):
            raise InvalidArgument(f"Fock input carries {len(model.modes)} photons, not {m}")
        return len(model.modes)
    if m is None:
        raise InvalidArgument(f"photon number m is required for the {model.kind} model")
    if m < 0 or m > model.n:
        raise InvalidArgument(f"m={m} incompatible with n={model.n}")
    if model.kind == GBS and m % 2:
        raise InvalidArgument("GBS detects photons in pairs, m must be even")
    return int(m)


def configuration_amplitudes(model, m=None) -> list:
    """Post-selected configurations and their (real, equal) amplitudes."""
    m = photon_number(model, m)
    if model.kind == FOCK:
        configs = enumerate_configurations(FOCK, len(model.modes), m, modes=model.modes)
    else:
        configs = enumerate_configurations(model.kind, model.n, m)
    c = 1.0 / math.sqrt(len(configs))
    return [ConfigurationAmplitude(cfg, c) for cfg in configs]


def configuration_arrays(model, m=None):
    """``(modes, amplitudes)`` as arrays of shape ``(C, m)`` and ``(C,)``."""
    amps = configuration_amplitudes(model, m)
    m = photon_number(model, m)
    modes = np.array([a.configuration.modes for a in amps], dtype=np.intp).reshape(len(amps), m)
    return modes, np.array([a.amplitude for a in amps])


def source_modes(model) -> int:
    """Number of interferometer input modes the model occupies."""
    if model.kind == FOCK:
        return max(model.modes) + 1 if model.modes else 0
    return model.n


def build_model(kind: str, n=None, modes=None, alpha=math.pi / 4, r=0.1, phase=0.0):
    if kind == FOCK:
        if modes is None:
            if n is None:
                raise InvalidArgument("Fock model needs modes or n")
            modes = range(n)
        return FockProduct(tuple(modes))
    if kind == SBS:
        return Superposition(int(n), alpha)
    if kind == GBS:
        return GaussianWeak(int(n), r, phase)
    raise InvalidArgument(f"unknown model kind {kind!r}")
