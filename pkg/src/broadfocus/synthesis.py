"""Frequency-domain snapshots of broadband Gaussian planewaves in white noise.

Snapshots are drawn directly as DFT coefficients, one independent draw per
sensor, snapshot and band, so no time series is ever synthesized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .geometry import ArrayGeometry, steering_vector


@dataclass(frozen=True)
class SourceSpec:
    """Far-field source at directional cosine ``u`` with per-band power ``power``."""

    u: float
    power: float = 1.0

    def __post_init__(self):
        if not abs(self.u) <= 1.0:
            raise ValueError(f"directional cosine {self.u} outside [-1, 1]")
        if not self.power > 0:
            raise ValueError("source power must be positive")

    @classmethod
    def from_snr_db(cls, u, snr_db, noise_power=1.0):
        return cls(u, noise_power * 10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class BandPlan:
    """``M`` band frequencies spaced uniformly from ``f_min`` to ``f_max`` inclusive."""

    f_min: float
    f_max: float
    M: int

    def __post_init__(self):
        if not 0 < self.f_min <= self.f_max:
            raise ValueError("need 0 < f_min <= f_max")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("band count M must be a positive integer")
        if self.M == 1 and self.f_min != self.f_max:
            raise ValueError("a single band needs f_min == f_max")
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def single(cls, f):
        return cls(f, f, 1)

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_min, self.f_max, self.M)

    @property
    def center(self) -> float:
        return 0.5 * (self.f_min + self.f_max)


@dataclass(frozen=True, eq=False)
class FrequencySnapshots:
    """Complex DFT coefficients with shape ``(N, L, M)``."""

    data: np.ndarray
    band_plan: BandPlan

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != self.band_plan.M:
            raise DimensionMismatch(
                f"data shape {self.data.shape} does not match {self.band_plan.M} bands")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("snapshot data must be finite")

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def L(self) -> int:
        return self.data.shape[1]

    @property
    def M(self) -> int:
        return self.data.shape[2]

    @property
    def frequencies(self) -> np.ndarray:
        return self.band_plan.frequencies

    def band(self, m) -> np.ndarray:
        """The ``N x L`` snapshot matrix of band ``m``."""
        return self.data[:, :, m]


def _cn(rng, shape, power):
    # Circular complex Gaussian with E|z|^2 = power
    scale = np.sqrt(np.asarray(power, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_snapshots(geom: ArrayGeometry, sources: Sequence[SourceSpec], plan: BandPlan,
                       L: int, noise_power: float = 1.0, seed=None) -> FrequencySnapshots:
    """Draw ``x_l(f_m) = A(f_m) s_l(f_m) + n_l(f_m)`` for every band and snapshot.

    Source amplitudes and noise are independent circular complex Gaussians
    across sources, sensors, snapshots and bands. ``seed`` may be an int, a
    :class:`numpy.random.SeedSequence` or a :class:`numpy.random.Generator`;
    the same seed always yields the same cube.
    """
    if int(L) != L or L < 1:
        raise DimensionMismatch(f"snapshot count must be a positive integer, got {L}")
    if noise_power < 0:
        raise ValueError("noise power must be nonnegative")
    L = int(L)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    freqs = plan.frequencies
    D, N, M = len(sources), geom.N, plan.M
    out = np.zeros((M, N, L), dtype=complex)
    if D:
        u = np.array([s.u for s in sources])
        powers = np.array([s.power for s in sources])
        amps = _cn(rng, (M, D, L), powers[None, :, None])
        A = np.stack([steering_vector(geom, f, u) for f in freqs])
        out += A @ amps
    if noise_power > 0:
        out += _cn(rng, (M, N, L), noise_power)
    return FrequencySnapshots(np.ascontiguousarray(out.transpose(1, 2, 0)), plan)


def ensemble_covariance(geom, sources, f, noise_power=1.0) -> np.ndarray:
    """Model covariance ``sum_i p_i a(u_i) a(u_i)^H + noise_power I`` at frequency ``f``."""
    R = noise_power * np.eye(geom.N, dtype=complex)
    for s in sources:
        a = steering_vector(geom, f, s.u)
        R += s.power * np.outer(a, a.conj())
    return R
