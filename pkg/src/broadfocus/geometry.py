"""Sparse linear arrays on a uniform lattice and their difference coarrays."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import NonContiguousAtOrigin

MRA6_INDICES = (1, 2, 5, 6, 12, 14)


@dataclass(frozen=True)
class ArrayGeometry:
    """A linear array whose sensors sit on integer multiples of a spacing ``d``.

    Parameters
    ----------
    sensor_indices : sequence of int
        Lattice positions of the sensors, strictly increasing and nonnegative.
    d : float
        Fundamental spacing in meters.
    c : float
        Propagation speed in m/s.
    """

    sensor_indices: tuple[int, ...]
    d: float
    c: float = 1500.0

    def __post_init__(self):
        raw = list(self.sensor_indices)
        if not raw:
            raise ValueError("an array needs at least one sensor")
        idx = []
        for v in raw:
            if isinstance(v, (bool, np.bool_)):
                raise ValueError(f"sensor index {v!r} is not an integer")
            if isinstance(v, (int, np.integer)):
                idx.append(int(v))
            elif float(v).is_integer():
                idx.append(int(v))
            else:
                raise ValueError(
                    f"sensor index {v!r} is off the lattice; positions must be integer multiples of d")
        if idx[0] < 0:
            raise ValueError("sensor indices must be nonnegative")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("sensor indices must be strictly increasing")
        if not self.d > 0:
            raise ValueError("spacing d must be positive")
        if not self.c > 0:
            raise ValueError("propagation speed c must be positive")
        object.__setattr__(self, "sensor_indices", tuple(idx))

    @classmethod
    def from_design_frequency(cls, sensor_indices, design_freq_hz=100.0, speed_mps=1500.0):
        """Build a geometry whose spacing is half a wavelength at ``design_freq_hz``."""
        if not design_freq_hz > 0:
            raise ValueError("design frequency must be positive")
        return cls(tuple(sensor_indices), speed_mps / (2.0 * design_freq_hz), speed_mps)

    @property
    def N(self) -> int:
        return len(self.sensor_indices)

    @property
    def design_freq(self) -> float:
        """Frequency at which ``d`` is half a wavelength."""
        return self.c / (2.0 * self.d)

    @property
    def positions(self) -> np.ndarray:
        """Sensor positions in meters."""
        return np.asarray(self.sensor_indices, dtype=float) * self.d

    def to_config(self) -> dict:
        return {"sensors": list(self.sensor_indices),
                "design_freq_hz": self.design_freq,
                "speed_mps": self.c}


@dataclass(frozen=True, eq=False)
class Coarray:
    """Difference coarray of an :class:`ArrayGeometry`.

    Attributes
    ----------
    P : int
        Number of contiguous nonnegative lags, so the contiguous region is
        ``-(P-1)..P-1``.
    weights : dict
        Lag ``k`` to coarray weight for every contiguous lag.
    pair_sets : dict
        Lag ``k`` to the tuple of ordered sensor pairs ``(n1, n2)`` (sensor
        numbers, not lattice positions) with ``pos[n1] - pos[n2] == k``.
        Covers every lag of the full coarray, including lags beyond the
        contiguous region.
    """

    P: int
    weights: dict
    pair_sets: dict
    N: int = field(repr=False)

    @property
    def lags(self) -> np.ndarray:
        return np.arange(-(self.P - 1), self.P)

    @cached_property
    def eta(self) -> np.ndarray:
        """Weights as an array aligned with :attr:`lags`."""
        return np.array([self.weights[k] for k in self.lags], dtype=float)

    @property
    def full_weights(self) -> dict:
        """Weights over the full (possibly non-contiguous) coarray."""
        return {k: len(v) for k, v in self.pair_sets.items()}

    @cached_property
    def _gather(self):
        # Flat indices into an N x N matrix, grouped by lag in lags order. A
        # negative lag lists the transposes of its positive twin's pairs in
        # the same order, so conjugate symmetry survives summation exactly.
        flat, starts = [], []
        for k in self.lags:
            pairs = self.pair_sets[k] if k >= 0 else [(b, a) for a, b in self.pair_sets[-k]]
            starts.append(len(flat))
            flat.extend(n1 * self.N + n2 for n1, n2 in pairs)
        return np.array(flat, dtype=np.intp), np.array(starts, dtype=np.intp)

    def lag_average(self, R: np.ndarray) -> np.ndarray:
        """Average ``R[..., n1, n2]`` over each contiguous lag's pair set.

        ``R`` may carry leading batch axes; the result has shape
        ``R.shape[:-2] + (2P-1,)``.
        """
        R = np.asarray(R)
        if R.shape[-2:] != (self.N, self.N):
            raise ValueError(f"expected trailing shape {(self.N, self.N)}, got {R.shape[-2:]}")
        flat, starts = self._gather
        vals = R.reshape(R.shape[:-2] + (self.N * self.N,))[..., flat]
        return np.add.reduceat(vals, starts, axis=-1) / self.eta


def difference_coarray(geom: ArrayGeometry) -> Coarray:
    """Enumerate every ordered sensor pair and collect lags and weights.

    Raises
    ------
    NonContiguousAtOrigin
        If the array has more than one sensor but no pair at lag 1.
    """
    idx = geom.sensor_indices
    pairs: dict[int, list] = {}
    for n1, p1 in enumerate(idx):
        for n2, p2 in enumerate(idx):
            pairs.setdefault(p1 - p2, []).append((n1, n2))
    if geom.N > 1 and 1 not in pairs:
        raise NonContiguousAtOrigin(f"lag 1 is missing from the coarray of {idx}")
    P = 1
    while P in pairs:
        P += 1
    pair_sets = {k: tuple(v) for k, v in sorted(pairs.items())}
    weights = {k: len(pair_sets[k]) for k in range(-(P - 1), P)}
    return Coarray(P=P, weights=weights, pair_sets=pair_sets, N=geom.N)


def steering_vector(geom: ArrayGeometry, f: float, u) -> np.ndarray:
    """Planewave response ``exp(j 2 pi f d_n u / c)`` of each sensor.

    Parameters
    ----------
    geom : ArrayGeometry
    f : float
        Temporal frequency in Hz.
    u : float or array_like
        Directional cosine(s) in ``[-1, 1]``.

    Returns
    -------
    ndarray
        Shape ``(N,)`` for scalar ``u``, otherwise ``(N, len(u))``.
    """
    if not f > 0:
        raise ValueError("frequency must be positive")
    u_arr = np.asarray(u, dtype=float)
    if np.any(np.abs(u_arr) > 1.0):
        raise ValueError("directional cosine must lie in [-1, 1]")
    phase = 2.0 * np.pi * f / geom.c * np.multiply.outer(geom.positions, u_arr)
    return np.exp(1j * phase)


def make_mra6(design_freq_hz=100.0, speed_mps=1500.0) -> ArrayGeometry:
    """Six-sensor minimum redundancy array at lattice positions 1, 2, 5, 6, 12, 14."""
    return ArrayGeometry.from_design_frequency(MRA6_INDICES, design_freq_hz, speed_mps)


def make_ula(n, design_freq_hz=100.0, speed_mps=1500.0) -> ArrayGeometry:
    return ArrayGeometry.from_design_frequency(range(n), design_freq_hz, speed_mps)


def make_nested(n1, n2, design_freq_hz=100.0, speed_mps=1500.0) -> ArrayGeometry:
    """Two-level nested array: a dense ULA of ``n1`` sensors followed by
    ``n2`` sensors spaced ``n1 + 1`` apart."""
    if n1 < 1 or n2 < 1:
        raise ValueError("both nested subarrays need at least one sensor")
    inner = list(range(1, n1 + 1))
    outer = [(n1 + 1) * m for m in range(1, n2 + 1)]
    geom = ArrayGeometry.from_design_frequency(sorted(set(inner + outer)), design_freq_hz, speed_mps)
    difference_coarray(geom)
    return geom


def make_coprime(m, n, design_freq_hz=100.0, speed_mps=1500.0) -> ArrayGeometry:
    """Extended coprime array: ``n`` sensors at multiples of ``m`` and
    ``2m`` sensors at multiples of ``n``, sharing the origin."""
    if np.gcd(m, n) != 1 or m < 1 or n < 1:
        raise ValueError("coprime array needs coprime positive m and n")
    pos = {m * i for i in range(n)} | {n * j for j in range(2 * m)}
    geom = ArrayGeometry.from_design_frequency(sorted(pos), design_freq_hz, speed_mps)
    difference_coarray(geom)
    return geom
