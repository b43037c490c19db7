"""Per-band second-order statistics on the difference coarray."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingLags
from .geometry import Coarray


@dataclass(frozen=True, eq=False)
class CorrelationVector:
    """Correlation estimates at lags ``-(P-1)..P-1``.

    Attributes
    ----------
    values : ndarray
        Complex estimates ordered by increasing lag.
    freq : float
        Band frequency, or the focus frequency when ``focused`` is set.
    focused : bool
        True for broadband estimates combined at ``freq``.
    """

    values: np.ndarray
    freq: float
    focused: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.size % 2 == 0:
            raise MissingLags(f"expected an odd-length lag vector, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def P(self) -> int:
        return (self.values.size + 1) // 2

    @property
    def lags(self) -> np.ndarray:
        return np.arange(-(self.P - 1), self.P)

    def at(self, k):
        """Value at lag ``k`` (int or integer array)."""
        k = np.asarray(k)
        if np.any(np.abs(k) > self.P - 1):
            raise MissingLags(f"lag outside +-{self.P - 1}")
        return self.values[k + self.P - 1]

    @property
    def right_half(self) -> np.ndarray:
        """Lags ``0..P-1``."""
        return self.values[self.P - 1:]

    @classmethod
    def from_right_half(cls, z, freq, focused=False):
        """Complete lags ``0..P-1`` with their conjugate mirror; lag 0 keeps its real part."""
        z = np.array(z, dtype=complex)
        z[0] = z[0].real
        return cls(np.concatenate([z[:0:-1].conj(), z]), freq, focused)


def sample_covariance(snapshots, m) -> np.ndarray:
    """``(1/L) sum_l x_l x_l^H`` for band ``m``."""
    X = snapshots.band(m)
    return X @ X.conj().T / X.shape[1]


def sample_covariances(snapshots) -> np.ndarray:
    """Sample covariances of every band, shape ``(M, N, N)``."""
    X = np.moveaxis(snapshots.data, 2, 0)
    return X @ X.conj().transpose(0, 2, 1) / snapshots.L


def coarray_correlation(R, coarray: Coarray, freq=float("nan")) -> CorrelationVector:
    """Average the entries of ``R`` that share a coarray lag.

    ``r(k) = (1/eta(k)) sum_{(n1,n2) in zeta(k)} R[n1, n2]``. For Hermitian
    ``R`` the result satisfies ``r(-k) == conj(r(k))`` exactly.
    """
    return CorrelationVector(coarray.lag_average(R), freq)


def spatial_smoothing_acm(r: CorrelationVector) -> np.ndarray:
    """Spatially smoothed ACM ``(1/P) sum_i v_i v_i^H``.

    ``v_i`` is the length-``P`` window of the lag vector covering lags
    ``-i..P-1-i``, for ``i = 0..P-1``.
    """
    P, vals = r.P, r.values
    V = np.stack([vals[P - 1 - i:2 * P - 1 - i] for i in range(P)], axis=1)
    return V @ V.conj().T / P
