"""Coherent broadband focusing of coarray correlations.

Two focusers combine ``M`` narrowband correlation estimates into a single
correlation vector on one coarray manifold:

* periodogram averaging (AP): conventional-beamformer periodograms of every
  band are averaged over frequency and inverse transformed at a focus
  frequency;
* spatial correlation resampling (SCR): each band's correlation sequence is
  rational-rate resampled along the lag axis so that its manifold matches the
  focus frequency, then the bands are averaged.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.signal import firwin, kaiser_beta

from .correlation import CorrelationVector, coarray_correlation, sample_covariances
from .errors import GridMismatch, InsufficientSupport, IrrationalRatio
from .geometry import ArrayGeometry, Coarray, difference_coarray, steering_vector

DEFAULT_GRID_POINTS = 4096
DEFAULT_TAPS_PER_FACTOR = 8
DEFAULT_STOPBAND_DB = 60.0


@dataclass(frozen=True, eq=False)
class UGrid:
    """Direction grid over the visible region of directional cosine."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 1 or p.size < 2 or np.any(np.diff(p) <= 0):
            raise ValueError("grid points must be a strictly increasing 1-D array of length >= 2")
        object.__setattr__(self, "points", p)

    @classmethod
    def uniform(cls, G=DEFAULT_GRID_POINTS, lo=-1.0, hi=1.0):
        return cls(np.linspace(lo, hi, int(G)))

    @classmethod
    def with_step(cls, step=1e-3, lo=-1.0, hi=1.0):
        return cls.uniform(int(round((hi - lo) / step)) + 1, lo, hi)

    @property
    def G(self) -> int:
        return self.points.size

    @property
    def step(self) -> float:
        return float(self.points[1] - self.points[0])

    def same_as(self, other) -> bool:
        return self is other or (self.G == other.G and np.array_equal(self.points, other.points))

    def trapezoid_weights(self) -> np.ndarray:
        p = self.points
        w = np.empty_like(p)
        w[1:-1] = 0.5 * (p[2:] - p[:-2])
        w[0] = 0.5 * (p[1] - p[0])
        w[-1] = 0.5 * (p[-1] - p[-2])
        return w


def check_grid(grid: UGrid, P: int, f_max: float, f_focus: float):
    """Reject grids too coarse for the inverse transform at ``f_focus``."""
    need = 2 * P * f_max / f_focus
    if grid.G < need:
        raise ValueError(f"grid has {grid.G} points, inverse transform needs at least {need:.0f}")


@dataclass(frozen=True, eq=False)
class Periodogram:
    grid: UGrid
    values: np.ndarray
    freq: float = float("nan")


# -- periodogram averaging -------------------------------------------------

def narrowband_periodogram(snapshots, m, geom: ArrayGeometry, grid: UGrid) -> Periodogram:
    """Conventional-beamformer spatial periodogram of band ``m``.

    ``t_m(u) = (1/L) sum_l |w_m(u)^H x_l(f_m)|^2`` where ``w_m(u)`` is the
    unnormalized steering vector at ``f_m``.
    """
    f = snapshots.frequencies[m]
    W = steering_vector(geom, f, grid.points)
    Y = W.conj().T @ snapshots.band(m)
    t = np.mean(Y.real ** 2 + Y.imag ** 2, axis=1)
    return Periodogram(grid, t, f)


def _forward_matrix(P, ratio, grid):
    k = np.arange(-(P - 1), P)
    return np.exp(-1j * np.pi * ratio * np.multiply.outer(grid.points, k))


def lag_domain_periodogram(r: CorrelationVector, coarray: Coarray, f_design, grid: UGrid) -> Periodogram:
    """``sum_k r(k) eta(k) exp(-j pi (f/f_design) k u)`` on the grid.

    Equal to :func:`narrowband_periodogram` of the data ``r`` was estimated from.
    """
    c = r.values * coarray.eta
    t = (_forward_matrix(coarray.P, r.freq / f_design, grid) @ c).real
    return Periodogram(grid, t, r.freq)


def average_periodogram(periodograms) -> Periodogram:
    """Arithmetic mean over bands of periodograms sharing one grid."""
    periodograms = list(periodograms)
    if not periodograms:
        raise ValueError("nothing to average")
    grid = periodograms[0].grid
    for p in periodograms[1:]:
        if not grid.same_as(p.grid):
            raise GridMismatch("periodograms are defined on different grids")
    return Periodogram(grid, np.mean([p.values for p in periodograms], axis=0))


def _inverse_matrix(coarray, ratio, grid):
    k = coarray.lags
    E = np.exp(1j * np.pi * ratio * np.multiply.outer(k, grid.points))
    return 0.5 * E * grid.trapezoid_weights() / coarray.eta[:, None]


def _symmetrize(v):
    return 0.5 * (v + v[::-1].conj())


def ap_correlations(t: Periodogram, coarray: Coarray, f_focus, f_design) -> CorrelationVector:
    """Inverse transform of an averaged periodogram at ``f_focus``.

    ``r(k) = (1/eta(k)) (1/2) int_{-1}^{1} t(u) exp(j pi (f_focus/f_design) k u) du``
    by the trapezoid rule on the periodogram's grid, then conjugate
    symmetrized so ``r(-k) == conj(r(k))`` holds exactly.
    """
    r = _inverse_matrix(coarray, f_focus / f_design, t.grid) @ t.values
    return CorrelationVector(_symmetrize(r), f_focus, focused=True)


def ap_focus(snapshots, geom, coarray=None, grid=None, f_focus=None) -> CorrelationVector:
    """Full AP chain: beamform every band, average, inverse transform.

    ``f_focus`` defaults to the band center.
    """
    coarray = coarray or difference_coarray(geom)
    grid = grid or UGrid.uniform()
    plan = snapshots.band_plan
    f_focus = plan.center if f_focus is None else f_focus
    check_grid(grid, coarray.P, plan.f_max, f_focus)
    t = average_periodogram(narrowband_periodogram(snapshots, m, geom, grid)
                            for m in range(snapshots.M))
    return ap_correlations(t, coarray, f_focus, geom.design_freq)


class APFocuser:
    """Precomputed AP map from per-band correlations to focused correlations.

    Beamforming, averaging and the quadrature inverse are all linear in the
    per-band coarray correlations, so the whole chain collapses to one
    ``(2P-1) x (2P-1)`` matrix per band. Results agree with :func:`ap_focus`
    to rounding; the harness uses this form for speed.
    """

    def __init__(self, coarray: Coarray, freqs, f_design, grid=None, f_focus=None):
        freqs = np.asarray(freqs, dtype=float)
        grid = grid or UGrid.uniform()
        self.f_focus = float(np.mean([freqs.min(), freqs.max()]) if f_focus is None else f_focus)
        check_grid(grid, coarray.P, freqs.max(), self.f_focus)
        self.coarray = coarray
        self.freqs = freqs
        Q = _inverse_matrix(coarray, self.f_focus / f_design, grid)
        M = len(freqs)
        self._B = np.empty((M, 2 * coarray.P - 1, 2 * coarray.P - 1), dtype=complex)
        self._C = np.empty_like(self._B)
        for m, f in enumerate(freqs):
            F = _forward_matrix(coarray.P, f / f_design, grid) * coarray.eta
            # Re(F c) = (F c + conj(F) conj(c)) / 2
            self._B[m] = 0.5 * Q @ F / M
            self._C[m] = 0.5 * Q @ F.conj() / M

    def focus(self, band_corr) -> CorrelationVector:
        """``band_corr`` has shape ``(M, 2P-1)`` in lag order."""
        c = np.asarray(band_corr)
        r = np.einsum("mij,mj->i", self._B, c) + np.einsum("mij,mj->i", self._C, c.conj())
        return CorrelationVector(_symmetrize(r), self.f_focus, focused=True)


# -- spatial correlation resampling ---------------------------------------

@dataclass(frozen=True)
class ResampleRatio:
    """Upsample by ``K`` then decimate by ``L_dec`` (coprime)."""

    K: int
    L_dec: int

    def __post_init__(self):
        if self.K < 1 or self.L_dec < 1:
            raise ValueError("resampling factors must be positive")
        if np.gcd(self.K, self.L_dec) != 1:
            raise ValueError(f"{self.K}/{self.L_dec} is not in lowest terms")

    @property
    def value(self) -> Fraction:
        return Fraction(self.K, self.L_dec)


def rationalize(f_m, f_0, max_denominator=10000) -> ResampleRatio:
    """Reduce ``f_m / f_0`` to coprime integers ``K / L_dec``.

    Raises
    ------
    IrrationalRatio
        If no fraction with denominator ``<= max_denominator`` matches the
        ratio to within 1e-12 relative.
    """
    if not f_m >= f_0 > 0:
        raise ValueError("need f_m >= f_0 > 0")
    exact = Fraction(f_m) / Fraction(f_0)
    frac = exact if exact.denominator <= max_denominator else exact.limit_denominator(max_denominator)
    if abs(float(frac) - f_m / f_0) > 1e-12 * (f_m / f_0):
        raise IrrationalRatio(f"{f_m}/{f_0} has no rational form with denominator <= {max_denominator}")
    return ResampleRatio(frac.numerator, frac.denominator)


def design_interpolator(ratio: ResampleRatio, taps_per_factor=DEFAULT_TAPS_PER_FACTOR,
                        stopband_db=DEFAULT_STOPBAND_DB) -> np.ndarray:
    """Kaiser-windowed sinc lowpass, cutoff ``pi / max(K, L_dec)``, passband gain ``K``.

    The tap count is forced odd so the group delay is an integer number of samples.
    """
    q = max(ratio.K, ratio.L_dec)
    taps = taps_per_factor * q + 1
    taps += 1 - taps % 2
    h = firwin(taps, 1.0 / q, window=("kaiser", kaiser_beta(stopband_db)))
    return ratio.K * h


def _interpolate_decimate(z2, ratio, h, P):
    # z2: rows of two-sided lag sequences -(P-1)..P-1; returns lags 0..P-1.
    K, Ld = ratio.K, ratio.L_dec
    z2 = np.atleast_2d(z2)
    up = np.zeros((z2.shape[0], (2 * P - 2) * K + 1), dtype=z2.dtype)
    up[:, ::K] = z2
    delay = (h.size - 1) // 2
    keep = (P - 1) * K + delay + Ld * np.arange(P)
    return np.stack([np.convolve(row, h)[keep] for row in up])


def resample_correlation_band(r: CorrelationVector, ratio: ResampleRatio,
                              taps_per_factor=DEFAULT_TAPS_PER_FACTOR,
                              stopband_db=DEFAULT_STOPBAND_DB) -> CorrelationVector:
    """Move one band's correlations onto the manifold at ``r.freq * L_dec / K``.

    Zero insertion by ``K``, linear-phase lowpass, group-delay alignment,
    decimation by ``L_dec`` keeping lags ``0..P-1``, then conjugate mirroring.
    The filter sees the full two-sided sequence, zero padded past ``+-(P-1)``.
    A 1/1 ratio returns the input unchanged.
    """
    f_new = r.freq * ratio.L_dec / ratio.K
    if ratio.K == 1 and ratio.L_dec == 1:
        return CorrelationVector(r.values.copy(), r.freq, focused=True)
    if ratio.L_dec > ratio.K:
        raise InsufficientSupport("decimating below the original rate needs lags beyond the coarray")
    h = design_interpolator(ratio, taps_per_factor, stopband_db)
    z = _interpolate_decimate(r.values, ratio, h, r.P)[0]
    return CorrelationVector.from_right_half(z, f_new, focused=True)


@lru_cache(maxsize=512)
def _resampling_matrix(K, L_dec, P, taps_per_factor, stopband_db):
    ratio = ResampleRatio(K, L_dec)
    if K == 1 and L_dec == 1:
        return np.eye(2 * P - 1)[P - 1:]
    h = design_interpolator(ratio, taps_per_factor, stopband_db)
    M = _interpolate_decimate(np.eye(2 * P - 1), ratio, h, P).T
    M.setflags(write=False)
    return M


def resampling_matrix(ratio: ResampleRatio, P, taps_per_factor=DEFAULT_TAPS_PER_FACTOR,
                      stopband_db=DEFAULT_STOPBAND_DB) -> np.ndarray:
    """Real ``P x (2P-1)`` matrix mapping a two-sided lag vector to resampled lags ``0..P-1``."""
    if ratio.L_dec > ratio.K:
        raise InsufficientSupport("decimating below the original rate needs lags beyond the coarray")
    return _resampling_matrix(ratio.K, ratio.L_dec, P, taps_per_factor, float(stopband_db))


class SCRFocuser:
    """Resample-and-average with the per-band resampling matrices cached."""

    def __init__(self, P, freqs, f_0=None, taps_per_factor=DEFAULT_TAPS_PER_FACTOR,
                 stopband_db=DEFAULT_STOPBAND_DB, max_denominator=10000):
        freqs = np.asarray(freqs, dtype=float)
        self.f_0 = float(freqs.min() if f_0 is None else f_0)
        self.P = P
        mats = [resampling_matrix(rationalize(f, self.f_0, max_denominator), P,
                                  taps_per_factor, stopband_db) for f in freqs]
        self._W = np.stack(mats) / len(freqs)

    def focus(self, band_corr) -> CorrelationVector:
        z = np.einsum("mij,mj->i", self._W, np.asarray(band_corr))
        return CorrelationVector.from_right_half(z, self.f_0, focused=True)


def scr_correlations(snapshots, geom, coarray=None, f_0=None,
                     taps_per_factor=DEFAULT_TAPS_PER_FACTOR,
                     stopband_db=DEFAULT_STOPBAND_DB) -> CorrelationVector:
    """Average of every band's resampled coarray correlations, focused at ``f_0``.

    ``f_0`` defaults to the lowest band frequency.
    """
    coarray = coarray or difference_coarray(geom)
    freqs = snapshots.frequencies
    f_0 = float(freqs.min()) if f_0 is None else f_0
    Rs = sample_covariances(snapshots)
    acc = np.zeros(2 * coarray.P - 1, dtype=complex)
    for m, f in enumerate(freqs):
        r_m = coarray_correlation(Rs[m], coarray, f)
        acc += resample_correlation_band(r_m, rationalize(f, f_0), taps_per_factor, stopband_db).values
    return CorrelationVector(acc / len(freqs), f_0, focused=True)
