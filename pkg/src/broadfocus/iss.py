"""Incoherent signal-subspace (ISS) baseline.

Every band is processed on its own spatially smoothed ACM; information
criteria and MUSIC pseudo-spectra are then averaged across bands. Criteria use
the square roots of the SS-ACM eigenvalues, which behave like second moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationVector, sample_covariances, spatial_smoothing_acm
from .errors import ConvergenceFailure
from .estimation import (MDL_GAP, EnumerationResult, MusicSpectrum, _clamp, _magnitude_order,
                         coarray_manifold, enumerate_sources, noise_projection_power)
from .focusing import UGrid
from .geometry import difference_coarray


@dataclass(frozen=True, eq=False)
class IssAggregate:
    """Per-band curves and spectra with their band averages."""

    band_curves: np.ndarray
    curve: EnumerationResult
    band_spectra: np.ndarray | None = None
    spectrum: MusicSpectrum | None = None


def _band_eigs(acms):
    try:
        vals, vecs = np.linalg.eigh(acms)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = _magnitude_order(vals)
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=-1)
    return vals, vecs


def _average_curves(vals, L, kind):
    curves = [enumerate_sources(np.sqrt(np.abs(v)), L, kind) for v in vals]
    band_curves = np.stack([c.values for c in curves])
    mean = band_curves.mean(axis=0)
    q = curves[0].q
    return band_curves, EnumerationResult(kind, q, mean, int(q[np.argmin(mean)]), float(L))


def _average_spectra(vecs, freqs, D, grid, design_freq):
    P = vecs.shape[-1]
    band = np.stack([
        1.0 / _clamp(noise_projection_power(vecs[m][:, D:], coarray_manifold(P, grid, f, design_freq)))
        for m, f in enumerate(freqs)])
    return band


def iss_from_correlations(band_corr, freqs, L, design_freq, D=None, grid=None,
                          kinds=(MDL_GAP,)):
    """ISS on precomputed per-band coarray correlations, shape ``(M, 2P-1)``.

    Returns one :class:`IssAggregate` per criterion in ``kinds``; only the
    first carries the MUSIC spectra.
    """
    freqs = np.asarray(freqs, dtype=float)
    acms = np.stack([spatial_smoothing_acm(CorrelationVector(c, f))
                     for c, f in zip(band_corr, freqs)])
    vals, vecs = _band_eigs(acms)
    out = []
    for kind in kinds:
        band_curves, curve = _average_curves(vals, L, kind)
        out.append(IssAggregate(band_curves, curve))
    if D is not None:
        P = acms.shape[-1]
        if not 1 <= D < P:
            raise ValueError(f"assumed source count must satisfy 1 <= D < {P}")
        grid = grid or UGrid.with_step(1e-3)
        band = _average_spectra(vecs, freqs, D, grid, design_freq)
        centre = 0.5 * (freqs.min() + freqs.max())
        spec = MusicSpectrum(grid, band.mean(axis=0), float(centre), int(D))
        out[0] = IssAggregate(out[0].band_curves, out[0].curve, band, spec)
    return out


def iss_run(snapshots, geom, D=None, grid=None, kind=MDL_GAP, coarray=None) -> IssAggregate:
    """Full ISS pass: averaged criterion curve and, when ``D`` is given, averaged MUSIC."""
    coarray = coarray or difference_coarray(geom)
    band_corr = coarray.lag_average(sample_covariances(snapshots))
    return iss_from_correlations(band_corr, snapshots.frequencies, snapshots.L,
                                 geom.design_freq, D, grid, (kind,))[0]


def iss_enumerate(snapshots, geom, kind=MDL_GAP, coarray=None) -> EnumerationResult:
    """Band-averaged criterion on square-rooted SS-ACM eigenvalues, ``L_eff = L``."""
    return iss_run(snapshots, geom, None, None, kind, coarray).curve


def iss_music(snapshots, geom, D, grid=None, coarray=None) -> MusicSpectrum:
    """Band-averaged MUSIC, each band on its own frequency's coarray manifold."""
    return iss_run(snapshots, geom, D, grid, MDL_GAP, coarray).spectrum
