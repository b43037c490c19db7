"""Source enumeration and coarray MUSIC on augmented covariance matrices."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .acm import AugmentedCovariance
from .errors import (ConvergenceFailure, CountMismatch, DegenerateSubspaceWarning,
                     NonPositiveEigenvalueMagnitudes)
from .focusing import UGrid

MDL = "mdl"
MDL_GAP = "mdl_gap"


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenpairs sorted by decreasing eigenvalue magnitude."""

    eigvals: np.ndarray
    eigvecs: np.ndarray


@dataclass(frozen=True, eq=False)
class EnumerationResult:
    """Criterion curve over candidate source counts ``q`` and its argmin."""

    kind: str
    q: np.ndarray
    values: np.ndarray
    q_hat: int
    L_eff: float


@dataclass(frozen=True, eq=False)
class MusicSpectrum:
    grid: UGrid
    values: np.ndarray
    focus_freq: float
    D: int


def _as_matrix(R):
    return R.matrix if isinstance(R, AugmentedCovariance) else np.asarray(R)


def _magnitude_order(vals):
    # Primary key |lambda| descending, ties broken by signed value descending.
    return np.lexsort((-vals, -np.abs(vals)), axis=-1)


def eig_sorted(R) -> EigenSystem:
    """Hermitian eigendecomposition ordered by ``|lambda|`` descending."""
    M = _as_matrix(R)
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = _magnitude_order(vals)
    return EigenSystem(vals[order], vecs[:, order])


def _sorted_magnitudes(eigvals):
    lam = np.sort(np.abs(np.asarray(eigvals, dtype=complex)))[::-1]
    if lam.size == 0 or not np.any(lam > 0):
        raise NonPositiveEigenvalueMagnitudes("all eigenvalue magnitudes are zero")
    return lam


def _tail_means(lam):
    # For q = 0..P-1: arithmetic mean and mean log of lam[q:].
    P = lam.size
    n = P - np.arange(P)
    with np.errstate(divide="ignore"):
        logs = np.log(lam)
    a = np.cumsum(lam[::-1])[::-1] / n
    mlog = np.cumsum(logs[::-1])[::-1] / n
    return a, mlog


def mdl(eigvals, L_eff) -> EnumerationResult:
    """Rissanen's MDL on eigenvalue magnitudes.

    ``MDL(q) = -(P-q) L_eff log(g_q / a_q) + q (2P - q) log(L_eff) / 2`` for
    ``q = 0..P-1``, where ``g_q`` and ``a_q`` are the geometric and arithmetic
    means of the ``P - q`` smallest magnitudes.
    """
    if not L_eff >= 1:
        raise ValueError("effective snapshot count must be >= 1")
    lam = _sorted_magnitudes(eigvals)
    P = lam.size
    q = np.arange(P)
    a, mlog = _tail_means(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        data = -(P - q) * L_eff * (mlog - np.log(a))
    data = np.where(np.isnan(data), np.inf, data)
    vals = data + 0.5 * q * (2 * P - q) * np.log(L_eff)
    return EnumerationResult(MDL, q, vals, int(np.argmin(vals)), float(L_eff))


def mdl_gap(eigvals, L_eff) -> EnumerationResult:
    """Snapshot-normalized backward difference of MDL, for ``q = 1..P-1``.

    ``-log(a_{q-1}^{P-q+1} / (|lambda_q| a_q^{P-q})) + (P - q + 1/2) log(L_eff) / L_eff``
    """
    if not L_eff >= 1:
        raise ValueError("effective snapshot count must be >= 1")
    lam = _sorted_magnitudes(eigvals)
    P = lam.size
    if P < 2:
        raise ValueError("MDL-gap needs at least two eigenvalues")
    q = np.arange(1, P)
    a, _ = _tail_means(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        data = -((P - q + 1) * np.log(a[q - 1]) - np.log(lam[q - 1]) - (P - q) * np.log(a[q]))
    data = np.where(np.isnan(data), np.inf, data)
    vals = data + (P - q + 0.5) * np.log(L_eff) / L_eff
    return EnumerationResult(MDL_GAP, q, vals, int(q[np.argmin(vals)]), float(L_eff))


CRITERIA = {MDL: mdl, MDL_GAP: mdl_gap}


def enumerate_sources(eigvals, L_eff, kind=MDL_GAP) -> EnumerationResult:
    try:
        fn = CRITERIA[kind]
    except KeyError:
        raise ValueError(f"unknown criterion {kind!r}; expected one of {sorted(CRITERIA)}") from None
    return fn(eigvals, L_eff)


@lru_cache(maxsize=256)
def _manifold(P, ratio, lo, hi, G):
    u = np.linspace(lo, hi, G)
    A = np.exp(1j * np.pi * ratio * np.multiply.outer(np.arange(P), u))
    A.setflags(write=False)
    return A


def coarray_manifold(P, grid: UGrid, focus_freq, design_freq) -> np.ndarray:
    """``P x G`` virtual-ULA steering matrix ``exp(j pi (f/f_design) k u)``, ``k = 0..P-1``."""
    ratio = float(focus_freq / design_freq)
    p = grid.points
    cached = _manifold(P, ratio, float(p[0]), float(p[-1]), p.size)
    if np.array_equal(np.linspace(p[0], p[-1], p.size), p):
        return cached
    return np.exp(1j * np.pi * ratio * np.multiply.outer(np.arange(P), p))


def noise_projection_power(En, A):
    """``||En^H a(u)||^2`` for every column of ``A``."""
    Y = En.conj().T @ A
    return np.sum(Y.real ** 2 + Y.imag ** 2, axis=0)


def _clamp(den):
    tiny = np.finfo(float).tiny
    bad = den < tiny
    if np.any(bad):
        warnings.warn(f"MUSIC denominator underflowed at {int(bad.sum())} grid points",
                      DegenerateSubspaceWarning, stacklevel=3)
        den = np.where(bad, tiny, den)
    return den


def music_spectrum(R, D, grid: UGrid, focus_freq, design_freq, eig=None) -> MusicSpectrum:
    """Coarray MUSIC pseudo-spectrum ``1 / (a^H V_n V_n^H a)``.

    ``V_n`` holds the eigenvectors of the ``P - D`` smallest-magnitude
    eigenvalues. ``design_freq`` may also be given as an
    :class:`~broadfocus.geometry.ArrayGeometry`.
    """
    M = _as_matrix(R)
    P = M.shape[0]
    if not 1 <= D < P:
        raise ValueError(f"assumed source count must satisfy 1 <= D < {P}")
    design_freq = getattr(design_freq, "design_freq", design_freq)
    eig = eig or eig_sorted(M)
    A = coarray_manifold(P, grid, focus_freq, design_freq)
    den = _clamp(noise_projection_power(eig.eigvecs[:, D:], A))
    return MusicSpectrum(grid, 1.0 / den, float(focus_freq), int(D))


def local_maxima(values) -> np.ndarray:
    """Indices of strict interior local maxima."""
    v = np.asarray(values)
    return np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1


def pick_peaks(spectrum: MusicSpectrum, D) -> np.ndarray:
    """Locations of the ``D`` highest strict local maxima, highest first.

    Each location is refined by a parabola through the log-spectrum at the
    peak and its two neighbours. Equal heights resolve to the lower ``u``.
    Fewer than ``D`` locations come back when fewer maxima exist.
    """
    if D < 1:
        raise ValueError("need D >= 1")
    v = spectrum.values
    u = spectrum.grid.points
    idx = local_maxima(v)
    if idx.size == 0:
        return np.empty(0)
    idx = idx[np.argsort(-v[idx], kind="stable")][:D]
    y0, y1, y2 = (np.log(v[idx - 1]), np.log(v[idx]), np.log(v[idx + 1]))
    den = y0 - 2 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(den < 0, 0.5 * (y0 - y2) / den, 0.0)
    step = 0.5 * (u[idx + 1] - u[idx - 1])
    return u[idx] + np.clip(delta, -0.5, 0.5) * step


def match_errors(estimates, truths) -> np.ndarray:
    """Per-truth errors after optimal estimate-to-truth assignment.

    Truths left without an estimate get the largest error possible inside
    ``[-1, 1]``.
    """
    est = np.asarray(estimates, dtype=float).ravel()
    tru = np.asarray(truths, dtype=float).ravel()
    if est.size > tru.size:
        raise CountMismatch(f"{est.size} estimates for {tru.size} sources")
    err = 1.0 + np.abs(tru)
    if est.size:
        cost = (est[:, None] - tru[None, :]) ** 2
        rows, cols = linear_sum_assignment(cost)
        err[cols] = np.abs(est[rows] - tru[cols])
    return err


def rmse(estimates_per_trial, truths) -> float:
    """``sqrt(sum_d sum_j (u_hat_d(j) - u_d)^2 / (D J))`` over matched estimates."""
    trials = list(estimates_per_trial)
    if not trials:
        raise CountMismatch("no trials")
    tru = np.asarray(truths, dtype=float).ravel()
    sq = [match_errors(e, tru) ** 2 for e in trials]
    return float(np.sqrt(np.sum(sq) / (tru.size * len(trials))))


def resolved(spectrum: MusicSpectrum, u1, u2) -> bool:
    """Midpoint test: the spectrum dips below the mean of its values at the two sources."""
    if not u1 < u2:
        raise ValueError("need u1 < u2")
    p = spectrum.grid.points
    s = spectrum.values
    p1, p2, pm = np.interp([u1, u2, 0.5 * (u1 + u2)], p, s)
    return bool(pm < 0.5 * (p1 + p2))
