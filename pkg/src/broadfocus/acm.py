"""Augmented covariance matrices built from coarray correlations."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .correlation import CorrelationVector
from .errors import MissingLags

LRA = "LRA"
SS = "SS"


@dataclass(frozen=True, eq=False)
class AugmentedCovariance:
    """A ``P x P`` Hermitian ACM.

    ``kind`` is ``"LRA"`` for the Toeplitz lag-redundancy-averaged matrix or
    ``"SS"`` for the spatially smoothed one. ``provenance`` records which
    estimator produced the correlations (``"ap"``, ``"scr"``, ``"nb"``, ...).
    """

    matrix: np.ndarray
    kind: str
    focus_freq: float
    provenance: str = ""

    @property
    def P(self) -> int:
        return self.matrix.shape[0]

    def to_csv(self, path):
        """Row-major dump, each entry written as a ``re,im`` pair."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.matrix:
                w.writerow([f"{v:.17g}" for z in row for v in (z.real, z.imag)])


def lra_acm(r: CorrelationVector, provenance="") -> AugmentedCovariance:
    """Hermitian Toeplitz ACM with entry ``(i, j) = r(i - j)``.

    May be indefinite for finite-sample estimates.
    """
    if not isinstance(r, CorrelationVector):
        raise MissingLags("expected a CorrelationVector spanning lags -(P-1)..P-1")
    P = r.P
    col = r.values[P - 1:]
    row = r.values[P - 1::-1]
    return AugmentedCovariance(toeplitz(col, row), LRA, r.freq, provenance)


def ss_acm_from_lra(R: AugmentedCovariance) -> AugmentedCovariance:
    """Spatially smoothed ACM ``R_LRA^2 / P``; same eigenvectors, eigenvalues ``lambda^2 / P``."""
    if R.kind != LRA:
        raise ValueError("expected an LRA matrix")
    M = R.matrix @ R.matrix / R.P
    M = 0.5 * (M + M.conj().T)
    return AugmentedCovariance(M, SS, R.focus_freq, R.provenance)
