"""Monte Carlo execution and metric aggregation.

Every trial draws its data from ``SeedSequence(seed, spawn_key=(trial, stream))``
with stream 0 for the broadband cube and stream 1 for the narrowband reference.
The same trial index therefore sees the same noise at every sweep point (common
random numbers), and results never depend on how trials are spread over workers.
Aggregation folds trials in index order.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
from dataclasses import dataclass, field

import numpy as np

from ..acm import lra_acm
from ..correlation import CorrelationVector, sample_covariances
from ..estimation import (MDL, MDL_GAP, MusicSpectrum, eig_sorted, enumerate_sources, local_maxima, match_errors,
                          music_spectrum, pick_peaks, resolved)
from ..focusing import APFocuser, SCRFocuser, UGrid
from ..geometry import difference_coarray
from ..iss import iss_from_correlations
from ..synthesis import BandPlan, SourceSpec, generate_snapshots
from .scenario import Scenario

log = logging.getLogger(__name__)

BROADBAND_STREAM = 0
NARROWBAND_STREAM = 1


@dataclass(eq=False)
class TrialResult:
    """Outcome of one method on one trial at one sweep point."""

    method: str
    point: int
    trial: int
    seed: str
    q_hat: int
    q_hat_mdl: int
    q_hat_mdl_gap: int
    mdl_curve: np.ndarray
    mdl_gap_curve: np.ndarray
    doas: np.ndarray = field(default_factory=lambda: np.empty(0))
    errors: np.ndarray | None = None
    resolved: bool | None = None
    split: bool | None = None
    merged: bool | None = None
    spectrum: np.ndarray | None = None


def split_peaks(values, grid: UGrid, truths, tol) -> bool:
    """True when distinct local maxima sit within ``tol`` of every truth."""
    idx = local_maxima(values)
    u = grid.points[idx]
    truths = np.sort(np.asarray(truths, dtype=float))
    if u.size < truths.size:
        return False
    near = np.abs(u[:, None] - truths[None, :]) <= tol
    # Greedy left-to-right matching is optimal for sorted intervals on a line.
    used = np.zeros(u.size, dtype=bool)
    for d in range(truths.size):
        free = np.flatnonzero(near[:, d] & ~used)
        if free.size == 0:
            return False
        used[free[0]] = True
    return True


def merged_peak(values, grid: UGrid, u1, u2) -> bool:
    """True when the tallest local maximum lies strictly between the sources and the midpoint test fails."""
    idx = local_maxima(values)
    if idx.size == 0:
        return False
    top = grid.points[idx[np.argmax(values[idx])]]
    if not u1 < top < u2:
        return False
    p = grid.points
    p1, p2, pm = np.interp([u1, u2, 0.5 * (u1 + u2)], p, values)
    return not pm < 0.5 * (p1 + p2)


class TrialContext:
    """Per-process state: focusing operators, grids and the coarray."""

    def __init__(self, scenario: Scenario):
        s = scenario
        self.scenario = s
        self.geom = s.geometry
        self.coarray = difference_coarray(s.geometry)
        self.freqs = s.band.frequencies
        fo = s.focusing
        methods = set(s.methods)
        self.ap = None
        self.scr = None
        if "ap" in methods:
            self.ap = APFocuser(self.coarray, self.freqs, self.geom.design_freq,
                                UGrid.uniform(fo.grid_points), s.focus_frequency(fo.focus))
        if "scr" in methods:
            self.scr = SCRFocuser(self.coarray.P, self.freqs, s.focus_frequency(fo.scr_focus),
                                  fo.fir_taps_per_factor, fo.fir_stopband_db)
        self.grid = UGrid.with_step(s.estimation.music_grid_step)

    def _seed(self, trial, stream):
        return np.random.SeedSequence(self.scenario.seed, spawn_key=(trial, stream))

    def run_trial(self, point, trial) -> list[TrialResult]:
        s = self.scenario
        value = s.sweep_values[point]
        src, sps = s.point(value)
        specs = [SourceSpec.from_snr_db(u, snr, s.noise_power) for u, snr in src]
        truths = np.array([u for u, _ in src])
        L = s.snapshots_for(sps)
        M = s.band.M
        l_eff = s.estimation.l_eff or float(M * L)
        seed_tag = f"{s.seed}:{trial}"

        coherent = []
        if {"ap", "scr", "iss"} & set(s.methods):
            X = generate_snapshots(self.geom, specs, s.band, L, s.noise_power,
                                   self._seed(trial, BROADBAND_STREAM))
            band_corr = self.coarray.lag_average(sample_covariances(X))
        for method in s.methods:
            if method == "ap":
                r = self.ap.focus(band_corr)
                coherent.append((method, r, l_eff))
            elif method == "scr":
                r = self.scr.focus(band_corr)
                coherent.append((method, r, l_eff))
            elif method == "nb":
                f0 = self.geom.design_freq
                Xn = generate_snapshots(self.geom, specs, BandPlan.single(f0), M * L, s.noise_power,
                                        self._seed(trial, NARROWBAND_STREAM))
                c = self.coarray.lag_average(sample_covariances(Xn))[0]
                coherent.append((method, CorrelationVector(c, f0), l_eff))

        by_method = {}
        for method, r, le in coherent:
            R = lra_acm(r, method)
            eig = eig_sorted(R)
            cm = enumerate_sources(eig.eigvals, le, MDL)
            cg = enumerate_sources(eig.eigvals, le, MDL_GAP)
            res = self._result(method, point, trial, seed_tag, cm, cg)
            D = self._assumed_count(res)
            if s.doa and D >= 1:
                spec = music_spectrum(R, D, self.grid, r.freq, self.geom.design_freq, eig=eig)
                self._score(res, spec.values, pick_peaks(spec, D), truths)
            elif s.doa:
                self._score(res, None, np.empty(0), truths)
            by_method[method] = res

        if "iss" in s.methods:
            D = s.D if s.estimation.oracle_d else None
            gap, mdl_ = iss_from_correlations(band_corr, self.freqs, L, self.geom.design_freq,
                                              D if s.doa else None, self.grid, (MDL_GAP, MDL))
            res = self._result("iss", point, trial, seed_tag, mdl_.curve, gap.curve)
            D = self._assumed_count(res)
            if s.doa and D >= 1:
                if not s.estimation.oracle_d:
                    gap = iss_from_correlations(band_corr, self.freqs, L, self.geom.design_freq,
                                                D, self.grid, (MDL_GAP,))[0]
                spec = gap.spectrum
                self._score(res, spec.values, pick_peaks(spec, D), truths)
            elif s.doa:
                self._score(res, None, np.empty(0), truths)
            by_method["iss"] = res

        return [by_method[m] for m in s.methods]

    def _result(self, method, point, trial, seed_tag, cm, cg):
        q = cg.q_hat if self.scenario.criterion == MDL_GAP else cm.q_hat
        return TrialResult(method, point, trial, seed_tag, q, cm.q_hat, cg.q_hat,
                           cm.values, cg.values)

    def _assumed_count(self, res):
        s = self.scenario
        D = s.D if s.estimation.oracle_d else res.q_hat
        return min(D, self.coarray.P - 1)

    def _score(self, res, values, doas, truths):
        s = self.scenario
        res.doas = np.asarray(doas, dtype=float)
        res.errors = match_errors(res.doas[:truths.size], truths)
        if values is None:
            if truths.size == 2:
                res.resolved = res.split = res.merged = False
            return
        if s.spectra:
            res.spectrum = values
        if truths.size == 2:
            u1, u2 = np.sort(truths)
            spec = MusicSpectrum(self.grid, values, float("nan"), len(doas))
            res.resolved = resolved(spec, u1, u2)
            res.split = split_peaks(values, self.grid, truths, s.estimation.peak_tolerance)
            res.merged = merged_peak(values, self.grid, u1, u2)


_CTX: TrialContext | None = None


def _init_worker(scenario):
    global _CTX
    _CTX = TrialContext(scenario)


def _work(task):
    return _CTX.run_trial(*task)


@dataclass(eq=False)
class ScenarioResult:
    """All trial results, keyed by ``(point index, method)`` in trial order."""

    scenario: Scenario
    trials: dict

    @property
    def grid_points(self) -> np.ndarray:
        return UGrid.with_step(self.scenario.estimation.music_grid_step).points

    def results(self, point, method) -> list[TrialResult]:
        return self.trials[(point, method)]

    def _rate(self, attr, point, method):
        vals = [getattr(t, attr) for t in self.results(point, method)]
        if any(v is None for v in vals):
            return None
        p = float(np.mean(vals))
        return p, float(np.sqrt(p * (1 - p) / len(vals))), len(vals)

    def detection(self, point, method):
        """``(probability of q_hat == D, binomial stderr, trials)``."""
        D = self.scenario.D
        hits = [t.q_hat == D for t in self.results(point, method)]
        p = float(np.mean(hits))
        return p, float(np.sqrt(p * (1 - p) / len(hits))), len(hits)

    def resolution(self, point, method):
        return self._rate("resolved", point, method)

    def split(self, point, method):
        return self._rate("split", point, method)

    def merged(self, point, method):
        return self._rate("merged", point, method)

    def rmse(self, point, method):
        """``(RMSE, delta-method stderr, trials)`` or None without DOA estimates."""
        res = self.results(point, method)
        if any(t.errors is None for t in res):
            return None
        per_trial = np.array([np.mean(t.errors ** 2) for t in res])
        mse = float(per_trial.mean())
        value = float(np.sqrt(mse))
        se_mse = float(per_trial.std(ddof=1) / np.sqrt(len(res))) if len(res) > 1 else 0.0
        se = se_mse / (2 * value) if value > 0 else 0.0
        return value, se, len(res)

    def mean_curve(self, point, method, kind):
        attr = "mdl_curve" if kind == MDL else "mdl_gap_curve"
        curves = np.stack([getattr(t, attr) for t in self.results(point, method)])
        if len(curves) > 1:
            se = curves.std(axis=0, ddof=1) / np.sqrt(len(curves))
        else:
            se = np.zeros(curves.shape[1])
        return curves.mean(axis=0), se

    def mean_spectrum(self, point, method):
        specs = [t.spectrum for t in self.results(point, method)]
        if not specs or any(s is None for s in specs):
            return None
        return np.mean(specs, axis=0)


def run_scenario(scenario: Scenario, jobs=1, progress=None) -> ScenarioResult:
    """Run every trial of every sweep point and collect results in trial order."""
    s = scenario
    tasks = [(p, j) for p in range(len(s.sweep_values)) for j in range(s.trials)]
    trials = {(p, m): [] for p in range(len(s.sweep_values)) for m in s.methods}

    def fold(results):
        for n, batch in enumerate(results, 1):
            for r in batch:
                trials[(r.point, r.method)].append(r)
            if progress is not None:
                progress(n, len(tasks))

    if jobs <= 1:
        ctx = TrialContext(s)
        fold(ctx.run_trial(*t) for t in tasks)
    else:
        chunk = max(1, len(tasks) // (jobs * 16))
        with mp.get_context("fork").Pool(jobs, _init_worker, (s,)) as pool:
            fold(pool.imap(_work, tasks, chunksize=chunk))
    log.info("%s: %d sweep points x %d trials done", s.name, len(s.sweep_values), s.trials)
    return ScenarioResult(s, trials)
