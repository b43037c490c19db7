import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from broadfocus.acm import lra_acm
from broadfocus.correlation import coarray_correlation
from broadfocus.errors import (ConvergenceFailure, CountMismatch, DegenerateSubspaceWarning,
                               NonPositiveEigenvalueMagnitudes)
from broadfocus.estimation import (MDL, MDL_GAP, EigenSystem, MusicSpectrum, eig_sorted,
                                   enumerate_sources, local_maxima, match_errors, mdl, mdl_gap,
                                   music_spectrum, pick_peaks, resolved, rmse)
from broadfocus.focusing import UGrid
from broadfocus.synthesis import SourceSpec, ensemble_covariance


def mdl_loop(lam, L):
    """Textbook MDL from explicit geometric and arithmetic means."""
    lam = np.sort(np.abs(lam))[::-1]
    P = lam.size
    out = []
    for q in range(P):
        tail = lam[q:]
        g = np.exp(np.mean(np.log(tail)))
        a = np.mean(tail)
        out.append(-(P - q) * L * np.log(g / a) + 0.5 * q * (2 * P - q) * np.log(L))
    return np.array(out)


def test_mdl_matches_loop(rng):
    lam = rng.uniform(0.1, 10, 14)
    np.testing.assert_allclose(mdl(lam, 738).values, mdl_loop(lam, 738), rtol=1e-12)


def test_mdl_hand_example():
    # eigenvalues 4,1,1,1 and L = 100
    v = mdl([4.0, 1.0, 1.0, 1.0], 100).values
    assert v[0] == pytest.approx(-4 * 100 * np.log(np.sqrt(2) / 1.75))
    assert v[1] == pytest.approx(0.5 * 1 * 7 * np.log(100))
    assert mdl([4.0, 1.0, 1.0, 1.0], 100).q_hat == 1


def test_mdl_gap_hand_example():
    # a_0 = 1.75, a_1 = 1, |lambda_1| = 4, P = 4, L = 100
    res = mdl_gap([4.0, 1.0, 1.0, 1.0], 100)
    assert res.q.tolist() == [1, 2, 3]
    expect_q1 = -np.log(1.75 ** 4 / (4 * 1.0 ** 3)) + 3.5 * np.log(100) / 100
    assert res.values[0] == pytest.approx(expect_q1)
    assert res.q_hat == 1


@given(arrays(float, st.integers(2, 16), elements=st.floats(1e-3, 1e3)), st.floats(1.0, 1e5))
def test_mdl_gap_is_scaled_mdl_difference(lam, L):
    full = mdl(lam, L).values
    gap = mdl_gap(lam, L).values
    np.testing.assert_allclose(gap, np.diff(full) / L, rtol=1e-8, atol=1e-9 * max(1.0, np.abs(full).max() / L))


def test_magnitude_sorting_with_negative_eigenvalues():
    lam = [1.0, -5.0, 2.0, 0.5]
    assert mdl(lam, 50).values == pytest.approx(mdl([5.0, 2.0, 1.0, 0.5], 50).values)
    R = np.diag([1.0, -5.0, 2.0, 0.5]).astype(complex)
    e = eig_sorted(R)
    np.testing.assert_allclose(e.eigvals, [-5.0, 2.0, 1.0, 0.5])
    for i, v in enumerate(e.eigvals):
        np.testing.assert_allclose(R @ e.eigvecs[:, i], v * e.eigvecs[:, i], atol=1e-12)


def test_eig_ties_prefer_positive():
    e = eig_sorted(np.diag([-2.0, 2.0, 1.0]))
    np.testing.assert_allclose(e.eigvals, [2.0, -2.0, 1.0])


def test_criteria_errors():
    with pytest.raises(NonPositiveEigenvalueMagnitudes):
        mdl(np.zeros(4), 10)
    with pytest.raises(ValueError):
        mdl([1.0, 2.0], 0.5)
    with pytest.raises(ValueError):
        enumerate_sources([1.0, 2.0], 10, "aic")


def test_zero_tail_is_not_chosen():
    res = mdl_gap([3.0, 2.0, 0.0, 0.0], 100)
    assert np.all(np.isfinite(res.values[:1]))
    assert res.q_hat in (1, 2)


@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_mdl_consistent_on_clean_spectra(D, seed):
    rng = np.random.default_rng(seed)
    P = 14
    lam = np.r_[10 + 90 * rng.random(D), np.ones(P - D)]
    lam[D:] *= 1 + 1e-4 * rng.standard_normal(P - D)
    assert enumerate_sources(lam, 5000, MDL).q_hat == D


@given(st.integers(1, 12), st.floats(5.0, 100.0), st.integers(0, 2 ** 32 - 1))
def test_mdl_gap_finds_the_largest_drop(D, level, seed):
    # MDL-gap picks the steepest MDL decrease, which sits at D for equal-power sources.
    rng = np.random.default_rng(seed)
    lam = np.r_[np.full(D, level), np.ones(14 - D)] * (1 + 1e-4 * rng.standard_normal(14))
    assert enumerate_sources(lam, 5000, MDL_GAP).q_hat == D


def test_convergence_failure(monkeypatch):
    def boom(_):
        raise np.linalg.LinAlgError("no convergence")
    monkeypatch.setattr(np.linalg, "eigh", boom)
    with pytest.raises(ConvergenceFailure):
        eig_sorted(np.eye(3))


def test_music_peaks_at_true_doas(mra6, mra6_coarray):
    us = [-0.31, 0.2]
    R = ensemble_covariance(mra6, [SourceSpec(u) for u in us], 100.0, 1.0)
    A = lra_acm(coarray_correlation(R, mra6_coarray, 100.0))
    grid = UGrid.with_step(1e-3)
    spec = music_spectrum(A, 2, grid, 100.0, mra6)
    peaks = np.sort(pick_peaks(spec, 2))
    np.testing.assert_allclose(peaks, us, atol=1e-4)
    assert spec.values.min() > 0


def test_music_focus_frequency_scales_manifold(mra6, mra6_coarray):
    u = 0.45
    R = ensemble_covariance(mra6, [SourceSpec(u)], 80.0, 1.0)
    A = lra_acm(coarray_correlation(R, mra6_coarray, 80.0))
    spec = music_spectrum(A, 1, UGrid.with_step(1e-3), 80.0, 100.0)
    assert pick_peaks(spec, 1)[0] == pytest.approx(u, abs=1e-4)


def test_music_rejects_bad_D(mra6):
    with pytest.raises(ValueError):
        music_spectrum(np.eye(14), 14, UGrid.with_step(0.01), 100.0, 100.0)


def test_music_warns_on_degenerate_subspace():
    eig = EigenSystem(np.ones(4), np.zeros((4, 4), complex))
    with pytest.warns(DegenerateSubspaceWarning):
        s = music_spectrum(np.eye(4), 1, UGrid.uniform(11), 100.0, 100.0, eig=eig)
    assert np.all(np.isfinite(s.values))


@given(st.floats(-0.9, 0.9), st.floats(0.01, 0.2))
def test_parabolic_refinement_exact_for_log_parabola(u0, w):
    grid = UGrid.with_step(1e-2)
    vals = np.exp(-((grid.points - u0) ** 2) / w)
    spec = MusicSpectrum(grid, vals, 100.0, 1)
    peaks = pick_peaks(spec, 1)
    if peaks.size:
        assert peaks[0] == pytest.approx(u0, abs=1e-9)


def test_pick_peaks_ordering_and_ties():
    grid = UGrid.uniform(9)
    vals = np.array([0, 2, 0, 3, 0, 2, 0, 1, 0], float) + 1
    spec = MusicSpectrum(grid, vals, 1.0, 3)
    got = pick_peaks(spec, 3)
    assert got[0] == pytest.approx(grid.points[3])
    # equal-height maxima at indices 1 and 5: the lower u wins
    assert got[1] == pytest.approx(grid.points[1])
    assert got[2] == pytest.approx(grid.points[5])
    assert pick_peaks(MusicSpectrum(grid, np.ones(9), 1.0, 1), 2).size == 0
    assert local_maxima(vals).tolist() == [1, 3, 5, 7]


def test_match_errors_and_rmse():
    np.testing.assert_allclose(match_errors([0.31, -0.02], [0.0, 0.3]), [0.02, 0.01])
    np.testing.assert_allclose(match_errors([0.1], [0.0, 0.5]), [0.1, 1.5])
    np.testing.assert_allclose(match_errors([], [-0.5]), [1.5])
    with pytest.raises(CountMismatch):
        match_errors([0.1, 0.2], [0.0])
    # one estimate off by 0.05, one exact: sqrt(0.05^2 / 2)
    assert rmse([[0.05, 0.3]], [0.0, 0.3]) == pytest.approx(0.0353553, rel=1e-5)
    assert rmse([[0.0, 0.3], [0.1, 0.3]], [0.0, 0.3]) == pytest.approx(np.sqrt(0.01 / 4))


def test_resolved_midpoint():
    grid = UGrid.uniform(101)
    u = grid.points
    two = np.exp(-((u - 0.0) ** 2) / 1e-3) + np.exp(-((u - 0.2) ** 2) / 1e-3) + 1e-3
    one = np.exp(-((u - 0.1) ** 2) / 1e-2)
    assert resolved(MusicSpectrum(grid, two, 1.0, 2), 0.0, 0.2)
    assert not resolved(MusicSpectrum(grid, one, 1.0, 2), 0.0, 0.2)
    with pytest.raises(ValueError):
        resolved(MusicSpectrum(grid, one, 1.0, 2), 0.2, 0.0)
