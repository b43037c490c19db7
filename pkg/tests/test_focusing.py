import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from broadfocus.correlation import CorrelationVector, coarray_correlation, sample_covariances
from broadfocus.errors import GridMismatch, InsufficientSupport, IrrationalRatio
from broadfocus.focusing import (APFocuser, Periodogram, ResampleRatio, SCRFocuser, UGrid,
                                 ap_correlations, ap_focus, average_periodogram, check_grid,
                                 design_interpolator, lag_domain_periodogram,
                                 narrowband_periodogram, rationalize, resample_correlation_band,
                                 resampling_matrix, scr_correlations)
from broadfocus.synthesis import BandPlan, SourceSpec, ensemble_covariance, generate_snapshots


def sinc_focus_oracle(r_band, eta, beta_m, beta_c):
    """Exact AP inverse for one band: the u-integral of two exponentials is a sinc."""
    P = (r_band.size + 1) // 2
    k = np.arange(-(P - 1), P)
    S = np.sinc(beta_c * k[:, None] - beta_m * k[None, :])
    return S @ (r_band * eta) / eta


def test_grid_constructors():
    g = UGrid.with_step(1e-3)
    assert g.G == 2001
    assert g.step == pytest.approx(1e-3)
    assert g.points[0] == -1.0 and g.points[-1] == 1.0
    assert g.trapezoid_weights().sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        UGrid(np.array([0.0, 0.0, 1.0]))


def test_check_grid():
    check_grid(UGrid.uniform(4096), 14, 120.0, 100.0)
    with pytest.raises(ValueError):
        check_grid(UGrid.uniform(20), 14, 120.0, 100.0)


def test_beamspace_equals_lag_domain(mra6, mra6_coarray):
    grid = UGrid.uniform(512)
    plan = BandPlan(80.0, 120.0, 5)
    X = generate_snapshots(mra6, [SourceSpec(0.3), SourceSpec(-0.2, 3.0)], plan, 4, 1.0, seed=9)
    Rs = sample_covariances(X)
    for m, f in enumerate(plan.frequencies):
        t = narrowband_periodogram(X, m, mra6, grid)
        r = coarray_correlation(Rs[m], mra6_coarray, f)
        t2 = lag_domain_periodogram(r, mra6_coarray, mra6.design_freq, grid)
        np.testing.assert_allclose(t2.values, t.values, rtol=1e-10)
        assert np.all(t.values >= 0)


def test_average_periodogram_grid_mismatch():
    a = Periodogram(UGrid.uniform(8), np.ones(8))
    b = Periodogram(UGrid.uniform(9), np.ones(9))
    with pytest.raises(GridMismatch):
        average_periodogram([a, b])
    c = average_periodogram([a, Periodogram(UGrid.uniform(8), 3 * np.ones(8))])
    np.testing.assert_allclose(c.values, 2.0)


def test_ap_single_band_round_trip(mra6_coarray, rng):
    half = rng.standard_normal(14) + 1j * rng.standard_normal(14)
    half[0] = abs(half[0]) + 5
    r = CorrelationVector.from_right_half(half, 100.0)
    t = lag_domain_periodogram(r, mra6_coarray, 100.0, UGrid.uniform(4096))
    back = ap_correlations(t, mra6_coarray, 100.0, 100.0)
    assert np.linalg.norm(back.values - r.values) / np.linalg.norm(r.values) < 1e-3
    np.testing.assert_array_equal(back.values[::-1], back.values.conj())
    assert back.focused


@pytest.mark.parametrize("f_m,f_c", [(80.0, 100.0), (120.0, 100.0), (95.0, 80.0)])
def test_ap_inverse_matches_sinc_oracle(mra6, mra6_coarray, f_m, f_c):
    R = ensemble_covariance(mra6, [SourceSpec(0.25), SourceSpec(-0.6, 2.0)], f_m, 1.0)
    r = coarray_correlation(R, mra6_coarray, f_m)
    t = lag_domain_periodogram(r, mra6_coarray, 100.0, UGrid.uniform(8192))
    got = ap_correlations(t, mra6_coarray, f_c, 100.0).values
    expect = sinc_focus_oracle(r.values, mra6_coarray.eta, f_m / 100.0, f_c / 100.0)
    np.testing.assert_allclose(got, expect, atol=1e-5 * np.abs(expect).max())


def test_ap_focuser_matches_explicit_chain(mra6, mra6_coarray):
    plan = BandPlan(80.0, 120.0, 9)
    X = generate_snapshots(mra6, [SourceSpec(0.1), SourceSpec(0.5)], plan, 6, 1.0, seed=4)
    grid = UGrid.uniform(1024)
    slow = ap_focus(X, mra6, mra6_coarray, grid)
    fast = APFocuser(mra6_coarray, plan.frequencies, mra6.design_freq, grid).focus(
        mra6_coarray.lag_average(sample_covariances(X)))
    np.testing.assert_allclose(fast.values, slow.values, rtol=1e-10, atol=1e-12)
    assert fast.freq == slow.freq == 100.0


@pytest.mark.parametrize("f_m,f_0,K,L", [(81.0, 80.0, 81, 80), (100.0, 80.0, 5, 4),
                                         (80.0, 80.0, 1, 1), (120.0, 80.0, 3, 2),
                                         (100.5, 80.0, 201, 160)])
def test_rationalize(f_m, f_0, K, L):
    r = rationalize(f_m, f_0)
    assert (r.K, r.L_dec) == (K, L)


def test_rationalize_errors():
    with pytest.raises(IrrationalRatio):
        rationalize(np.pi * 100, 80.0, max_denominator=50)
    with pytest.raises(ValueError):
        rationalize(70.0, 80.0)
    with pytest.raises(ValueError):
        ResampleRatio(4, 2)


@pytest.mark.parametrize("K,L", [(5, 4), (81, 80), (3, 2)])
def test_interpolator_design(K, L):
    h = design_interpolator(ResampleRatio(K, L))
    assert h.size % 2 == 1
    assert h.size >= 8 * max(K, L) + 1
    np.testing.assert_allclose(h, h[::-1])
    assert h.sum() == pytest.approx(K, rel=1e-3)


def test_scr_identity_ratio_exact(rng):
    r = CorrelationVector.from_right_half(rng.standard_normal(14) + 1j * rng.standard_normal(14), 80.0)
    out = resample_correlation_band(r, ResampleRatio(1, 1))
    np.testing.assert_array_equal(out.values, r.values)
    assert out.values is not r.values


def test_scr_rejects_downsampling(rng):
    r = CorrelationVector.from_right_half(np.ones(14), 80.0)
    with pytest.raises(InsufficientSupport):
        resample_correlation_band(r, ResampleRatio(4, 5))


@pytest.mark.parametrize("f_m", [88.0, 100.0, 120.0])
@pytest.mark.parametrize("u", [0.0, 0.15, -0.3])
def test_scr_single_band_interior_lags(mra6, mra6_coarray, f_m, u):
    # Lags near the edge of the support lose filter taps, so only the interior is checked.
    f_0 = 80.0
    R = ensemble_covariance(mra6, [SourceSpec(u)], f_m, 0.0)
    r = coarray_correlation(R, mra6_coarray, f_m)
    out = resample_correlation_band(r, rationalize(f_m, f_0))
    assert out.freq == pytest.approx(f_0)
    k = np.arange(0, 12)
    expect = np.exp(1j * np.pi * (f_0 / 100.0) * k * u)
    np.testing.assert_allclose(out.right_half[:12], expect, atol=5e-3)


def test_resampling_matrix_matches_band_path(mra6_coarray, rng):
    ratio = rationalize(97.0, 80.0)
    r = CorrelationVector.from_right_half(rng.standard_normal(14) + 1j * rng.standard_normal(14), 97.0)
    W = resampling_matrix(ratio, 14)
    assert W.shape == (14, 27)
    np.testing.assert_allclose(W @ r.values, resample_correlation_band(r, ratio).right_half,
                               rtol=1e-12, atol=1e-14)


def test_scr_focuser_matches_explicit_chain(mra6, mra6_coarray):
    plan = BandPlan(80.0, 120.0, 9)
    X = generate_snapshots(mra6, [SourceSpec(0.1), SourceSpec(0.5)], plan, 6, 1.0, seed=4)
    slow = scr_correlations(X, mra6, mra6_coarray)
    fast = SCRFocuser(14, plan.frequencies).focus(mra6_coarray.lag_average(sample_covariances(X)))
    np.testing.assert_allclose(fast.values, slow.values, rtol=1e-10, atol=1e-12)
    assert fast.freq == 80.0


@given(st.floats(-0.5, 0.5), st.floats(0.1, 5.0))
def test_focused_outputs_conjugate_symmetric(u, p):
    from broadfocus.geometry import difference_coarray, make_mra6
    geom = make_mra6()
    co = difference_coarray(geom)
    freqs = np.linspace(80.0, 120.0, 5)
    c = np.stack([co.lag_average(ensemble_covariance(geom, [SourceSpec(u, p)], f, 1.0)) for f in freqs])
    for r in (APFocuser(co, freqs, 100.0, UGrid.uniform(1024)).focus(c), SCRFocuser(14, freqs).focus(c)):
        np.testing.assert_array_equal(r.values[::-1], r.values.conj())
