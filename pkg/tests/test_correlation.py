import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from broadfocus.acm import lra_acm
from broadfocus.correlation import (CorrelationVector, coarray_correlation, sample_covariance,
                                    sample_covariances, spatial_smoothing_acm)
from broadfocus.errors import MissingLags
from broadfocus.geometry import difference_coarray, make_ula
from broadfocus.synthesis import BandPlan, SourceSpec, ensemble_covariance, generate_snapshots

from conftest import random_hermitian


def brute_coarray_correlation(R, indices, P):
    """Pair loop oracle for the lag-averaged correlations."""
    out = np.zeros(2 * P - 1, dtype=complex)
    for k in range(-(P - 1), P):
        vals = [R[i, j] for i, a in enumerate(indices) for j, b in enumerate(indices) if a - b == k]
        out[k + P - 1] = np.mean(vals)
    return out


def test_identity_gives_delta(mra6_coarray):
    r = coarray_correlation(np.eye(6), mra6_coarray)
    expect = np.zeros(27)
    expect[13] = 1.0
    np.testing.assert_array_equal(r.values, expect)


def test_broadside_source_gives_ones(mra6, mra6_coarray):
    R = ensemble_covariance(mra6, [SourceSpec(0.0)], 100.0, 0.0)
    np.testing.assert_allclose(coarray_correlation(R, mra6_coarray).values, np.ones(27))


@pytest.mark.parametrize("f,u,p,s2", [(80.0, 0.3, 1.0, 0.5), (117.0, -0.71, 2.5, 1.0)])
def test_single_source_closed_form(mra6, mra6_coarray, f, u, p, s2):
    R = ensemble_covariance(mra6, [SourceSpec(u, p)], f, s2)
    r = coarray_correlation(R, mra6_coarray, f)
    k = np.arange(-13, 14)
    expect = p * np.exp(2j * np.pi * f * mra6.d * k * u / mra6.c) + s2 * (k == 0)
    np.testing.assert_allclose(r.values, expect, atol=1e-12)
    assert r.freq == f


def test_matches_pair_loop(mra6, mra6_coarray, rng):
    R = random_hermitian(rng, 6)
    np.testing.assert_allclose(coarray_correlation(R, mra6_coarray).values,
                               brute_coarray_correlation(R, mra6.sensor_indices, 14), rtol=1e-13)


def test_batched_lag_average(mra6_coarray, rng):
    Rs = np.stack([random_hermitian(rng, 6) for _ in range(4)])
    batch = mra6_coarray.lag_average(Rs)
    for R, row in zip(Rs, batch):
        np.testing.assert_allclose(row, mra6_coarray.lag_average(R), rtol=1e-14)


@given(st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_ula_reduces_to_diagonal_means(n, seed):
    rng = np.random.default_rng(seed)
    R = random_hermitian(rng, n)
    r = coarray_correlation(R, difference_coarray(make_ula(n)))
    for k in range(-(n - 1), n):
        assert r.at(k) == pytest.approx(np.mean(np.diagonal(R, -k)), rel=1e-12, abs=1e-14)


@given(st.integers(0, 2 ** 32 - 1))
def test_hermitian_input_exact_symmetry(seed):
    from broadfocus.geometry import make_mra6
    co = difference_coarray(make_mra6())
    R = random_hermitian(np.random.default_rng(seed), 6)
    v = coarray_correlation(R, co).values
    np.testing.assert_array_equal(v[::-1], v.conj())
    assert v[13].imag == 0.0


def test_sample_covariance_properties(mra6):
    X = generate_snapshots(mra6, [SourceSpec(0.2)], BandPlan(80.0, 90.0, 3), 1, 1.0, seed=0)
    R = sample_covariance(X, 1)
    x = X.band(1)[:, 0]
    np.testing.assert_allclose(R, np.outer(x, x.conj()))
    assert np.linalg.matrix_rank(R) == 1
    X = generate_snapshots(mra6, [SourceSpec(0.2)], BandPlan(80.0, 90.0, 3), 9, 1.0, seed=0)
    R = sample_covariance(X, 2)
    assert np.trace(R).real == pytest.approx(np.sum(np.abs(X.band(2)) ** 2) / 9)
    np.testing.assert_allclose(sample_covariances(X)[2], R, rtol=1e-13)


def test_correlation_vector_helpers():
    z = np.array([2.0, 1 + 1j, 0.5j])
    r = CorrelationVector.from_right_half(z, 100.0)
    np.testing.assert_array_equal(r.values, [-0.5j, 1 - 1j, 2.0, 1 + 1j, 0.5j])
    assert r.P == 3
    assert r.at(-1) == 1 - 1j
    np.testing.assert_array_equal(r.right_half, z)
    with pytest.raises(MissingLags):
        r.at(3)
    with pytest.raises(MissingLags):
        CorrelationVector(np.ones(4), 1.0)


def test_ss_of_delta_is_scaled_identity():
    P = 14
    r = CorrelationVector.from_right_half(np.eye(P)[0], 100.0)
    np.testing.assert_allclose(spatial_smoothing_acm(r), np.eye(P) / P)


def test_ss_rank_for_ensemble(mra6, mra6_coarray):
    src = [SourceSpec(0.1), SourceSpec(0.5, 2.0)]
    R = ensemble_covariance(mra6, src, 100.0, 0.0)
    S = spatial_smoothing_acm(coarray_correlation(R, mra6_coarray, 100.0))
    lam = np.linalg.eigvalsh(S)
    assert np.sum(lam > 1e-9 * lam.max()) == 2


def conj_symmetric(P):
    half = arrays(complex, P, elements=st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                          allow_infinity=False))
    return half.map(lambda z: CorrelationVector.from_right_half(np.r_[z[0].real, z[1:]], 100.0))


@given(conj_symmetric(14))
def test_ss_equals_lra_squared(r):
    S = spatial_smoothing_acm(r)
    T = lra_acm(r).matrix
    ref = T @ T / 14
    scale = max(np.linalg.norm(ref), 1e-300)
    assert np.linalg.norm(S - ref) <= 1e-10 * scale
    lam = np.linalg.eigvalsh(0.5 * (S + S.conj().T))
    assert lam.min() >= -1e-10 * max(lam.max(), 1e-300)
