"""Smoothing, dissimilarity, matched filter, prominence and thresholding."""

import numpy as np
import pytest

from aecpd.autoencoder import FeatureTrack
from aecpd.postprocess import (
    DissimilarityCurve,
    auto_weights,
    detect,
    dissimilarity,
    fuse_features,
    height_scores,
    local_maxima,
    matched_filter,
    prominence,
    quantile,
    smooth_features,
    triangular_kernel,
)


def slow_smooth(col, n):
    """Direct convolution with clamped (edge-replicated) indexing."""
    length = len(col)
    out = np.zeros(length)
    for t in range(length):
        for k in range(-(n - 1), n):
            idx = min(max(t + k, 0), length - 1)
            out[t] += (n - abs(k)) / (n * n) * col[idx]
    return out


def brute_maxima(v):
    return [t for t in range(1, len(v) - 1) if v[t - 1] < v[t] >= v[t + 1]]


def brute_prominence(v, t):
    """Walk outward while values stay <= v[t]; base = lowest value passed."""
    def side(step):
        best, i = np.inf, t + step
        while 0 <= i < len(v) and v[i] <= v[t]:
            best = min(best, v[i])
            i += step
        return best
    return v[t] - max(side(-1), side(+1))


def random_curve(rng):
    length = int(rng.integers(3, 200))
    if rng.random() < 0.5:
        return rng.integers(0, 5, length).astype(float)   # ties and plateaus
    return np.abs(rng.normal(0, 1, length))


# --------------------------------------------------------------- quantile

def test_quantile_nearest_rank_examples():
    assert quantile(np.arange(1, 101), 0.95) == 95.0
    assert quantile([5.0], 0.5) == 5.0
    assert quantile([3.0, 1.0, 2.0], 1.0) == 3.0
    assert quantile([3.0, 1.0, 2.0], 0.34) == 2.0   # ceil(1.02) = 2nd smallest


def test_quantile_matches_sort_oracle():
    rng = np.random.default_rng(12)
    for _ in range(200):
        n = int(rng.integers(1, 60))
        vals = rng.normal(size=n)
        p = float(rng.uniform(0.01, 1.0))
        want = np.sort(vals)[int(np.ceil(p * n - 1e-9)) - 1]
        assert quantile(vals, p) == want


def test_quantile_rejects_bad_input():
    with pytest.raises(ValueError):
        quantile([], 0.5)
    with pytest.raises(ValueError):
        quantile([1.0], 0.0)
    with pytest.raises(ValueError):
        quantile([1.0], 1.5)


# ----------------------------------------------------------------- kernel

def test_kernel_small_case():
    assert np.allclose(triangular_kernel(3),
                       [1 / 9, 2 / 9, 3 / 9, 2 / 9, 1 / 9])
    assert np.allclose(triangular_kernel(1), [1.0])


def test_kernel_properties_across_sizes():
    for n in range(2, 501):
        kern = triangular_kernel(n)
        assert kern.size == 2 * n - 1
        assert np.array_equal(kern, kern[::-1])
        assert abs(kern.sum() - 1.0) < 1e-12
        # integer identity behind the normalisation
        assert (n - np.abs(np.arange(-(n - 1), n))).sum() == n * n


# -------------------------------------------------------------- smoothing

def test_smoothing_matches_direct_convolution():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 8))
        length = int(rng.integers(1, 40))
        vals = rng.normal(size=(length, int(rng.integers(1, 4))))
        track = FeatureTrack("time", n, vals)
        got = smooth_features(track, n).values
        for j in range(vals.shape[1]):
            assert np.allclose(got[:, j], slow_smooth(vals[:, j], n), atol=1e-12)


def test_smoothing_preserves_constants():
    track = FeatureTrack("time", 5, np.full((30, 2), 3.7))
    out = smooth_features(track, 5).values
    assert np.abs(out - 3.7).max() < 1e-12


def test_matched_filter_is_the_smoothing_kernel():
    rng = np.random.default_rng(9)
    curve = DissimilarityCurve(np.abs(rng.normal(size=25)), 4)
    viafilter = matched_filter(curve)
    viasmooth = smooth_features(
        FeatureTrack("x", 4, curve.values[:, None]), 4).values[:, 0]
    assert np.array_equal(viafilter.values, viasmooth)
    assert viafilter.window_size == curve.window_size


# ---------------------------------------------------------- dissimilarity

def test_dissimilarity_is_shifted_norm():
    rng = np.random.default_rng(4)
    vals = rng.normal(size=(12, 3))
    track = FeatureTrack("fused", 4, vals)
    curve = dissimilarity(track, 4)
    assert curve.values.size == 12 - 4
    assert curve.start == 4
    for i in range(8):
        assert curve.values[i] == pytest.approx(
            np.sqrt(np.sum((vals[i] - vals[i + 4]) ** 2)), abs=1e-12)


def test_dissimilarity_rejects_short_series():
    track = FeatureTrack("fused", 6, np.zeros((6, 2)))
    with pytest.raises(ValueError, match="too short"):
        dissimilarity(track, 6)


def test_fuse_features_concatenates_with_weights():
    td = FeatureTrack("time", 3, np.ones((5, 2)))
    fd = FeatureTrack("frequency", 3, np.full((5, 1), 2.0))
    fused = fuse_features(td, fd, 0.5, 2.0)
    assert fused.values.shape == (5, 3)
    assert np.allclose(fused.values[0], [0.5, 0.5, 4.0])
    with pytest.raises(ValueError):
        fuse_features(td, FeatureTrack("frequency", 3, np.ones((4, 1))), 1, 1)


def test_auto_weights_cross_assignment():
    td = DissimilarityCurve(np.linspace(0, 1, 100), 2)    # q95 ~ 0.949
    fd = DissimilarityCurve(np.linspace(0, 2, 100), 2)
    alpha, beta = auto_weights(td, fd)
    assert alpha == quantile(fd.values, 0.95)   # td scaled by fd's quantile
    assert beta == quantile(td.values, 0.95)
    assert auto_weights(DissimilarityCurve(np.zeros(10), 2),
                        DissimilarityCurve(np.zeros(10), 2)) == (1.0, 1.0)


# --------------------------------------------------------------- maxima

def test_scores_worked_example():
    curve = DissimilarityCurve(np.array([0.0, 1, 0, 3, 0, 2, 0]), 2)
    prom = prominence(curve)
    assert list(prom.values) == [0, 1, 0, 3, 0, 2, 0]
    ht = height_scores(curve)
    assert list(ht.values) == [0, 1, 0, 3, 0, 2, 0]   # same here: bases at 0


def test_prominence_differs_from_height_on_raised_baseline():
    curve = DissimilarityCurve(np.array([4.0, 5, 4, 9, 4, 6, 4]), 2)
    assert list(prominence(curve).values) == [0, 1, 0, 5, 0, 2, 0]
    assert list(height_scores(curve).values) == [0, 5, 0, 9, 0, 6, 0]


def test_plateau_counts_once_at_leftmost():
    v = np.array([0.0, 2, 2, 2, 1, 0])
    assert list(local_maxima(v)) == [1]
    assert list(local_maxima(np.array([2.0, 2, 1]))) == []   # boundary plateau
    assert list(local_maxima(np.array([0.0, 1]))) == []      # too short


def test_prominence_matches_brute_force():
    rng = np.random.default_rng(77)
    for _ in range(300):
        v = random_curve(rng)
        curve = DissimilarityCurve(v, 2)
        got = prominence(curve).values
        peaks = brute_maxima(v)
        want = np.zeros_like(v)
        for t in peaks:
            want[t] = brute_prominence(v, t)
        assert np.array_equal(got, want)


def test_prominence_scales_with_curve():
    rng = np.random.default_rng(31)
    v = np.abs(rng.normal(size=80))
    base = prominence(DissimilarityCurve(v, 3)).values
    scaled = prominence(DissimilarityCurve(4.0 * v, 3)).values
    assert np.allclose(scaled, 4.0 * base)


def test_detect_threshold_is_strict():
    scores = prominence(DissimilarityCurve(np.array([0.0, 1, 0, 3, 0, 2, 0]), 5))
    assert list(detect(scores, 0.0)) == [6, 8, 10]    # stamps start at 5
    assert list(detect(scores, 1.0)) == [8, 10]
    assert list(detect(scores, 3.0)) == []
    assert list(detect(scores, 2.5)) == [8]
