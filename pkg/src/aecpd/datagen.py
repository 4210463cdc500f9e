"""Synthetic benchmark families with known change points.

Each generator draws 50 boundary stamps (the first pinned at 0), builds 49
segments between them, and reports the 48 interior stamps as ground truth.
Segment lengths are floored Gaussian draws; the parametrisations quote the
Gaussians as (mean, variance).
"""

from __future__ import annotations

import math

import numpy as np

from .preprocess import TimeSeries

AR_COEFFS = (0.6, -0.5)
AR_NOISE_STD = 1.5


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gen_change_points(seed, n: int = 50, mean: float = 100.0,
                      std: float = math.sqrt(10.0)) -> np.ndarray:
    """n boundary stamps 0 = t_0 < t_1 < ... < t_{n-1}.

    Consecutive gaps are floor(Normal(mean, std**2)) draws, redrawn while
    nonpositive.  With std=0 the gaps are exactly floor(mean).
    """
    rng = _as_rng(seed)
    if n < 2:
        raise ValueError("need at least two stamps")
    if std < 0:
        raise ValueError("std must be nonnegative")
    gaps = np.empty(n - 1, dtype=np.int64)
    for i in range(n - 1):
        gap = math.floor(rng.normal(mean, std))
        while gap <= 0:
            gap = math.floor(rng.normal(mean, std))
        gaps[i] = gap
    return np.concatenate([[0], np.cumsum(gaps)])


def _segment_series(stamps: np.ndarray, per_segment: np.ndarray) -> np.ndarray:
    """Expand one value per segment into one value per sample."""
    return np.repeat(per_segment, np.diff(stamps))


def _ar_series(rng: np.random.Generator, a1, a2: float, mu, sigma,
               length: int) -> np.ndarray:
    """Order-2 autoregression y_t = a1_t*y_{t-1} + a2*y_{t-2} + e_t with
    e_t ~ Normal(mu_t, sigma_t**2) and y_1 = y_2 = 0."""
    a1 = np.broadcast_to(np.asarray(a1, dtype=float), length)
    eps = rng.normal(np.broadcast_to(np.asarray(mu, dtype=float), length),
                     np.broadcast_to(np.asarray(sigma, dtype=float), length))
    y = np.zeros(length)
    for t in range(2, length):
        y[t] = a1[t] * y[t - 1] + a2 * y[t - 2] + eps[t]
    return y


def _wrap(samples: np.ndarray, stamps: np.ndarray) -> TimeSeries:
    return TimeSeries(samples[None, :], stamps[1:-1])


def gen_jumping_mean(seed) -> TimeSeries:
    """Stationary AR(2) whose noise mean jumps at every change point.

    The k-th jump has size k/16, so early changes are buried in the noise
    (std 1.5) and late ones are obvious.
    """
    rng = _as_rng(seed)
    stamps = gen_change_points(rng)
    n_seg = stamps.size - 1
    jumps = np.arange(n_seg) / 16.0
    mu = _segment_series(stamps, np.cumsum(jumps))
    y = _ar_series(rng, AR_COEFFS[0], AR_COEFFS[1], mu, AR_NOISE_STD, stamps[-1])
    return _wrap(y, stamps)


def gen_scaling_variance(seed) -> TimeSeries:
    """Stationary AR(2) whose noise std alternates between 1 and
    ln(e + k/4) across segments (k = 1-based segment number)."""
    rng = _as_rng(seed)
    stamps = gen_change_points(rng)
    n_seg = stamps.size - 1
    seg_no = np.arange(1, n_seg + 1)
    sigma_even = np.log(math.e + seg_no / 4.0)
    sigma = np.where(seg_no % 2 == 1, 1.0, sigma_even)
    y = _ar_series(rng, AR_COEFFS[0], AR_COEFFS[1], 0.0,
                   _segment_series(stamps, sigma), stamps[-1])
    return _wrap(y, stamps)


def gen_changing_coefficients(seed) -> TimeSeries:
    """AR(1) whose coefficient alternates between a low draw U[0, 0.5] and a
    high draw U[0.8, 0.95] per segment; the recursion runs straight through
    the boundaries.  Segments are an order of magnitude longer than in the
    other families (mean 1000)."""
    rng = _as_rng(seed)
    stamps = gen_change_points(rng, mean=1000.0, std=10.0)
    n_seg = stamps.size - 1
    coeffs = np.empty(n_seg)
    for k in range(n_seg):
        if k % 2 == 0:
            coeffs[k] = rng.uniform(0.0, 0.5)
        else:
            coeffs[k] = rng.uniform(0.8, 0.95)
    a1 = _segment_series(stamps, coeffs)
    y = _ar_series(rng, a1, 0.0, 0.0, AR_NOISE_STD, stamps[-1])
    return _wrap(y, stamps)


def gen_gaussian_mixtures(seed) -> TimeSeries:
    """Independent draws from two-component Gaussian mixtures that alternate
    across segments: 0.5*N(-1,0.5^2) + 0.5*N(1,0.5^2) on odd segments,
    0.8*N(-1,1) + 0.2*N(1,0.1^2) on even ones."""
    rng = _as_rng(seed)
    stamps = gen_change_points(rng)
    parts = []
    for k, length in enumerate(np.diff(stamps), start=1):
        if k % 2 == 1:
            w1, m1, s1, m2, s2 = 0.5, -1.0, 0.5, 1.0, 0.5
        else:
            w1, m1, s1, m2, s2 = 0.8, -1.0, 1.0, 1.0, 0.1
        first = rng.random(length) < w1
        mu = np.where(first, m1, m2)
        sd = np.where(first, s1, s2)
        parts.append(rng.normal(mu, sd))
    return _wrap(np.concatenate(parts), stamps)


def gen_null(seed, length: int = 5000) -> TimeSeries:
    """Stationary AR(2) with no change points; a false-alarm control."""
    rng = _as_rng(seed)
    if length < 3:
        raise ValueError("length must be at least 3")
    y = _ar_series(rng, AR_COEFFS[0], AR_COEFFS[1], 0.0, AR_NOISE_STD, length)
    return TimeSeries(y[None, :], np.empty(0, dtype=int))


FAMILIES = {
    "jm": gen_jumping_mean,
    "sv": gen_scaling_variance,
    "cc": gen_changing_coefficients,
    "gm": gen_gaussian_mixtures,
}
