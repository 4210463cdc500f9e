"""Feature fusion, smoothing, dissimilarity, matched filtering and scoring.

All curves live on the stamp range [N, T-N]: the dissimilarity at stamp t
compares the smoothed features of the windows ending at t and at t+N, so the
first and last N-1 window stamps drop out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autoencoder import FeatureTrack


@dataclass(frozen=True)
class DissimilarityCurve:
    """Nonnegative per-stamp dissimilarity for stamps start .. start + len - 1."""

    values: np.ndarray
    window_size: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("curve must be a nonempty vector")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("curve values must be finite and nonnegative")
        object.__setattr__(self, "values", values)

    @property
    def start(self) -> int:
        return self.window_size

    @property
    def stamps(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.values.size)


@dataclass(frozen=True)
class ScoreCurve:
    """Change-point scores; zero except at local maxima of the parent curve."""

    values: np.ndarray
    window_size: int

    @property
    def start(self) -> int:
        return self.window_size

    @property
    def stamps(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.values.size)


def quantile(values, p: float) -> float:
    """Nearest-rank quantile: element at 1-based index ceil(p * n) of the
    sorted multiset.  p must lie in (0, 1]."""
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("quantile of an empty set")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    # small slack so p * n lands on the intended integer for decimal p
    rank = math.ceil(p * vals.size - 1e-9)
    rank = min(max(rank, 1), vals.size)
    return float(np.sort(vals)[rank - 1])


def triangular_kernel(window_size: int) -> np.ndarray:
    """Zero-phase triangular weights of length 2N-1: (N - |k|) / N^2 at
    offset k.  Sums to exactly 1."""
    n = int(window_size)
    if n < 1:
        raise ValueError("window size must be positive")
    offsets = np.arange(-(n - 1), n)
    return (n - np.abs(offsets)) / float(n * n)


def _filter_columns(arr: np.ndarray, window_size: int) -> np.ndarray:
    """Apply the triangular kernel down each column with edge-value padding."""
    kernel = triangular_kernel(window_size)
    pad = window_size - 1
    padded = np.pad(arr, ((pad, pad), (0, 0)), mode="edge")
    out = np.empty_like(arr)
    for j in range(arr.shape[1]):
        out[:, j] = np.convolve(padded[:, j], kernel, mode="valid")
    return out


def fuse_features(td: FeatureTrack, fd: FeatureTrack,
                  alpha: float, beta: float) -> FeatureTrack:
    """Weighted concatenation [alpha * td, beta * fd] of the two domains."""
    if len(td) != len(fd) or td.start != fd.start:
        raise ValueError("feature tracks do not align")
    fused = np.concatenate([alpha * td.values, beta * fd.values], axis=1)
    return FeatureTrack("fused", td.start, fused)


def smooth_features(track: FeatureTrack, window_size: int) -> FeatureTrack:
    """Triangular moving average per feature dimension, edge-value padded.

    The kernel sums to 1 and is symmetric, so constants pass through
    unchanged and no phase shift is introduced.
    """
    return FeatureTrack(track.domain, track.start,
                        _filter_columns(track.values, window_size))


def dissimilarity(track: FeatureTrack, window_size: int) -> DissimilarityCurve:
    """Euclidean distance between features one window size apart.

    Input rows cover stamps N .. T; the output covers N .. T-N.
    """
    n = int(window_size)
    if len(track) <= n:
        raise ValueError("series too short for window size")
    vals = track.values
    d = np.linalg.norm(vals[:-n] - vals[n:], axis=1)
    return DissimilarityCurve(d, n)


def matched_filter(curve: DissimilarityCurve, window_size: int | None = None) -> DissimilarityCurve:
    """Reapply the triangular smoothing kernel to the dissimilarity curve.

    The kernel's width and shape approximate the expected peak left by a
    change point, suppressing narrow spurious maxima.
    """
    n = curve.window_size if window_size is None else int(window_size)
    filtered = _filter_columns(curve.values[:, None], n)[:, 0]
    return DissimilarityCurve(filtered, curve.window_size)


def local_maxima(values: np.ndarray) -> np.ndarray:
    """Indices of strict local maxima; a plateau counts once, at its
    leftmost index.  Boundary samples are never maxima."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.empty(0, dtype=int)
    interior = np.arange(1, v.size - 1)
    mask = (v[:-2] < v[1:-1]) & (v[1:-1] >= v[2:])
    return interior[mask]


def prominence(curve: DissimilarityCurve) -> ScoreCurve:
    """Topographic prominence of every local maximum of the curve.

    For a maximum at t, walk outward on each side until a strictly higher
    sample or the curve boundary is reached; the side's base is the lowest
    value passed (the boundary sample included when no higher sample exists).
    The score is the height above the larger of the two bases; non-maxima
    score 0.
    """
    v = curve.values
    scores = np.zeros_like(v)
    for t in local_maxima(v):
        higher_left = np.flatnonzero(v[:t] > v[t])
        left_from = higher_left[-1] + 1 if higher_left.size else 0
        left_base = v[left_from:t].min()
        higher_right = np.flatnonzero(v[t + 1:] > v[t])
        right_to = t + 1 + higher_right[0] if higher_right.size else v.size
        right_base = v[t + 1:right_to].min()
        scores[t] = v[t] - max(left_base, right_base)
    return ScoreCurve(scores, curve.window_size)


def height_scores(curve: DissimilarityCurve) -> ScoreCurve:
    """Raw curve height at every local maximum; the naive peak score."""
    v = curve.values
    scores = np.zeros_like(v)
    peaks = local_maxima(v)
    scores[peaks] = v[peaks]
    return ScoreCurve(scores, curve.window_size)


def auto_weights(curve_td: DissimilarityCurve,
                 curve_fd: DissimilarityCurve) -> tuple[float, float]:
    """Cross-domain fusion weights from the 95-percentile peak heights.

    The time-domain features are scaled by the frequency curve's quantile and
    vice versa, so both domains end up contributing comparably.  If both
    quantiles vanish the weights fall back to (1, 1).
    """
    alpha = quantile(curve_fd.values, 0.95)
    beta = quantile(curve_td.values, 0.95)
    if alpha == 0.0 and beta == 0.0:
        return 1.0, 1.0
    return alpha, beta


def detect(scores: ScoreCurve, tau: float) -> np.ndarray:
    """Stamps whose score strictly exceeds the threshold, ascending."""
    return scores.stamps[scores.values > tau]
