"""End-to-end detection pipeline: windows -> autoencoders -> scored alarms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autoencoder, postprocess, preprocess
from .autoencoder import FeatureTrack, TrainConfig
from .postprocess import DissimilarityCurve, ScoreCurve
from .preprocess import TimeSeries

MODES = ("td", "fd", "combined")
SCORE_KINDS = ("prominence", "height")


@dataclass(frozen=True)
class RunSettings:
    """Everything the pipeline needs besides the series itself.

    h_* are hidden-layer widths, s_* the number of leading latent
    coordinates treated as time-invariant (the features).  alpha/beta, when
    given, override the automatic quantile-derived fusion weights.
    """

    window_size: int
    mode: str = "combined"
    n_bins: int | None = None
    h_td: int = 1
    s_td: int = 1
    h_fd: int = 1
    s_fd: int = 1
    k: int = 2
    lambda_td: float = 1.0
    lambda_fd: float = 1.0
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    tau: float = 0.0
    alpha: float | None = None
    beta: float | None = None
    use_matched_filter: bool = True
    score: str = "prominence"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.score not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {self.score!r}")
        if self.window_size < 2:
            raise ValueError("window size must be at least 2")
        if not (1 <= self.s_td <= self.h_td and 1 <= self.s_fd <= self.h_fd):
            raise ValueError("need 1 <= invariant dims <= hidden dims")
        if self.tau < 0:
            raise ValueError("threshold must be nonnegative")
        if self.k < 1:
            raise ValueError("approximation order k must be at least 1")
        if self.lambda_td < 0 or self.lambda_fd < 0:
            raise ValueError("regularisation weights must be nonnegative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.n_bins is not None and self.n_bins < 1:
            raise ValueError("bin count must be positive")


@dataclass(frozen=True)
class PipelineResult:
    dissim: DissimilarityCurve
    filtered: DissimilarityCurve
    scores: ScoreCurve
    alarms: np.ndarray
    alpha: float
    beta: float
    td_features: FeatureTrack | None = None
    fd_features: FeatureTrack | None = None


def _train_config(settings: RunSettings, reg_weight: float, seed: int) -> TrainConfig:
    return TrainConfig(
        reg_weight=reg_weight,
        k=settings.k,
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        learning_rate=settings.learning_rate,
        seed=seed,
    )


def run_pipeline(series: TimeSeries, settings: RunSettings) -> PipelineResult:
    """Run detection on one series and return curves, scores and alarms.

    Smoothing is linear in each feature dimension and fusion is a scaled
    concatenation, so smoothing the per-domain tracks before fusing them is
    equivalent to smoothing the fused track; we smooth first because the
    fusion weights are read off the per-domain dissimilarity curves.
    """
    n = settings.window_size
    rescaled = preprocess.rescale_channels(series)
    td_windows = preprocess.make_td_windows(rescaled, n)

    smooth_td = smooth_fd = None
    td_track = fd_track = None
    if settings.mode != "fd":
        params = autoencoder.train(
            td_windows, settings.h_td, settings.s_td,
            _train_config(settings, settings.lambda_td, settings.seed))
        td_track = autoencoder.extract_features(params, td_windows)
        smooth_td = postprocess.smooth_features(td_track, n)
    if settings.mode != "td":
        bins = settings.n_bins if settings.n_bins is not None else preprocess.default_bins(n)
        fd_windows = preprocess.make_fd_windows(td_windows, bins)
        params = autoencoder.train(
            fd_windows, settings.h_fd, settings.s_fd,
            _train_config(settings, settings.lambda_fd, settings.seed + 1))
        fd_track = autoencoder.extract_features(params, fd_windows)
        smooth_fd = postprocess.smooth_features(fd_track, n)

    channels = series.n_channels
    if smooth_td is None:
        smooth_td = FeatureTrack("time", smooth_fd.start,
                                 np.zeros((len(smooth_fd), settings.s_td * channels)))
    if smooth_fd is None:
        smooth_fd = FeatureTrack("frequency", smooth_td.start,
                                 np.zeros((len(smooth_td), settings.s_fd * channels)))

    if settings.mode == "td":
        alpha, beta = 1.0, 0.0
    elif settings.mode == "fd":
        alpha, beta = 0.0, 1.0
    else:
        alpha, beta = settings.alpha, settings.beta
        if alpha is None or beta is None:
            auto_alpha, auto_beta = postprocess.auto_weights(
                postprocess.dissimilarity(smooth_td, n),
                postprocess.dissimilarity(smooth_fd, n))
            alpha = auto_alpha if alpha is None else alpha
            beta = auto_beta if beta is None else beta

    fused = postprocess.fuse_features(smooth_td, smooth_fd, alpha, beta)
    dissim = postprocess.dissimilarity(fused, n)
    filtered = postprocess.matched_filter(dissim) if settings.use_matched_filter else dissim
    if settings.score == "prominence":
        scores = postprocess.prominence(filtered)
    else:
        scores = postprocess.height_scores(filtered)
    alarms = postprocess.detect(scores, settings.tau)
    return PipelineResult(dissim, filtered, scores, alarms, alpha, beta,
                          td_features=td_track, fd_features=fd_track)
