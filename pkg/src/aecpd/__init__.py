"""Offline change-point detection with partially time-invariant autoencoders.

A series is cut into sliding windows (raw samples and DFT magnitudes), each
domain is compressed by a tanh autoencoder whose leading latent coordinates
are pushed to vary slowly in time, and change points show up as peaks in the
distance between those features one window apart.  Peaks are sharpened with
a matched filter and ranked by topographic prominence.
"""

from .autoencoder import (
    AutoencoderParams,
    FeatureTrack,
    TrainConfig,
    TrainingDivergedError,
    batch_loss,
    decode,
    encode,
    extract_features,
    load_params,
    save_params,
    train,
)
from .datagen import (
    FAMILIES,
    gen_change_points,
    gen_changing_coefficients,
    gen_gaussian_mixtures,
    gen_jumping_mean,
    gen_null,
    gen_scaling_variance,
)
from .evaluation import MatchReport, RocCurve, corpus_auc, match_alarms, roc_auc
from .pipeline import PipelineResult, RunSettings, run_pipeline
from .postprocess import (
    DissimilarityCurve,
    ScoreCurve,
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
from .preprocess import (
    DataFormatError,
    TimeSeries,
    WindowSet,
    default_bins,
    dft_magnitude,
    load_csv,
    make_fd_windows,
    make_td_windows,
    rescale_channels,
    save_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AutoencoderParams",
    "DataFormatError",
    "DissimilarityCurve",
    "FAMILIES",
    "FeatureTrack",
    "MatchReport",
    "PipelineResult",
    "RocCurve",
    "RunSettings",
    "ScoreCurve",
    "TimeSeries",
    "TrainConfig",
    "TrainingDivergedError",
    "WindowSet",
    "auto_weights",
    "batch_loss",
    "corpus_auc",
    "decode",
    "default_bins",
    "detect",
    "dft_magnitude",
    "dissimilarity",
    "encode",
    "extract_features",
    "fuse_features",
    "gen_change_points",
    "gen_changing_coefficients",
    "gen_gaussian_mixtures",
    "gen_jumping_mean",
    "gen_null",
    "gen_scaling_variance",
    "height_scores",
    "load_csv",
    "load_params",
    "local_maxima",
    "make_fd_windows",
    "make_td_windows",
    "match_alarms",
    "matched_filter",
    "prominence",
    "quantile",
    "rescale_channels",
    "roc_auc",
    "run_pipeline",
    "save_csv",
    "save_params",
    "smooth_features",
    "train",
    "triangular_kernel",
]
