"""Walk through the detection pipeline one stage at a time.

The run uses a short jumping-mean series and deliberately small training
budget so the whole script finishes in a few seconds; the library defaults
(200 epochs) are what the benchmarks use.
"""

import numpy as np

from aecpd.autoencoder import extract_features, train, TrainConfig
from aecpd.datagen import gen_jumping_mean
from aecpd.pipeline import RunSettings, run_pipeline
from aecpd.postprocess import (
    dissimilarity,
    matched_filter,
    prominence,
    smooth_features,
)
from aecpd.preprocess import make_td_windows, rescale_channels

ts = gen_jumping_mean(seed=1)
print(f"series: {ts.length} samples, {ts.change_points.size} change points")

# stage 1: rescale each channel to [-1, 1] and slice into sliding windows
n = 20
windows = make_td_windows(rescale_channels(ts), n)
print(f"windows: {windows.n_windows} of size {n}, stamps "
      f"{windows.stamps[0]}..{windows.stamps[-1]}")

# stage 2: a tiny autoencoder; the leading latent coordinate is penalised
# for changing between consecutive windows, which makes it track segments
cfg = TrainConfig(reg_weight=1.0, k=2, epochs=40, seed=0)
params = train(windows, 1, 1, cfg)
track = extract_features(params, windows)
print(f"features: {track.values.shape[1]} per window, "
      f"range [{track.values.min():+.3f}, {track.values.max():+.3f}]")

# stage 3: smooth the feature track, difference it one window apart,
# then run the same triangular kernel over the curve as a matched filter
curve = dissimilarity(smooth_features(track, n), n)
filtered = matched_filter(curve)
scores = prominence(filtered)
peaks = scores.stamps[scores.values > 0]
print(f"curve: stamps {curve.start}..{curve.start + len(curve.values) - 1}, "
      f"{peaks.size} scored peaks")

# the ten highest-scoring peaks against the ten nearest true change points
top = peaks[np.argsort(scores.values[scores.values > 0])[::-1][:10]]
for t in np.sort(top):
    nearest = ts.change_points[np.argmin(np.abs(ts.change_points - t))]
    print(f"  alarm at {t:5d}   nearest change {nearest:5d}   off by "
          f"{abs(int(t) - int(nearest)):3d}")

# the one-call version of the same pipeline
res = run_pipeline(ts, RunSettings(window_size=n, mode="td", epochs=40,
                                   tau=0.01))
print(f"run_pipeline: {res.alarms.size} alarms above threshold 0.01, "
      f"first at {res.alarms[:3].tolist()}")
