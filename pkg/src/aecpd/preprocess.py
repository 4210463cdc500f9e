"""Series container, per-channel rescaling, sliding windows and spectral windows.

Time stamps are 1-based sample positions: sample t of a length-T series sits
in CSV row t-1.  A window of size N ending at stamp t covers samples
t-N+1 .. t, so windows exist for t = N .. T and there are T - N + 1 of them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class DataFormatError(ValueError):
    """Raised when an input file cannot be parsed into a time series."""


@dataclass(frozen=True)
class TimeSeries:
    """d-channel real-valued series with optional ground-truth change points.

    samples has shape (d, T); change_points holds 1-based stamps, each the
    last sample of a segment, strictly increasing and inside (0, T).
    """

    samples: np.ndarray
    change_points: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2 or samples.shape[1] < 1:
            raise ValueError("samples must be a d x T matrix with T >= 1")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        cps = np.asarray(self.change_points, dtype=int)
        if cps.size:
            if np.any(np.diff(cps) <= 0):
                raise ValueError("change points must be strictly increasing")
            if cps[0] < 1 or cps[-1] > samples.shape[1] - 1:
                raise ValueError("change points must lie in [1, T-1]")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "change_points", cps)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def length(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class WindowSet:
    """Per-stamp stacked windows, one row per stamp t = N .. T.

    Row j holds the window ending at stamp N + j.  Time-domain rows have
    length N*d (channel blocks concatenated); frequency-domain rows have
    length M*d where M is the number of retained spectrum bins.
    """

    domain: str                     # "time" or "frequency"
    window_size: int                # N
    n_channels: int
    vectors: np.ndarray             # (T - N + 1, N*d) or (T - N + 1, M*d)
    n_bins: int | None = None       # M, frequency domain only

    def __post_init__(self):
        if self.domain not in ("time", "frequency"):
            raise ValueError(f"unknown window domain {self.domain!r}")
        vectors = np.asarray(self.vectors, dtype=float)
        per_channel = self.n_bins if self.domain == "frequency" else self.window_size
        if vectors.ndim != 2 or vectors.shape[1] != per_channel * self.n_channels:
            raise ValueError("window vectors have inconsistent length")
        object.__setattr__(self, "vectors", vectors)

    @property
    def n_windows(self) -> int:
        return self.vectors.shape[0]

    @property
    def start(self) -> int:
        """Stamp of the first window (= N)."""
        return self.window_size

    @property
    def stamps(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.n_windows)


def _rescale_rows(x: np.ndarray) -> np.ndarray:
    """Map each row affinely onto [-1, 1]; constant rows collapse to 0."""
    lo = x.min(axis=1, keepdims=True)
    hi = x.max(axis=1, keepdims=True)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = -1.0 + 2.0 * (x - lo) / safe
    return np.where(span > 0, out, 0.0)


def rescale_channels(ts: TimeSeries) -> TimeSeries:
    """Rescale every channel independently so min -> -1 and max -> +1.

    A constant channel maps to all zeros (the midpoint); ground truth is
    passed through unchanged.  Idempotent.
    """
    if ts.length < 2:
        raise ValueError("series too short to rescale")
    return TimeSeries(_rescale_rows(ts.samples), ts.change_points)


def make_td_windows(ts: TimeSeries, window_size: int) -> WindowSet:
    """Stack sliding windows (stride 1) of each channel into per-stamp vectors.

    The window at stamp t concatenates, channel by channel, the samples
    t-N+1 .. t.  The series is expected to be rescaled already.
    """
    n = int(window_size)
    if n < 1:
        raise ValueError("window size must be positive")
    if n > ts.length:
        raise ValueError("window larger than series")
    blocks = [
        np.lib.stride_tricks.sliding_window_view(ts.samples[c], n)
        for c in range(ts.n_channels)
    ]
    vectors = np.ascontiguousarray(np.concatenate(blocks, axis=1))
    return WindowSet("time", n, ts.n_channels, vectors)


def dft_magnitude(window: np.ndarray, n_bins: int) -> np.ndarray:
    """Magnitude of the DFT of a real window, cropped to the first n_bins bins."""
    w = np.asarray(window, dtype=float)
    if w.ndim != 1:
        raise ValueError("window must be a vector")
    if not 1 <= n_bins <= w.size:
        raise ValueError("bin count must lie in [1, window length]")
    return np.abs(np.fft.fft(w)[:n_bins])


def default_bins(window_size: int) -> int:
    """Non-redundant spectrum length for a real window: floor(N/2) + 1."""
    return window_size // 2 + 1


def make_fd_windows(tdw: WindowSet, n_bins: int | None = None) -> WindowSet:
    """Spectral counterpart of a time-domain window set.

    Each channel window is replaced by its cropped DFT magnitude, the channel
    blocks are concatenated, and every resulting feature dimension is then
    min-max rescaled to [-1, 1] across stamps so the vectors fit the tanh
    range of the downstream encoder.
    """
    if tdw.domain != "time":
        raise ValueError("frequency windows must be built from time-domain windows")
    n = tdw.window_size
    m = default_bins(n) if n_bins is None else int(n_bins)
    if not 1 <= m <= n:
        raise ValueError("bin count must lie in [1, window length]")
    blocks = []
    for c in range(tdw.n_channels):
        chan = tdw.vectors[:, c * n:(c + 1) * n]
        blocks.append(np.abs(np.fft.fft(chan, axis=1)[:, :m]))
    vectors = _rescale_rows(np.concatenate(blocks, axis=1).T).T
    return WindowSet("frequency", n, tdw.n_channels, vectors, n_bins=m)


# ---------------------------------------------------------------------------
# CSV ingestion: one row per time stamp, one column per channel, optional
# final integer column is_cp (1 on the last row of each segment).  Header row
# optional; comma delimiter, decimal-point floats, LF line endings.
# ---------------------------------------------------------------------------

def load_csv(path, cp_column: bool | None = None) -> TimeSeries:
    """Read a series CSV.

    cp_column forces the last column to be treated as the change-point marker
    (True), as an ordinary channel (False), or auto-detects (None): a header
    naming the last column ``is_cp``, or, without a header, a last column of
    two or more whose values are all 0/1.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataFormatError(f"{path}: empty file")

    header = None
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        header = [v.strip() for v in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")

    try:
        data = np.array([[float(v) for v in row] for row in rows], dtype=float)
    except ValueError as exc:
        raise DataFormatError(f"{path}: non-numeric value ({exc})") from None
    if data.ndim != 2 or np.any([len(r) != len(rows[0]) for r in rows]):
        raise DataFormatError(f"{path}: ragged rows")

    has_cp = cp_column
    if has_cp is None:
        if header is not None:
            has_cp = header[-1] == "is_cp"
        else:
            last = data[:, -1]
            has_cp = data.shape[1] >= 2 and bool(np.all(np.isin(last, (0.0, 1.0))))
    if has_cp and data.shape[1] < 2:
        raise DataFormatError(f"{path}: is_cp column but no channels")

    if has_cp:
        flags = data[:, -1]
        if not np.all(np.isin(flags, (0.0, 1.0))):
            raise DataFormatError(f"{path}: is_cp column must be 0/1")
        cps = np.flatnonzero(flags > 0) + 1        # row index -> 1-based stamp
        samples = data[:, :-1].T
        cps = cps[(cps >= 1) & (cps <= samples.shape[1] - 1)]
    else:
        cps = np.empty(0, dtype=int)
        samples = data.T
    if not np.all(np.isfinite(samples)):
        raise DataFormatError(f"{path}: non-finite sample values")
    return TimeSeries(samples, cps)


def save_csv(ts: TimeSeries, path) -> None:
    """Write a series CSV with header ch1..chd,is_cp (LF endings)."""
    flags = np.zeros(ts.length, dtype=int)
    if ts.change_points.size:
        flags[ts.change_points - 1] = 1
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join([f"ch{c + 1}" for c in range(ts.n_channels)] + ["is_cp"]))
        fh.write("\n")
        for i in range(ts.length):
            vals = [repr(float(v)) for v in ts.samples[:, i]]
            fh.write(",".join(vals + [str(flags[i])]))
            fh.write("\n")
