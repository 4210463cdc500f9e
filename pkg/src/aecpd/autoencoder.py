"""Single-hidden-layer tanh autoencoder with partially time-invariant features.

The latent code of the window at stamp t splits into s time-invariant
coordinates (penalized to stay constant across neighbouring windows) followed
by h - s free instantaneous coordinates.  Training minimizes, per mini-batch,

    sum_t ( ||y_t - decode(encode(y_t))||_2
            + (lambda / k) * sum_{j=0}^{k-1} ||s_{t-j} - s_{t-j-1}||_2 )

with non-squared Euclidean norms, every term sharing one weight set.  Batches
draw only stamps whose k-step window history exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .preprocess import DataFormatError, WindowSet

NORM_GUARD = 1e-12      # ||u|| below this: treat d||u||/du as 0 (a subgradient)


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class AutoencoderParams:
    """Weights of one autoencoder; first n_invariant latent coords are the
    time-invariant features."""

    enc_w: np.ndarray      # (h, D)
    enc_b: np.ndarray      # (h,)
    dec_w: np.ndarray      # (D, h)
    dec_b: np.ndarray      # (D,)
    n_invariant: int       # s, 1 <= s <= h

    def __post_init__(self):
        h, d = self.enc_w.shape
        if self.enc_b.shape != (h,) or self.dec_w.shape != (d, h) or self.dec_b.shape != (d,):
            raise ValueError("parameter shapes are inconsistent")
        if not 1 <= self.n_invariant <= h:
            raise ValueError("need 1 <= n_invariant <= latent dim")
        for arr in (self.enc_w, self.enc_b, self.dec_w, self.dec_b):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite parameter values")

    @property
    def input_dim(self) -> int:
        return self.enc_w.shape[1]

    @property
    def latent_dim(self) -> int:
        return self.enc_w.shape[0]


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings; k is the number of consecutive feature
    differences coupled into each training term."""

    reg_weight: float = 1.0
    k: int = 2
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("k, epochs and batch_size must be >= 1")
        if self.reg_weight < 0:
            raise ValueError("regularization weight must be nonnegative")


@dataclass(frozen=True)
class FeatureTrack:
    """Per-stamp feature vectors for stamps start .. start + len - 1."""

    domain: str            # "time", "frequency" or "fused"
    start: int             # stamp of the first row (= window size N)
    values: np.ndarray     # (n_windows, feature_dim)

    @property
    def feature_dim(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]


def encode(params: AutoencoderParams, v: np.ndarray) -> np.ndarray:
    """Latent code tanh(W v + b); accepts a vector or a stack of rows."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != params.input_dim:
        raise ValueError(
            f"input dim {v.shape[-1]} != expected {params.input_dim}")
    return np.tanh(v @ params.enc_w.T + params.enc_b)


def decode(params: AutoencoderParams, code: np.ndarray) -> np.ndarray:
    """Reconstruction tanh(W' h + b'); entries lie strictly inside (-1, 1)."""
    code = np.asarray(code, dtype=float)
    if code.shape[-1] != params.latent_dim:
        raise ValueError(
            f"latent dim {code.shape[-1]} != expected {params.latent_dim}")
    return np.tanh(code @ params.dec_w.T + params.dec_b)


def _gather_history(windows: np.ndarray, batch: np.ndarray, k: int) -> np.ndarray:
    """Rows (b, j, :) = window at index batch[b] - j, for j = 0 .. k."""
    idx = batch[:, None] - np.arange(k + 1)[None, :]
    if np.any(idx < 0):
        raise ValueError("batch member lacks full window history")
    return windows[idx]


def batch_loss(params: AutoencoderParams, windows: np.ndarray,
               batch: np.ndarray, cfg: TrainConfig) -> float:
    """Coupled loss over the given batch of window indices.

    windows is the full (n_windows, D) matrix; batch holds row indices t with
    t >= k so that the k-step history exists.
    """
    hist = _gather_history(windows, np.asarray(batch, dtype=int), cfg.k)
    codes = encode(params, hist)                        # (b, k+1, h)
    recon = decode(params, codes[:, 0, :])              # (b, D)
    rec = np.linalg.norm(recon - hist[:, 0, :], axis=1)
    s = codes[:, :, :params.n_invariant]
    diff = np.linalg.norm(s[:, :-1, :] - s[:, 1:, :], axis=2)   # (b, k)
    return float(np.sum(rec) + (cfg.reg_weight / cfg.k) * np.sum(diff))


def loss_gradient(params: AutoencoderParams, windows: np.ndarray,
                  batch: np.ndarray, cfg: TrainConfig):
    """Analytic gradient of batch_loss w.r.t. (enc_w, enc_b, dec_w, dec_b).

    The norms are not squared, so each term contributes u / ||u||; terms with
    ||u|| < NORM_GUARD contribute nothing.
    """
    hist = _gather_history(windows, np.asarray(batch, dtype=int), cfg.k)
    b, _, d = hist.shape
    s_dim = params.n_invariant

    codes = np.tanh(hist @ params.enc_w.T + params.enc_b)       # (b, k+1, h)
    recon = np.tanh(codes[:, 0, :] @ params.dec_w.T + params.dec_b)

    # reconstruction branch
    rdiff = recon - hist[:, 0, :]
    rnorm = np.linalg.norm(rdiff, axis=1, keepdims=True)
    d_recon = np.where(rnorm > NORM_GUARD, rdiff / np.maximum(rnorm, NORM_GUARD), 0.0)
    d_dec_in = d_recon * (1.0 - recon ** 2)                     # (b, D)
    g_dec_w = d_dec_in.T @ codes[:, 0, :]
    g_dec_b = d_dec_in.sum(axis=0)

    d_codes = np.zeros_like(codes)
    d_codes[:, 0, :] = d_dec_in @ params.dec_w

    # time-invariance branch: pairs (s_{t-j} - s_{t-j-1}) for j = 0 .. k-1
    s = codes[:, :, :s_dim]
    pair = s[:, :-1, :] - s[:, 1:, :]                           # (b, k, s)
    pnorm = np.linalg.norm(pair, axis=2, keepdims=True)
    unit = np.where(pnorm > NORM_GUARD, pair / np.maximum(pnorm, NORM_GUARD), 0.0)
    unit *= cfg.reg_weight / cfg.k
    d_codes[:, :-1, :s_dim] += unit
    d_codes[:, 1:, :s_dim] -= unit

    d_enc_in = (d_codes * (1.0 - codes ** 2)).reshape(b * (cfg.k + 1), -1)
    flat_in = hist.reshape(b * (cfg.k + 1), d)
    g_enc_w = d_enc_in.T @ flat_in
    g_enc_b = d_enc_in.sum(axis=0)
    return g_enc_w, g_enc_b, g_dec_w, g_dec_b


def init_params(input_dim: int, latent_dim: int, n_invariant: int,
                rng: np.random.Generator) -> AutoencoderParams:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out)); zero biases."""
    r = np.sqrt(6.0 / (input_dim + latent_dim))
    return AutoencoderParams(
        enc_w=rng.uniform(-r, r, size=(latent_dim, input_dim)),
        enc_b=np.zeros(latent_dim),
        dec_w=rng.uniform(-r, r, size=(input_dim, latent_dim)),
        dec_b=np.zeros(input_dim),
        n_invariant=n_invariant,
    )


def train(windows: WindowSet, latent_dim: int, n_invariant: int,
          cfg: TrainConfig) -> AutoencoderParams:
    """Mini-batch Adam on the coupled loss; deterministic for a given seed.

    Eligible stamps are those with a complete k-step history (window indices
    >= k); each epoch shuffles them and walks consecutive batches.  Windows
    nearer the series start are skipped during training but still receive
    features from extract_features.
    """
    if not 1 <= n_invariant <= latent_dim:
        raise ValueError("need 1 <= n_invariant <= latent_dim")
    mat = windows.vectors
    if mat.shape[0] <= cfg.k:
        raise ValueError("not enough windows for the configured history")
    rng = np.random.default_rng(cfg.seed)
    params = init_params(mat.shape[1], latent_dim, n_invariant, rng)
    theta = [params.enc_w.copy(), params.enc_b.copy(),
             params.dec_w.copy(), params.dec_b.copy()]
    m = [np.zeros_like(p) for p in theta]
    v = [np.zeros_like(p) for p in theta]
    eligible = np.arange(cfg.k, mat.shape[0])
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(eligible)
        for lo in range(0, order.size, cfg.batch_size):
            batch = order[lo:lo + cfg.batch_size]
            cur = AutoencoderParams(*theta, n_invariant=n_invariant)
            grads = loss_gradient(cur, mat, batch, cfg)
            if not all(np.all(np.isfinite(g)) for g in grads):
                raise TrainingDivergedError(
                    f"non-finite gradient at epoch {epoch}, step {step}")
            step += 1
            for i, g in enumerate(grads):
                m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g
                v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g * g
                m_hat = m[i] / (1 - cfg.beta1 ** step)
                v_hat = v[i] / (1 - cfg.beta2 ** step)
                theta[i] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
        check = AutoencoderParams(*theta, n_invariant=n_invariant)
        epoch_loss = batch_loss(check, mat, eligible, cfg)
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(f"non-finite loss after epoch {epoch}")
    return AutoencoderParams(*theta, n_invariant=n_invariant)


def extract_features(params: AutoencoderParams, windows: WindowSet) -> FeatureTrack:
    """Time-invariant features (first n_invariant latent coords) per stamp."""
    codes = encode(params, windows.vectors)
    return FeatureTrack(windows.domain, windows.start,
                        codes[:, :params.n_invariant])


# ---------------------------------------------------------------------------
# Serialization: ASCII header "aecpd-autoencoder 1\nD h s\n" followed by the
# four parameter arrays as little-endian float64, row-major, in the order
# enc_w, enc_b, dec_w, dec_b.  Round trips are bit exact.
# ---------------------------------------------------------------------------

_MAGIC = b"aecpd-autoencoder 1\n"


def save_params(params: AutoencoderParams, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(f"{params.input_dim} {params.latent_dim} {params.n_invariant}\n"
                 .encode("ascii"))
        for arr in (params.enc_w, params.enc_b, params.dec_w, params.dec_b):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_params(path) -> AutoencoderParams:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise DataFormatError(f"{path}: not a recognizable model file")
        dims = fh.readline().split()
        if len(dims) != 3:
            raise DataFormatError(f"{path}: malformed model header")
        try:
            d, h, s = (int(x) for x in dims)
        except ValueError:
            raise DataFormatError(f"{path}: malformed model header") from None
        if d < 1 or not 1 <= s <= h:
            raise DataFormatError(f"{path}: malformed model header")
        blob = fh.read()
    counts = [h * d, h, d * h, d]
    if len(blob) != 8 * sum(counts):
        raise DataFormatError(f"{path}: truncated model payload")
    flat = np.frombuffer(blob, dtype="<f8")
    parts, at = [], 0
    for c in counts:
        parts.append(flat[at:at + c].copy())
        at += c
    return AutoencoderParams(parts[0].reshape(h, d), parts[1],
                             parts[2].reshape(d, h), parts[3], n_invariant=s)
