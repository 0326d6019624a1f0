"""Embedding-to-window regression: two affine layers with a tanh between."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, DivergedLoss, Misaligned, NonFiniteInput


@dataclass
class DecoderParams:
    l1: np.ndarray   # (h_dec, d)
    b1: np.ndarray   # (h_dec,)
    l2: np.ndarray   # (W, h_dec)
    b2: np.ndarray   # (W,)

    def __post_init__(self):
        for name in ("l1", "b1", "l2", "b2"):
            tensor = np.asarray(getattr(self, name), dtype=float)
            if not np.isfinite(tensor).all():
                raise NonFiniteInput(f"{name} contains non-finite values")
            setattr(self, name, tensor)
        if self.l1.shape[0] != self.b1.shape[0] or self.l2.shape[0] != self.b2.shape[0]:
            raise DimensionMismatch("bias shapes do not match layer rows")
        if self.l2.shape[1] != self.l1.shape[0]:
            raise DimensionMismatch("layer widths do not chain")

    @property
    def window_size(self) -> int:
        return self.b2.shape[0]


def init_decoder(d: int, window: int, hidden: int, seed: int) -> DecoderParams:
    rng = np.random.default_rng(seed)
    return DecoderParams(
        rng.uniform(-0.1, 0.1, (hidden, d)),
        rng.uniform(-0.1, 0.1, hidden),
        rng.uniform(-0.1, 0.1, (window, hidden)),
        rng.uniform(-0.1, 0.1, window),
    )


def decode(params: DecoderParams, embedding) -> np.ndarray:
    e = np.asarray(embedding, dtype=float)
    return params.l2 @ np.tanh(params.l1 @ e + params.b1) + params.b2


@dataclass
class DecoderHyper:
    lr: float = 0.05
    epochs: int = 500
    seed: int = 0
    hidden: int = 32


def train_decoder(embeddings, windows, hyper: DecoderHyper) -> tuple[DecoderParams, float]:
    """Full-batch MSE regression from embeddings onto their source windows.

    Returns the parameters and the final mean squared error over all window
    elements.
    """
    if len(embeddings) != len(windows) or len(embeddings) == 0:
        raise Misaligned(f"{len(embeddings)} embeddings vs {len(windows)} windows")
    e_mat = np.asarray([np.asarray(e, dtype=float) for e in embeddings])
    t_mat = np.asarray([np.asarray(w.values, dtype=float) for w in windows])
    n, d = e_mat.shape
    w_len = t_mat.shape[1]
    params = init_decoder(d, w_len, hyper.hidden, hyper.seed)

    def forward():
        a = e_mat @ params.l1.T + params.b1     # (n, h_dec)
        hidden = np.tanh(a)
        out = hidden @ params.l2.T + params.b2  # (n, W)
        return hidden, out

    mse = _mse(forward()[1], t_mat)
    for _ in range(hyper.epochs):
        hidden, out = forward()
        err = out - t_mat
        mse = _mse(out, t_mat)
        if not np.isfinite(mse):
            raise DivergedLoss(f"decoder MSE became {mse}")
        scale = 2.0 / err.size
        d_out = scale * err
        g_l2 = d_out.T @ hidden
        g_b2 = d_out.sum(axis=0)
        d_hidden = (d_out @ params.l2) * (1.0 - hidden * hidden)
        g_l1 = d_hidden.T @ e_mat
        g_b1 = d_hidden.sum(axis=0)
        params.l1 -= hyper.lr * g_l1
        params.b1 -= hyper.lr * g_b1
        params.l2 -= hyper.lr * g_l2
        params.b2 -= hyper.lr * g_b2
    if hyper.epochs > 0:
        mse = _mse(forward()[1], t_mat)
    return params, float(mse)


def _mse(out: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean((out - target) ** 2))
