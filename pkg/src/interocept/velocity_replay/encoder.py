"""Siamese GRU encoder trained with a margin contrastive loss.

The recurrence is the fixed convention h_t = (1-z) h_{t-1} + z hhat_t over
a scalar input stream; both branches of a pair share one parameter set, so
their gradients accumulate into the same tensors. Training is full-batch
plain gradient descent with reverse-mode gradients written out by hand:
the whole model is small enough that an autodiff dependency would cost
more than these hundred lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, DivergedLoss, EmptyTrainingSet, NonFiniteInput
from .windows import PairLabel, Window, WindowPair

_TENSORS = ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h", "p", "p_b")


@dataclass
class GruParams:
    """Gate weights for scalar input, hidden size H, embedding size d.

    Shapes: w_* (H, 1), u_* (H, H), b_* (H,), p (d, H), p_b (d,).
    """

    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_h: np.ndarray
    u_h: np.ndarray
    b_h: np.ndarray
    p: np.ndarray
    p_b: np.ndarray

    def __post_init__(self):
        h = self.b_z.shape[0]
        d = self.p_b.shape[0]
        expected = {
            "w_z": (h, 1), "u_z": (h, h), "b_z": (h,),
            "w_r": (h, 1), "u_r": (h, h), "b_r": (h,),
            "w_h": (h, 1), "u_h": (h, h), "b_h": (h,),
            "p": (d, h), "p_b": (d,),
        }
        for name, shape in expected.items():
            tensor = np.asarray(getattr(self, name), dtype=float)
            if tensor.shape != shape:
                raise DimensionMismatch(f"{name}: {tensor.shape} != {shape}")
            if not np.isfinite(tensor).all():
                raise NonFiniteInput(f"{name} contains non-finite values")
            setattr(self, name, tensor)

    @property
    def hidden_size(self) -> int:
        return self.b_z.shape[0]

    @property
    def embedding_size(self) -> int:
        return self.p_b.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in _TENSORS}


def init_params(hidden: int, embedding: int, seed: int) -> GruParams:
    rng = np.random.default_rng(seed)

    def u(shape):
        return rng.uniform(-0.1, 0.1, shape)

    return GruParams(
        u((hidden, 1)), u((hidden, hidden)), u(hidden),
        u((hidden, 1)), u((hidden, hidden)), u(hidden),
        u((hidden, 1)), u((hidden, hidden)), u(hidden),
        u((embedding, hidden)), u(embedding),
    )


def zero_grads(params: GruParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(t) for name, t in params.tensors().items()}


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _forward(params: GruParams, values) -> tuple[np.ndarray, list]:
    h = np.zeros(params.hidden_size)
    wz, wr, wh = params.w_z[:, 0], params.w_r[:, 0], params.w_h[:, 0]
    cache = []
    for x in values:
        z = _sigmoid(wz * x + params.u_z @ h + params.b_z)
        r = _sigmoid(wr * x + params.u_r @ h + params.b_r)
        hhat = np.tanh(wh * x + params.u_h @ (r * h) + params.b_h)
        h_new = (1.0 - z) * h + z * hhat
        cache.append((x, h, z, r, hhat))
        h = h_new
    return h, cache


def gru_encode(params: GruParams, window: Window) -> np.ndarray:
    """Embedding of one window: the projected final hidden state."""
    values = np.asarray(window.values, dtype=float)
    if not np.isfinite(values).all():
        raise NonFiniteInput("window contains non-finite values")
    h, _ = _forward(params, values)
    return params.p @ h + params.p_b


def _backward(params: GruParams, cache, d_h, grads) -> None:
    """Accumulate gradients through the recurrence, given dLoss/dh_final."""
    for x, h_prev, z, r, hhat in reversed(cache):
        d_z = d_h * (hhat - h_prev)
        d_hhat = d_h * z
        d_h_prev = d_h * (1.0 - z)

        d_ah = d_hhat * (1.0 - hhat * hhat)
        grads["w_h"][:, 0] += d_ah * x
        grads["b_h"] += d_ah
        grads["u_h"] += np.outer(d_ah, r * h_prev)
        d_rh = params.u_h.T @ d_ah
        d_r = d_rh * h_prev
        d_h_prev += d_rh * r

        d_ar = d_r * r * (1.0 - r)
        grads["w_r"][:, 0] += d_ar * x
        grads["b_r"] += d_ar
        grads["u_r"] += np.outer(d_ar, h_prev)
        d_h_prev += params.u_r.T @ d_ar

        d_az = d_z * z * (1.0 - z)
        grads["w_z"][:, 0] += d_az * x
        grads["b_z"] += d_az
        grads["u_z"] += np.outer(d_az, h_prev)
        d_h_prev += params.u_z.T @ d_az

        d_h = d_h_prev


def contrastive_loss(e1, e2, label: PairLabel, margin: float = 1.0) -> float:
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    if e1.shape != e2.shape:
        raise DimensionMismatch(f"{e1.shape} != {e2.shape}")
    d = float(np.linalg.norm(e1 - e2))
    if label is PairLabel.POSITIVE:
        return d * d
    return max(0.0, margin - d) ** 2


def _pair_loss_grads(params: GruParams, pair: WindowPair, margin: float, grads):
    """Loss of one pair plus its gradient contribution (shared weights)."""
    v1 = np.asarray(pair.a.values, dtype=float)
    v2 = np.asarray(pair.b.values, dtype=float)
    if not (np.isfinite(v1).all() and np.isfinite(v2).all()):
        raise NonFiniteInput("window contains non-finite values")
    h1, cache1 = _forward(params, v1)
    h2, cache2 = _forward(params, v2)
    e1 = params.p @ h1 + params.p_b
    e2 = params.p @ h2 + params.p_b

    diff = e1 - e2
    dist = float(np.linalg.norm(diff))
    if pair.label is PairLabel.POSITIVE:
        loss = dist * dist
        d_e1 = 2.0 * diff
    else:
        slack = margin - dist
        if slack <= 0.0 or dist < 1e-12:
            # Inactive hinge, or the non-differentiable D=0 corner where the
            # zero subgradient is the safe choice.
            return max(0.0, slack) ** 2
        loss = slack * slack
        d_e1 = (-2.0 * slack / dist) * diff
    d_e2 = -d_e1

    for h_last, cache, d_e in ((h1, cache1, d_e1), (h2, cache2, d_e2)):
        grads["p"] += np.outer(d_e, h_last)
        grads["p_b"] += d_e
        _backward(params, cache, params.p.T @ d_e, grads)
    return loss


def batch_loss_and_grads(params: GruParams, pairs, margin: float):
    """Mean contrastive loss over pairs and its full gradient."""
    if not pairs:
        raise EmptyTrainingSet("no training pairs")
    grads = zero_grads(params)
    total = 0.0
    for pair in pairs:
        total += _pair_loss_grads(params, pair, margin, grads)
    scale = 1.0 / len(pairs)
    for g in grads.values():
        g *= scale
    return total * scale, grads


@dataclass
class EncoderHyper:
    lr: float = 0.05
    epochs: int = 200
    margin: float = 1.0
    seed: int = 0
    hidden: int = 16
    embedding: int = 8


@dataclass
class TrainedEncoder:
    params: GruParams
    loss_curve: list[float] = field(default_factory=list)


def train_encoder(pairs, hyper: EncoderHyper) -> TrainedEncoder:
    """Full-batch gradient descent on the mean contrastive loss."""
    if not pairs:
        raise EmptyTrainingSet("no training pairs")
    params = init_params(hyper.hidden, hyper.embedding, hyper.seed)
    curve = []
    for _ in range(hyper.epochs):
        loss, grads = batch_loss_and_grads(params, pairs, hyper.margin)
        if not np.isfinite(loss):
            raise DivergedLoss(f"loss became {loss}")
        curve.append(loss)
        for name, g in grads.items():
            getattr(params, name)[...] -= hyper.lr * g
    return TrainedEncoder(params, curve)
