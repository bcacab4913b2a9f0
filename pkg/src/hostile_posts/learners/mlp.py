"""Two-layer fully connected network with a 2-way softmax output."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import TrainingError
from .base import BinaryClassifier, as_floats, check_xy, class_weights


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 64
    epochs: int = 10
    lr: float = 1e-3
    batch: int = 4
    momentum: float = 0.0
    class_weight: str | None = None

    def __post_init__(self):
        if min(self.hidden, self.epochs, self.batch) < 1 or self.lr <= 0:
            raise TrainingError("MLP hidden, epochs, batch and lr must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise TrainingError("momentum must lie in [0, 1)")


PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(d: int, hidden: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """He-normal hidden weights, Glorot-uniform output weights, zero biases."""
    limit = np.sqrt(6.0 / (hidden + 2))
    return {
        "W1": rng.normal(0.0, np.sqrt(2.0 / max(d, 1)), size=(hidden, d)),
        "b1": np.zeros(hidden),
        "W2": rng.uniform(-limit, limit, size=(2, hidden)),
        "b2": np.zeros(2),
    }


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(params: dict[str, np.ndarray], X: np.ndarray):
    z1 = X @ params["W1"].T + params["b1"]
    a1 = np.maximum(z1, 0.0)
    logits = a1 @ params["W2"].T + params["b2"]
    return logits, (z1, a1)


def loss_and_grads(params, X, y, sample_weight=None):
    """Weighted mean cross-entropy and its gradient w.r.t. every parameter."""
    n = len(X)
    sw = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    norm = sw.sum()
    logits, (z1, a1) = forward(params, X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -(sw * log_probs[np.arange(n), y]).sum() / norm

    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), y] -= 1.0
    dlogits *= (sw / norm)[:, None]
    da1 = dlogits @ params["W2"]
    dz1 = da1 * (z1 > 0)
    grads = {
        "W2": dlogits.T @ a1,
        "b2": dlogits.sum(axis=0),
        "W1": dz1.T @ X,
        "b1": dz1.sum(axis=0),
    }
    return float(loss), grads


@dataclass
class MlpModel(BinaryClassifier):
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    loss_history: list[float] = field(default_factory=list, repr=False)
    epoch_losses: list[float] = field(default_factory=list, repr=False)

    kind = "mlp"
    input_kind = "features"

    @property
    def params(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    def logits(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return forward(self.params, X)[0]

    def softmax(self, X) -> np.ndarray:
        return softmax(self.logits(X))

    def score(self, X) -> np.ndarray:
        logits = self.logits(X)
        return logits[:, 1] - logits[:, 0]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **{k: as_floats(v) for k, v in self.params.items()}}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MlpModel":
        W1 = np.array(d["W1"], dtype=np.float64)
        if W1.ndim == 1:  # zero-width input
            W1 = W1.reshape(len(d["b1"]), 0)
        return cls(W1, np.array(d["b1"], dtype=np.float64),
                   np.array(d["W2"], dtype=np.float64), np.array(d["b2"], dtype=np.float64))


def train_mlp(X, y, cfg: MlpConfig = MlpConfig(), seed: int = 0) -> MlpModel:
    """Mini-batch SGD on cross-entropy for exactly ``cfg.epochs`` epochs.

    One ``numpy`` generator seeded with ``seed`` drives initialization and
    the per-epoch shuffles.
    """
    X, y = check_xy(X, y)
    if len(X) == 0:
        raise TrainingError("MLP training set is empty")
    rng = np.random.default_rng(seed)
    params = init_params(X.shape[1], cfg.hidden, rng)
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    if cfg.class_weight is None:
        sw = None
    else:
        w0, w1 = class_weights(y, cfg.class_weight)
        sw = np.where(y == 1, w1, w0)

    history: list[float] = []
    epoch_losses: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(X))
        total = 0.0
        for start in range(0, len(X), cfg.batch):
            idx = order[start:start + cfg.batch]
            loss, grads = loss_and_grads(params, X[idx], y[idx], None if sw is None else sw[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"MLP loss became {loss} in epoch {epoch + 1}")
            for k in PARAM_NAMES:
                velocity[k] = cfg.momentum * velocity[k] - cfg.lr * grads[k]
                params[k] += velocity[k]
            history.append(loss)
            total += loss * len(idx)
        epoch_losses.append(total / len(X))
    return MlpModel(params["W1"], params["b1"], params["W2"], params["b2"],
                    loss_history=history, epoch_losses=epoch_losses)
