from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import Any, ClassVar

import numpy as np

from ..errors import TrainingError


def sigmoid(score: np.ndarray) -> np.ndarray:
    """Logistic squash aligned with the sign of ``score``.

    ``prob >= 0.5`` holds exactly when ``score >= 0``, even where rounding in
    ``1 / (1 + exp(-s))`` would give 0.5 for a tiny negative score.
    """
    score = np.asarray(score, dtype=np.float64)
    out = np.empty_like(score)
    pos = score >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-score[pos]))
    e = np.exp(score[~pos])
    out[~pos] = e / (1.0 + e)
    out[~pos] = np.minimum(out[~pos], np.nextafter(0.5, 0.0))
    return out


class BinaryClassifier:
    """Common surface of every scorer.

    ``input_kind`` says what the ensemble must feed it: ``"features"``
    (assembled vectors), ``"text"`` (raw post text) or ``"id"`` (post ids).
    """

    kind: ClassVar[str] = "abstract"
    input_kind: ClassVar[str] = "features"

    def score(self, inputs) -> np.ndarray:
        raise NotImplementedError

    def prob(self, inputs) -> np.ndarray:
        return sigmoid(self.score(inputs))

    def predict(self, inputs) -> np.ndarray:
        return (self.score(inputs) >= 0).astype(np.int64)

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


def check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise TrainingError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if len(X) != len(y):
        raise TrainingError(f"{len(X)} feature rows but {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise TrainingError("feature matrix contains non-finite values")
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be 0/1")
    return X, y.astype(np.int64)


def balanced_weights(labels: Sequence[int]) -> tuple[float, float]:
    """``(w0, w1)`` with ``w_c = N / (2 * N_c)``."""
    y = np.asarray(labels)
    n = len(y)
    n1 = int(np.count_nonzero(y == 1))
    n0 = int(np.count_nonzero(y == 0))
    if n0 + n1 != n:
        raise TrainingError("labels must be 0/1")
    if n0 == 0 or n1 == 0:
        raise TrainingError("balanced weights need both classes present")
    return n / (2 * n0), n / (2 * n1)


def class_weights(y: np.ndarray, spec: str | Mapping | None) -> tuple[float, float]:
    if spec is None or spec == "none":
        return 1.0, 1.0
    if spec == "balanced":
        return balanced_weights(y)
    return float(spec[0]), float(spec[1])


def as_floats(a) -> list:
    """Nested lists of Python floats; ``json`` writes them with round-trip precision."""
    return np.asarray(a, dtype=np.float64).tolist()
