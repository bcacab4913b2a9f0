"""Adapter that serves precomputed probabilities (e.g. a fine-tuned transformer's)."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..corpus_io import load_external_scores
from ..errors import DataError
from .base import BinaryClassifier


@dataclass
class ExternalScores(BinaryClassifier):
    probs: Mapping[str, float]
    source: str = ""

    kind = "external"
    input_kind = "id"

    def __post_init__(self):
        for post_id, p in self.probs.items():
            if not 0.0 <= p <= 1.0:
                raise DataError(f"external score for {post_id} is {p}, outside [0, 1]")

    @classmethod
    def from_file(cls, path) -> "ExternalScores":
        return cls(load_external_scores(path), str(path))

    def _lookup(self, ids: Sequence[str]) -> np.ndarray:
        if isinstance(ids, str):
            ids = [ids]
        try:
            return np.array([self.probs[i] for i in ids], dtype=np.float64)
        except KeyError as exc:
            raise DataError(f"no external score for post {exc.args[0]!r} in {self.source or 'scores'}") from None

    def prob(self, ids) -> np.ndarray:
        return self._lookup(ids)

    def predict(self, ids) -> np.ndarray:
        return (self._lookup(ids) >= 0.5).astype(np.int64)

    def score(self, ids) -> np.ndarray:
        """Log-odds of the stored probability; sign agrees with ``predict``."""
        p = self._lookup(ids)
        with np.errstate(divide="ignore"):
            s = np.log(p) - np.log1p(-p)
        return np.where(p >= 0.5, np.maximum(s, 0.0), np.minimum(s, -np.finfo(float).tiny))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "source": self.source,
                "probs": {k: float(v) for k, v in sorted(self.probs.items())}}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExternalScores":
        return cls(dict(d["probs"]), d.get("source", ""))
