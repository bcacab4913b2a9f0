"""TF-IDF n-gram logistic regression over raw post text.

Used for the slots a fine-tuned transformer would fill. Features are word
1-2-grams and character 2-4-grams of the lowercased raw text; documents are
L2-normalized TF-IDF vectors with smoothed idf ``ln((N+1)/(df+1)) + 1``.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from ..errors import TrainingError
from .base import BinaryClassifier, as_floats, class_weights


@dataclass(frozen=True)
class NgramConfig:
    word_ngrams: tuple[int, int] = (1, 2)
    char_ngrams: tuple[int, int] = (2, 4)
    min_df: int = 1
    l2: float = 1e-4
    max_iter: int = 500
    tol: float = 1e-6
    class_weight: str | None = "balanced"

    def __post_init__(self):
        if self.min_df < 1 or self.l2 <= 0 or self.max_iter < 1 or self.tol <= 0:
            raise TrainingError("n-gram min_df, l2, max_iter and tol must be positive")


def _prepare(text: str) -> str:
    return unicodedata.normalize("NFC", text).lower()


def extract_ngrams(text: str, word_ngrams=(1, 2), char_ngrams=(2, 4)) -> Counter[str]:
    """Word and character n-gram counts; a range starting at 0, e.g. ``(0, 0)``, turns that kind off."""
    text = _prepare(text)
    grams: Counter[str] = Counter()
    words = text.split()
    for n in range(max(word_ngrams[0], 1), word_ngrams[1] + 1):
        for i in range(len(words) - n + 1):
            grams["w:" + " ".join(words[i:i + n])] += 1
    squashed = " ".join(words)
    for n in range(max(char_ngrams[0], 1), char_ngrams[1] + 1):
        for i in range(len(squashed) - n + 1):
            grams["c:" + squashed[i:i + n]] += 1
    return grams


def smooth_idf(df: np.ndarray, n_docs: int) -> np.ndarray:
    return np.log((n_docs + 1.0) / (np.asarray(df, dtype=np.float64) + 1.0)) + 1.0


@dataclass
class NgramVectorizer:
    features: tuple[str, ...]
    idf: np.ndarray
    word_ngrams: tuple[int, int] = (1, 2)
    char_ngrams: tuple[int, int] = (2, 4)

    def __post_init__(self):
        self.index = {f: i for i, f in enumerate(self.features)}

    @classmethod
    def fit(cls, texts: Sequence[str], cfg: NgramConfig) -> "NgramVectorizer":
        df: Counter[str] = Counter()
        for text in texts:
            df.update(extract_ngrams(text, cfg.word_ngrams, cfg.char_ngrams).keys())
        features = tuple(sorted(f for f, n in df.items() if n >= cfg.min_df))
        if not features:
            raise TrainingError("n-gram vocabulary is empty")
        idf = smooth_idf([df[f] for f in features], len(texts))
        return cls(features, idf, tuple(cfg.word_ngrams), tuple(cfg.char_ngrams))

    def transform(self, texts: Sequence[str]) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for r, text in enumerate(texts):
            grams = extract_ngrams(text, self.word_ngrams, self.char_ngrams)
            hits = sorted((self.index[g], n) for g, n in grams.items() if g in self.index)
            if not hits:
                continue
            c = np.array([h[0] for h in hits])
            v = np.array([h[1] for h in hits], dtype=np.float64) * self.idf[c]
            v /= np.sqrt(v @ v)
            rows.extend([r] * len(c))
            cols.extend(c.tolist())
            vals.extend(v.tolist())
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(texts), len(self.features)))

    def to_dict(self) -> dict[str, Any]:
        return {"features": list(self.features), "idf": as_floats(self.idf),
                "word_ngrams": list(self.word_ngrams), "char_ngrams": list(self.char_ngrams)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "NgramVectorizer":
        return cls(tuple(d["features"]), np.array(d["idf"], dtype=np.float64),
                   tuple(d["word_ngrams"]), tuple(d["char_ngrams"]))


def fit_logistic(X: sp.csr_matrix, y: np.ndarray, cfg: NgramConfig) -> tuple[np.ndarray, float]:
    """Weighted logistic loss + ``l2/2 * |w|^2`` (bias unpenalized), minimized by L-BFGS."""
    y = np.asarray(y)
    w0, w1 = class_weights(y, cfg.class_weight)
    sw = np.where(y == 1, w1, w0)
    sw = sw / sw.sum()
    s = np.where(y == 1, 1.0, -1.0)
    d = X.shape[1]

    def objective(theta):
        w, b = theta[:d], theta[d]
        margin = s * (X @ w + b)
        loss = (sw * np.logaddexp(0.0, -margin)).sum() + 0.5 * cfg.l2 * (w @ w)
        g = -sw * s * np.exp(-np.logaddexp(0.0, margin))  # d loss / d score
        grad = np.empty(d + 1)
        grad[:d] = X.T @ g + cfg.l2 * w
        grad[d] = g.sum()
        return loss, grad

    res = scipy.optimize.minimize(
        objective, np.zeros(d + 1), jac=True, method="L-BFGS-B",
        options={"maxiter": cfg.max_iter, "gtol": cfg.tol, "ftol": 1e-12},
    )
    if not np.all(np.isfinite(res.x)):
        raise TrainingError("n-gram logistic regression diverged")
    return res.x[:d].copy(), float(res.x[d])


@dataclass
class NgramLinearModel(BinaryClassifier):
    vectorizer: NgramVectorizer
    weights: np.ndarray
    bias: float

    kind = "ngram"
    input_kind = "text"

    def score(self, texts: Sequence[str]) -> np.ndarray:
        if isinstance(texts, str):
            texts = [texts]
        return self.vectorizer.transform(texts) @ self.weights + self.bias

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "vectorizer": self.vectorizer.to_dict(),
                "weights": as_floats(self.weights), "bias": self.bias}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "NgramLinearModel":
        return cls(NgramVectorizer.from_dict(d["vectorizer"]),
                   np.array(d["weights"], dtype=np.float64), float(d["bias"]))


def train_ngram_linear(texts: Sequence[str], y, cfg: NgramConfig = NgramConfig()) -> NgramLinearModel:
    if len(texts) == 0:
        raise TrainingError("n-gram training corpus is empty")
    y = np.asarray(y, dtype=np.int64)
    if len(y) != len(texts):
        raise TrainingError(f"{len(texts)} texts but {len(y)} labels")
    vec = NgramVectorizer.fit(texts, cfg)
    w, b = fit_logistic(vec.transform(texts), y, cfg)
    return NgramLinearModel(vec, w, b)
