"""Class-weighted soft-margin SVM trained in the dual by SMO.

The solver minimizes ``0.5 * a^T Q a - sum(a)`` subject to
``0 <= a_i <= C * w_{y_i}`` and ``sum(a_i y_i) = 0`` where
``Q_ij = y_i y_j K(x_i, x_j)``. Each step updates the maximal violating
pair (first-order working-set selection, lowest index wins ties), so a run
is fully determined by the data order.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import TrainingError
from .base import BinaryClassifier, as_floats, check_xy, class_weights

logger = logging.getLogger(__name__)

TAU = 1e-12
_FULL_KERNEL_LIMIT = 4000


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    kernel: str = "rbf"
    gamma: float | str = "scale"
    tol: float = 1e-3
    max_passes: int = 1_000_000
    class_weight: str | None = "balanced"

    def __post_init__(self):
        if self.C <= 0 or self.tol <= 0 or self.max_passes <= 0:
            raise TrainingError("SVM C, tol and max_passes must be positive")
        if self.kernel not in ("linear", "rbf"):
            raise TrainingError(f"unsupported kernel {self.kernel!r}")
        if not (self.gamma == "scale" or float(self.gamma) > 0):
            raise TrainingError("gamma must be 'scale' or a positive number")


def gamma_scale(X) -> float:
    """``1 / (n_features * X.var())`` with the variance pooled over all entries."""
    X = np.asarray(X, dtype=np.float64)
    var = X.var()
    if X.size == 0 or var <= 0:
        raise TrainingError("gamma='scale' needs features with non-zero variance")
    return 1.0 / (X.shape[1] * var)


def kernel_matrix(kernel: str, gamma: float, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


class _KernelRows:
    """Rows of the training kernel matrix, precomputed when it fits in memory."""

    def __init__(self, kernel: str, gamma: float, X: np.ndarray):
        self.kernel, self.gamma, self.X = kernel, gamma, X
        self.full = kernel_matrix(kernel, gamma, X, X) if len(X) <= _FULL_KERNEL_LIMIT else None
        self.cache: dict[int, np.ndarray] = {}
        if self.full is not None:
            self.diag = np.diag(self.full).copy()
        elif kernel == "linear":
            self.diag = (X * X).sum(axis=1)
        else:
            self.diag = np.ones(len(X))

    def __getitem__(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        row = self.cache.get(i)
        if row is None:
            if len(self.cache) > 512:
                self.cache.pop(next(iter(self.cache)))
            row = kernel_matrix(self.kernel, self.gamma, self.X[i:i + 1], self.X)[0]
            self.cache[i] = row
        return row


@dataclass
class SvmModel(BinaryClassifier):
    kernel: str
    gamma: float
    C: float
    class_weights: tuple[float, float]
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for each support vector
    bias: float
    weights: np.ndarray | None = None  # collapsed primal weights, linear kernel only
    converged: bool = True
    iterations: int = 0
    kkt_gap: float = 0.0
    objective_history: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    kind = "svm"
    input_kind = "features"

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.weights is not None:
            return X @ self.weights + self.bias
        if len(self.dual_coef) == 0:
            return np.full(len(X), self.bias)
        K = kernel_matrix(self.kernel, self.gamma, X, self.support_vectors)
        return K @ self.dual_coef + self.bias

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind, "kernel": self.kernel, "gamma": self.gamma, "C": self.C,
            "class_weights": list(self.class_weights),
            "support_vectors": as_floats(self.support_vectors),
            "dual_coef": as_floats(self.dual_coef), "bias": float(self.bias),
            "weights": None if self.weights is None else as_floats(self.weights),
            "converged": self.converged, "iterations": self.iterations,
            "kkt_gap": float(self.kkt_gap),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SvmModel":
        dim = len(d["weights"]) if d["weights"] is not None else None
        sv = np.array(d["support_vectors"], dtype=np.float64)
        if sv.size == 0:
            sv = sv.reshape(0, dim or 0)
        return cls(
            kernel=d["kernel"], gamma=float(d["gamma"]), C=float(d["C"]),
            class_weights=tuple(d["class_weights"]), support_vectors=sv,
            dual_coef=np.array(d["dual_coef"], dtype=np.float64), bias=float(d["bias"]),
            weights=None if d["weights"] is None else np.array(d["weights"], dtype=np.float64),
            converged=bool(d["converged"]), iterations=int(d["iterations"]),
            kkt_gap=float(d["kkt_gap"]),
        )


def _bias(alpha, y, G, C_i) -> float:
    yG = y * G
    upper = alpha >= C_i
    lower = alpha <= 0
    free = ~upper & ~lower
    if free.any():
        rho = yG[free].mean()
    else:
        ub_mask = (upper & (y < 0)) | (lower & (y > 0))
        lb_mask = (upper & (y > 0)) | (lower & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = (ub + lb) / 2
    return float(-rho) + 0.0  # no negative zero


def train_svm(X, y, cfg: SvmConfig = SvmConfig()) -> SvmModel:
    """Fit a binary SVM on 0/1 labels.

    Stops when the maximal KKT violation drops to ``cfg.tol``. If that has
    not happened after ``cfg.max_passes`` pair updates the current iterate is
    returned with ``converged=False`` and a warning.
    """
    X, y01 = check_xy(X, y)
    n0, n1 = np.count_nonzero(y01 == 0), np.count_nonzero(y01 == 1)
    if min(n0, n1) < 1:
        raise TrainingError("SVM training needs both classes")
    w0, w1 = class_weights(y01, cfg.class_weight)
    if cfg.kernel == "linear":
        gamma = 0.0
    else:
        gamma = gamma_scale(X) if cfg.gamma == "scale" else float(cfg.gamma)

    y_pm = np.where(y01 == 1, 1.0, -1.0)
    C_i = cfg.C * np.where(y01 == 1, w1, w0)
    n = len(y_pm)
    K = _KernelRows(cfg.kernel, gamma, X)
    alpha = np.zeros(n)
    G = -np.ones(n)
    history = [0.0]
    converged = False
    gap = np.inf
    it = 0
    while it < cfg.max_passes:
        v = -y_pm * G
        up = ((y_pm > 0) & (alpha < C_i)) | ((y_pm < 0) & (alpha > 0))
        low = ((y_pm > 0) & (alpha > 0)) | ((y_pm < 0) & (alpha < C_i))
        if not up.any() or not low.any():
            converged, gap = True, 0.0
            break
        i = int(np.argmax(np.where(up, v, -np.inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        gap = v[i] - v[j]
        if gap <= cfg.tol:
            converged = True
            break
        it += 1
        Ki, Kj = K[i], K[j]
        Qij = y_pm[i] * y_pm[j] * Ki[j]
        ai, aj = alpha[i], alpha[j]
        Ci, Cj = C_i[i], C_i[j]
        if y_pm[i] != y_pm[j]:
            quad = max(K.diag[i] + K.diag[j] + 2 * Qij, TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > Ci - Cj:
                if ni > Ci:
                    ni, nj = Ci, Ci - diff
            elif nj > Cj:
                nj, ni = Cj, Cj + diff
        else:
            quad = max(K.diag[i] + K.diag[j] - 2 * Qij, TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > Ci:
                if ni > Ci:
                    ni, nj = Ci, total - Ci
            elif nj < 0:
                nj, ni = 0.0, total
            if total > Cj:
                if nj > Cj:
                    nj, ni = Cj, total - Cj
            elif ni < 0:
                ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        G += y_pm * (y_pm[i] * (ni - ai) * Ki + y_pm[j] * (nj - aj) * Kj)
        # dual objective sum(a) - 0.5 a^T Q a, using Q a = G + 1
        history.append(float(0.5 * alpha.sum() - 0.5 * alpha @ G))

    if not converged:
        msg = f"SMO stopped after {it} updates with KKT gap {gap:.3g} > tol {cfg.tol}"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        logger.warning(msg)

    sv = alpha > 0
    coef = alpha[sv] * y_pm[sv]
    weights = coef @ X[sv] if cfg.kernel == "linear" else None
    if weights is not None and not sv.any():
        weights = np.zeros(X.shape[1])
    return SvmModel(
        kernel=cfg.kernel, gamma=gamma, C=cfg.C, class_weights=(w0, w1),
        support_vectors=X[sv].copy(), dual_coef=coef, bias=_bias(alpha, y_pm, G, C_i),
        weights=weights, converged=converged, iterations=it, kkt_gap=float(gap),
        objective_history=np.array(history),
    )
