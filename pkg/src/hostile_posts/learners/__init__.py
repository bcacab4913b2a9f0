"""Trainable binary scorers behind one interface."""

from ..errors import BundleError
from .base import BinaryClassifier, balanced_weights, sigmoid
from .external import ExternalScores
from .mlp import MlpConfig, MlpModel, train_mlp
from .ngram import NgramConfig, NgramLinearModel, train_ngram_linear
from .svm import SvmConfig, SvmModel, gamma_scale, train_svm

MODEL_TYPES = {cls.kind: cls for cls in (SvmModel, MlpModel, NgramLinearModel, ExternalScores)}


def classifier_from_dict(d: dict) -> BinaryClassifier:
    try:
        cls = MODEL_TYPES[d["kind"]]
    except KeyError:
        raise BundleError(f"unknown classifier kind {d.get('kind')!r}") from None
    return cls.from_dict(d)


__all__ = [
    "BinaryClassifier", "ExternalScores", "MlpConfig", "MlpModel", "NgramConfig",
    "NgramLinearModel", "SvmConfig", "SvmModel", "balanced_weights", "classifier_from_dict",
    "gamma_scale", "sigmoid", "train_mlp", "train_ngram_linear", "train_svm",
]
