"""Two-level ensemble classifier for hostile Hindi social-media posts."""

from __future__ import annotations

__version__ = "0.1.0"

from .bundle import load_model, save_model
from .corpus_io import Corpus, Post, corpus_stats, load_corpus
from .ensemble import (
    EnsembleConfig,
    EnsembleModel,
    FallbackStrategy,
    LabelPowersetModel,
    train,
    train_ensemble,
    train_label_powerset,
)
from .errors import BundleError, ConfigError, DataError, HostilePostsError, TrainingError
from .features import FeatureResources
from .labels import Label
from .metrics import coarse_f1, evaluate, weighted_fine_f1

__all__ = [
    "BundleError", "ConfigError", "Corpus", "DataError", "EnsembleConfig", "EnsembleModel",
    "FallbackStrategy", "FeatureResources", "HostilePostsError", "Label", "LabelPowersetModel",
    "Post", "TrainingError", "coarse_f1", "corpus_stats", "evaluate", "load_corpus", "load_model",
    "save_model", "train", "train_ensemble", "train_label_powerset", "weighted_fine_f1",
]
