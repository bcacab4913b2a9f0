from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pytest

from hostile_posts.corpus_io import (
    Corpus,
    Post,
    default_stopwords,
    load_corpus,
    load_lexicon,
    load_word_vectors,
)
from hostile_posts.ensemble import LEVEL1, EnsembleConfig, EnsembleModel, Slot
from hostile_posts.features import FeatureResources
from hostile_posts.labels import HOSTILE_LABELS, Label
from hostile_posts.learners import ExternalScores
from hostile_posts.synthetic import SyntheticSpec, write_synthetic_dataset


@pytest.fixture(scope="session")
def synth_paths(tmp_path_factory):
    return write_synthetic_dataset(tmp_path_factory.mktemp("synth"), SyntheticSpec(seed=42))


@pytest.fixture(scope="session")
def synth_train(synth_paths):
    return load_corpus(synth_paths["train"], split="train")


@pytest.fixture(scope="session")
def synth_test(synth_paths):
    return load_corpus(synth_paths["test"], split="test")


@pytest.fixture(scope="session")
def synth_resources(synth_paths):
    return FeatureResources(
        stopwords=default_stopwords().tokens,
        lexicons={"hate": load_lexicon(synth_paths["hate"], "hate"),
                  "swear": load_lexicon(synth_paths["swear"], "swear")},
        word_vectors=load_word_vectors(synth_paths["word_vectors"]),
    )


@dataclass
class RecordingScores(ExternalScores):
    """External scores that remember which ids were asked for."""

    calls: list[str] = field(default_factory=list)

    def score(self, ids):
        ids = [ids] if isinstance(ids, str) else list(ids)
        self.calls.extend(ids)
        return super().score(ids)


def mock_model(level1: dict[str, float], level2: dict[Label, dict[str, float]],
               fallback="hate_offensive") -> EnsembleModel:
    """Ensemble whose five slots are id-keyed probability tables."""
    def slot(label, probs):
        return Slot(label, "external:mock", RecordingScores(dict(probs), "mock"))

    return EnsembleModel(
        slot(LEVEL1, level1),
        {label: slot(label, level2[label]) for label in HOSTILE_LABELS},
        FeatureResources(),
        EnsembleConfig(fallback=fallback),
    )


def posts(*ids: str) -> Corpus:
    return Corpus(tuple(Post(i, f"text {i}", None) for i in ids))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> None:
    """Print and remember one pass/fail line for the acceptance summary."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
