"""Two-level Binary Relevance ensemble and the Label Powerset alternative.

Level 1 separates hostile from non-hostile posts and is trained on every
sample. Four level-2 classifiers (fake, hate, offensive, defamation) are
trained on hostile samples only and consulted only for posts that level 1
routes to hostile. Their positive predictions are unioned; an empty union
is resolved by a :class:`FallbackStrategy`.
"""

from __future__ import annotations

import enum
import logging
import time
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .corpus_io import Corpus, Post
from .errors import ConfigError, DataError, TrainingError
from .features import (
    DEFAULT_MIN_FREQ,
    VOCAB_KINDS,
    FeatureResources,
    FeatureSpec,
    PostAnalysis,
    assemble_raw,
    build_vocab,
    default_recipe,
)
from .labels import (
    HOSTILE_LABELS,
    NON_HOSTILE_SET,
    Label,
    format_labelset,
    make_labelset,
    parse_labelset,
)
from .learners import (
    BinaryClassifier,
    ExternalScores,
    MlpConfig,
    NgramConfig,
    SvmConfig,
    train_mlp,
    train_ngram_linear,
    train_svm,
)
from .learners.base import as_floats, sigmoid
from .learners.ngram import NgramVectorizer, fit_logistic

logger = logging.getLogger(__name__)

LEVEL1 = Label.NON_HOSTILE  # slot key of the hostility router; its positive class is "hostile"
SLOTS: tuple[Label, ...] = (LEVEL1, *HOSTILE_LABELS)
BACKENDS = ("svm", "mlp", "ngram", "external")
DEFAULT_BACKENDS: Mapping[Label, str] = {
    Label.NON_HOSTILE: "ngram",
    Label.FAKE: "ngram",
    Label.HATE: "mlp",
    Label.OFFENSIVE: "ngram",
    Label.DEFAMATION: "svm",
}


class FallbackStrategy(str, enum.Enum):
    HATE_OFFENSIVE = "hate_offensive"
    MAX_PROBABILITY = "max_prob"


def parse_backend(spec: str) -> tuple[str, str | None]:
    """``"svm"`` -> ("svm", None); ``"external:path"`` -> ("external", "path")."""
    name, _, arg = spec.partition(":")
    if name not in BACKENDS:
        raise ConfigError(f"unknown backend {spec!r}; expected one of {', '.join(BACKENDS)}")
    if name == "external" and not arg:
        raise ConfigError("external backend needs a scores path: external:<path>")
    if name != "external" and arg:
        raise ConfigError(f"backend {name!r} takes no argument")
    return name, arg or None


@dataclass(frozen=True)
class EnsembleConfig:
    seed: int = 42
    strategy: str = "binary_relevance"
    backends: Mapping[Label, str] = field(default_factory=lambda: dict(DEFAULT_BACKENDS))
    fallback: FallbackStrategy = FallbackStrategy.HATE_OFFENSIVE
    min_freq: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_MIN_FREQ))
    svm: SvmConfig = SvmConfig()
    mlp: MlpConfig = MlpConfig()
    ngram: NgramConfig = NgramConfig()
    jobs: int = 1

    def __post_init__(self):
        if self.strategy not in ("binary_relevance", "label_powerset"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        backends = {**DEFAULT_BACKENDS, **{Label.parse(str(k)) if not isinstance(k, Label) else k: v
                                          for k, v in self.backends.items()}}
        for spec in backends.values():
            parse_backend(spec)
        object.__setattr__(self, "backends", backends)
        object.__setattr__(self, "fallback", FallbackStrategy(self.fallback))
        min_freq = {**DEFAULT_MIN_FREQ, **self.min_freq}
        if any(v < 1 for v in min_freq.values()) or set(min_freq) != set(VOCAB_KINDS):
            raise ConfigError(f"min_freq must give a positive threshold for {VOCAB_KINDS}")
        object.__setattr__(self, "min_freq", min_freq)
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def slot_seed(self, label: Label) -> int:
        return int(np.random.SeedSequence([self.seed, label.rank]).generate_state(1)[0])


@dataclass
class Slot:
    """One trained classifier plus what it needs to turn posts into inputs."""

    label: Label
    backend: str
    classifier: BinaryClassifier
    spec: FeatureSpec | None = None
    seed: int = 0
    n_train: int = 0
    n_positive: int = 0

    def scores(self, posts: Sequence[Post], analyses: Callable[[Post], PostAnalysis],
               resources: FeatureResources) -> np.ndarray:
        kind = self.classifier.input_kind
        if kind == "text":
            inputs = [p.text for p in posts]
        elif kind == "id":
            inputs = [p.id for p in posts]
        else:
            if self.spec is None:
                raise DataError(f"{self.label} classifier has no feature spec")
            if not posts:
                return np.zeros(0)
            inputs = self.spec.standardize(
                np.vstack([assemble_raw(analyses(p), self.spec, resources) for p in posts]))
        if not posts:
            return np.zeros(0)
        return np.asarray(self.classifier.score(inputs), dtype=np.float64)

    def probs(self, posts, analyses, resources) -> tuple[np.ndarray, np.ndarray]:
        scores = self.scores(posts, analyses, resources)
        if isinstance(self.classifier, ExternalScores):
            return scores, self.classifier.prob([p.id for p in posts])
        return scores, sigmoid(scores)


def fallback_resolve(probs: Mapping[Label, float], strategy: FallbackStrategy) -> frozenset[Label]:
    """Label set for a hostile-routed post that no level-2 classifier claimed."""
    strategy = FallbackStrategy(strategy)
    if strategy is FallbackStrategy.HATE_OFFENSIVE:
        return frozenset({Label.HATE, Label.OFFENSIVE})
    best = None
    for label in HOSTILE_LABELS:  # canonical order: first maximum wins ties
        if label in probs and (best is None or probs[label] > probs[best]):
            best = label
    if best is None:
        raise DataError("max-probability fallback needs at least one hostile probability")
    return frozenset({best})


@dataclass
class PostPrediction:
    id: str
    labels: frozenset[Label]
    hostile_prob: float
    probs: dict[Label, float] = field(default_factory=dict)
    fallback: bool = False


@dataclass
class BatchResult:
    predictions: list[PostPrediction]
    failures: list[tuple[str, str]]
    fallback_count: int
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def labelsets(self) -> list[tuple[str, frozenset[Label]]]:
        return [(p.id, p.labels) for p in self.predictions]


def _scores_with_failures(slot: Slot, posts, analyses, resources, failures: dict[str, str]):
    """Score a batch; if it fails, retry post by post and record the culprits."""
    try:
        return list(posts), *slot.probs(posts, analyses, resources)
    except DataError:
        pass
    ok, scores, probs = [], [], []
    for post in posts:
        try:
            s, p = slot.probs([post], analyses, resources)
        except DataError as exc:
            failures[post.id] = f"{slot.label} classifier: {exc}"
            continue
        ok.append(post)
        scores.append(s[0])
        probs.append(p[0])
    return ok, np.array(scores), np.array(probs)


@dataclass
class EnsembleModel:
    level1: Slot
    level2: dict[Label, Slot]
    resources: FeatureResources
    config: EnsembleConfig = field(default_factory=EnsembleConfig)
    strategy = "binary_relevance"

    def __post_init__(self):
        if set(self.level2) != set(HOSTILE_LABELS):
            raise ConfigError("level-2 classifiers must cover exactly fake, hate, offensive, defamation")

    @property
    def slots(self) -> dict[Label, Slot]:
        return {LEVEL1: self.level1, **{l: self.level2[l] for l in HOSTILE_LABELS}}

    @property
    def fallback(self) -> FallbackStrategy:
        return self.config.fallback

    def predict_batch(self, posts: Sequence[Post] | Corpus) -> BatchResult:
        posts = list(posts)
        cache: dict[str, PostAnalysis] = {}

        def analyses(post: Post) -> PostAnalysis:
            a = cache.get(post.id)
            if a is None or a.post is not post:
                a = cache[post.id] = self.resources.analyze(post)
            return a

        failures: dict[str, str] = {}
        timing: dict[str, float] = {}
        t0 = time.perf_counter()
        ok, s1, p1 = _scores_with_failures(self.level1, posts, analyses, self.resources, failures)
        timing[LEVEL1.value] = time.perf_counter() - t0
        hostile_prob = {post.id: float(p) for post, p in zip(ok, p1)}
        routed = [post for post, s in zip(ok, s1) if s >= 0]

        level2: dict[str, dict[Label, tuple[float, float]]] = {p.id: {} for p in routed}
        for label in HOSTILE_LABELS:
            t0 = time.perf_counter()
            todo = [p for p in routed if p.id not in failures]
            done, s2, p2 = _scores_with_failures(self.level2[label], todo, analyses,
                                                 self.resources, failures)
            for post, s, p in zip(done, s2, p2):
                level2[post.id][label] = (float(s), float(p))
            timing[label.value] = time.perf_counter() - t0

        predictions = []
        n_fallback = 0
        for post in posts:
            if post.id in failures:
                continue
            if post.id not in level2:
                predictions.append(PostPrediction(post.id, NON_HOSTILE_SET, hostile_prob[post.id]))
                continue
            outcome = level2[post.id]
            probs = {label: outcome[label][1] for label in HOSTILE_LABELS}
            chosen = frozenset(label for label in HOSTILE_LABELS if outcome[label][0] >= 0)
            used_fallback = not chosen
            if used_fallback:
                chosen = fallback_resolve(probs, self.config.fallback)
                n_fallback += 1
            predictions.append(PostPrediction(post.id, make_labelset(chosen),
                                              hostile_prob[post.id], probs, used_fallback))
        return BatchResult(predictions, [(p.id, failures[p.id]) for p in posts if p.id in failures],
                           n_fallback, timing)

    def predict(self, post: Post) -> frozenset[Label]:
        result = self.predict_batch([post])
        if result.failures:
            raise DataError(f"post {post.id}: {result.failures[0][1]}")
        return result.predictions[0].labels


def predict(model, post: Post) -> frozenset[Label]:
    return model.predict(post)


def predict_batch(model, corpus: Sequence[Post] | Corpus) -> BatchResult:
    return model.predict_batch(corpus)


def _check_trainable(corpus: Corpus) -> tuple[list[Post], list[Post]]:
    if not corpus.labeled:
        missing = next(p.id for p in corpus if p.labels is None)
        raise DataError(f"training corpus has unlabeled post {missing}")
    hostile = [p for p in corpus if p.hostile]
    if not hostile:
        raise DataError("training corpus has no hostile samples")
    if len(hostile) == len(corpus):
        raise DataError("training corpus has no non-hostile samples")
    for label in HOSTILE_LABELS:
        pos = sum(1 for p in hostile if label in p.labels)
        if pos < 2 or len(hostile) - pos < 2:
            raise TrainingError(
                f"{label}: needs >= 2 positive and >= 2 negative hostile samples "
                f"(has {pos} positive, {len(hostile) - pos} negative)"
            )
    return list(corpus), hostile


def _train_slot(label: Label, backend_spec: str, posts: list[Post], y: np.ndarray,
                analyses: dict[str, PostAnalysis], resources: FeatureResources,
                config: EnsembleConfig) -> tuple[Slot, float]:
    t0 = time.perf_counter()
    backend, arg = parse_backend(backend_spec)
    seed = config.slot_seed(label)
    spec = None
    if backend == "external":
        clf: BinaryClassifier = ExternalScores.from_file(arg)
    elif backend == "ngram":
        clf = train_ngram_linear([p.text for p in posts], y, config.ngram)
    else:
        spec = default_recipe(label, resources)
        if not posts:
            raise TrainingError(f"{label}: empty training set")
        X_raw = np.vstack([assemble_raw(analyses[p.id], spec, resources) for p in posts])
        spec = spec.fit_standardization(X_raw)
        X = spec.standardize(X_raw)
        if X.shape[1] == 0:
            raise TrainingError(f"{label}: feature spec is empty; lower min_freq or add resources")
        try:
            clf = train_svm(X, y, config.svm) if backend == "svm" else train_mlp(X, y, config.mlp, seed)
        except TrainingError as exc:
            raise TrainingError(f"{label}: {exc}") from None
    slot = Slot(label, backend_spec, clf, spec, seed, len(posts), int(np.sum(y)))
    return slot, time.perf_counter() - t0


def build_vocabs(analyses: Sequence[PostAnalysis], hostile: Sequence[PostAnalysis],
                 config: EnsembleConfig, labels: Sequence[Label]) -> dict:
    vocabs = {}
    for label in labels:
        pool = analyses if label is LEVEL1 else hostile
        for kind in VOCAB_KINDS:
            vocabs[(label, kind)] = build_vocab(pool, label, kind, config.min_freq[kind])
    return vocabs


def train_ensemble(corpus: Corpus, config: EnsembleConfig = EnsembleConfig(),
                   resources: FeatureResources | None = None,
                   timings: dict[str, float] | None = None) -> EnsembleModel:
    """Train the router on all samples and each hostile-dimension classifier on hostile samples."""
    resources = resources or FeatureResources()
    posts, hostile = _check_trainable(corpus)
    feature_slots = [l for l in SLOTS if parse_backend(config.backends[l])[0] in ("svm", "mlp")]
    analyses = {p.id: resources.analyze(p) for p in posts} if feature_slots else {}
    vocabs = build_vocabs([analyses[p.id] for p in posts], [analyses[p.id] for p in hostile],
                          config, feature_slots) if feature_slots else {}
    resources = replace(resources, vocabs=vocabs)

    jobs = []
    jobs.append((LEVEL1, posts, np.array([int(p.hostile) for p in posts])))
    for label in HOSTILE_LABELS:
        jobs.append((label, hostile, np.array([int(label in p.labels) for p in hostile])))

    def run(job):
        label, train_posts, y = job
        return _train_slot(label, config.backends[label], train_posts, y, analyses, resources, config)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    slots = {}
    for (label, _, _), (slot, seconds) in zip(jobs, results):
        slots[label] = slot
        if timings is not None:
            timings[label.value] = seconds
    return EnsembleModel(slots[LEVEL1], {l: slots[l] for l in HOSTILE_LABELS}, resources, config)


def combination_key(labels: frozenset[Label]) -> str:
    return format_labelset(labels)


@dataclass
class LabelPowersetModel:
    """One-vs-rest n-gram scorers over the label combinations seen in training."""

    combinations: list[frozenset[Label]]
    vectorizer: NgramVectorizer
    weights: np.ndarray  # (n_combinations, n_features)
    biases: np.ndarray
    config: EnsembleConfig = field(default_factory=EnsembleConfig)
    strategy = "label_powerset"

    def scores(self, texts: Sequence[str]) -> np.ndarray:
        X = self.vectorizer.transform(list(texts))
        return np.asarray(X @ self.weights.T) + self.biases

    def predict_batch(self, posts: Sequence[Post] | Corpus) -> BatchResult:
        posts = list(posts)
        if not posts:
            return BatchResult([], [], 0)
        best = np.argmax(self.scores([p.text for p in posts]), axis=1)  # first max = canonical tie-break
        preds = []
        for post, k in zip(posts, best):
            labels = self.combinations[k]
            preds.append(PostPrediction(post.id, labels, float(Label.NON_HOSTILE not in labels)))
        return BatchResult(preds, [], 0)

    def predict(self, post: Post) -> frozenset[Label]:
        return self.predict_batch([post]).predictions[0].labels

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "label_powerset",
                "combinations": [combination_key(c) for c in self.combinations],
                "vectorizer": self.vectorizer.to_dict(),
                "weights": as_floats(self.weights), "biases": as_floats(self.biases)}

    @classmethod
    def from_dict(cls, d: dict[str, Any], config: EnsembleConfig) -> "LabelPowersetModel":
        vec = NgramVectorizer.from_dict(d["vectorizer"])
        weights = np.array(d["weights"], dtype=np.float64).reshape(len(d["combinations"]), -1)
        return cls([parse_labelset(c) for c in d["combinations"]], vec, weights,
                   np.array(d["biases"], dtype=np.float64), config)


def train_label_powerset(corpus: Corpus, config: EnsembleConfig = EnsembleConfig()) -> LabelPowersetModel:
    if not corpus.labeled:
        raise DataError("label powerset training needs a labeled corpus")
    combos = sorted({p.labels for p in corpus}, key=combination_key)
    if len(combos) < 2:
        raise TrainingError("label powerset needs at least two distinct label combinations")
    texts = [p.text for p in corpus]
    vec = NgramVectorizer.fit(texts, config.ngram)
    X = vec.transform(texts)
    weights, biases = [], []
    for combo in combos:
        y = np.array([int(p.labels == combo) for p in corpus])
        w, b = fit_logistic(X, y, config.ngram)
        weights.append(w)
        biases.append(b)
    return LabelPowersetModel(combos, vec, np.vstack(weights), np.array(biases), config)


def train(corpus: Corpus, config: EnsembleConfig = EnsembleConfig(),
          resources: FeatureResources | None = None, timings: dict | None = None):
    """Dispatch on ``config.strategy``."""
    if config.strategy == "label_powerset":
        return train_label_powerset(corpus, config)
    return train_ensemble(corpus, config, resources, timings)
