"""Per-classifier feature engineering.

A :class:`FeatureSpec` is an ordered list of blocks. Each block turns one
post into a fixed-width slice of the feature vector:

* :class:`EmbeddingBlock` -- mean-pooled word vectors, or a precomputed
  per-post vector, z-scored with training statistics;
* :class:`OneHotBlock` -- presence of frequent class-specific hashtags,
  mentions, emojis or words;
* :class:`LexiconCountBlock` -- raw and length-normalized lexicon hits.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus_io import Corpus, EmbeddingTable, Lexicon, Post, SampleVectorTable
from .errors import DataError
from .labels import Label
from .preprocess import DEFAULT_EMOJIS, EmojiMatcher, SocialEntities, clean, entity_items, tokenize

logger = logging.getLogger(__name__)

VOCAB_KINDS = ("hashtag", "mention", "emoji", "word")
DEFAULT_MIN_FREQ = {"hashtag": 3, "mention": 3, "emoji": 3, "word": 5}
DEFAULT_MAX_TOKENS = 100


@dataclass(frozen=True)
class PostAnalysis:
    """Everything the feature blocks read from one post."""

    post: Post
    entities: SocialEntities
    tokens: list[str]  # cleaned: entities and stopwords removed
    text_tokens: list[str]  # whitespace tokens of the full text, normalized

    def items(self, kind: str) -> Sequence[str]:
        return self.tokens if kind == "word" else entity_items(self.entities, kind)


def analyze(post: Post, stopwords: Iterable[str] = frozenset(),
            emojis: EmojiMatcher = DEFAULT_EMOJIS) -> PostAnalysis:
    cleaned = clean(post.text, stopwords, emojis)
    return PostAnalysis(post, cleaned.entities, cleaned.tokens, tokenize(post.text))


@dataclass(frozen=True)
class Vocab:
    kind: str
    label: Label
    entries: tuple[str, ...]
    min_freq: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.entries)})

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "class": self.label.value,
                "min_freq": self.min_freq, "entries": list(self.entries)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Vocab":
        return cls(d["kind"], Label(d["class"]), tuple(d["entries"]), int(d["min_freq"]))


def build_vocab(
    corpus: Corpus | Sequence[PostAnalysis],
    label: Label,
    kind: str,
    min_freq: int,
    stopwords: Iterable[str] = frozenset(),
) -> Vocab:
    """Frequent ``kind`` items among posts carrying ``label``.

    Occurrences are counted with multiplicity. Entries are ordered by count
    descending, then lexicographically.
    """
    if kind not in VOCAB_KINDS:
        raise ValueError(f"unknown vocab kind {kind!r}")
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    if label is Label.NON_HOSTILE:
        logger.warning("building a %s vocabulary for the non-hostile class", kind)
    if isinstance(corpus, Corpus):
        corpus = [analyze(p, stopwords) for p in corpus]
    counts: Counter[str] = Counter()
    for a in corpus:
        if a.post.labels is None:
            raise DataError(f"build_vocab needs labels; post {a.post.id} is unlabeled")
        if label in a.post.labels:
            counts.update(a.items(kind))
    kept = sorted((item for item, n in counts.items() if n >= min_freq),
                  key=lambda item: (-counts[item], item))
    return Vocab(kind, label, tuple(kept), min_freq)


def encode_onehot(items: Iterable[str], vocab: Vocab) -> np.ndarray:
    out = np.zeros(len(vocab))
    index = vocab._index
    for item in items:
        i = index.get(item)
        if i is not None:
            out[i] = 1.0
    return out


def pool_embeddings(tokens: Sequence[str], table: EmbeddingTable,
                    max_tokens: int = DEFAULT_MAX_TOKENS) -> np.ndarray:
    """Mean vector of the first ``max_tokens`` in-table tokens (zeros if none)."""
    found = []
    for tok in tokens:
        vec = table.get(tok)
        if vec is not None:
            found.append(vec)
            if len(found) == max_tokens:
                break
    if not found:
        return np.zeros(table.dim)
    return np.mean(found, axis=0)


def lexicon_count(tokens: Sequence[str], lexicon: Lexicon) -> np.ndarray:
    hits = sum(1 for tok in tokens if tok in lexicon)
    return np.array([float(hits), hits / max(1, len(tokens))])


@dataclass(frozen=True)
class EmbeddingBlock:
    provider: str  # "word_vectors" | "sample_vectors"
    dim: int
    mean: tuple[float, ...] | None = None
    scale: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {"type": "embedding", "provider": self.provider, "dim": self.dim,
                "mean": None if self.mean is None else list(self.mean),
                "scale": None if self.scale is None else list(self.scale)}


@dataclass(frozen=True)
class OneHotBlock:
    kind: str
    label: Label
    dim: int

    def to_dict(self) -> dict:
        return {"type": "onehot", "kind": self.kind, "class": self.label.value, "dim": self.dim}


@dataclass(frozen=True)
class LexiconCountBlock:
    lexicon: str
    dim: int = 2

    def to_dict(self) -> dict:
        return {"type": "lexicon", "lexicon": self.lexicon, "dim": self.dim}


Block = EmbeddingBlock | OneHotBlock | LexiconCountBlock


def block_from_dict(d: Mapping) -> Block:
    if d["type"] == "embedding":
        return EmbeddingBlock(
            d["provider"], int(d["dim"]),
            None if d["mean"] is None else tuple(d["mean"]),
            None if d["scale"] is None else tuple(d["scale"]),
        )
    if d["type"] == "onehot":
        return OneHotBlock(d["kind"], Label(d["class"]), int(d["dim"]))
    if d["type"] == "lexicon":
        return LexiconCountBlock(d["lexicon"], int(d.get("dim", 2)))
    raise DataError(f"unknown feature block type {d['type']!r}")


@dataclass
class FeatureResources:
    """Shared read-only inputs for feature assembly."""

    stopwords: frozenset[str] = frozenset()
    lexicons: Mapping[str, Lexicon] = field(default_factory=dict)
    word_vectors: EmbeddingTable | None = None
    sample_vectors: SampleVectorTable | None = None
    vocabs: Mapping[tuple[Label, str], Vocab] = field(default_factory=dict)
    emojis: EmojiMatcher = DEFAULT_EMOJIS
    max_tokens: int = DEFAULT_MAX_TOKENS

    def analyze(self, post: Post) -> PostAnalysis:
        return analyze(post, self.stopwords, self.emojis)


@dataclass(frozen=True)
class FeatureSpec:
    blocks: tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def total_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def to_dict(self) -> dict:
        return {"blocks": [b.to_dict() for b in self.blocks]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeatureSpec":
        return cls(tuple(block_from_dict(b) for b in d["blocks"]))

    def _slices(self):
        start = 0
        for block in self.blocks:
            yield block, slice(start, start + block.dim)
            start += block.dim

    def fit_standardization(self, X_raw: np.ndarray) -> "FeatureSpec":
        """Record per-column mean/std of every embedding block from training rows."""
        blocks = []
        for block, sl in self._slices():
            if isinstance(block, EmbeddingBlock):
                cols = X_raw[:, sl]
                mean = cols.mean(axis=0) if len(cols) else np.zeros(block.dim)
                std = cols.std(axis=0) if len(cols) else np.ones(block.dim)
                std = np.where(std > 1e-12, std, 1.0)
                block = replace(block, mean=tuple(float(v) for v in mean),
                                scale=tuple(float(v) for v in std))
            blocks.append(block)
        return FeatureSpec(tuple(blocks))

    def standardize(self, X_raw: np.ndarray) -> np.ndarray:
        X = np.array(X_raw, dtype=np.float64, copy=True)
        for block, sl in self._slices():
            if isinstance(block, EmbeddingBlock) and block.mean is not None:
                X[..., sl] = (X[..., sl] - np.asarray(block.mean)) / np.asarray(block.scale)
        return X


def _block_values(block: Block, a: PostAnalysis, res: FeatureResources) -> np.ndarray:
    if isinstance(block, EmbeddingBlock):
        if block.provider == "sample_vectors":
            if res.sample_vectors is None:
                raise DataError("feature spec needs sample vectors but none are loaded")
            vec = res.sample_vectors[a.post.id]
        elif block.provider == "word_vectors":
            if res.word_vectors is None:
                raise DataError("feature spec needs word vectors but none are loaded")
            vec = pool_embeddings(a.tokens, res.word_vectors, res.max_tokens)
        else:
            raise DataError(f"unknown embedding provider {block.provider!r}")
        if len(vec) != block.dim:
            raise DataError(f"embedding dimension {len(vec)} != expected {block.dim}")
        return vec
    if isinstance(block, OneHotBlock):
        try:
            vocab = res.vocabs[(block.label, block.kind)]
        except KeyError:
            raise DataError(f"missing {block.kind} vocabulary for {block.label}") from None
        return encode_onehot(a.items(block.kind), vocab)
    try:
        lexicon = res.lexicons[block.lexicon]
    except KeyError:
        raise DataError(f"lexicon {block.lexicon!r} is not loaded") from None
    return lexicon_count(a.text_tokens, lexicon)


def assemble_raw(post: Post | PostAnalysis, spec: FeatureSpec,
                 resources: FeatureResources) -> np.ndarray:
    a = post if isinstance(post, PostAnalysis) else resources.analyze(post)
    parts = [_block_values(b, a, resources) for b in spec.blocks]
    out = np.concatenate(parts) if parts else np.zeros(0)
    if not np.all(np.isfinite(out)):
        raise DataError(f"post {a.post.id}: non-finite feature value")
    return out


def assemble(post: Post | PostAnalysis, spec: FeatureSpec,
             resources: FeatureResources) -> np.ndarray:
    """Feature vector for one post, embedding blocks standardized if fitted."""
    return spec.standardize(assemble_raw(post, spec, resources))


def assemble_batch(posts: Sequence[Post | PostAnalysis], spec: FeatureSpec,
                   resources: FeatureResources) -> np.ndarray:
    if not posts:
        return np.zeros((0, spec.total_dim))
    return spec.standardize(np.vstack([assemble_raw(p, spec, resources) for p in posts]))


def recipe(
    label: Label,
    resources: FeatureResources,
    embedding: str | None = "auto",
    onehot_kinds: Sequence[str] = VOCAB_KINDS,
    lexicons: Sequence[str] | None = None,
) -> FeatureSpec:
    """Compose a spec from the resources that are actually available.

    ``embedding="auto"`` prefers sample vectors over word vectors and drops
    the block when neither is loaded.
    """
    blocks: list[Block] = []
    if embedding == "auto":
        embedding = ("sample_vectors" if resources.sample_vectors is not None
                     else "word_vectors" if resources.word_vectors is not None else None)
    if embedding == "sample_vectors":
        if resources.sample_vectors is None:
            raise DataError(f"{label}: recipe asks for sample vectors but none are loaded")
        blocks.append(EmbeddingBlock("sample_vectors", resources.sample_vectors.dim))
    elif embedding == "word_vectors":
        if resources.word_vectors is None:
            raise DataError(f"{label}: recipe asks for word vectors but none are loaded")
        blocks.append(EmbeddingBlock("word_vectors", resources.word_vectors.dim))
    for kind in onehot_kinds:
        vocab = resources.vocabs[(label, kind)]
        blocks.append(OneHotBlock(kind, label, len(vocab)))
    for name in (sorted(resources.lexicons) if lexicons is None else lexicons):
        if name in resources.lexicons:
            blocks.append(LexiconCountBlock(name))
    return FeatureSpec(tuple(blocks))


def hate_recipe(resources: FeatureResources) -> FeatureSpec:
    """Sentence/word embedding + word/hashtag/mention/emoji one-hots + hate and swear counts."""
    return recipe(Label.HATE, resources, "auto",
                  ("word", "hashtag", "mention", "emoji"), ("hate", "swear"))


def defamation_recipe(resources: FeatureResources) -> FeatureSpec:
    """Pooled word vectors + hashtag/mention/emoji one-hots + swear counts."""
    embedding = "word_vectors" if resources.word_vectors is not None else None
    return recipe(Label.DEFAMATION, resources, embedding,
                  ("hashtag", "mention", "emoji"), ("swear",))


def default_recipe(label: Label, resources: FeatureResources) -> FeatureSpec:
    if label is Label.HATE:
        return hate_recipe(resources)
    if label is Label.DEFAMATION:
        return defamation_recipe(resources)
    return recipe(label, resources)
