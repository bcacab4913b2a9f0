"""Dataset ingestion, validation and resource loading.

Datasets are TSV (canonical) or RFC-4180 CSV with a header row naming the
id, text and labels columns. Labels are comma-separated tags; the file
spelling ``non-hostile`` maps to :attr:`Label.NON_HOSTILE`.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType

import numpy as np

from .errors import DataError
from .labels import HOSTILE_LABELS, Label, format_labelset, parse_labelset
from .preprocess import normalize

logger = logging.getLogger(__name__)

DEFAULT_COLUMNS: Mapping[str, str] = MappingProxyType(
    {"id": "id", "text": "text", "labels": "labels"}
)
# Column names in the public CONSTRAINT-2021 Hindi release.
SHARED_TASK_COLUMNS: Mapping[str, str] = MappingProxyType(
    {"id": "Unique ID", "text": "Post", "labels": "Labels Set"}
)


@dataclass(frozen=True)
class Post:
    id: str
    text: str
    labels: frozenset[Label] | None = None

    @property
    def hostile(self) -> bool:
        if self.labels is None:
            raise DataError(f"post {self.id} is unlabeled")
        return Label.NON_HOSTILE not in self.labels


@dataclass(frozen=True)
class Corpus:
    posts: tuple[Post, ...]
    split: str = "unspecified"

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(self.posts))

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self) -> Iterator[Post]:
        return iter(self.posts)

    def __getitem__(self, i):
        return self.posts[i]

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.posts]

    @property
    def labeled(self) -> bool:
        return all(p.labels is not None for p in self.posts)

    def subset(self, keep) -> "Corpus":
        return Corpus(tuple(p for p in self.posts if keep(p)), self.split)


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt:
        if fmt not in ("tsv", "csv"):
            raise DataError(f"unsupported corpus format {fmt!r}")
        return fmt
    return "csv" if path.suffix.lower() == ".csv" else "tsv"


def _tsv_rows(text: str, path: Path) -> Iterator[tuple[int, list[str]]]:
    # split on \n only: str.splitlines would also break on U+2028 etc. inside posts
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.removesuffix("\r")
        if line.strip():
            yield lineno, line.split("\t")


def _csv_rows(text: str, path: Path) -> Iterator[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    try:
        for row in reader:
            if row:
                yield reader.line_num, row
    except csv.Error as exc:
        raise DataError(f"{path}: malformed CSV near line {reader.line_num}: {exc}") from None


def load_corpus(
    path: str | Path,
    format: str | None = None,
    columns: Mapping[str, str] = DEFAULT_COLUMNS,
    split: str = "unspecified",
) -> Corpus:
    """Load a labeled or unlabeled corpus.

    ``columns`` maps the logical names ``id``/``text``/``labels`` to header
    names in the file. The labels column may be absent entirely (unlabeled
    input) or empty on individual rows.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"corpus file not found: {path}")
    fmt = _infer_format(path, format)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from None
    rows = (_tsv_rows if fmt == "tsv" else _csv_rows)(text, path)

    try:
        _, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: missing header row") from None
    header = [h.strip() for h in header]
    try:
        id_col = header.index(columns["id"])
        text_col = header.index(columns["text"])
    except ValueError:
        raise DataError(
            f"{path}: header {header} lacks columns {columns['id']!r}/{columns['text']!r}"
        ) from None
    label_col = header.index(columns["labels"]) if columns["labels"] in header else None

    posts: list[Post] = []
    seen: set[str] = set()
    for lineno, row in rows:
        if len(row) < len(header):
            # a trailing empty labels field may be dropped by some writers
            if label_col is not None and len(row) == len(header) - 1 and label_col == len(header) - 1:
                row = row + [""]
            else:
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        elif len(row) > len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        post_id = row[id_col].strip()
        if not post_id:
            raise DataError(f"{path}:{lineno}: empty post id")
        if post_id in seen:
            raise DataError(f"{path}:{lineno}: duplicate post id {post_id!r}")
        seen.add(post_id)
        labels = None
        if label_col is not None:
            try:
                labels = parse_labelset(row[label_col])
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: post {post_id}: {exc}") from None
        posts.append(Post(post_id, row[text_col], labels))
    return Corpus(tuple(posts), split)


def write_corpus(corpus: Corpus, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    rows = [["id", "text", "labels"]]
    for post in corpus:
        labels = "" if post.labels is None else format_labelset(post.labels)
        rows.append([post.id, post.text, labels])
    if fmt == "tsv":
        for post in corpus:
            if any(c in post.text for c in "\t\r\n"):
                raise DataError(f"post {post.id}: text with tabs/newlines needs CSV output")
        path.write_text("".join("\t".join(r) + "\n" for r in rows), encoding="utf-8")
    else:
        with path.open("w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)


def corpus_stats(corpus: Corpus) -> dict[str, int]:
    """Per-label positive counts plus ``total_hostile`` and ``total``."""
    stats = {label.value: 0 for label in HOSTILE_LABELS}
    stats["total_hostile"] = 0
    stats[Label.NON_HOSTILE.value] = 0
    for post in corpus:
        if post.labels is None:
            raise DataError(f"corpus_stats needs labels; post {post.id} is unlabeled")
        for label in post.labels:
            stats[label.value] += 1
        if post.hostile:
            stats["total_hostile"] += 1
    stats["total"] = stats["total_hostile"] + stats[Label.NON_HOSTILE.value]
    return stats


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: Mapping[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        for vec in self.vectors.values():
            vec.flags.writeable = False
        object.__setattr__(self, "vectors", MappingProxyType(dict(self.vectors)))

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def get(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token)


def _parse_floats(fields: list[str], where: str) -> np.ndarray:
    try:
        vec = np.array([float(f) for f in fields], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{where}: unparseable float ({exc})") from None
    if not np.all(np.isfinite(vec)):
        raise DataError(f"{where}: non-finite value")
    return vec


def load_word_vectors(path: str | Path) -> EmbeddingTable:
    """Read a word2vec/fastText text file, with or without a ``count dim`` header.

    Tokens are normalized; a later duplicate overwrites an earlier one.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"embedding file not found: {path}")
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    declared: int | None = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.rstrip("\n").rstrip(" \r").split(" ")
            if not line.strip():
                continue
            if lineno == 1 and len(fields) == 2 and all(f.isdigit() for f in fields):
                declared, dim = int(fields[0]), int(fields[1])
                if dim <= 0:
                    raise DataError(f"{path}:1: non-positive dimension {dim}")
                continue
            token, values = fields[0], fields[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise DataError(f"{path}:{lineno}: no vector values")
            if len(values) != dim:
                raise DataError(
                    f"{path}:{lineno}: dimension {len(values)} does not match {dim}"
                )
            vec = _parse_floats(values, f"{path}:{lineno}")
            key = normalize(token)
            if not key:
                continue
            if key in vectors:
                logger.warning("%s:%d: duplicate token %r overwrites earlier vector", path, lineno, key)
            vectors[key] = vec
    if dim is None:
        raise DataError(f"{path}: no vectors")
    if declared is not None and declared != len(vectors):
        logger.warning("%s: header declares %d vectors, read %d", path, declared, len(vectors))
    return EmbeddingTable(dim, vectors)


@dataclass(frozen=True)
class SampleVectorTable:
    """Precomputed per-post vectors (e.g. sentence embeddings), keyed by post id."""

    dim: int
    vectors: Mapping[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        for vec in self.vectors.values():
            vec.flags.writeable = False
        object.__setattr__(self, "vectors", MappingProxyType(dict(self.vectors)))

    def __getitem__(self, post_id: str) -> np.ndarray:
        try:
            return self.vectors[post_id]
        except KeyError:
            raise DataError(f"no sample vector for post {post_id!r}") from None


def load_sample_vectors(path: str | Path) -> SampleVectorTable:
    """Read ``post_id<TAB>v1 v2 ... vd`` lines."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"sample-vector file not found: {path}")
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        post_id, sep, rest = line.partition("\t")
        if not sep:
            raise DataError(f"{path}:{lineno}: expected post_id<TAB>vector")
        vec = _parse_floats(rest.split(), f"{path}:{lineno}")
        if dim is None:
            dim = len(vec)
        if len(vec) != dim or dim == 0:
            raise DataError(f"{path}:{lineno}: dimension {len(vec)} does not match {dim}")
        if post_id in vectors:
            raise DataError(f"{path}:{lineno}: duplicate post id {post_id!r}")
        vectors[post_id] = vec
    if dim is None:
        raise DataError(f"{path}: no vectors")
    return SampleVectorTable(dim, vectors)


@dataclass(frozen=True)
class Lexicon:
    name: str
    tokens: frozenset[str]

    def __contains__(self, token: str) -> bool:
        return token in self.tokens

    def __len__(self) -> int:
        return len(self.tokens)


def lexicon_from_lines(lines: Iterable[str], name: str, source: str = "<memory>") -> Lexicon:
    tokens = set()
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tok = normalize(line)
        if tok:
            tokens.add(tok)
    if not tokens:
        raise DataError(f"{source}: lexicon {name!r} is empty")
    return Lexicon(name, frozenset(tokens))


def load_lexicon(path: str | Path, name: str | None = None) -> Lexicon:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"lexicon file not found: {path}")
    return lexicon_from_lines(
        path.read_text(encoding="utf-8").splitlines(), name or path.stem, str(path)
    )


def load_stopwords(path: str | Path) -> Lexicon:
    return load_lexicon(path, "stopwords")


def default_stopwords() -> Lexicon:
    """The bundled Hindi stopword list."""
    text = resources.files("hostile_posts.data").joinpath("stopwords_hi.txt").read_text("utf-8")
    return lexicon_from_lines(text.splitlines(), "stopwords", "stopwords_hi.txt")


def load_external_scores(path: str | Path) -> dict[str, float]:
    """Read ``post_id<TAB>probability`` lines; every probability must lie in [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"external-scores file not found: {path}")
    scores: dict[str, float] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        post_id, sep, value = line.partition("\t")
        if not sep:
            raise DataError(f"{path}:{lineno}: expected post_id<TAB>probability")
        try:
            p = float(value)
        except ValueError:
            if lineno == 1:  # header row
                continue
            raise DataError(f"{path}:{lineno}: unparseable probability {value!r}") from None
        if not (0.0 <= p <= 1.0) or math.isnan(p):
            raise DataError(f"{path}:{lineno}: probability {p} outside [0, 1]")
        scores[post_id.strip()] = p
    return scores


def write_predictions(rows: Iterable[tuple[str, frozenset[Label] | None]], path: str | Path) -> None:
    """``post_id<TAB>labels`` with a header; ``None`` labels (failed rows) are written empty."""
    lines = ["post_id\tlabels"]
    lines += [f"{pid}\t{'' if labels is None else format_labelset(labels)}" for pid, labels in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_predictions(path: str | Path) -> dict[str, frozenset[Label] | None]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"predictions file not found: {path}")
    out: dict[str, frozenset[Label] | None] = {}
    lines = path.read_text(encoding="utf-8-sig").split("\n")
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r")
        if not line or (lineno == 1 and line.split("\t")[0] == "post_id"):
            continue
        post_id, sep, labels = line.partition("\t")
        if not sep or "\t" in labels:
            raise DataError(f"{path}:{lineno}: expected 'post_id<TAB>labels'")
        if post_id in out:
            raise DataError(f"{path}:{lineno}: duplicate post id {post_id!r}")
        try:
            out[post_id] = parse_labelset(labels)
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: post {post_id}: {exc}") from None
    return out
