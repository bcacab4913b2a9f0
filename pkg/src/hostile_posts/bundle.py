"""Model bundle persistence.

A bundle is a directory holding ``manifest.json``, one ``vocab_<class>_<kind>.json``
per one-hot vocabulary and one ``clf_<class>.json`` per classifier. Weights
are JSON decimal floats written with Python's shortest round-trip repr, so a
reloaded model scores bit-identically. Embedding files are referenced by path
and SHA-256 rather than copied.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .config import ensemble_config_from_dict, ensemble_config_to_dict
from .corpus_io import (
    EmbeddingTable,
    Lexicon,
    SampleVectorTable,
    load_sample_vectors,
    load_word_vectors,
)
from .ensemble import LEVEL1, EnsembleModel, LabelPowersetModel, Slot
from .errors import BundleError, DataError
from .features import FeatureResources, FeatureSpec, Vocab
from .labels import HOSTILE_LABELS, Label
from .learners import ExternalScores, classifier_from_dict
from .preprocess import EmojiMatcher

FORMAT_VERSION = 1
MANIFEST = "manifest.json"


def _dumps(obj: Any, indent: int | None = None) -> bytes:
    seps = (",", ":") if indent is None else (",", ": ")
    text = json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=indent, separators=seps,
                      allow_nan=False)
    return (text + "\n").encode("utf-8")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _resource_manifest(res: FeatureResources, word_vectors_path, sample_vectors_path) -> dict:
    def table_ref(table, path):
        if table is None:
            return None
        return {"path": None if path is None else str(path), "dim": table.dim,
                "sha256": None if path is None else file_sha256(path)}

    return {
        "stopwords": sorted(res.stopwords),
        "lexicons": {name: sorted(lex.tokens) for name, lex in sorted(res.lexicons.items())},
        "emoji_ranges": [list(r) for r in res.emojis.ranges],
        "max_tokens": res.max_tokens,
        "word_vectors": table_ref(res.word_vectors, word_vectors_path),
        "sample_vectors": table_ref(res.sample_vectors, sample_vectors_path),
    }


def save_model(model: EnsembleModel | LabelPowersetModel, directory: str | Path,
               word_vectors_path: str | Path | None = None,
               sample_vectors_path: str | Path | None = None,
               extra: dict | None = None) -> Path:
    """Write ``model`` to ``directory`` (created if needed) and return the manifest path.

    ``extra`` is stored verbatim under ``"run"`` in the manifest.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files: dict[str, bytes] = {}
    manifest: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "strategy": model.strategy,
        "config": ensemble_config_to_dict(model.config),
        "run": extra or {},
    }
    if isinstance(model, LabelPowersetModel):
        files["clf_label_powerset.json"] = _dumps(model.to_dict())
        manifest["classifiers"] = {"label_powerset": {"file": "clf_label_powerset.json"}}
        manifest["vocabs"] = {}
        manifest["resources"] = None
    else:
        manifest["fallback"] = model.config.fallback.value
        classifiers = {}
        for label, slot in model.slots.items():
            name = f"clf_{label.value}.json"
            files[name] = _dumps(slot.classifier.to_dict())
            classifiers[label.value] = {
                "file": name, "backend": slot.backend, "kind": slot.classifier.kind,
                "input": slot.classifier.input_kind, "seed": slot.seed,
                "n_train": slot.n_train, "n_positive": slot.n_positive, "threshold": 0.5,
                "feature_spec": None if slot.spec is None else slot.spec.to_dict(),
            }
        manifest["classifiers"] = classifiers
        vocab_files = {}
        for (label, kind), vocab in sorted(model.resources.vocabs.items(),
                                           key=lambda kv: (kv[0][0].rank, kv[0][1])):
            name = f"vocab_{label.value}_{kind}.json"
            files[name] = _dumps(vocab.to_dict())
            vocab_files[name] = None
        manifest["vocabs"] = vocab_files
        manifest["resources"] = _resource_manifest(model.resources, word_vectors_path,
                                                   sample_vectors_path)
    digests = {name: _sha256(data) for name, data in files.items()}
    for entry in manifest["classifiers"].values():
        entry["sha256"] = digests[entry["file"]]
    for name in manifest["vocabs"]:
        manifest["vocabs"][name] = digests[name]
    for name, data in files.items():
        (directory / name).write_bytes(data)
    path = directory / MANIFEST
    path.write_bytes(_dumps(manifest, indent=1))
    return path


def _read_component(directory: Path, name: str, digest: str | None) -> Any:
    path = directory / name
    if not path.is_file():
        raise BundleError(f"bundle component missing: {name}")
    data = path.read_bytes()
    if digest is not None and _sha256(data) != digest:
        raise BundleError(f"bundle component {name} is corrupted (checksum mismatch)")
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BundleError(f"bundle component {name} is unreadable: {exc}") from None


def _load_table(ref, override, loader, what: str):
    if ref is None:
        return None
    if override is not None:
        table = override if isinstance(override, (EmbeddingTable, SampleVectorTable)) else loader(override)
    else:
        if ref["path"] is None:
            raise BundleError(f"bundle needs {what} but recorded no path; pass one explicitly")
        if not Path(ref["path"]).is_file():
            raise BundleError(f"{what} file recorded in bundle not found: {ref['path']}")
        if ref["sha256"] and file_sha256(ref["path"]) != ref["sha256"]:
            raise BundleError(f"{what} file {ref['path']} changed since training")
        table = loader(ref["path"])
    if table.dim != ref["dim"]:
        raise BundleError(f"{what} dimension {table.dim} != trained dimension {ref['dim']}")
    return table


def load_model(directory: str | Path, word_vectors=None, sample_vectors=None,
               external: dict[Label, Any] | None = None) -> EnsembleModel | LabelPowersetModel:
    """Load a bundle written by :func:`save_model`.

    ``word_vectors``/``sample_vectors`` (tables or paths) replace the files
    recorded at training time; ``external`` replaces the stored scores of
    external-backend slots, e.g. with scores for a new test set.
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST
    if not manifest_path.is_file():
        raise BundleError(f"no {MANIFEST} in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"{manifest_path}: unreadable manifest ({exc})") from None
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise BundleError(f"bundle format version {version} is not supported (expected {FORMAT_VERSION})")
    config = ensemble_config_from_dict(manifest["config"])
    classifiers = manifest["classifiers"]

    if manifest["strategy"] == "label_powerset":
        entry = classifiers["label_powerset"]
        return LabelPowersetModel.from_dict(
            _read_component(directory, entry["file"], entry.get("sha256")), config)
    if manifest["strategy"] != "binary_relevance":
        raise BundleError(f"unknown strategy {manifest['strategy']!r}")

    res = manifest["resources"]
    vocabs = {}
    for name, digest in manifest["vocabs"].items():
        vocab = Vocab.from_dict(_read_component(directory, name, digest))
        vocabs[(vocab.label, vocab.kind)] = vocab
    try:
        resources = FeatureResources(
            stopwords=frozenset(res["stopwords"]),
            lexicons={n: Lexicon(n, frozenset(t)) for n, t in res["lexicons"].items()},
            word_vectors=_load_table(res["word_vectors"], word_vectors, load_word_vectors,
                                     "word-vector"),
            sample_vectors=_load_table(res["sample_vectors"], sample_vectors,
                                       load_sample_vectors, "sample-vector"),
            vocabs=vocabs,
            emojis=EmojiMatcher(tuple(r) for r in res["emoji_ranges"]),
            max_tokens=int(res["max_tokens"]),
        )
    except DataError as exc:
        raise BundleError(str(exc)) from None

    slots = {}
    for label in (LEVEL1, *HOSTILE_LABELS):
        entry = classifiers.get(label.value)
        if entry is None:
            raise BundleError(f"bundle manifest lists no classifier for {label.value}")
        try:
            clf = classifier_from_dict(_read_component(directory, entry["file"], entry.get("sha256")))
        except (KeyError, TypeError, ValueError) as exc:
            raise BundleError(f"bundle component {entry['file']} is malformed: {exc}") from None
        if external and label in external:
            override = external[label]
            clf = override if isinstance(override, ExternalScores) else ExternalScores.from_file(override)
        spec = None if entry["feature_spec"] is None else FeatureSpec.from_dict(entry["feature_spec"])
        slots[label] = Slot(label, entry["backend"], clf, spec, int(entry["seed"]),
                            int(entry["n_train"]), int(entry["n_positive"]))
    return EnsembleModel(slots[LEVEL1], {l: slots[l] for l in HOSTILE_LABELS}, resources, config)


def read_manifest(directory: str | Path) -> dict:
    path = Path(directory) / MANIFEST
    if not path.is_file():
        raise BundleError(f"no {MANIFEST} in {directory}")
    return json.loads(path.read_text(encoding="utf-8"))
