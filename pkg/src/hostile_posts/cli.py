"""Command-line interface: ``train``, ``predict``, ``eval``, ``stats`` and ``synth``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 training error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from collections import Counter
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bundle import load_model, read_manifest, save_model
from .config import PATH_KEYS, RunConfig
from .corpus_io import (
    corpus_stats,
    default_stopwords,
    load_corpus,
    load_lexicon,
    load_sample_vectors,
    load_stopwords,
    load_word_vectors,
    read_predictions,
    write_predictions,
)
from .ensemble import EnsembleModel, parse_backend, train
from .errors import ConfigError, DataError, HostilePostsError
from .features import FeatureResources
from .labels import HOSTILE_LABELS, Label, format_labelset
from .learners import ExternalScores
from .metrics import SCOPES, evaluate
from .preprocess import DEFAULT_EMOJIS, EmojiMatcher
from .synthetic import SyntheticSpec, write_synthetic_dataset

logger = logging.getLogger("hostile_posts")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the config exit code
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)
    if path is None or path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _backend_overrides(specs: list[str] | None) -> dict[str, str]:
    out = {}
    for item in specs or []:
        label, sep, spec = item.partition("=")
        if not sep:
            raise ConfigError(f"--backend expects <label>=<backend>, got {item!r}")
        parse_backend(spec)
        out[Label.parse(label.strip()).value] = spec
    return out


def _run_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for key in ("seed", "fallback", "scope", "jobs", "strategy", "format"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    for key in ("train", "stopwords", "word_vectors", "sample_vectors"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "backend", None):
        cfg.backends = {**cfg.backends, **_backend_overrides(args.backend)}
    cfg.validate()
    return cfg


def build_resources(cfg: RunConfig) -> FeatureResources:
    stopwords = load_stopwords(cfg.stopwords) if cfg.stopwords else default_stopwords()
    return FeatureResources(
        stopwords=stopwords.tokens,
        lexicons={name: load_lexicon(path, name) for name, path in sorted(cfg.lexicons.items())},
        word_vectors=load_word_vectors(cfg.word_vectors) if cfg.word_vectors else None,
        sample_vectors=load_sample_vectors(cfg.sample_vectors) if cfg.sample_vectors else None,
        emojis=EmojiMatcher.from_file(cfg.emoji_ranges) if cfg.emoji_ranges else DEFAULT_EMOJIS,
        max_tokens=cfg.max_tokens,
    )


def cmd_train(args) -> int:
    cfg = _run_config(args)
    if cfg.train is None:
        raise ConfigError("no training corpus: set 'train' in the config or pass --train")
    cfg.resolve_paths(Path.cwd())
    cfg.check_paths(*PATH_KEYS)
    start = time.perf_counter()
    corpus = load_corpus(cfg.train, cfg.format, cfg.columns, split="train")
    stats = corpus_stats(corpus)
    resources = build_resources(cfg)
    timings: dict[str, float] = {}
    model = train(corpus, cfg.ensemble_config(), resources, timings)
    config_hash = cfg.config_hash()
    save_model(model, args.out, cfg.word_vectors, cfg.sample_vectors,
               extra={"run_config": cfg.to_dict(), "config_hash": config_hash})
    summary = {
        "bundle": str(args.out),
        "config_hash": config_hash,
        "strategy": model.strategy,
        "corpus_stats": stats,
        "wall_time_s": time.perf_counter() - start,
    }
    if isinstance(model, EnsembleModel):
        summary["classifiers"] = {
            label.value: {"backend": slot.backend, "kind": slot.classifier.kind,
                          "n_train": slot.n_train, "n_positive": slot.n_positive,
                          "input_dim": None if slot.spec is None else slot.spec.total_dim,
                          "train_time_s": timings.get(label.value)}
            for label, slot in model.slots.items()
        }
        summary["vocab_sizes"] = {f"{label.value}/{kind}": len(v)
                                  for (label, kind), v in sorted(model.resources.vocabs.items(),
                                                                 key=lambda kv: (kv[0][0].rank, kv[0][1]))}
    else:
        summary["combinations"] = [format_labelset(c) for c in model.combinations]
    _write_json(summary, args.summary)
    return 0


def cmd_predict(args) -> int:
    overrides = _backend_overrides(args.backend)
    external = {}
    for label, spec in overrides.items():
        name, path = parse_backend(spec)
        if name != "external":
            raise ConfigError("at prediction time --backend can only supply external:<path> scores")
        external[Label.parse(label)] = ExternalScores.from_file(path)
    model = load_model(args.bundle, word_vectors=args.word_vectors,
                       sample_vectors=args.sample_vectors, external=external or None)
    manifest = read_manifest(args.bundle)
    run = manifest.get("run", {}).get("run_config", {})
    columns = run.get("columns", {"id": "id", "text": "text", "labels": "labels"})
    corpus = load_corpus(args.input, args.format, columns, split="test")
    if getattr(model, "fallback", None) is not None and args.fallback:
        model.config = replace(model.config, fallback=args.fallback)
    start = time.perf_counter()
    result = model.predict_batch(corpus)
    by_id = {p.id: p.labels for p in result.predictions}
    write_predictions(((p.id, by_id.get(p.id)) for p in corpus), args.out)
    for post_id, message in result.failures:
        print(f"error: post {post_id}: {message}", file=sys.stderr)
    counts = Counter(format_labelset(p.labels) for p in result.predictions)
    summary = {
        "input": str(args.input),
        "n_posts": len(corpus),
        "n_predicted": len(result.predictions),
        "n_failed": len(result.failures),
        "n_hostile": sum(Label.NON_HOSTILE not in p.labels for p in result.predictions),
        "fallback_count": result.fallback_count,
        "label_sets": dict(sorted(counts.items())),
        "timing_s": {**result.timing, "total": time.perf_counter() - start},
        "config_hash": manifest.get("run", {}).get("config_hash"),
    }
    _write_json(summary, args.summary)
    return DataError.exit_code if result.failures else 0


def cmd_eval(args) -> int:
    gold = load_corpus(args.gold, args.format, _columns(args), split="test")
    if not gold.labeled:
        missing = next(p.id for p in gold if p.labels is None)
        raise DataError(f"gold corpus has unlabeled post {missing}")
    pred = read_predictions(args.predictions)
    gold_ids, pred_ids = set(gold.ids), set(pred)
    if gold_ids != pred_ids:
        missing = sorted(gold_ids - pred_ids)
        extra = sorted(pred_ids - gold_ids)
        parts = []
        if missing:
            parts.append(f"missing predictions for {len(missing)} ids: {', '.join(missing[:20])}")
        if extra:
            parts.append(f"{len(extra)} predicted ids not in gold: {', '.join(extra[:20])}")
        raise DataError("; ".join(parts))
    empty = [pid for pid, labels in pred.items() if labels is None]
    if empty:
        raise DataError(f"predictions without labels for ids: {', '.join(sorted(empty)[:20])}")
    report = evaluate([p.labels for p in gold], [pred[p.id] for p in gold], args.scope,
                      args.fallback_count)
    print(report.table())
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    return 0


def _columns(args) -> dict[str, str]:
    if getattr(args, "config", None):
        return RunConfig.load(args.config).columns
    return {"id": "id", "text": "text", "labels": "labels"}


def stats_table(rows: dict[str, dict[str, int]]) -> str:
    keys = [l.value for l in HOSTILE_LABELS] + ["total_hostile", "non_hostile", "total"]
    names = {"total_hostile": "Total Hostile", "non_hostile": "Non-Hostile", "total": "Total"}
    head = f"{'Label':<16}" + "".join(f"{name:>10}" for name in rows)
    lines = [head, "-" * len(head)]
    for key in keys:
        lines.append(f"{names.get(key, key.capitalize()):<16}"
                     + "".join(f"{row[key]:>10d}" for row in rows.values()))
    return "\n".join(lines)


def cmd_stats(args) -> int:
    rows = {}
    for path in args.corpus:
        name = Path(path).stem
        rows[name] = corpus_stats(load_corpus(path, args.format, _columns(args), split=name))
    if len(rows) > 1:
        rows["all"] = {k: sum(r[k] for r in rows.values()) for k in next(iter(rows.values()))}
    print(stats_table(rows))
    if args.out:
        _write_json(rows, args.out)
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(n_posts=args.posts, seed=args.seed)
    out = Path(args.out)
    paths = write_synthetic_dataset(out, spec)
    config = {
        "seed": 42,
        "train": paths["train"].name,
        "test": paths["test"].name,
        "lexicons": {"hate": paths["hate"].name, "swear": paths["swear"].name},
        "word_vectors": paths["word_vectors"].name,
    }
    (out / "config.json").write_text(json.dumps(config, indent=2, ensure_ascii=False) + "\n",
                                     encoding="utf-8")
    print(f"wrote synthetic dataset and config.json to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hostile-posts", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model bundle")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--train", help="training corpus (overrides config)")
    p.add_argument("--out", required=True, help="bundle directory to write")
    p.add_argument("--summary", help="write the training summary JSON here (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--strategy", choices=("binary_relevance", "label_powerset"))
    p.add_argument("--fallback", choices=("hate_offensive", "max_prob"))
    p.add_argument("--backend", action="append", metavar="LABEL=BACKEND",
                   help="svm, mlp, ngram or external:<scores.tsv>; repeatable")
    p.add_argument("--jobs", type=int, help="train independent classifiers in parallel")
    p.add_argument("--stopwords")
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--sample-vectors", dest="sample_vectors")
    p.add_argument("--format", choices=("tsv", "csv"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a corpus with a trained bundle")
    p.add_argument("bundle")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="predictions TSV to write")
    p.add_argument("--summary", help="write the prediction summary JSON here (default: stdout)")
    p.add_argument("--fallback", choices=("hate_offensive", "max_prob"))
    p.add_argument("--backend", action="append", metavar="LABEL=external:PATH",
                   help="replace an external classifier's scores for this input")
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--sample-vectors", dest="sample_vectors")
    p.add_argument("--format", choices=("tsv", "csv"))
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("gold")
    p.add_argument("predictions")
    p.add_argument("--scope", choices=SCOPES, default="end_to_end")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--config", help="JSON run configuration (for column names)")
    p.add_argument("--fallback-count", dest="fallback_count", type=int,
                   help="fallback count from the prediction summary, echoed in the report")
    p.add_argument("--format", choices=("tsv", "csv"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="per-label counts of one or more corpora")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--out", help="write the counts as JSON here")
    p.add_argument("--config", help="JSON run configuration (for column names)")
    p.add_argument("--format", choices=("tsv", "csv"))
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="write a keyword-driven synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--posts", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except HostilePostsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
