"""Run configuration: JSON file schema, CLI overrides, validation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .errors import ConfigError, HostilePostsError
from .ensemble import DEFAULT_BACKENDS, EnsembleConfig, FallbackStrategy, parse_backend
from .features import DEFAULT_MAX_TOKENS, DEFAULT_MIN_FREQ
from .labels import Label
from .learners import MlpConfig, NgramConfig, SvmConfig
from .metrics import SCOPES


def _sub(cls, data: dict | None):
    data = dict(data or {})
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    for key in ("word_ngrams", "char_ngrams"):
        if key in data:
            data[key] = tuple(data[key])
    try:
        return cls(**data)
    except HostilePostsError as exc:
        raise ConfigError(str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {cls.__name__}: {exc}") from None


def ensemble_config_to_dict(cfg: EnsembleConfig) -> dict[str, Any]:
    def plain(obj):
        d = asdict(obj)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    return {
        "seed": cfg.seed,
        "strategy": cfg.strategy,
        "backends": {l.value: cfg.backends[l] for l in DEFAULT_BACKENDS},
        "fallback": cfg.fallback.value,
        "min_freq": dict(sorted(cfg.min_freq.items())),
        "svm": plain(cfg.svm),
        "mlp": plain(cfg.mlp),
        "ngram": plain(cfg.ngram),
    }


def ensemble_config_from_dict(d: dict[str, Any], jobs: int = 1) -> EnsembleConfig:
    try:
        backends = {Label.parse(k): v for k, v in d.get("backends", {}).items()}
        return EnsembleConfig(
            seed=int(d.get("seed", 42)),
            strategy=d.get("strategy", "binary_relevance"),
            backends=backends,
            fallback=FallbackStrategy(d.get("fallback", FallbackStrategy.HATE_OFFENSIVE.value)),
            min_freq={**DEFAULT_MIN_FREQ, **d.get("min_freq", {})},
            svm=_sub(SvmConfig, d.get("svm")),
            mlp=_sub(MlpConfig, d.get("mlp")),
            ngram=_sub(NgramConfig, d.get("ngram")),
            jobs=jobs,
        )
    except ConfigError:
        raise
    except HostilePostsError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


PATH_KEYS = ("train", "val", "test", "stopwords", "lexicons", "word_vectors", "sample_vectors",
             "emoji_ranges")


@dataclass
class RunConfig:
    """Everything a CLI run needs. Paths are validated before any work starts."""

    seed: int = 42
    strategy: str = "binary_relevance"
    backends: dict[str, str] = field(default_factory=dict)
    fallback: str = FallbackStrategy.HATE_OFFENSIVE.value
    min_freq: dict[str, int] = field(default_factory=dict)
    max_tokens: int = DEFAULT_MAX_TOKENS
    svm: dict[str, Any] = field(default_factory=dict)
    mlp: dict[str, Any] = field(default_factory=dict)
    ngram: dict[str, Any] = field(default_factory=dict)
    jobs: int = 1
    scope: str = "end_to_end"
    format: str | None = None
    columns: dict[str, str] = field(default_factory=lambda: {"id": "id", "text": "text", "labels": "labels"})
    train: str | None = None
    val: str | None = None
    test: str | None = None
    stopwords: str | None = None
    lexicons: dict[str, str] = field(default_factory=dict)
    word_vectors: str | None = None
    sample_vectors: str | None = None
    emoji_ranges: str | None = None

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        cfg = cls.from_dict(data)
        cfg.resolve_paths(path.parent)
        return cfg

    def resolve_paths(self, base: str | Path) -> None:
        """Make relative input paths relative to ``base`` (the config file's directory)."""
        def fix(value: str) -> str:
            p = Path(value)
            return str(p if p.is_absolute() else (Path(base) / p).resolve())

        for key in PATH_KEYS:
            value = getattr(self, key)
            if isinstance(value, dict):
                setattr(self, key, {k: fix(v) for k, v in value.items()})
            elif value is not None:
                setattr(self, key, fix(value))
        for label, spec in self.backends.items():
            name, arg = parse_backend(spec)
            if arg is not None:
                self.backends[label] = f"{name}:{fix(arg)}"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def validate(self) -> None:
        if self.scope not in SCOPES:
            raise ConfigError(f"scope must be one of {SCOPES}")
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be >= 1")
        if set(self.columns) != {"id", "text", "labels"}:
            raise ConfigError("columns must map exactly id, text and labels")
        for spec in self.backends.values():
            parse_backend(spec)
        self.ensemble_config()

    def check_paths(self, *keys: str) -> None:
        """Fail fast on any referenced input file that does not exist."""
        paths = []
        for key in keys:
            value = getattr(self, key)
            if value is None:
                continue
            if isinstance(value, dict):
                paths.extend((f"{key}.{k}", v) for k, v in value.items())
            else:
                paths.append((key, value))
        for label, spec in self.backends.items():
            name, arg = parse_backend(spec)
            if name == "external":
                paths.append((f"backends.{label}", arg))
        for key, value in paths:
            if not Path(value).is_file():
                raise ConfigError(f"{key}: file not found: {value}")

    def ensemble_config(self) -> EnsembleConfig:
        return ensemble_config_from_dict(
            {"seed": self.seed, "strategy": self.strategy, "backends": self.backends,
             "fallback": self.fallback, "min_freq": self.min_freq, "svm": self.svm,
             "mlp": self.mlp, "ngram": self.ngram},
            jobs=self.jobs,
        )
