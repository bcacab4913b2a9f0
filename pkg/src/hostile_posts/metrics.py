"""Shared-task evaluation: binary reports, coarse and fine-grained F1.

* coarse F1: support-weighted mean of the hostile and non-hostile class F1s;
* fine F1 for a dimension: positive-class F1 of membership, over all
  evaluated posts (posts predicted non-hostile count as negatives);
* weighted fine F1: fine F1s averaged with gold positive supports as weights.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DataError
from .labels import HOSTILE_LABELS, Label

SCOPES = ("end_to_end", "second_level", "gold_hostile")


@dataclass(frozen=True)
class ClassStats:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class BinaryReport:
    negative: ClassStats
    positive: ClassStats
    accuracy: float
    n: int
    zero_division: tuple[str, ...] = ()

    def __getitem__(self, cls: int) -> ClassStats:
        return self.positive if cls == 1 else self.negative

    @property
    def weighted_f1(self) -> float:
        total = self.negative.support + self.positive.support
        if total == 0:
            return 0.0
        return (self.negative.f1 * self.negative.support
                + self.positive.f1 * self.positive.support) / total


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def _class_stats(tp: int, fp: int, fn: int, name: str, flags: list[str]) -> ClassStats:
    if tp + fp == 0:
        precision = 0.0
        flags.append(f"precision[{name}]")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        flags.append(f"recall[{name}]")
    else:
        recall = tp / (tp + fn)
    return ClassStats(precision, recall, f1_score(precision, recall), tp + fn)


def binary_report(gold: Sequence[int], pred: Sequence[int]) -> BinaryReport:
    """Precision/recall/F1/support for classes 0 and 1, plus accuracy.

    Undefined ratios are reported as 0 and named in ``zero_division``.
    """
    g = np.asarray(gold, dtype=np.int64)
    p = np.asarray(pred, dtype=np.int64)
    if g.shape != p.shape:
        raise DataError(f"gold has {g.size} entries but predictions have {p.size}")
    if g.size == 0:
        raise DataError("cannot evaluate an empty set")
    tp = int(np.sum((g == 1) & (p == 1)))
    tn = int(np.sum((g == 0) & (p == 0)))
    fp = int(np.sum((g == 0) & (p == 1)))
    fn = int(np.sum((g == 1) & (p == 0)))
    flags: list[str] = []
    negative = _class_stats(tn, fn, fp, "0", flags)
    positive = _class_stats(tp, fp, fn, "1", flags)
    return BinaryReport(negative, positive, (tp + tn) / g.size, int(g.size), tuple(flags))


def _aligned(gold, pred):
    if len(gold) != len(pred):
        raise DataError(f"gold has {len(gold)} label sets but predictions have {len(pred)}")
    return gold, pred


def _hostile(labelsets) -> list[int]:
    return [int(Label.NON_HOSTILE not in s) for s in labelsets]


def coarse_f1(gold: Sequence[frozenset[Label]], pred: Sequence[frozenset[Label]]) -> float:
    gold, pred = _aligned(gold, pred)
    return binary_report(_hostile(gold), _hostile(pred)).weighted_f1


def fine_report(gold, pred, dim: Label) -> BinaryReport:
    gold, pred = _aligned(gold, pred)
    return binary_report([int(dim in s) for s in gold], [int(dim in s) for s in pred])


def fine_f1(gold, pred, dim: Label) -> float:
    return fine_report(gold, pred, dim).positive.f1


def support_weighted_mean(values: Sequence[float], supports: Sequence[int]) -> float:
    s = np.asarray(supports, dtype=np.float64)
    if s.sum() <= 0:
        raise DataError("all supports are zero; weighted mean undefined")
    return float(np.dot(np.asarray(values, dtype=np.float64), s) / s.sum())


def weighted_fine_f1(gold, pred) -> float:
    gold, pred = _aligned(gold, pred)
    reports = [fine_report(gold, pred, d) for d in HOSTILE_LABELS]
    return support_weighted_mean([r.positive.f1 for r in reports],
                                 [r.positive.support for r in reports])


@dataclass
class EvalReport:
    scope: str
    n: int
    coarse_f1: float
    fine_f1: dict[str, float]
    weighted_fine_f1: float | None
    reports: dict[str, BinaryReport]
    fallback_count: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scope": self.scope, "n": self.n, "coarse_f1": self.coarse_f1,
            "fine_f1": self.fine_f1, "weighted_fine_f1": self.weighted_fine_f1,
            "fallback_count": self.fallback_count, "notes": self.notes,
            "reports": {k: asdict(v) for k, v in self.reports.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        """Fixed-width classification report, one block of two rows per class."""
        head = f"{'Class':<12}{'Binary':>7}{'Precision':>11}{'Recall':>8}{'F1 score':>10}{'Support':>9}{'Accuracy':>10}"
        lines = [head, "-" * len(head)]
        names = {"non_hostile": "Non-Hostile", **{d.value: d.value.capitalize() for d in HOSTILE_LABELS}}
        for key in ("non_hostile", "defamation", "fake", "hate", "offensive"):
            if key not in self.reports:
                continue
            r = self.reports[key]
            for cls in (0, 1):
                c = r[cls]
                lines.append(
                    f"{names[key] if cls == 0 else '':<12}{cls:>7}{c.precision:>11.2f}{c.recall:>8.2f}"
                    f"{c.f1:>10.2f}{c.support:>9d}{(f'{r.accuracy:.2f}' if cls == 0 else ''):>10}"
                )
        lines.append("")
        lines.append(f"coarse-grained F1        {self.coarse_f1:.4f}")
        for d in HOSTILE_LABELS:
            lines.append(f"{d.value:<25}{self.fine_f1[d.value]:.4f}")
        wf = "n/a" if self.weighted_fine_f1 is None else f"{self.weighted_fine_f1:.4f}"
        lines.append(f"weighted fine-grained F1 {wf}")
        if self.fallback_count is not None:
            lines.append(f"fallback assignments     {self.fallback_count}")
        return "\n".join(lines)


def evaluate(gold: Sequence[frozenset[Label]], pred: Sequence[frozenset[Label]],
             scope: str = "end_to_end", fallback_count: int | None = None) -> EvalReport:
    """Full report. ``scope`` picks the evaluated posts:

    ``end_to_end`` all posts; ``second_level`` posts the system routed to
    hostile (the isolated level-2 view); ``gold_hostile`` posts whose gold
    labels are hostile.
    """
    gold, pred = _aligned(list(gold), list(pred))
    if scope not in SCOPES:
        raise DataError(f"unknown scope {scope!r}; expected one of {SCOPES}")
    if scope == "second_level":
        keep = [i for i, s in enumerate(pred) if Label.NON_HOSTILE not in s]
    elif scope == "gold_hostile":
        keep = [i for i, s in enumerate(gold) if Label.NON_HOSTILE not in s]
    else:
        keep = list(range(len(gold)))
    if not keep:
        raise DataError(f"no posts fall in scope {scope!r}")
    gold = [gold[i] for i in keep]
    pred = [pred[i] for i in keep]

    reports = {"non_hostile": binary_report([int(Label.NON_HOSTILE in s) for s in gold],
                                            [int(Label.NON_HOSTILE in s) for s in pred])}
    notes = []
    for d in HOSTILE_LABELS:
        reports[d.value] = fine_report(gold, pred, d)
        if reports[d.value].positive.support == 0:
            notes.append(f"{d.value}: no gold positives, F1 reported as 0")
    supports = [reports[d.value].positive.support for d in HOSTILE_LABELS]
    fine = {d.value: reports[d.value].positive.f1 for d in HOSTILE_LABELS}
    weighted = (support_weighted_mean(list(fine.values()), supports) if sum(supports) else None)
    if weighted is None:
        notes.append("weighted fine F1 undefined: no hostile gold labels in scope")
    return EvalReport(scope, len(gold), reports["non_hostile"].weighted_f1, fine, weighted,
                      reports, fallback_count, notes)
