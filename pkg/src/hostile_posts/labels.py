"""The five-way label space and label-set validation."""

from __future__ import annotations

import enum
from collections.abc import Iterable

from .errors import DataError


class Label(str, enum.Enum):
    FAKE = "fake"
    HATE = "hate"
    OFFENSIVE = "offensive"
    DEFAMATION = "defamation"
    NON_HOSTILE = "non_hostile"

    @property
    def rank(self) -> int:
        return _ORDER[self]

    @property
    def file_tag(self) -> str:
        """Spelling used in dataset files (``non-hostile`` keeps its hyphen)."""
        return "non-hostile" if self is Label.NON_HOSTILE else self.value

    @classmethod
    def parse(cls, tag: str) -> "Label":
        key = tag.strip().lower().replace("-", "_").replace(" ", "_")
        try:
            return cls(key)
        except ValueError:
            raise DataError(f"unknown label tag {tag!r}") from None

    def __str__(self) -> str:
        return self.value


CANONICAL_ORDER: tuple[Label, ...] = (
    Label.FAKE,
    Label.HATE,
    Label.OFFENSIVE,
    Label.DEFAMATION,
    Label.NON_HOSTILE,
)
_ORDER = {label: i for i, label in enumerate(CANONICAL_ORDER)}
HOSTILE_LABELS: tuple[Label, ...] = CANONICAL_ORDER[:4]

LabelSet = frozenset  # frozenset[Label], validated by make_labelset
NON_HOSTILE_SET: frozenset[Label] = frozenset({Label.NON_HOSTILE})


def make_labelset(labels: Iterable[Label | str]) -> frozenset[Label]:
    """Build a validated label set.

    Raises DataError if the set is empty or mixes ``non_hostile`` with a
    hostile dimension.
    """
    out = frozenset(l if isinstance(l, Label) else Label.parse(l) for l in labels)
    if not out:
        raise DataError("label set must not be empty")
    if Label.NON_HOSTILE in out and len(out) > 1:
        raise DataError(
            "exclusive label violated: non-hostile combined with "
            + ",".join(l.value for l in sort_labels(out - NON_HOSTILE_SET))
        )
    return out


def sort_labels(labels: Iterable[Label]) -> list[Label]:
    return sorted(labels, key=lambda l: l.rank)


def is_hostile(labels: Iterable[Label]) -> bool:
    return Label.NON_HOSTILE not in set(labels)


def parse_labelset(field: str) -> frozenset[Label] | None:
    """Parse a comma-separated label column; empty means unlabeled."""
    if not field.strip():
        return None
    return make_labelset(tag for tag in field.split(",") if tag.strip())


def format_labelset(labels: Iterable[Label]) -> str:
    return ",".join(l.file_tag for l in sort_labels(labels))
