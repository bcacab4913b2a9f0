"""Tokenization, social-media entity extraction and text cleaning.

Entity extraction runs in a fixed priority order (urls, mentions, hashtags,
smileys, emojis). Each pass sees the text with the spans claimed by earlier
passes blanked out, so extracted spans never overlap and character offsets
stay aligned with the original string.
"""

from __future__ import annotations

import re
import unicodedata
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import regex

from .errors import DataError

# Devanagari letters, signs and digits; dandas (U+0964/5) and the
# abbreviation sign (U+0970) are punctuation and excluded.
_DEVANAGARI = "\u0900-\u0963\u0966-\u096F\u0971-\u097F\uA8E0-\uA8FF"
_WORD = rf"[\w{_DEVANAGARI}]"

URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
MENTION_RE = re.compile(rf"@{_WORD}+")
HASHTAG_RE = re.compile(rf"#{_WORD}+")

SMILEYS: tuple[str, ...] = (":-)", ":)", ":(", ":-(", ":D", ";)", ":P", ":/", "<3")
_SMILEY_RE = re.compile(
    "(?:"
    + "|".join(re.escape(s) for s in sorted(SMILEYS, key=len, reverse=True))
    + r")(?!\w)"
)

DEFAULT_EMOJI_RANGES: tuple[tuple[int, int], ...] = (
    (0x1F300, 0x1FAFF),
    (0x2600, 0x27BF),
    (0xFE0F, 0xFE0F),
)

_GRAPHEME_RE = regex.compile(r"\X")


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class SocialEntities:
    hashtags: list[str] = field(default_factory=list)
    mentions: list[str] = field(default_factory=list)
    urls: list[str] = field(default_factory=list)
    emojis: list[str] = field(default_factory=list)
    smileys: list[str] = field(default_factory=list)
    spans: list[Span] = field(default_factory=list, repr=False, compare=False)

    def is_empty(self) -> bool:
        return not (self.hashtags or self.mentions or self.urls or self.emojis or self.smileys)


@dataclass(frozen=True)
class CleanedText:
    tokens: list[str]
    raw_tokens: list[str]
    entities: SocialEntities = field(default_factory=SocialEntities, compare=False)


class EmojiMatcher:
    """Decides whether a grapheme cluster is an emoji from its base codepoint."""

    def __init__(self, ranges: Iterable[tuple[int, int]] = DEFAULT_EMOJI_RANGES):
        self.ranges = tuple(sorted((int(lo), int(hi)) for lo, hi in ranges))
        if not self.ranges:
            raise DataError("emoji range list is empty")

    def __call__(self, cluster: str) -> bool:
        cp = ord(cluster[0])
        return any(lo <= cp <= hi for lo, hi in self.ranges)

    @classmethod
    def from_file(cls, path: str | Path) -> "EmojiMatcher":
        """Read ranges like ``1F300-1FAFF`` or ``FE0F``, one per line."""
        ranges = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            lo, _, hi = line.partition("-")
            try:
                ranges.append((int(lo.strip().removeprefix("U+"), 16),
                               int((hi or lo).strip().removeprefix("U+"), 16)))
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad emoji range {line!r}") from None
        return cls(ranges)


DEFAULT_EMOJIS = EmojiMatcher()


def _is_latin(ch: str) -> bool:
    return "LATIN" in unicodedata.name(ch, "")


def normalize(token: str) -> str:
    """NFC, lowercase Latin letters, strip surrounding punctuation.

    Devanagari and other scripts are left alone. May return ``""``.
    """
    token = unicodedata.normalize("NFC", token)
    token = "".join(ch.lower() if ch.isupper() and _is_latin(ch) else ch for ch in token)
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return unicodedata.normalize("NFC", token[start:end])


def _blank(text: str, spans: Iterable[Span]) -> str:
    chars = list(text)
    for span in spans:
        chars[span.start:span.end] = " " * (span.end - span.start)
    return "".join(chars)


def _regex_pass(pattern: re.Pattern, text: str) -> list[Span]:
    return [Span(m.start(), m.end(), m.group()) for m in pattern.finditer(text)]


def _emoji_pass(text: str, is_emoji: EmojiMatcher) -> list[Span]:
    return [
        Span(m.start(), m.end(), m.group())
        for m in _GRAPHEME_RE.finditer(text)
        if not m.group().isspace() and is_emoji(m.group())
    ]


def _extract(text: str, is_emoji: EmojiMatcher) -> tuple[SocialEntities, str]:
    found: dict[str, list[Span]] = {}
    residual = text
    for kind, pattern in (("urls", URL_RE), ("mentions", MENTION_RE),
                          ("hashtags", HASHTAG_RE), ("smileys", _SMILEY_RE)):
        found[kind] = _regex_pass(pattern, residual)
        residual = _blank(residual, found[kind])
    found["emojis"] = _emoji_pass(residual, is_emoji)
    residual = _blank(residual, found["emojis"])
    spans = sorted((s for group in found.values() for s in group), key=lambda s: s.start)
    entities = SocialEntities(
        **{kind: [s.text for s in group] for kind, group in found.items()}, spans=spans
    )
    return entities, residual


def extract_entities(text: str, emojis: EmojiMatcher = DEFAULT_EMOJIS) -> SocialEntities:
    return _extract(text, emojis)[0]


def strip_entities(text: str, emojis: EmojiMatcher = DEFAULT_EMOJIS) -> str:
    """Return ``text`` with every extracted entity replaced by spaces."""
    return _extract(text, emojis)[1]


def tokenize(text: str) -> list[str]:
    return [tok for tok in (normalize(piece) for piece in text.split()) if tok]


def clean(
    text: str,
    stopwords: Iterable[str] = frozenset(),
    emojis: EmojiMatcher = DEFAULT_EMOJIS,
) -> CleanedText:
    """Remove entities, tokenize, then drop stopwords."""
    stop = stopwords.tokens if hasattr(stopwords, "tokens") else frozenset(stopwords)
    entities, residual = _extract(text, emojis)
    raw = tokenize(residual)
    return CleanedText(tokens=[t for t in raw if t not in stop], raw_tokens=raw, entities=entities)


def entity_key(entity: str) -> str:
    """Vocabulary form of a hashtag/mention: sigil kept, Latin lowercased."""
    entity = unicodedata.normalize("NFC", entity)
    return "".join(ch.lower() if ch.isupper() and _is_latin(ch) else ch for ch in entity)


def entity_items(entities: SocialEntities, kind: str) -> Sequence[str]:
    if kind == "hashtag":
        return [entity_key(h) for h in entities.hashtags]
    if kind == "mention":
        return [entity_key(m) for m in entities.mentions]
    if kind == "emoji":
        return list(entities.emojis)
    raise ValueError(f"not an entity kind: {kind!r}")
