from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hostile_posts.corpus_io import lexicon_from_lines
from hostile_posts.errors import DataError
from hostile_posts.preprocess import (
    EmojiMatcher,
    clean,
    entity_key,
    extract_entities,
    normalize,
    strip_entities,
    tokenize,
)


@pytest.mark.parametrize("raw, expected", [
    ("Bakra!", "bakra"),
    ("चोर।", "चोर"),
    ("खबर", "खबर"),
    ("...", ""),
    ("«Quote»", "quote"),
])
def test_normalize(raw, expected):
    assert normalize(raw) == expected


def test_normalize_nfc():
    decomposed = "क़"  # KA + NUKTA composes to QA
    assert normalize(decomposed) == normalize("क़") or normalize(decomposed) == "क़"
    assert normalize(normalize(decomposed)) == normalize(decomposed)


@given(st.text(max_size=20))
def test_normalize_idempotent(token):
    once = normalize(token)
    assert normalize(once) == once


def test_extract_example():
    e = extract_entities("@modi123 #FakeNews https://t.co/x 😀 :-) यह खबर")
    assert e.mentions == ["@modi123"]
    assert e.hashtags == ["#FakeNews"]
    assert e.urls == ["https://t.co/x"]
    assert e.emojis == ["😀"]
    assert e.smileys == [":-)"]


def test_extract_empty():
    e = extract_entities("")
    assert e.is_empty


def test_extract_emoji_sequence():
    assert extract_entities("🤔👍😏").emojis == ["🤔", "👍", "😏"]


def test_zwj_and_modifier_clusters_kept_whole():
    family = "👨‍👩‍👧"
    thumbs = "👍🏽"
    assert extract_entities(f"a {family} b {thumbs}").emojis == [family, thumbs]


def test_devanagari_hashtag_and_mention():
    e = extract_entities("#भ्रष्ट_नेता और @राम_जी ने कहा")
    assert e.hashtags == ["#भ्रष्ट_नेता"]
    assert e.mentions == ["@राम_जी"]


def test_danda_ends_hashtag():
    assert extract_entities("#घोटाला।").hashtags == ["#घोटाला"]


def test_www_url_and_case():
    assert extract_entities("see WWW.Example.com/x now").urls == ["WWW.Example.com/x"]


def test_smiley_not_inside_word():
    e = extract_entities("visit :Pune today :P")
    assert e.smileys == [":P"]


def test_url_claims_embedded_hashtag():
    e = extract_entities("https://x.org/#frag #real")
    assert e.urls == ["https://x.org/#frag"]
    assert e.hashtags == ["#real"]


def test_custom_emoji_ranges(tmp_path):
    path = tmp_path / "ranges.txt"
    path.write_text("# only hearts\n2764\n", encoding="utf-8")
    matcher = EmojiMatcher.from_file(path)
    assert extract_entities("❤ 😀", matcher).emojis == ["❤"]


def test_bad_emoji_range_file(tmp_path):
    path = tmp_path / "ranges.txt"
    path.write_text("ZZZ\n", encoding="utf-8")
    with pytest.raises(DataError, match=":1:"):
        EmojiMatcher.from_file(path)


def test_tokenize_examples():
    assert tokenize("चौकीदार चोर है") == ["चौकीदार", "चोर", "है"]
    assert tokenize("a  b") == ["a", "b"]
    assert clean("😀").tokens == []


def test_clean_example():
    out = clean("यह खबर झूठी है #fake", {"यह", "है"})
    assert out.tokens == ["खबर", "झूठी"]
    assert out.raw_tokens == ["यह", "खबर", "झूठी", "है"]
    assert out.entities.hashtags == ["#fake"]


def test_clean_only_entities_and_stopwords():
    assert clean("है @a #b 😀 :) https://x.y", {"है"}).tokens == []


def test_clean_accepts_lexicon():
    assert clean("यह खबर", lexicon_from_lines(["यह"], "stop")).tokens == ["खबर"]


def test_entity_key_lowercases_latin_only():
    assert entity_key("#FakeNews") == "#fakenews"
    assert entity_key("#झूठ") == "#झूठ"


# --- properties -----------------------------------------------------------------

_pieces = st.sampled_from([
    "खबर", "झूठी", "है", "Bakra!", "#tag", "#टैग", "@user", "@नेता", "https://t.co/a", "www.x.in",
    "😀", "🤬", "👍🏽", ":)", ":-(", "<3", "चोर।", "a", "B", "१२३", "x,y", "  ", "(ok)",
])
_texts = st.lists(_pieces, max_size=12).map(" ".join)
_free_text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=40)
STOP = frozenset({"है", "a"})


@given(st.one_of(_texts, _free_text))
def test_clean_idempotent(text):
    first = clean(text, STOP).tokens
    assert clean(" ".join(first), STOP).tokens == first


@given(st.one_of(_texts, _free_text))
def test_extraction_complete(text):
    residual = strip_entities(text)
    assert extract_entities(residual).is_empty


@given(st.one_of(_texts, _free_text))
def test_spans_disjoint_and_in_text(text):
    e = extract_entities(text)
    spans = e.spans
    for s in spans:
        assert text[s.start:s.end] == s.text
    for a, b in zip(spans, spans[1:]):
        assert a.end <= b.start


@given(st.one_of(_texts, _free_text))
def test_entity_lists_left_to_right(text):
    e = extract_entities(text)
    starts = {}
    for s in e.spans:
        starts.setdefault(s.text, []).append(s.start)
    for group in (e.hashtags, e.mentions, e.urls, e.emojis, e.smileys):
        positions = []
        seen: dict[str, int] = {}
        for item in group:
            k = seen.get(item, 0)
            positions.append(starts[item][k])
            seen[item] = k + 1
        assert positions == sorted(positions)


@settings(max_examples=200)
@given(st.lists(st.sampled_from(["खबर", "झूठी", "है", "चोर", "a", "नेता", "#x", "😀"]), max_size=10))
def test_token_order_preserved(words):
    tokens = clean(" ".join(words), STOP).tokens
    expected = [w for w in words if not w.startswith("#") and w != "😀" and w not in STOP]
    assert tokens == expected


@given(st.one_of(_texts, _free_text))
def test_cleaned_tokens_are_subsequence_without_stopwords(text):
    out = clean(text, STOP)
    it = iter(out.raw_tokens)
    assert all(any(t == r for r in it) for t in out.tokens)
    assert not set(out.tokens) & STOP
