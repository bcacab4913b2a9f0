from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hostile_posts.corpus_io import (
    Corpus,
    EmbeddingTable,
    Post,
    SampleVectorTable,
    lexicon_from_lines,
)
from hostile_posts.errors import DataError
from hostile_posts.features import (
    EmbeddingBlock,
    FeatureResources,
    FeatureSpec,
    LexiconCountBlock,
    OneHotBlock,
    Vocab,
    analyze,
    assemble,
    assemble_batch,
    build_vocab,
    defamation_recipe,
    encode_onehot,
    hate_recipe,
    lexicon_count,
    pool_embeddings,
)
from hostile_posts.labels import Label

HATE = frozenset({Label.HATE})
NONE = frozenset({Label.NON_HOSTILE})


def _corpus(rows):
    return Corpus(tuple(Post(str(i), text, labels) for i, (text, labels) in enumerate(rows)))


def _table(d: dict[str, list[float]]) -> EmbeddingTable:
    dim = len(next(iter(d.values())))
    return EmbeddingTable(dim, {k: np.array(v, dtype=float) for k, v in d.items()})


# --- build_vocab ----------------------------------------------------------------

def test_vocab_threshold():
    rows = [("#a " * 5, HATE), ("#b #b", HATE), ("#c", HATE), ("#b #b #b #d", NONE)]
    vocab = build_vocab(_corpus(rows), Label.HATE, "hashtag", 2)
    assert vocab.entries == ("#a", "#b")


def test_vocab_empty_class():
    vocab = build_vocab(_corpus([("#a", NONE)]), Label.FAKE, "hashtag", 1)
    assert vocab.entries == () and len(encode_onehot(["#a"], vocab)) == 0


def test_vocab_tie_break_lexicographic():
    rows = [("#y #x", HATE)] * 3
    assert build_vocab(_corpus(rows), Label.HATE, "hashtag", 3).entries == ("#x", "#y")


def test_vocab_word_kind_uses_cleaned_tokens():
    rows = [("यह चोर है #चोर", HATE)] * 2
    vocab = build_vocab(_corpus(rows), Label.HATE, "word", 1, stopwords={"यह", "है"})
    assert vocab.entries == ("चोर",)


def test_vocab_non_hostile_warns(caplog):
    build_vocab(_corpus([("#a", NONE)]), Label.NON_HOSTILE, "hashtag", 1)
    assert "non-hostile" in caplog.text


def test_vocab_json_roundtrip():
    vocab = Vocab("emoji", Label.DEFAMATION, ("😀", "🙏"), 3)
    assert Vocab.from_dict(json.loads(json.dumps(vocab.to_dict()))) == vocab


_tag_posts = st.lists(
    st.tuples(st.lists(st.sampled_from(["#a", "#b", "#c", "#d", "#e"]), max_size=6),
              st.sampled_from([HATE, NONE, frozenset({Label.HATE, Label.FAKE})])),
    max_size=25,
)


@given(_tag_posts, st.integers(1, 6), st.integers(0, 4))
def test_vocab_monotone_in_min_freq(rows, low, extra):
    corpus = _corpus([(" ".join(tags), labels) for tags, labels in rows])
    loose = build_vocab(corpus, Label.HATE, "hashtag", low)
    strict = build_vocab(corpus, Label.HATE, "hashtag", low + extra)
    assert set(strict.entries) <= set(loose.entries)


@given(_tag_posts)
def test_vocab_deterministic_and_order_free(rows):
    corpus = _corpus([(" ".join(tags), labels) for tags, labels in rows])
    reversed_corpus = Corpus(tuple(reversed(corpus.posts)))
    a = json.dumps(build_vocab(corpus, Label.HATE, "hashtag", 2).to_dict())
    b = json.dumps(build_vocab(reversed_corpus, Label.HATE, "hashtag", 2).to_dict())
    assert a == b


@given(_tag_posts)
def test_vocab_entries_meet_threshold(rows):
    corpus = _corpus([(" ".join(tags), labels) for tags, labels in rows])
    vocab = build_vocab(corpus, Label.HATE, "hashtag", 2)
    counts = {}
    for tags, labels in rows:
        if Label.HATE in labels:
            for t in tags:
                counts[t] = counts.get(t, 0) + 1
    assert all(counts[e] >= 2 for e in vocab.entries)
    assert list(vocab.entries) == sorted(vocab.entries, key=lambda e: (-counts[e], e))


# --- encoders -------------------------------------------------------------------

def test_onehot_presence():
    vocab = Vocab("hashtag", Label.HATE, ("#a", "#b"), 1)
    np.testing.assert_array_equal(encode_onehot(["#b"], vocab), [0, 1])
    np.testing.assert_array_equal(encode_onehot(["#b", "#b"], vocab), [0, 1])
    np.testing.assert_array_equal(encode_onehot(["#z"], vocab), [0, 0])


def test_pool_mean():
    table = _table({"w1": [1, 2], "w2": [3, 4]})
    np.testing.assert_array_equal(pool_embeddings(["w1", "w2"], table), [2, 3])


def test_pool_all_oov():
    table = _table({"w1": [1, 2]})
    np.testing.assert_array_equal(pool_embeddings(["x", "y"], table), [0, 0])


def test_pool_cap_matches_brute_force(rng):
    words = [f"w{i}" for i in range(150)]
    table = EmbeddingTable(4, {w: rng.normal(size=4) for w in words})
    expected = np.mean([table.get(w) for w in words[:100]], axis=0)
    np.testing.assert_allclose(pool_embeddings(words, table, 100), expected, rtol=0, atol=1e-12)
    assert not np.allclose(pool_embeddings(words, table, 150), expected)


def test_lexicon_count_examples():
    lex = lexicon_from_lines(["चोर"], "swear")
    np.testing.assert_allclose(lexicon_count(["चोर", "चोर", "खबर"], lex), [2, 2 / 3])
    np.testing.assert_array_equal(lexicon_count([], lex), [0, 0])
    np.testing.assert_array_equal(lexicon_count(["खबर"], lex), [0, 0])


# --- assemble -------------------------------------------------------------------

def test_assemble_onehot_and_lexicon_fixture():
    vocab = Vocab("hashtag", Label.HATE, ("#a",), 1)
    res = FeatureResources(lexicons={"swear": lexicon_from_lines(["चोर"], "swear")},
                           vocabs={(Label.HATE, "hashtag"): vocab})
    spec = FeatureSpec((OneHotBlock("hashtag", Label.HATE, 1), LexiconCountBlock("swear")))
    post = Post("p", "#a चोर", None)
    out = assemble(post, spec, res)
    # independent route: concatenate the blocks by hand
    a = analyze(post)
    manual = np.concatenate([encode_onehot(a.entities.hashtags, vocab),
                             lexicon_count(a.text_tokens, res.lexicons["swear"])])
    np.testing.assert_array_equal(out, [1, 1, 0.5])
    np.testing.assert_array_equal(out, manual)
    assert spec.total_dim == 3


def test_assemble_embedding_oov_is_zero():
    res = FeatureResources(word_vectors=_table({"x": [1.0, 1.0, 1.0]}))
    spec = FeatureSpec((EmbeddingBlock("word_vectors", 3),))
    np.testing.assert_array_equal(assemble(Post("p", "कुछ नहीं", None), spec, res), [0, 0, 0])


def test_assemble_sample_vector_missing_id():
    res = FeatureResources(sample_vectors=SampleVectorTable(2, {"a": np.ones(2)}))
    spec = FeatureSpec((EmbeddingBlock("sample_vectors", 2),))
    np.testing.assert_array_equal(assemble(Post("a", "", None), spec, res), [1, 1])
    with pytest.raises(DataError, match="zzz"):
        assemble(Post("zzz", "", None), spec, res)


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(6))))
def test_assemble_batch_is_pure(order):
    vocab = Vocab("word", Label.HATE, ("चोर", "खबर"), 1)
    res = FeatureResources(word_vectors=_table({"चोर": [1.0, 0.0], "खबर": [0.0, 2.0]}),
                           lexicons={"swear": lexicon_from_lines(["चोर"], "swear")},
                           vocabs={(Label.HATE, "word"): vocab})
    spec = FeatureSpec((EmbeddingBlock("word_vectors", 2), OneHotBlock("word", Label.HATE, 2),
                        LexiconCountBlock("swear")))
    texts = ["चोर", "खबर चोर", "", "#x 😀", "खबर खबर", "चोर चोर चोर"]
    posts = [Post(str(i), t, None) for i, t in enumerate(texts)]
    base = assemble_batch(posts, spec, res)
    permuted = assemble_batch([posts[i] for i in order], spec, res)
    np.testing.assert_array_equal(permuted, base[list(order)])


def test_standardization_only_touches_embeddings():
    spec = FeatureSpec((EmbeddingBlock("word_vectors", 2), LexiconCountBlock("swear")))
    X = np.array([[1.0, 10.0, 2.0, 0.5], [3.0, 10.0, 0.0, 0.0]])
    fitted = spec.fit_standardization(X)
    Z = fitted.standardize(X)
    np.testing.assert_allclose(Z[:, 0], [-1, 1])
    np.testing.assert_allclose(Z[:, 1], [0, 0])  # zero variance -> centred, scale 1
    np.testing.assert_array_equal(Z[:, 2:], X[:, 2:])
    assert FeatureSpec.from_dict(json.loads(json.dumps(fitted.to_dict()))) == fitted


def test_recipes():
    vocabs = {(label, kind): Vocab(kind, label, ("x",), 1)
              for label in (Label.HATE, Label.DEFAMATION)
              for kind in ("hashtag", "mention", "emoji", "word")}
    res = FeatureResources(word_vectors=_table({"x": [1.0, 2.0]}),
                           lexicons={"hate": lexicon_from_lines(["a"], "hate"),
                                     "swear": lexicon_from_lines(["b"], "swear")},
                           vocabs=vocabs)
    hate = hate_recipe(res)
    assert [type(b).__name__ for b in hate.blocks] == (
        ["EmbeddingBlock"] + ["OneHotBlock"] * 4 + ["LexiconCountBlock"] * 2)
    assert [b.lexicon for b in hate.blocks[-2:]] == ["hate", "swear"]
    defamation = defamation_recipe(res)
    assert [b.kind for b in defamation.blocks if isinstance(b, OneHotBlock)] == ["hashtag", "mention", "emoji"]
    assert [b.lexicon for b in defamation.blocks if isinstance(b, LexiconCountBlock)] == ["swear"]
    # sample vectors take precedence for the hate embedding block when loaded
    res2 = FeatureResources(sample_vectors=SampleVectorTable(3, {"p": np.zeros(3)}),
                            word_vectors=res.word_vectors, vocabs=vocabs)
    assert hate_recipe(res2).blocks[0] == EmbeddingBlock("sample_vectors", 3)
