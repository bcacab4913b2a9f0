"""Keyword-driven synthetic corpus for smoke tests and end-to-end checks.

Each hostile dimension owns a family of cue tokens; a hostile post carries
cues for every dimension in its label set and non-hostile posts carry none
(up to a small decoy rate). Label combinations follow a long-tailed
distribution, so some combinations are rare.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus_io import Corpus, Post, write_corpus
from .labels import Label

FAMILIES: dict[Label, dict[str, list[str]]] = {
    Label.FAKE: {
        "words": ["अफवाह", "फर्जी", "वायरल", "भ्रामक", "नकली", "सनसनी"],
        "hashtags": ["#सच_जानो", "#viral"],
        "mentions": [],
        "emojis": ["😱"],
    },
    Label.HATE: {
        "words": ["नफरत", "गद्दार", "देशद्रोही", "दंगाई", "भगाओ", "कट्टर"],
        "hashtags": ["#बहिष्कार"],
        "mentions": [],
        "emojis": ["😡", "🤬"],
    },
    Label.OFFENSIVE: {
        "words": ["बेवकूफ", "नालायक", "घटिया", "गधा", "निकम्मा", "जाहिल"],
        "hashtags": [],
        "mentions": [],
        "emojis": ["🖕"],
    },
    Label.DEFAMATION: {
        "words": ["घोटालेबाज", "भ्रष्ट", "रिश्वतखोर"],
        "hashtags": ["#घोटाला", "#भ्रष्ट_नेता"],
        "mentions": ["@neta_ram", "@mantri_shyam", "@party_xyz"],
        "emojis": [],
    },
}

NEUTRAL_WORDS = [
    "आज", "मौसम", "अच्छा", "खबर", "लोग", "सरकार", "शहर", "बारिश", "खेल", "मैच",
    "स्कूल", "बच्चे", "त्योहार", "बधाई", "धन्यवाद", "किसान", "बाजार", "सड़क", "गाँव",
    "परिवार", "यात्रा", "फिल्म", "गाना", "पानी", "बिजली", "अस्पताल", "डॉक्टर", "पढ़ाई",
    "नौकरी", "कल", "सुबह", "शाम", "दोस्त", "देश", "राज्य", "चुनाव", "नेता", "वीडियो",
]
NEUTRAL_FUNCTION = ["है", "और", "के", "में", "की", "से", "को", "पर", "यह", "भी"]
NEUTRAL_ENTITIES = {
    "hashtags": ["#मौसम", "#क्रिकेट", "#news"],
    "mentions": ["@news_desk", "@city_updates"],
    "emojis": ["😀", "🙏", "👍"],
}

# (label set, relative weight) for hostile posts: two dominant singletons, a
# frequent hate+offensive pair, then a long tail.
COMBINATIONS: list[tuple[frozenset[Label], float]] = [
    (frozenset({Label.FAKE}), 0.34),
    (frozenset({Label.HATE}), 0.08),
    (frozenset({Label.OFFENSIVE}), 0.08),
    (frozenset({Label.DEFAMATION}), 0.10),
    (frozenset({Label.HATE, Label.OFFENSIVE}), 0.16),
    (frozenset({Label.DEFAMATION, Label.OFFENSIVE}), 0.05),
    (frozenset({Label.FAKE, Label.DEFAMATION}), 0.05),
    (frozenset({Label.HATE, Label.DEFAMATION}), 0.04),
    (frozenset({Label.HATE, Label.OFFENSIVE, Label.DEFAMATION}), 0.05),
    (frozenset({Label.FAKE, Label.HATE}), 0.03),
    (frozenset({Label.FAKE, Label.OFFENSIVE}), 0.015),
    (frozenset({Label.FAKE, Label.HATE, Label.OFFENSIVE, Label.DEFAMATION}), 0.005),
]


@dataclass(frozen=True)
class SyntheticSpec:
    n_posts: int = 1000
    hostile_rate: float = 0.47
    decoy_rate: float = 0.03  # chance a non-hostile post carries one stray cue word
    seed: int = 42


def _pick(rng: np.random.Generator, items: list[str]) -> str:
    return items[int(rng.integers(len(items)))]


def _hostile_cues(rng, label: Label) -> list[str]:
    fam = FAMILIES[label]
    cues = [_pick(rng, fam["words"]) for _ in range(int(rng.integers(1, 3)))]
    if label is Label.DEFAMATION:
        cues.append(_pick(rng, fam["mentions"] + fam["hashtags"]))
    else:
        entities = fam["hashtags"] + fam["mentions"] + fam["emojis"]
        if entities and rng.random() < 0.5:
            cues.append(_pick(rng, entities))
    return cues


def generate_corpus(spec: SyntheticSpec = SyntheticSpec()) -> Corpus:
    rng = np.random.default_rng(spec.seed)
    combos = [c for c, _ in COMBINATIONS]
    weights = np.array([w for _, w in COMBINATIONS])
    weights = weights / weights.sum()
    posts = []
    for i in range(spec.n_posts):
        pieces = [_pick(rng, NEUTRAL_WORDS) for _ in range(int(rng.integers(4, 10)))]
        pieces += [_pick(rng, NEUTRAL_FUNCTION) for _ in range(int(rng.integers(1, 4)))]
        if rng.random() < 0.3:
            kind = _pick(rng, list(NEUTRAL_ENTITIES))
            pieces.append(_pick(rng, NEUTRAL_ENTITIES[kind]))
        if rng.random() < spec.hostile_rate:
            labels = combos[int(rng.choice(len(combos), p=weights))]
            for label in sorted(labels, key=lambda l: l.rank):
                pieces += _hostile_cues(rng, label)
        else:
            labels = frozenset({Label.NON_HOSTILE})
            if rng.random() < spec.decoy_rate:
                fam = FAMILIES[_pick(rng, [l for l in FAMILIES])]  # type: ignore[arg-type]
                pieces.append(_pick(rng, fam["words"]))
        order = rng.permutation(len(pieces))
        posts.append(Post(f"s{i:05d}", " ".join(pieces[k] for k in order), labels))
    return Corpus(tuple(posts), "unspecified")


def split_corpus(corpus: Corpus, train_fraction: float = 0.8) -> tuple[Corpus, Corpus]:
    cut = int(round(len(corpus) * train_fraction))
    return Corpus(corpus.posts[:cut], "train"), Corpus(corpus.posts[cut:], "test")


def write_word_vectors(path: str | Path, dim: int = 16, seed: int = 7) -> None:
    """Word vectors where each cue family clusters around its own direction."""
    rng = np.random.default_rng(seed)
    centers = {label: rng.normal(0, 1, dim) for label in FAMILIES}
    rows = []
    for label, fam in FAMILIES.items():
        for w in fam["words"]:
            rows.append((w, centers[label] + rng.normal(0, 0.3, dim)))
    for w in NEUTRAL_WORDS:
        rows.append((w, rng.normal(0, 1, dim)))
    lines = [f"{len(rows)} {dim}"]
    lines += [w + " " + " ".join(f"{v:.6f}" for v in vec) for w, vec in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_synthetic_dataset(directory: str | Path, spec: SyntheticSpec = SyntheticSpec(),
                            train_fraction: float = 0.8) -> dict[str, Path]:
    """Write train/test TSVs, hate and swear lexicons and a word-vector file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, test = split_corpus(generate_corpus(spec), train_fraction)
    paths = {
        "train": directory / "train.tsv",
        "test": directory / "test.tsv",
        "hate": directory / "hate_words.txt",
        "swear": directory / "swear_words.txt",
        "word_vectors": directory / "vectors.txt",
    }
    write_corpus(train, paths["train"])
    write_corpus(test, paths["test"])
    paths["hate"].write_text("# synthetic hate lexicon\n" + "\n".join(FAMILIES[Label.HATE]["words"]) + "\n",
                             encoding="utf-8")
    paths["swear"].write_text("# synthetic swear lexicon\n" + "\n".join(FAMILIES[Label.OFFENSIVE]["words"]) + "\n",
                              encoding="utf-8")
    write_word_vectors(paths["word_vectors"], seed=spec.seed)
    return paths
