from __future__ import annotations

import numpy as np
import pytest

from entscore.preprocess import Sentence, dedup_sentences, split_sentences, tokenize


def test_split_two_sentences():
    sentences = split_sentences("No effusion. Heart normal.")
    assert [s.text for s in sentences] == ["No effusion.", "Heart normal."]
    assert [s.index for s in sentences] == [0, 1]


def test_split_decimal_guard():
    text = "ET tube terminates approximately 3.5 cm from the carina."
    assert [s.text for s in split_sentences(text)] == [text]


def test_split_pretokenized_period_hazard():
    # A whitespace-isolated period splits off on both sides.
    text = "ET tube terminates approximately 3 . 5 cm from the carina."
    assert [s.text for s in split_sentences(text)] == [
        "ET tube terminates approximately 3",
        ".",
        "5 cm from the carina.",
    ]


def test_split_empty_input():
    assert split_sentences("") == []
    assert split_sentences("   \n ") == []


def test_split_multiple_terminators():
    assert [s.text for s in split_sentences("Stable... No change?! Good.")] == [
        "Stable...",
        "No change?!",
        "Good.",
    ]


def _random_text(rng) -> str:
    words = ["aa", "b.c", "3.5", "no", "x!", "?", ".", "yz", " "]
    return " ".join(rng.choice(words, size=rng.integers(0, 15)))


def test_split_preserves_non_whitespace_characters():
    rng = np.random.default_rng(21)
    for _ in range(300):
        text = _random_text(rng)
        joined = " ".join(s.text for s in split_sentences(text))
        assert [c for c in joined if not c.isspace()] == [
            c for c in text if not c.isspace()
        ]


def test_sentence_rejects_blank():
    with pytest.raises(ValueError):
        Sentence("  ", 0)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("No effusion.", ["No", "effusion", "."]),
        ("in situ", ["in", "situ"]),
        ("3.5cm", ["3.5cm"]),
        ("(lung).", ["(", "lung", ")", "."]),
        ("", []),
        ("--", ["-", "-"]),
    ],
)
def test_tokenize_examples(text, expected):
    assert tokenize(text) == expected


def test_dedup_examples():
    def sents(*texts):
        return [Sentence(t, i) for i, t in enumerate(texts)]

    assert [s.text for s in dedup_sentences(sents("A.", "a.", "B."))] == ["A.", "B."]
    assert dedup_sentences([]) == []
    assert [s.text for s in dedup_sentences(sents("X.", "Y.", "X."))] == ["X.", "Y."]


def test_dedup_idempotent():
    rng = np.random.default_rng(3)
    pool = ["Alpha.", "alpha.", "Beta!", "beta !", "Gamma?", "ALPHA."]
    for _ in range(200):
        picks = rng.choice(pool, size=rng.integers(0, 10))
        sentences = [Sentence(t, i) for i, t in enumerate(picks)]
        once = dedup_sentences(sentences)
        assert dedup_sentences(once) == once
