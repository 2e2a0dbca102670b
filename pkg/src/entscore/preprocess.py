"""Sentence splitting, tokenization, and deduplication.

Splitting is period/bang/question based with a decimal guard: a terminator
only ends a sentence when followed by whitespace or end-of-text, so "3.5 cm"
stays intact. Pre-tokenized input ("3 . 5") is a known hazard: a terminator
isolated by whitespace on both sides becomes its own one-character sentence.
Abbreviations ("Dr.") are not special-cased.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

from .types import normalize_name

_TERMINATORS = ".!?"
_PUNCT = set(string.punctuation)


@dataclass(frozen=True, slots=True)
class Sentence:
    text: str
    index: int

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("sentence text is empty after trimming")


def split_sentences(report: str) -> list[Sentence]:
    """Split a report into trimmed, consecutively indexed sentences."""
    cuts = [0]
    n = len(report)
    i = 0
    while i < n:
        if report[i] in _TERMINATORS:
            run_start = i
            while i < n and report[i] in _TERMINATORS:
                i += 1
            ends_segment = i >= n or report[i].isspace()
            if ends_segment:
                # A terminator run isolated by whitespace splits off on both sides.
                if run_start > 0 and report[run_start - 1].isspace():
                    cuts.append(run_start)
                cuts.append(i)
        else:
            i += 1
    cuts.append(n)

    sentences: list[Sentence] = []
    for start, end in zip(cuts, cuts[1:]):
        text = report[start:end].strip()
        if text:
            sentences.append(Sentence(text=text, index=len(sentences)))
    return sentences


def _token_spans(text: str) -> list[tuple[str, int, int]]:
    """Whitespace tokens with edge punctuation split into standalone tokens."""
    spans: list[tuple[str, int, int]] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        start, end = i, j
        # Peel punctuation off both ends; interior punctuation stays attached.
        lead = start
        while lead < end and text[lead] in _PUNCT:
            lead += 1
        trail = end
        while trail > lead and text[trail - 1] in _PUNCT:
            trail -= 1
        if lead == end:  # all-punctuation chunk: one token per character
            for k in range(start, end):
                spans.append((text[k], k, k + 1))
        else:
            for k in range(start, lead):
                spans.append((text[k], k, k + 1))
            spans.append((text[lead:trail], lead, trail))
            for k in range(trail, end):
                spans.append((text[k], k, k + 1))
        i = j
    return spans


def tokenize(sentence: str) -> list[str]:
    return [tok for tok, _, _ in _token_spans(sentence)]


def token_spans(sentence: str) -> list[tuple[str, int, int]]:
    """tokenize() plus (start, end) character offsets for each token."""
    return _token_spans(sentence)


def dedup_sentences(sentences: list[Sentence]) -> list[Sentence]:
    """Drop later sentences whose normalized text was already seen."""
    seen: set[str] = set()
    kept: list[Sentence] = []
    for s in sentences:
        key = normalize_name(s.text)
        if key in seen:
            continue
        seen.add(key)
        kept.append(s)
    return kept
