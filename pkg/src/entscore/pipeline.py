"""End-to-end wiring: text pair in, entity-level score out.

GazetteerTagger turns raw report text into a TaggedReport (sentence split,
dictionary tagging, negation polarity). EntityMetric composes a tagger, an
encoder backend, and ScoreParams into the scoring metric used by the CLI and
the benchmark harness; it also implements the fitting backend so parameter
search re-scores pre-matched pairs cheaply.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import paramfit, stats
from .ner import Gazetteer, NegationLexicon, apply_polarity, gazetteer_tag
from .preprocess import split_sentences
from .scorer import (
    EncodedReport,
    MatchRecord,
    directional_records,
    directional_score,
    harmonic_mean,
    prepare_pair,
    rate_score,
)
from .types import ScoreParams, TaggedReport, TypedEntity


class GazetteerTagger:
    """Sentence-wise gazetteer tagging plus negation polarity, with report-absolute spans."""

    def __init__(self, gazetteer: Gazetteer, lexicon: NegationLexicon | None = None):
        self.gazetteer = gazetteer
        self.lexicon = lexicon if lexicon is not None else NegationLexicon()

    def tag(self, text: str) -> TaggedReport:
        entities: list[TypedEntity] = []
        cursor = 0
        for sentence in split_sentences(text):
            offset = text.index(sentence.text, cursor)
            cursor = offset + len(sentence.text)
            tagged = apply_polarity(
                sentence.text, gazetteer_tag(sentence.text, self.gazetteer), self.lexicon
            )
            for e in tagged:
                start, end = e.span
                entities.append(TypedEntity(e.name, e.type, (start + offset, end + offset)))
        return TaggedReport(text, entities)


@dataclass(frozen=True)
class ScoreDetail:
    """One scored pair with directional components and match diagnostics."""

    score: float
    forward: float
    backward: float
    forward_records: tuple[MatchRecord, ...]
    backward_records: tuple[MatchRecord, ...]


class EntityMetric:
    """The entity-level similarity metric over raw texts.

    Tagging and encoding are parameter-free, so encoded reports are cached by
    text; fitting reuses param-free match structures across all trials.
    """

    name = "ratescore"

    def __init__(self, tagger, encoder, params: ScoreParams | None = None):
        self.tagger = tagger
        self.encoder = encoder
        self.params = params if params is not None else ScoreParams.default()
        self._encoded: dict[str, EncodedReport] = {}

    def encode_text(self, text: str) -> EncodedReport:
        cached = self._encoded.get(text)
        if cached is None:
            cached = EncodedReport.build(self.tagger.tag(text), self.encoder)
            self._encoded[text] = cached
        return cached

    def score_texts(self, reference: str, candidate: str) -> float:
        return rate_score(self.encode_text(reference), self.encode_text(candidate), self.params)

    def score_detail(self, reference: str, candidate: str) -> ScoreDetail:
        ref = self.encode_text(reference)
        cand = self.encode_text(candidate)
        forward = directional_score(ref, cand, self.params)
        backward = directional_score(cand, ref, self.params)
        fwd_records = (
            tuple(directional_records(ref, cand, self.params))
            if ref.entities and cand.entities
            else ()
        )
        bwd_records = (
            tuple(directional_records(cand, ref, self.params))
            if ref.entities and cand.entities
            else ()
        )
        return ScoreDetail(
            harmonic_mean(forward, backward), forward, backward, fwd_records, bwd_records
        )

    def score_pairs(self, pairs: Sequence) -> list[float]:
        return [self.score_texts(p.reference, p.candidate) for p in pairs]

    # -- fitting backend --

    def prepare(self, pairs: Sequence) -> list:
        return [
            prepare_pair(self.encode_text(p.reference), self.encode_text(p.candidate))
            for p in pairs
        ]

    def score(self, prepared: list, params: ScoreParams) -> list[float]:
        return [pair.score(params) for pair in prepared]

    def fit(self, train: Sequence, config: paramfit.FitConfig | None = None) -> paramfit.FitResult:
        result = paramfit.fit(train, self, config or paramfit.FitConfig())
        self.params = result.params
        return result


class BleuMetric:
    name = "bleu"

    def score_pairs(self, pairs: Sequence) -> list[float]:
        return [stats.bleu(p.reference, p.candidate) for p in pairs]


class RougeLMetric:
    name = "rouge_l"

    def score_pairs(self, pairs: Sequence) -> list[float]:
        return [stats.rouge_l(p.reference, p.candidate) for p in pairs]


class OracleMetric:
    """Echoes the human rating; pins down harness plumbing in tests."""

    name = "oracle"

    def score_pairs(self, pairs: Sequence) -> list[float]:
        return [p.human for p in pairs]
