"""Automatic-annotation filters: library-similarity and annotation density.

Both thresholds are inclusive (>= keeps) and monotone: raising a threshold
never adds an item back. Density is the fraction of non-punctuation tokens
covered by an entity span; character- or entity-count densities would be
alternative readings, so the token definition is stated here deliberately.
"""
from __future__ import annotations

import warnings

import numpy as np

from .encoder import EmbeddingTable, TableEncoder
from .preprocess import token_spans
from .types import TypedEntity, normalize_name

SIMILARITY_THRESHOLD = 0.83
DENSITY_THRESHOLD = 0.7


def max_library_similarity(name: str, library: EmbeddingTable, encoder=None) -> float:
    """Highest cosine between the encoded name and any library vector."""
    if len(library) == 0:
        raise ValueError("library must be non-empty")
    if encoder is None:
        encoder = TableEncoder(library)
    sims = np.clip(library.matrix() @ encoder.encode(name), 0.0, 1.0)
    return float(sims.max())


def filter_entities_by_similarity(
    entities: list[TypedEntity],
    library: EmbeddingTable,
    threshold: float = SIMILARITY_THRESHOLD,
    encoder=None,
) -> list[TypedEntity]:
    """Keep entities whose best library similarity reaches the threshold."""
    if encoder is None:
        encoder = TableEncoder(library)
    return [
        e
        for e in entities
        if max_library_similarity(e.name, library, encoder) >= threshold
    ]


def sentence_density(sentence: str, entities: list[TypedEntity]) -> float | None:
    """Covered fraction of non-punctuation tokens; None when there are none."""
    tokens = [
        (start, end)
        for tok, start, end in token_spans(sentence)
        if normalize_name(tok)
    ]
    if not tokens:
        return None
    spans = [e.span for e in entities if e.span is not None]
    covered = sum(
        1
        for start, end in tokens
        if any(s <= start and end <= e for s, e in spans)
    )
    return covered / len(tokens)


def filter_sentence_by_density(
    sentence: str, entities: list[TypedEntity], threshold: float = DENSITY_THRESHOLD
) -> bool:
    """Keep the sentence when its annotation density reaches the threshold."""
    density = sentence_density(sentence, entities)
    if density is None:
        warnings.warn(
            f"sentence {sentence!r} has no non-punctuation tokens; dropped", stacklevel=2
        )
        return False
    return density >= threshold
