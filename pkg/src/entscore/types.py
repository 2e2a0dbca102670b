"""Shared domain vocabulary: entity types, typed entities, score parameters.

Every value object here is immutable and safe to share across threads.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

W_FLOOR = 1e-6  # lower bound on affinity weights; keeps the weighted-average denominator positive


class FormatError(ValueError):
    """Malformed input file or record (CLI exit code 2)."""


class DegenerateDataError(ValueError):
    """Data that makes the requested computation undefined, e.g. constant labels (CLI exit code 3)."""


class EntityType(Enum):
    """The five entity categories, in canonical order.

    The order is load-bearing: it indexes the affinity matrix rows/columns
    and acts as a tie-breaker in entity ordering and matching.
    """

    ANATOMY = "Anatomy"
    ABNORMALITY = "Abnormality"
    DISEASE = "Disease"
    NON_ABNORMALITY = "NonAbnormality"
    NON_DISEASE = "NonDisease"

    @property
    def canonical_index(self) -> int:
        return _TYPE_ORDER.index(self)

    @classmethod
    def from_name(cls, name: str) -> "EntityType":
        try:
            return _TYPE_BY_NAME[name]
        except KeyError:
            raise FormatError(f"unknown entity type {name!r}") from None

    def negated(self) -> "EntityType":
        """Type after a negation flip: findings/diagnoses get their Non- variant."""
        return _NEGATION_MAP.get(self, self)


_TYPE_ORDER: tuple[EntityType, ...] = tuple(EntityType)
_TYPE_BY_NAME = {t.value: t for t in EntityType}
_NEGATION_MAP = {
    EntityType.ABNORMALITY: EntityType.NON_ABNORMALITY,
    EntityType.DISEASE: EntityType.NON_DISEASE,
}

TYPE_ORDER: tuple[EntityType, ...] = _TYPE_ORDER
NUM_TYPES = len(_TYPE_ORDER)
BASE_TYPES: frozenset[EntityType] = frozenset(
    {EntityType.ANATOMY, EntityType.ABNORMALITY, EntityType.DISEASE}
)

_EDGE_PUNCT = ".,;:!?"
_EDGE_STRIP = _EDGE_PUNCT + " \t\n\r\f\v"
_WS_RUN = re.compile(r"\s+")


def normalize_name(raw: str) -> str:
    """Canonicalize an entity name for encoding and dictionary lookups.

    Lowercases, strips leading/trailing whitespace and edge punctuation
    (.,;:!?) in any interleaving, and collapses internal whitespace runs to
    single spaces. Returns "" when the input has no alphanumeric character;
    callers treat that as "no entity". Idempotent.
    """
    if not any(c.isalnum() for c in raw):
        return ""
    s = raw.strip(_EDGE_STRIP)
    s = _WS_RUN.sub(" ", s).lower()
    return s


@dataclass(frozen=True, slots=True)
class TypedEntity:
    """An extracted entity: surface name, category, optional source span.

    The span is half-open 0-based character offsets into the source text.
    Scoring uses only (name, type); spans serve tagging, negation scope,
    and curation density.
    """

    name: str
    type: EntityType
    span: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        if not normalize_name(self.name):
            raise ValueError(f"entity name {self.name!r} is empty after normalization")
        if self.span is not None:
            start, end = self.span
            if not (0 <= start < end):
                raise ValueError(f"invalid span {self.span!r}")

    @property
    def normalized_name(self) -> str:
        return normalize_name(self.name)


def _entity_sort_key(entity: TypedEntity) -> tuple:
    start, end = entity.span if entity.span is not None else (float("inf"), float("inf"))
    return (start, end, entity.type.canonical_index, entity.name)


@dataclass(frozen=True, slots=True)
class TaggedReport:
    """A report text plus its extracted entities in deterministic order.

    Order: ascending span start, then canonical type order, then name.
    Construction re-sorts, so the order is invariant under input permutation.
    """

    source_text: str
    entities: tuple[TypedEntity, ...]

    def __init__(self, source_text: str, entities: Iterable[TypedEntity]):
        ordered = tuple(sorted(entities, key=_entity_sort_key))
        for e in ordered:
            if e.span is not None and e.span[1] > len(source_text):
                raise ValueError(f"entity span {e.span!r} exceeds source length {len(source_text)}")
        object.__setattr__(self, "source_text", source_text)
        object.__setattr__(self, "entities", ordered)


@dataclass(frozen=True, slots=True)
class ScoreParams:
    """Affinity matrix W (5x5, reference type x candidate type) and mismatch penalty p.

    W rows are indexed by the matched reference entity's type, columns by the
    candidate entity's type, both in canonical order. W need not be symmetric.
    Entries live in [W_FLOOR, 1]; p in [0, 1].
    """

    W: np.ndarray
    p: float

    def __init__(self, W, p: float):
        W = np.asarray(W, dtype=np.float64)
        if W.shape != (NUM_TYPES, NUM_TYPES):
            raise ValueError(f"W must be {NUM_TYPES}x{NUM_TYPES}, got shape {W.shape}")
        if np.any(W < W_FLOOR) or np.any(W > 1.0):
            raise ValueError(f"W entries must lie in [{W_FLOOR}, 1.0]")
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {p}")
        W = W.copy()
        W.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "p", float(p))

    @classmethod
    def default(cls) -> "ScoreParams":
        """Uniform weights with a mid-range penalty; a neutral starting point."""
        return cls(np.ones((NUM_TYPES, NUM_TYPES)), 0.5)

    def weight(self, reference_type: EntityType, candidate_type: EntityType) -> float:
        return float(self.W[reference_type.canonical_index, candidate_type.canonical_index])

    def to_dict(self) -> dict:
        return {
            "type_order": [t.value for t in TYPE_ORDER],
            "W": [[round(float(v), 6) for v in row] for row in self.W],
            "p": round(self.p, 6),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreParams":
        try:
            order = data["type_order"]
            W = data["W"]
            p = data["p"]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"params document missing field: {exc}") from None
        expected = [t.value for t in TYPE_ORDER]
        if list(order) != expected:
            raise ValueError(f"type_order must be {expected}, got {order}")
        return cls(W, p)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ScoreParams":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(data)


def unit_vector(values: Sequence[float]) -> np.ndarray:
    """Validate and return a unit-norm float64 embedding vector."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("embedding must be a non-empty 1-D vector")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"embedding norm {norm} is not 1 within 1e-6")
    return v
