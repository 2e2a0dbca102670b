"""Entity-level similarity scoring between two tagged, encoded reports.

Each candidate entity is matched to the reference entity with the highest
cosine similarity; the similarity is penalized by p when the matched types
differ, and the affinity matrix W weights each term by the clinical
importance of the (reference type, candidate type) pairing:

    S(x, c) = sum_j W[t_match(j), t_j] * sim_j / sum_j W[t_match(j), t_j]

The two directions are precision- and recall-like; the final score is their
harmonic mean. Matching depends only on cosines, never on W or p.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import EntityType, ScoreParams, TaggedReport, TypedEntity


@dataclass(frozen=True, slots=True)
class MatchRecord:
    """Diagnostics for one candidate entity's match against the reference set."""

    candidate_index: int
    reference_index: int
    raw_cosine: float
    penalized_sim: float
    weight: float


@dataclass(frozen=True)
class EncodedReport:
    """A tagged report plus one unit embedding per entity (row-aligned)."""

    report: TaggedReport
    embeddings: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.report.entities)
        if self.embeddings.ndim != 2 or self.embeddings.shape[0] != n:
            raise ValueError(
                f"embeddings shape {self.embeddings.shape} does not match {n} entities"
            )

    @property
    def entities(self) -> tuple[TypedEntity, ...]:
        return self.report.entities

    @classmethod
    def build(cls, report: TaggedReport, encoder) -> "EncodedReport":
        if report.entities:
            embeddings = np.stack([encoder.encode(e.name) for e in report.entities])
        else:
            embeddings = np.zeros((0, encoder.dimension), dtype=np.float64)
        return cls(report, embeddings)


def _clamped_cosines(reference_embeddings: np.ndarray, candidate_embedding: np.ndarray) -> np.ndarray:
    # Elementwise multiply + pairwise sum, not BLAS matmul: BLAS kernels can
    # round identical rows differently by position, which would break exact
    # tie detection and with it the deterministic tie-break chain.
    return np.clip((reference_embeddings * candidate_embedding).sum(axis=1), 0.0, 1.0)


def _cosine_matrix(reference_embeddings: np.ndarray, candidate_embeddings: np.ndarray) -> np.ndarray:
    """All-pairs clamped cosines, cell-for-cell bitwise equal to _clamped_cosines."""
    products = reference_embeddings[:, None, :] * candidate_embeddings[None, :, :]
    return np.clip(products.sum(axis=2), 0.0, 1.0)


def _pick_best(cosines: np.ndarray, reference_types, candidate_type: EntityType) -> int:
    best = float(cosines.max())
    tied = np.flatnonzero(cosines == best)
    return int(
        min(
            tied,
            key=lambda i: (
                reference_types[i] is not candidate_type,
                reference_types[i].canonical_index,
                i,
            ),
        )
    )


def best_match(
    candidate: TypedEntity,
    candidate_embedding: np.ndarray,
    reference_entities,
    reference_embeddings: np.ndarray,
) -> int:
    """Index of the reference entity with the highest cosine to the candidate.

    Ties are broken deterministically: a reference sharing the candidate's
    type wins; then canonical type order; then the lowest index. This makes
    scoring invariant under permutation of the reference entity list.
    """
    if len(reference_entities) == 0:
        raise ValueError("no reference entities")
    cosines = _clamped_cosines(reference_embeddings, candidate_embedding)
    types = [e.type for e in reference_entities]
    return _pick_best(cosines, types, candidate.type)


def directional_records(
    reference: EncodedReport, candidate: EncodedReport, params: ScoreParams
) -> list[MatchRecord]:
    """Match every candidate entity and report per-match diagnostics."""
    records: list[MatchRecord] = []
    ref_entities = reference.entities
    ref_types = [e.type for e in ref_entities]
    for j, cand_entity in enumerate(candidate.entities):
        cosines = _clamped_cosines(reference.embeddings, candidate.embeddings[j])
        i = _pick_best(cosines, ref_types, cand_entity.type)
        raw = float(cosines[i])
        same_type = ref_entities[i].type is cand_entity.type
        sim = raw if same_type else params.p * raw
        weight = params.weight(ref_entities[i].type, cand_entity.type)
        records.append(MatchRecord(j, i, raw, sim, weight))
    return records


def directional_score(
    reference: EncodedReport, candidate: EncodedReport, params: ScoreParams
) -> float:
    """Weighted average of penalized similarities over the candidate's entities.

    Two empty reports agree perfectly (1.0); if exactly one side has no
    entities the direction scores 0.0, mirroring precision/recall degeneracy.
    """
    n_ref = len(reference.entities)
    n_cand = len(candidate.entities)
    if n_ref == 0 and n_cand == 0:
        return 1.0
    if n_ref == 0 or n_cand == 0:
        return 0.0
    records = directional_records(reference, candidate, params)
    total_weight = sum(r.weight for r in records)
    return sum(r.weight * r.penalized_sim for r in records) / total_weight


def harmonic_mean(forward: float, backward: float) -> float:
    """F1-style combiner; defined as 0 when both directions are 0."""
    if forward + backward == 0.0:
        return 0.0
    return 2.0 * forward * backward / (forward + backward)


def rate_score(x: EncodedReport, x_hat: EncodedReport, params: ScoreParams) -> float:
    """Final symmetric score: harmonic mean of the two directional scores."""
    return harmonic_mean(
        directional_score(x, x_hat, params), directional_score(x_hat, x, params)
    )


@dataclass(frozen=True)
class PreparedDirection:
    """Param-free remainder of one direction: matched type pairs and cosines.

    Matching depends only on cosines and types, so it can be done once; a
    later (W, p) choice only reweights these arrays.
    """

    reference_type_idx: np.ndarray
    candidate_type_idx: np.ndarray
    cosines: np.ndarray

    def score(self, params: ScoreParams) -> float:
        same = self.reference_type_idx == self.candidate_type_idx
        sims = np.where(same, self.cosines, params.p * self.cosines)
        weights = params.W[self.reference_type_idx, self.candidate_type_idx]
        return float(np.dot(weights, sims) / weights.sum())


@dataclass(frozen=True)
class PreparedPair:
    """Both directions of a report pair, ready for repeated scoring."""

    forward: PreparedDirection | None
    backward: PreparedDirection | None
    both_empty: bool

    def score(self, params: ScoreParams) -> float:
        if self.both_empty:
            return 1.0
        if self.forward is None or self.backward is None:
            return 0.0
        return harmonic_mean(self.forward.score(params), self.backward.score(params))


def _prepare_direction(reference: EncodedReport, candidate: EncodedReport) -> PreparedDirection:
    matrix = _cosine_matrix(reference.embeddings, candidate.embeddings)
    ref_types = [e.type for e in reference.entities]
    ref_idx = np.empty(len(candidate.entities), dtype=np.intp)
    cand_idx = np.empty(len(candidate.entities), dtype=np.intp)
    cosines = np.empty(len(candidate.entities), dtype=np.float64)
    for j, cand_entity in enumerate(candidate.entities):
        i = _pick_best(matrix[:, j], ref_types, cand_entity.type)
        ref_idx[j] = ref_types[i].canonical_index
        cand_idx[j] = cand_entity.type.canonical_index
        cosines[j] = matrix[i, j]
    return PreparedDirection(ref_idx, cand_idx, cosines)


def prepare_pair(x: EncodedReport, x_hat: EncodedReport) -> PreparedPair:
    """Run the param-independent matching once for repeated (W, p) evaluation."""
    n_x = len(x.entities)
    n_hat = len(x_hat.entities)
    if n_x == 0 and n_hat == 0:
        return PreparedPair(None, None, both_empty=True)
    if n_x == 0 or n_hat == 0:
        return PreparedPair(None, None, both_empty=False)
    return PreparedPair(
        _prepare_direction(x, x_hat), _prepare_direction(x_hat, x), both_empty=False
    )
