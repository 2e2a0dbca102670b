from __future__ import annotations

import numpy as np
import pytest

import fixtures
from entscore.encoder import TableEncoder
from entscore.scorer import (
    EncodedReport,
    best_match,
    directional_records,
    directional_score,
    harmonic_mean,
    prepare_pair,
    rate_score,
)
from entscore.types import EntityType, ScoreParams, TaggedReport, TypedEntity


def _encode(report: TaggedReport, encoder) -> EncodedReport:
    return EncodedReport.build(report, encoder)


@pytest.fixture()
def catheter():
    encoder = TableEncoder(fixtures.catheter_table())
    ref, cand = fixtures.catheter_reports()
    return _encode(ref, encoder), _encode(cand, encoder), fixtures.catheter_params()


def test_worked_example_directional_scores(catheter):
    x, x_hat, params = catheter
    assert directional_score(x, x_hat, params) == pytest.approx(0.644, abs=0.0005)
    assert directional_score(x_hat, x, params) == pytest.approx(0.666, abs=0.0005)


def test_worked_example_final_score_is_harmonic_of_directions(catheter):
    x, x_hat, params = catheter
    forward = directional_score(x, x_hat, params)
    backward = directional_score(x_hat, x, params)
    assert rate_score(x, x_hat, params) == harmonic_mean(forward, backward)
    # The printed intermediates recombine to 0.655 under the same formula.
    assert harmonic_mean(0.644, 0.666) == pytest.approx(0.655, abs=0.0005)


def test_worked_example_asymmetry_witness(catheter):
    x, x_hat, params = catheter
    assert directional_score(x, x_hat, params) != directional_score(x_hat, x, params)
    assert rate_score(x, x_hat, params) == rate_score(x_hat, x, params)


def test_worked_example_match_records(catheter):
    x, x_hat, params = catheter
    records = directional_records(x, x_hat, params)
    by_candidate = {r.candidate_index: r for r in records}
    foley = by_candidate[0]
    assert foley.raw_cosine == pytest.approx(1.0)
    assert foley.penalized_sim == pytest.approx(1.0)
    assert foley.weight == 0.91
    mismatch = by_candidate[1]
    assert mismatch.raw_cosine == pytest.approx(0.83)
    assert mismatch.penalized_sim == pytest.approx(0.36 * 0.83)
    assert mismatch.weight == 0.94


def test_best_match_prefers_highest_cosine(catheter):
    x, x_hat, _ = catheter
    idx = best_match(x_hat.entities[0], x_hat.embeddings[0], x.entities, x.embeddings)
    assert x.entities[idx].name == "Foley catheter"


def test_best_match_tie_prefers_type_match():
    entities = (
        TypedEntity("alpha", EntityType.NON_ABNORMALITY),
        TypedEntity("alpha", EntityType.ABNORMALITY),
    )
    emb = np.zeros((2, 2))
    emb[:, 0] = 1.0  # identical embeddings: cosine ties at 1.0
    candidate = TypedEntity("alpha", EntityType.ABNORMALITY)
    idx = best_match(candidate, emb[0], entities, emb)
    assert idx == 1


def test_best_match_tie_falls_back_to_canonical_order_then_index():
    entities = (
        TypedEntity("alpha", EntityType.DISEASE),
        TypedEntity("alpha", EntityType.ANATOMY),
        TypedEntity("alpha", EntityType.ANATOMY),
    )
    emb = np.tile(np.array([1.0, 0.0]), (3, 1))
    candidate = TypedEntity("alpha", EntityType.NON_DISEASE)
    idx = best_match(candidate, emb[0], entities, emb)
    assert idx == 1  # Anatomy precedes Disease; lowest index among the two


def test_best_match_single_reference():
    entity = TypedEntity("alpha", EntityType.ANATOMY)
    emb = np.array([[1.0, 0.0]])
    assert best_match(entity, emb[0], (entity,), emb) == 0


def test_best_match_empty_reference_raises():
    entity = TypedEntity("alpha", EntityType.ANATOMY)
    with pytest.raises(ValueError, match="no reference entities"):
        best_match(entity, np.array([1.0]), (), np.zeros((0, 1)))


def _report(encoder, *specs) -> EncodedReport:
    entities = [TypedEntity(name, etype) for name, etype in specs]
    return _encode(TaggedReport(" ".join(n for n, _ in specs), entities), encoder)


def test_empty_set_conventions():
    encoder = fixtures.FixedEncoder()
    empty = _encode(TaggedReport("", []), encoder)
    full = _report(encoder, ("finding0", EntityType.ANATOMY))
    params = ScoreParams.default()
    assert directional_score(empty, empty, params) == 1.0
    assert rate_score(empty, empty, params) == 1.0
    assert directional_score(empty, full, params) == 0.0
    assert directional_score(full, empty, params) == 0.0
    assert rate_score(full, empty, params) == 0.0


def test_identity_score_unique_names():
    encoder = fixtures.FixedEncoder()
    report = _report(
        encoder,
        ("finding0", EntityType.ANATOMY),
        ("finding1", EntityType.ABNORMALITY),
        ("finding2", EntityType.NON_DISEASE),
    )
    assert rate_score(report, report, ScoreParams.default()) == pytest.approx(1.0, abs=1e-9)


def test_duplicate_candidates_use_multiset_semantics():
    # One perfect match and two half-matches must average to 2/3, not 3/4.
    vectors = {
        "a": np.array([1.0, 0.0, 0.0]),
        "c": np.array([0.0, 1.0, 0.0]),
        "d": np.array([0.0, 0.5, np.sqrt(0.75)]),
    }

    class Enc:
        dimension = 3

        def encode(self, name):
            return vectors[name]

    enc = Enc()
    ref = _report(enc, ("a", EntityType.ANATOMY), ("c", EntityType.ABNORMALITY))
    cand = _encode(
        TaggedReport(
            "a d d",
            [
                TypedEntity("a", EntityType.ANATOMY, (0, 1)),
                TypedEntity("d", EntityType.ABNORMALITY, (2, 3)),
                TypedEntity("d", EntityType.ABNORMALITY, (4, 5)),
            ],
        ),
        enc,
    )
    score = directional_score(ref, cand, ScoreParams(np.ones((5, 5)), 0.5))
    assert score == pytest.approx((1.0 + 0.5 + 0.5) / 3.0)


def test_harmonic_mean_zero_branch():
    assert harmonic_mean(0.0, 0.0) == 0.0
    assert harmonic_mean(1.0, 1.0) == 1.0
    assert harmonic_mean(0.644, 0.666) == pytest.approx(
        2 * 0.644 * 0.666 / (0.644 + 0.666)
    )


def test_prepared_pair_matches_direct_scoring():
    encoder = fixtures.FixedEncoder()
    rng = np.random.default_rng(55)
    for _ in range(200):
        x = _encode(TaggedReport("x", fixtures.random_entities(rng)), encoder)
        y = _encode(TaggedReport("y", fixtures.random_entities(rng)), encoder)
        params = fixtures.random_params(rng)
        assert prepare_pair(x, y).score(params) == pytest.approx(
            rate_score(x, y, params), abs=1e-12
        )


def test_prepared_pair_empty_conventions():
    encoder = fixtures.FixedEncoder()
    empty = _encode(TaggedReport("", []), encoder)
    full = _report(encoder, ("finding3", EntityType.DISEASE))
    params = ScoreParams.default()
    assert prepare_pair(empty, empty).score(params) == 1.0
    assert prepare_pair(full, empty).score(params) == 0.0
    assert prepare_pair(empty, full).score(params) == 0.0
