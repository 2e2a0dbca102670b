"""Benchmark protocols: rated-pair correlation tasks and synthetic triads.

Rated pairs arrive as JSON lines carrying either a precomputed rating or an
error_count/potential_errors pair that is normalized into one. The
correlation task does a seeded shuffle and an 8:2 split, fits the metric on
the training fold when it supports fitting, and reports Pearson/Kendall/
Spearman on the held-out fold. The synthetic task checks that a metric ranks
a synonymous rewrite above an antonymous one, counting ties as failures.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import stats
from .paramfit import FitConfig
from .types import FormatError

FIVE_POINT_MAX = 5


@dataclass(frozen=True, slots=True)
class RatedPair:
    id: str
    reference: str
    candidate: str
    human: float

    def __post_init__(self) -> None:
        if not self.reference.strip() or not self.candidate.strip():
            raise ValueError(f"pair {self.id!r}: empty reference or candidate")
        if not math.isfinite(self.human):
            raise ValueError(f"pair {self.id!r}: non-finite human rating")


@dataclass(frozen=True, slots=True)
class SyntheticTriad:
    id: str
    original: str
    synonymous: str
    antonymous: str

    def __post_init__(self) -> None:
        if not (self.original.strip() and self.synonymous.strip() and self.antonymous.strip()):
            raise ValueError(f"triad {self.id!r}: all three texts must be non-empty")


def sentence_human_score(error_count: int, potential_errors: int) -> float:
    """Normalized rating: 1 minus the error fraction."""
    if potential_errors <= 0:
        raise ValueError(f"potential_errors must be positive, got {potential_errors}")
    if error_count < 0 or error_count > potential_errors:
        raise ValueError(
            f"error_count must lie in [0, {potential_errors}], got {error_count}"
        )
    return 1.0 - error_count / potential_errors


def _read_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(record, dict):
                raise FormatError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def load_rated_pairs(path, rating_scale: str = "unit") -> list[RatedPair]:
    """Read rated pairs; rating_scale "unit" expects [0,1], "five_point" {0..5}/5."""
    if rating_scale not in ("unit", "five_point"):
        raise ValueError(f"unknown rating scale {rating_scale!r}")
    pairs: list[RatedPair] = []
    for lineno, record in _read_jsonl(path):
        try:
            pair_id = str(record["id"])
            reference = record["reference"]
            candidate = record["candidate"]
        except KeyError as exc:
            raise FormatError(f"{path}:{lineno}: missing field {exc}") from None
        if "human" in record:
            human = float(record["human"])
        elif "error_count" in record and "potential_errors" in record:
            try:
                human = sentence_human_score(
                    int(record["error_count"]), int(record["potential_errors"])
                )
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
        else:
            raise FormatError(
                f"{path}:{lineno}: need 'human' or 'error_count'+'potential_errors'"
            )
        if rating_scale == "five_point":
            if human not in (0, 1, 2, 3, 4, 5):
                raise FormatError(
                    f"{path}:{lineno}: five-point rating must be an integer 0..5, got {human}"
                )
            human /= FIVE_POINT_MAX
        elif not (0.0 <= human <= 1.0):
            raise FormatError(f"{path}:{lineno}: rating must lie in [0, 1], got {human}")
        try:
            pairs.append(RatedPair(pair_id, reference, candidate, human))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return pairs


def load_triads(path) -> list[SyntheticTriad]:
    triads: list[SyntheticTriad] = []
    for lineno, record in _read_jsonl(path):
        try:
            triads.append(
                SyntheticTriad(
                    str(record["id"]),
                    record["original"],
                    record["synonymous"],
                    record["antonymous"],
                )
            )
        except KeyError as exc:
            raise FormatError(f"{path}:{lineno}: missing field {exc}") from None
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return triads


def split_pairs(
    pairs: Sequence[RatedPair], split_ratio: float, seed: int
) -> tuple[list[RatedPair], list[RatedPair]]:
    """Deterministic seeded shuffle and train/test split."""
    order = np.random.default_rng(seed).permutation(len(pairs))
    n_train = int(split_ratio * len(pairs))
    train = [pairs[i] for i in order[:n_train]]
    test = [pairs[i] for i in order[n_train:]]
    return train, test


def run_correlation_task(
    pairs: Sequence[RatedPair],
    metric,
    split_ratio: float = 0.8,
    seed: int = 0,
    fit_config: FitConfig | None = None,
) -> dict:
    """Fit (when supported) on the training fold, correlate on the test fold."""
    if len(pairs) < 5:
        raise FormatError(f"correlation task needs at least 5 pairs, got {len(pairs)}")
    train, test = split_pairs(pairs, split_ratio, seed)

    fitted_params = None
    fit_objective = None
    if hasattr(metric, "fit"):
        result = metric.fit(train, fit_config or FitConfig())
        fitted_params = result.params.to_dict()
        fit_objective = result.objective

    test_scores = metric.score_pairs(test)
    train_scores = metric.score_pairs(train)
    humans = [p.human for p in test]
    summary = {
        "pearson": stats.pearson(test_scores, humans),
        "kendall": stats.kendall_tau_b(test_scores, humans),
        "spearman": stats.spearman(test_scores, humans),
    }
    rows = [
        {"id": p.id, "split": "train", "human": p.human, "score": s}
        for p, s in zip(train, train_scores)
    ] + [
        {"id": p.id, "split": "test", "human": p.human, "score": s}
        for p, s in zip(test, test_scores)
    ]
    return {
        "metric": metric.name,
        "seed": seed,
        "split_ratio": split_ratio,
        "n_train": len(train),
        "n_test": len(test),
        "fitted_params": fitted_params,
        "fit_objective": fit_objective,
        "pairs": rows,
        "summary": summary,
    }


def run_synthetic_task(triads: Sequence[SyntheticTriad], metric) -> dict:
    """Fraction of triads where the synonym strictly outscores the antonym."""
    if not triads:
        raise FormatError("synthetic task needs at least one triad")
    rows = []
    successes = 0
    for triad in triads:
        syn_pair = RatedPair(triad.id, triad.original, triad.synonymous, 0.0)
        ant_pair = RatedPair(triad.id, triad.original, triad.antonymous, 0.0)
        syn_score, ant_score = metric.score_pairs([syn_pair, ant_pair])
        success = syn_score > ant_score
        successes += success
        rows.append(
            {
                "id": triad.id,
                "synonymous_score": syn_score,
                "antonymous_score": ant_score,
                "success": bool(success),
            }
        )
    return {
        "metric": metric.name,
        "accuracy": successes / len(triads),
        "triads": rows,
    }
