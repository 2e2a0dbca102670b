"""Entity-aware similarity scoring for radiology reports.

Pipeline: extract typed entities from both reports, embed each entity name,
match candidate entities to their closest reference entities, and combine
the type-weighted, mismatch-penalized cosine similarities into a symmetric
score. Includes parameter fitting against human ratings and a benchmark
harness.
"""
from .bench import (
    RatedPair,
    SyntheticTriad,
    load_rated_pairs,
    load_triads,
    run_correlation_task,
    run_synthetic_task,
    sentence_human_score,
)
from .curation import filter_entities_by_similarity, filter_sentence_by_density
from .encoder import EmbeddingTable, HashEncoder, TableEncoder, cosine, hash_encode, table_encode
from .ner import (
    Gazetteer,
    NegationLexicon,
    apply_polarity,
    decode_iob,
    entities_to_iob,
    gazetteer_tag,
    load_predictions,
)
from .paramfit import FitConfig, FitResult, TrialRecord, fit, tpe_suggest
from .pipeline import BleuMetric, EntityMetric, GazetteerTagger, OracleMetric, RougeLMetric
from .preprocess import Sentence, dedup_sentences, split_sentences, tokenize
from .scorer import (
    EncodedReport,
    MatchRecord,
    best_match,
    directional_score,
    harmonic_mean,
    rate_score,
)
from .stats import bleu, kendall_tau_b, pearson, rouge_l, spearman
from .types import (
    DegenerateDataError,
    EntityType,
    FormatError,
    ScoreParams,
    TaggedReport,
    TypedEntity,
    normalize_name,
)

__version__ = "0.1.0"

__all__ = [
    "BleuMetric",
    "DegenerateDataError",
    "EmbeddingTable",
    "EncodedReport",
    "EntityMetric",
    "EntityType",
    "FitConfig",
    "FitResult",
    "FormatError",
    "Gazetteer",
    "GazetteerTagger",
    "HashEncoder",
    "MatchRecord",
    "NegationLexicon",
    "OracleMetric",
    "RatedPair",
    "RougeLMetric",
    "ScoreParams",
    "Sentence",
    "SyntheticTriad",
    "TableEncoder",
    "TaggedReport",
    "TrialRecord",
    "TypedEntity",
    "apply_polarity",
    "best_match",
    "bleu",
    "cosine",
    "decode_iob",
    "dedup_sentences",
    "directional_score",
    "entities_to_iob",
    "filter_entities_by_similarity",
    "filter_sentence_by_density",
    "fit",
    "gazetteer_tag",
    "harmonic_mean",
    "hash_encode",
    "kendall_tau_b",
    "load_predictions",
    "load_rated_pairs",
    "load_triads",
    "normalize_name",
    "pearson",
    "rate_score",
    "rouge_l",
    "run_correlation_task",
    "run_synthetic_task",
    "sentence_human_score",
    "spearman",
    "split_sentences",
    "table_encode",
    "tokenize",
    "tpe_suggest",
]
