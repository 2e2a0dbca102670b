"""Shared builders: worked-example resources, triad corpus, random reports."""
from __future__ import annotations

import json
import math

import numpy as np

from entscore.bench import RatedPair, SyntheticTriad
from entscore.encoder import EmbeddingTable
from entscore.ner import Gazetteer, NegationLexicon
from entscore.types import EntityType, ScoreParams, TaggedReport, TypedEntity

# --- worked catheter example -------------------------------------------------

CATHETER_REF = "A Foley catheter is in situ."
CATHETER_CAND = "A Foley catheter is not in place."
CATHETER_COSINE = 0.83
CATHETER_P = 0.36

CATHETER_S_FORWARD = (0.91 * 1.0 + 0.94 * 0.83 * 0.36) / (0.91 + 0.94)
CATHETER_S_BACKWARD = (0.91 * 1.0 + 0.83 * 0.83 * 0.36) / (0.91 + 0.83)


def catheter_table() -> EmbeddingTable:
    b = CATHETER_COSINE
    a = math.sqrt(1.0 - b * b)
    return EmbeddingTable(
        {
            "foley catheter": np.array([1.0, 0.0, 0.0]),
            "in situ": np.array([0.0, 1.0, 0.0]),
            "not in place": np.array([0.0, b, a]),
        },
        dimension=3,
    )


def catheter_gazetteer() -> Gazetteer:
    return Gazetteer(
        {
            "Foley catheter": EntityType.ANATOMY,
            "in situ": EntityType.ABNORMALITY,
            "not in place": EntityType.ABNORMALITY,
        }
    )


def catheter_params() -> ScoreParams:
    W = np.full((5, 5), 0.5)
    A = EntityType.ANATOMY.canonical_index
    AB = EntityType.ABNORMALITY.canonical_index
    NA = EntityType.NON_ABNORMALITY.canonical_index
    W[A, A] = 0.91
    W[NA, AB] = 0.94
    W[AB, NA] = 0.83
    return ScoreParams(W, CATHETER_P)


def catheter_reports() -> tuple[TaggedReport, TaggedReport]:
    ref = TaggedReport(
        CATHETER_REF,
        [
            TypedEntity("Foley catheter", EntityType.ANATOMY, (2, 16)),
            TypedEntity("in situ", EntityType.NON_ABNORMALITY, (20, 27)),
        ],
    )
    cand = TaggedReport(
        CATHETER_CAND,
        [
            TypedEntity("Foley catheter", EntityType.ANATOMY, (2, 16)),
            TypedEntity("not in place", EntityType.ABNORMALITY, (20, 32)),
        ],
    )
    return ref, cand


def write_catheter_files(tmp_path) -> dict[str, str]:
    """CLI-ready files for the worked example; returns paths by role."""
    paths = {}

    gaz = tmp_path / "gazetteer.tsv"
    gaz.write_text(
        "Foley catheter\tAnatomy\nin situ\tAbnormality\nnot in place\tAbnormality\n",
        encoding="utf-8",
    )
    paths["gazetteer"] = str(gaz)

    table = tmp_path / "table.tsv"
    b = CATHETER_COSINE
    a = math.sqrt(1.0 - b * b)
    rows = [
        ("foley catheter", [1.0, 0.0, 0.0]),
        ("in situ", [0.0, 1.0, 0.0]),
        ("not in place", [0.0, b, a]),
    ]
    lines = ["#dim=3"] + [name + "\t" + "\t".join(repr(v) for v in vec) for name, vec in rows]
    table.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths["table"] = str(table)

    params = tmp_path / "params.json"
    catheter_params().save(params)
    paths["params"] = str(params)

    refs = tmp_path / "refs.txt"
    refs.write_text(CATHETER_REF + "\n", encoding="utf-8")
    paths["refs"] = str(refs)

    cands = tmp_path / "cands.txt"
    cands.write_text(CATHETER_CAND + "\n", encoding="utf-8")
    paths["cands"] = str(cands)

    return paths


# --- synthetic triad corpus --------------------------------------------------

FINDING_GROUPS: list[tuple[str, str, EntityType]] = [
    ("pleural effusion", "pleural fluid", EntityType.ABNORMALITY),
    ("pulmonary edema", "lung edema", EntityType.ABNORMALITY),
    ("consolidation", "airspace opacity", EntityType.ABNORMALITY),
    ("pneumothorax", "pleural air", EntityType.ABNORMALITY),
    ("atelectasis", "lung collapse", EntityType.ABNORMALITY),
    ("cardiomegaly", "enlarged heart", EntityType.ABNORMALITY),
    ("hepatomegaly", "enlarged liver", EntityType.ABNORMALITY),
    ("splenomegaly", "enlarged spleen", EntityType.ABNORMALITY),
    ("hydronephrosis", "renal swelling", EntityType.ABNORMALITY),
    ("fracture", "broken bone", EntityType.ABNORMALITY),
    ("pneumonia", "lung infection", EntityType.DISEASE),
    ("lymphadenopathy", "enlarged lymph nodes", EntityType.DISEASE),
]

ANATOMIES = ["lungs", "heart", "liver", "spleen", "kidneys", "chest", "abdomen", "pelvis"]

SYNONYM_COSINE = 0.9


def corpus_gazetteer() -> Gazetteer:
    entries: dict[str, EntityType] = {name: EntityType.ANATOMY for name in ANATOMIES}
    for primary, synonym, etype in FINDING_GROUPS:
        entries[primary] = etype
        entries[synonym] = etype
    return Gazetteer(entries)


def corpus_table() -> EmbeddingTable:
    dim = 2 * len(FINDING_GROUPS) + len(ANATOMIES)
    vectors: dict[str, np.ndarray] = {}
    for g, (primary, synonym, _) in enumerate(FINDING_GROUPS):
        primary_vec = np.zeros(dim)
        primary_vec[2 * g] = 1.0
        vectors[primary] = primary_vec
        synonym_vec = np.zeros(dim)
        synonym_vec[2 * g] = SYNONYM_COSINE
        synonym_vec[2 * g + 1] = math.sqrt(1.0 - SYNONYM_COSINE**2)
        vectors[synonym] = synonym_vec
    for a, name in enumerate(ANATOMIES):
        vec = np.zeros(dim)
        vec[2 * len(FINDING_GROUPS) + a] = 1.0
        vectors[name] = vec
    return EmbeddingTable(vectors, dim)


def write_corpus_table(tmp_path) -> str:
    table = corpus_table()
    path = tmp_path / "corpus_table.tsv"
    table.save(path)
    return str(path)


def write_corpus_gazetteer(tmp_path) -> str:
    gaz = corpus_gazetteer()
    path = tmp_path / "corpus_gazetteer.tsv"
    lines = [f"{name}\t{etype.value}" for name, etype in sorted(gaz.entries.items())]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def _cap(text: str) -> str:
    return text[0].upper() + text[1:]


def make_triads(count: int = 20) -> list[SyntheticTriad]:
    """Triads whose antonymous versions differ only by negating covered findings."""
    triads = []
    for i in range(count):
        primary, synonym, etype = FINDING_GROUPS[i % len(FINDING_GROUPS)]
        anatomy = ANATOMIES[i % len(ANATOMIES)]
        template = i % 5
        if template == 0:
            original = f"The {anatomy} show {primary}."
            synonymous = f"The {anatomy} demonstrate {synonym}."
            antonymous = f"The {anatomy} show no {primary}."
        elif template == 1:
            original = f"There is {primary} in the {anatomy}."
            synonymous = f"There is {synonym} in the {anatomy}."
            antonymous = f"There is no {primary} in the {anatomy}."
        elif template == 2:
            original = _cap(f"{primary} is present.")
            synonymous = _cap(f"{synonym} is present.")
            antonymous = f"No {primary} is present."
        elif template == 3:
            original = f"Findings are consistent with {primary}."
            synonymous = f"Findings are consistent with {synonym}."
            antonymous = f"There is no evidence of {primary}."
        else:
            primary2, synonym2, _ = FINDING_GROUPS[(i + 5) % len(FINDING_GROUPS)]
            original = f"The {anatomy} show {primary} and {primary2}."
            synonymous = f"The {anatomy} demonstrate {synonym} and {synonym2}."
            antonymous = f"The {anatomy} show no {primary} and no {primary2}."
        triads.append(SyntheticTriad(f"triad-{i}", original, synonymous, antonymous))
    return triads


def write_triads(tmp_path, triads=None) -> str:
    path = tmp_path / "triads.jsonl"
    rows = [
        {
            "id": t.id,
            "original": t.original,
            "synonymous": t.synonymous,
            "antonymous": t.antonymous,
        }
        for t in (triads if triads is not None else make_triads())
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return str(path)


def make_report_pairs(count: int = 40) -> list[tuple[str, str]]:
    """Report pairs with graded entity overlap, for fitting and batch tests."""
    pairs = []
    for i in range(count):
        primary, synonym, _ = FINDING_GROUPS[i % len(FINDING_GROUPS)]
        primary2, synonym2, _ = FINDING_GROUPS[(i + 3) % len(FINDING_GROUPS)]
        anatomy = ANATOMIES[i % len(ANATOMIES)]
        anatomy2 = ANATOMIES[(i + 1) % len(ANATOMIES)]
        kind = i % 5
        if kind == 0:
            ref = f"The {anatomy} show {primary}."
            cand = f"The {anatomy} demonstrate {synonym}."
        elif kind == 1:
            ref = f"The {anatomy} show {primary}."
            cand = f"The {anatomy} show no {primary}."
        elif kind == 2:
            ref = f"There is {primary} in the {anatomy}."
            cand = f"There is {primary2} in the {anatomy}."
        elif kind == 3:
            ref = f"The {anatomy} show {primary} and {primary2}."
            cand = f"The {anatomy2} show {synonym} and no {primary2}."
        else:
            ref = f"The {anatomy} show {primary}."
            cand = f"The {anatomy} show {primary}."
        pairs.append((ref, cand))
    return pairs


def labelled_pairs(metric, count: int = 40) -> list[RatedPair]:
    """RatedPairs labelled by the given metric (self-consistency oracle)."""
    pairs = [
        RatedPair(f"pair-{i}", ref, cand, 0.0)
        for i, (ref, cand) in enumerate(make_report_pairs(count))
    ]
    scores = metric.score_pairs(pairs)
    return [
        RatedPair(p.id, p.reference, p.candidate, s) for p, s in zip(pairs, scores)
    ]


def hidden_params(seed: int = 11) -> ScoreParams:
    """A non-trivial (W, p) used to generate self-consistency labels."""
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.3, 1.0, size=(5, 5))
    return ScoreParams(W, 0.3)


def write_rated_pairs(tmp_path, pairs: list[RatedPair], name: str = "pairs.jsonl") -> str:
    path = tmp_path / name
    rows = [
        {"id": p.id, "reference": p.reference, "candidate": p.candidate, "human": p.human}
        for p in pairs
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return str(path)


# --- random reports for property suites --------------------------------------

PROPERTY_VOCAB = [f"finding{i}" for i in range(40)]


class FixedEncoder:
    """Seeded random unit vectors per vocabulary word; fast dict lookups."""

    def __init__(self, dimension: int = 8, seed: int = 17):
        rng = np.random.default_rng(seed)
        self.dimension = dimension
        self._vectors = {}
        for word in PROPERTY_VOCAB:
            v = rng.normal(size=dimension)
            self._vectors[word] = v / np.linalg.norm(v)

    def encode(self, name: str) -> np.ndarray:
        return self._vectors[name]


def random_entities(rng: np.random.Generator, max_entities: int = 5, unique: bool = False):
    n = int(rng.integers(1, max_entities + 1))
    if unique:
        names = rng.choice(PROPERTY_VOCAB, size=n, replace=False)
    else:
        names = rng.choice(PROPERTY_VOCAB, size=n, replace=True)
    types = rng.integers(0, 5, size=n)
    return [TypedEntity(str(nm), list(EntityType)[t]) for nm, t in zip(names, types)]


def random_params(rng: np.random.Generator) -> ScoreParams:
    return ScoreParams(rng.uniform(1e-6, 1.0, size=(5, 5)), float(rng.uniform(0.0, 1.0)))
