"""Entity tagging backends: gazetteer + negation polarity, IOB decoding, prediction files.

The gazetteer tagger is a greedy longest-match dictionary tagger producing
disjoint spans; the polarity pass flips Abnormality/Disease entities to their
Non- variants inside negation scope. Externally produced predictions enter
through the CoNLL-style TSV format (one "token<TAB>tag" per line, blank line
between reports).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

from .preprocess import token_spans, tokenize
from .types import (
    BASE_TYPES,
    EntityType,
    FormatError,
    TaggedReport,
    TypedEntity,
    normalize_name,
)

DEFAULT_FORWARD_TRIGGERS = frozenset(
    {"no", "without", "no evidence of", "free of", "absence of", "negative for"}
)
DEFAULT_BACKWARD_TRIGGERS = frozenset(
    {
        "unremarkable",
        "intact",
        "within normal limits",
        "not identified",
        "not seen",
        "not in place",
        "resolved",
    }
)
DEFAULT_TERMINATORS = frozenset({"but", "however", ";"})
DEFAULT_SELF_NEGATING = frozenset({"in situ", "patent"})


def _canon_phrase(phrase: str) -> str:
    # Lowercase + whitespace collapse only: ";" must survive, so no punctuation strip.
    return " ".join(phrase.lower().split())


def _canon_phrases(phrases) -> frozenset[str]:
    out = set()
    for p in phrases:
        canon = _canon_phrase(p)
        if not canon:
            raise ValueError(f"lexicon phrase {p!r} is empty after normalization")
        out.add(canon)
    return frozenset(out)


@dataclass(frozen=True)
class NegationLexicon:
    """Trigger phrases controlling negation scope.

    forward_triggers negate entities after them in the sentence, backward_triggers
    negate entities before them, terminators end a forward scope. self_negating
    lists normal-finding phrases ("in situ") that always read as negated findings.
    """

    forward_triggers: frozenset[str] = DEFAULT_FORWARD_TRIGGERS
    backward_triggers: frozenset[str] = DEFAULT_BACKWARD_TRIGGERS
    terminators: frozenset[str] = DEFAULT_TERMINATORS
    self_negating: frozenset[str] = DEFAULT_SELF_NEGATING

    def __post_init__(self) -> None:
        object.__setattr__(self, "forward_triggers", _canon_phrases(self.forward_triggers))
        object.__setattr__(self, "backward_triggers", _canon_phrases(self.backward_triggers))
        object.__setattr__(self, "terminators", _canon_phrases(self.terminators))
        object.__setattr__(self, "self_negating", _canon_phrases(self.self_negating))

    @classmethod
    def load(cls, path) -> "NegationLexicon":
        """Read a lexicon from a JSON object; missing keys keep their defaults."""
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise FormatError(f"{path}: expected a JSON object")
        kwargs = {}
        for key in ("forward_triggers", "backward_triggers", "terminators", "self_negating"):
            if key in data:
                kwargs[key] = frozenset(data[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class Gazetteer:
    """Dictionary of known entity names mapped to their base types.

    Keys are canonical: normalized, tokenized, and re-joined with single
    spaces. Only base types (Anatomy, Abnormality, Disease) are allowed;
    negated variants are produced by the polarity pass, never stored.
    """

    entries: dict[str, EntityType]
    max_entry_tokens: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("gazetteer must be non-empty")
        canon: dict[str, EntityType] = {}
        longest = 1
        for name, etype in self.entries.items():
            if etype not in BASE_TYPES:
                raise ValueError(f"gazetteer entry {name!r} has non-base type {etype.value}")
            key_tokens = tokenize(normalize_name(name))
            if not key_tokens:
                raise ValueError(f"gazetteer entry {name!r} is empty after normalization")
            canon[" ".join(key_tokens)] = etype
            longest = max(longest, len(key_tokens))
        object.__setattr__(self, "entries", canon)
        object.__setattr__(self, "max_entry_tokens", longest)

    @classmethod
    def load(cls, path) -> "Gazetteer":
        """Read "name<TAB>type" rows; type must be Anatomy, Abnormality, or Disease."""
        entries: dict[str, EntityType] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise FormatError(f"{path}:{lineno}: expected name<TAB>type")
                name, type_name = parts
                etype = EntityType.from_name(type_name.strip())
                if etype not in BASE_TYPES:
                    raise FormatError(
                        f"{path}:{lineno}: type must be one of "
                        f"{sorted(t.value for t in BASE_TYPES)}, got {type_name!r}"
                    )
                entries[name] = etype
        if not entries:
            raise FormatError(f"{path}: gazetteer file has no entries")
        return cls(entries)


def gazetteer_tag(sentence: str, gaz: Gazetteer) -> list[TypedEntity]:
    """Greedy longest-match tagging, left to right over tokens.

    At each position the longest matching entry wins and the scan resumes
    past it, so output spans are pairwise disjoint and sorted.
    """
    spans = token_spans(sentence)
    lowered = [tok.lower() for tok, _, _ in spans]
    entities: list[TypedEntity] = []
    i = 0
    n = len(spans)
    while i < n:
        matched = False
        for length in range(min(gaz.max_entry_tokens, n - i), 0, -1):
            key = " ".join(lowered[i : i + length])
            etype = gaz.entries.get(key)
            if etype is not None:
                start = spans[i][1]
                end = spans[i + length - 1][2]
                entities.append(TypedEntity(sentence[start:end], etype, (start, end)))
                i += length
                matched = True
                break
        if not matched:
            i += 1
    return entities


def _phrase_occurrences(lowered: list[str], phrases: frozenset[str]) -> list[tuple[int, int]]:
    """Token ranges [start, end) at which any phrase occurs."""
    wanted = {tuple(p.split(" ")) for p in phrases}
    max_len = max((len(w) for w in wanted), default=0)
    hits: list[tuple[int, int]] = []
    for i in range(len(lowered)):
        for length in range(1, min(max_len, len(lowered) - i) + 1):
            if tuple(lowered[i : i + length]) in wanted:
                hits.append((i, i + length))
    return hits


def _entity_token_range(spans, entity: TypedEntity) -> tuple[int, int]:
    start_char, end_char = entity.span
    first = next(i for i, (_, s, e) in enumerate(spans) if e > start_char)
    last = max(i for i, (_, s, e) in enumerate(spans) if s < end_char)
    return first, last + 1


def apply_polarity(
    sentence: str, entities: list[TypedEntity], lex: NegationLexicon
) -> list[TypedEntity]:
    """Flip entity types to their negated variants inside negation scope.

    An entity is negated when a forward trigger precedes it with no terminator
    in between, when a backward trigger follows it with no terminator in
    between, or when its normalized name is a self-negating normal finding.
    Names and spans are never changed; the pass is idempotent.
    """
    if not entities:
        return []
    missing_spans = [e for e in entities if e.span is None]
    if missing_spans:
        warnings.warn(
            f"{len(missing_spans)} entities lack spans and were returned unchanged",
            stacklevel=2,
        )
    spans = token_spans(sentence)
    lowered = [tok.lower() for tok, _, _ in spans]
    forward = _phrase_occurrences(lowered, lex.forward_triggers)
    backward = _phrase_occurrences(lowered, lex.backward_triggers)
    stops = _phrase_occurrences(lowered, lex.terminators)

    def blocked(lo: int, hi: int) -> bool:
        return any(lo <= s and e <= hi for s, e in stops)

    out: list[TypedEntity] = []
    for entity in entities:
        if entity.span is None:
            out.append(entity)
            continue
        ent_start, ent_end = _entity_token_range(spans, entity)
        negate = entity.normalized_name in lex.self_negating
        if not negate:
            negate = any(
                occ_end <= ent_start and not blocked(occ_end, ent_start)
                for _, occ_end in forward
            )
        if not negate:
            negate = any(
                occ_start >= ent_end and not blocked(ent_end, occ_start)
                for occ_start, _ in backward
            )
        if negate and entity.type.negated() is not entity.type:
            out.append(TypedEntity(entity.name, entity.type.negated(), entity.span))
        else:
            out.append(entity)
    return out


# --- IOB tag handling ---

IOB_TAGS: tuple[str, ...] = ("O",) + tuple(
    f"{prefix}-{t.value}" for t in EntityType for prefix in ("B", "I")
)
_VALID_TAGS = frozenset(IOB_TAGS)


def _parse_tag(tag: str) -> tuple[str, EntityType | None]:
    if tag == "O":
        return "O", None
    if tag not in _VALID_TAGS:
        raise FormatError(f"invalid IOB tag {tag!r}")
    prefix, _, type_name = tag.partition("-")
    return prefix, EntityType.from_name(type_name)


def repair_iob(tags: list[str]) -> list[str]:
    """Conventional repair: a stray I- (no same-type B/I before it) becomes B-."""
    repaired: list[str] = []
    prev_type: EntityType | None = None
    for tag in tags:
        prefix, etype = _parse_tag(tag)
        if prefix == "I" and etype is not prev_type:
            repaired.append(f"B-{etype.value}")
        else:
            repaired.append(tag)
        prev_type = etype
    return repaired


def _synth_offsets(tokens: list[str]) -> list[tuple[int, int]]:
    """Token offsets into " ".join(tokens)."""
    offsets = []
    pos = 0
    for tok in tokens:
        offsets.append((pos, pos + len(tok)))
        pos += len(tok) + 1
    return offsets


def decode_iob(
    tokens: list[str],
    tags: list[str],
    offsets: list[tuple[int, int]] | None = None,
) -> list[TypedEntity]:
    """Turn an IOB tag sequence into entities.

    Contiguous B/I runs of one type become a single entity whose name joins the
    covered tokens with single spaces. Stray I- tags are repaired as B-. When no
    offsets are given, spans refer to " ".join(tokens). Tokens that normalize to
    nothing (pure punctuation) cannot form an entity and are skipped with a warning.
    """
    if len(tokens) != len(tags):
        raise FormatError(
            f"token/tag length mismatch: {len(tokens)} tokens vs {len(tags)} tags"
        )
    if offsets is None:
        offsets = _synth_offsets(tokens)
    repaired = repair_iob(tags)

    entities: list[TypedEntity] = []
    run_start: int | None = None
    run_type: EntityType | None = None

    def flush(end_index: int) -> None:
        nonlocal run_start, run_type
        if run_start is None:
            return
        name = " ".join(tokens[run_start:end_index])
        span = (offsets[run_start][0], offsets[end_index - 1][1])
        if normalize_name(name):
            entities.append(TypedEntity(name, run_type, span))
        else:
            warnings.warn(f"skipping unencodable entity {name!r}", stacklevel=2)
        run_start = None
        run_type = None

    for i, tag in enumerate(repaired):
        prefix, etype = _parse_tag(tag)
        if prefix == "B":
            flush(i)
            run_start, run_type = i, etype
        elif prefix == "O":
            flush(i)
    flush(len(repaired))
    return entities


def entities_to_iob(
    tokens: list[str],
    entities: list[TypedEntity],
    offsets: list[tuple[int, int]] | None = None,
) -> list[str]:
    """Re-encode entities over a token sequence as IOB tags."""
    if offsets is None:
        offsets = _synth_offsets(tokens)
    tags = ["O"] * len(tokens)
    for entity in entities:
        if entity.span is None:
            continue
        start_char, end_char = entity.span
        covered = [i for i, (s, e) in enumerate(offsets) if s >= start_char and e <= end_char]
        for rank, i in enumerate(covered):
            tags[i] = f"{'B' if rank == 0 else 'I'}-{entity.type.value}"
    return tags


def load_predictions(path) -> list[TaggedReport]:
    """Read blank-line-separated "token<TAB>tag" blocks into TaggedReports."""
    reports: list[TaggedReport] = []
    tokens: list[str] = []
    tags: list[str] = []

    def flush() -> None:
        if tokens:
            entities = decode_iob(tokens, tags)
            reports.append(TaggedReport(" ".join(tokens), entities))
            tokens.clear()
            tags.clear()

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                flush()
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected token<TAB>tag")
            token, tag = parts
            if tag not in _VALID_TAGS:
                raise FormatError(f"{path}:{lineno}: invalid IOB tag {tag!r}")
            tokens.append(token)
            tags.append(tag)
    flush()
    return reports
