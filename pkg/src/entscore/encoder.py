"""Entity-name encoders and cosine similarity.

Two backends share one contract: name in, unit-norm vector out.

* hash_encode - dependency-free character-3-gram feature hashing. Each 3-gram
  of the '#'-padded normalized name is hashed (blake2b) to a bucket and a sign;
  the accumulated vector is L2-normalized. Deterministic across processes.
* table_encode - exact lookup in a TSV-exported embedding table, falling back
  to hash_encode for out-of-vocabulary names.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .types import FormatError, normalize_name

DEFAULT_DIMENSION = 256
_BOUNDARY = "#"


def _gram_hash(gram: str) -> int:
    return int.from_bytes(hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest(), "big")


def hash_encode(name: str, dimension: int = DEFAULT_DIMENSION) -> np.ndarray:
    """Deterministic character-3-gram hashing embedding of a normalized name."""
    if dimension < 1:
        raise ValueError(f"dimension must be positive, got {dimension}")
    canon = normalize_name(name)
    if not canon:
        raise ValueError(f"unencodable entity: {name!r} normalizes to nothing")
    padded = _BOUNDARY + canon + _BOUNDARY
    vec = np.zeros(dimension, dtype=np.float64)
    for i in range(len(padded) - 2):
        h = _gram_hash(padded[i : i + 3])
        bucket = h % dimension
        sign = 1.0 if (h >> 63) & 1 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:  # signs cancelled; fall back to a deterministic one-hot
        vec[_gram_hash(padded) % dimension] = 1.0
        return vec
    return vec / norm


class EmbeddingTable:
    """Name-to-vector table loaded from TSV ("#dim=D" header, then name<TAB>v1..vD).

    Rows are re-normalized to unit length at load; a zero row is rejected as a
    degenerate embedding. Immutable after load.
    """

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int):
        self.dimension = dimension
        self._vectors: dict[str, np.ndarray] = {}
        for name, vec in vectors.items():
            key = normalize_name(name)
            if not key:
                raise ValueError(f"table name {name!r} normalizes to nothing")
            v = np.asarray(vec, dtype=np.float64)
            if v.shape != (dimension,):
                raise ValueError(
                    f"table row {name!r} has dimension {v.shape}, expected ({dimension},)"
                )
            norm = float(np.linalg.norm(v))
            if norm == 0.0:
                raise ValueError(f"degenerate embedding for {name!r}: zero vector")
            self._vectors[key] = v / norm

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    @property
    def names(self) -> list[str]:
        return list(self._vectors)

    def vector(self, name: str) -> np.ndarray | None:
        return self._vectors.get(normalize_name(name))

    def matrix(self) -> np.ndarray:
        """All table vectors stacked row-wise (library scans in curation)."""
        return np.stack(list(self._vectors.values()))

    @classmethod
    def load(cls, path) -> "EmbeddingTable":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if not header.startswith("#dim="):
                raise FormatError(f"{path}:1: expected header '#dim=D', got {header!r}")
            try:
                dimension = int(header[len("#dim="):])
            except ValueError:
                raise FormatError(f"{path}:1: invalid dimension in header {header!r}") from None
            vectors: dict[str, np.ndarray] = {}
            for lineno, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != dimension + 1:
                    raise FormatError(
                        f"{path}:{lineno}: expected name and {dimension} values, "
                        f"got {len(parts) - 1} values"
                    )
                try:
                    vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: non-numeric vector component") from None
                if not np.any(vec):
                    raise FormatError(
                        f"{path}:{lineno}: degenerate embedding for {parts[0]!r}: zero vector"
                    )
                if not normalize_name(parts[0]):
                    raise FormatError(f"{path}:{lineno}: name normalizes to nothing")
                vectors[parts[0]] = vec
        return cls(vectors, dimension)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"#dim={self.dimension}\n")
            for name, vec in self._vectors.items():
                fh.write(name + "\t" + "\t".join(repr(float(x)) for x in vec) + "\n")


def table_encode(name: str, table: EmbeddingTable) -> np.ndarray:
    """Exact table lookup; out-of-vocabulary names fall back to hash_encode."""
    vec = table.vector(name)
    if vec is not None:
        return vec
    return hash_encode(name, table.dimension)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two unit vectors, clamped into [0, 1].

    Negative similarities are clamped to 0 so downstream weighted averages
    stay inside the score range.
    """
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return min(1.0, max(0.0, float(np.dot(a, b))))


@dataclass(frozen=True)
class HashEncoder:
    """Stateless hashing backend."""

    dimension: int = DEFAULT_DIMENSION

    def encode(self, name: str) -> np.ndarray:
        return hash_encode(name, self.dimension)


class TableEncoder:
    """Table-backed backend; tracks out-of-vocabulary lookups for diagnostics."""

    def __init__(self, table: EmbeddingTable):
        self.table = table
        self.dimension = table.dimension

    def encode(self, name: str) -> np.ndarray:
        return table_encode(name, self.table)

    def is_oov(self, name: str) -> bool:
        return name not in self.table
