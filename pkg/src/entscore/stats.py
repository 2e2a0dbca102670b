"""Correlation coefficients and word-overlap baselines.

Correlations are hand-rolled (exact pair enumeration for Kendall, mid-ranks
for Spearman) so they can be checked against independent oracles; desk-scale
O(n^2) is deliberate. BLEU and ROUGE-L use the shared tokenizer.
"""
from __future__ import annotations

import math
from collections import Counter

from .preprocess import tokenize
from .types import DegenerateDataError

_BLEU_EPS = 1e-9


def _check_lengths(a, b) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("need at least 2 observations")


def pearson(a: list[float], b: list[float]) -> float:
    """Sample Pearson correlation coefficient."""
    _check_lengths(a, b)
    n = len(a)
    mean_a = sum(a) / n
    mean_b = sum(b) / n
    da = [x - mean_a for x in a]
    db = [y - mean_b for y in b]
    var_a = sum(x * x for x in da)
    var_b = sum(y * y for y in db)
    if var_a == 0.0 or var_b == 0.0:
        raise DegenerateDataError("zero variance")
    cov = sum(x * y for x, y in zip(da, db))
    return cov / math.sqrt(var_a * var_b)


def kendall_tau_b(a: list[float], b: list[float]) -> float:
    """Tie-corrected Kendall rank correlation, by exact pair enumeration."""
    _check_lengths(a, b)
    n = len(a)
    concordant = discordant = ties_a = ties_b = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = int(a[i] > a[j]) - int(a[i] < a[j])
            dy = int(b[i] > b[j]) - int(b[i] < b[j])
            if dx == 0:
                ties_a += 1
            if dy == 0:
                ties_b += 1
            if dx * dy > 0:
                concordant += 1
            elif dx * dy < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    if ties_a == n0 or ties_b == n0:
        raise DegenerateDataError("zero variance")
    return (concordant - discordant) / math.sqrt((n0 - ties_a) * (n0 - ties_b))


def _midranks(values: list[float]) -> list[float]:
    """1-based ranks with ties assigned the average of their positions."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(a: list[float], b: list[float]) -> float:
    """Pearson correlation of mid-ranks."""
    _check_lengths(a, b)
    return pearson(_midranks(a), _midranks(b))


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(reference: str, candidate: str, max_n: int = 4) -> float:
    """Geometric mean of clipped n-gram precisions times the brevity penalty.

    Zero match counts are smoothed to 1e-9; orders longer than the candidate
    are skipped, so identical token sequences score exactly 1.0.
    """
    ref_tokens = tokenize(reference)
    cand_tokens = tokenize(candidate)
    if not ref_tokens or not cand_tokens:
        raise ValueError("bleu requires non-empty texts")
    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(cand_tokens, n)
        total = sum(cand_counts.values())
        if total == 0:
            break
        ref_counts = _ngram_counts(ref_tokens, n)
        matches = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        log_sum += math.log(max(matches, _BLEU_EPS) / total)
        orders += 1
    precision = math.exp(log_sum / orders)
    c, r = len(cand_tokens), len(ref_tokens)
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return precision * brevity


def _lcs_length(xs: list[str], ys: list[str]) -> int:
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0] * (len(ys) + 1)
        for j, y in enumerate(ys, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(reference: str, candidate: str) -> float:
    """Longest-common-subsequence F1 over tokens (beta = 1)."""
    ref_tokens = tokenize(reference)
    cand_tokens = tokenize(candidate)
    if not ref_tokens or not cand_tokens:
        raise ValueError("rouge_l requires non-empty texts")
    lcs = _lcs_length(ref_tokens, cand_tokens)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand_tokens)
    recall = lcs / len(ref_tokens)
    return 2.0 * precision * recall / (precision + recall)
