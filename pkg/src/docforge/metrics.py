"""Evaluation metrics: corpus BLEU-4, METEOR (exact + stem stages), micro-F1,
accuracy, Cohen's kappa and finite-population sample sizes.

All text metrics share one tokenization: lowercase, then split on whitespace.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Any, Sequence

from .porter import stem

METEOR_VARIANT = "exact+stem METEOR"

Z_SCORES = {0.90: 1.645, 0.95: 1.96, 0.99: 2.576}

SMOOTH_NONE = "none"
SMOOTH_EPSILON = "epsilon"


def tokenize(text: str) -> list[str]:
    return text.lower().split()


@dataclass(frozen=True)
class MetricReport:
    bleu4: float | None
    meteor: float | None
    micro_f1: float | None
    accuracy: float | None
    kappa: float | None
    n_samples: int
    meteor_variant: str = METEOR_VARIANT

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(
    candidates: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    smoothing: str = SMOOTH_NONE,
    epsilon: float = 0.1,
) -> float:
    """Corpus-level BLEU with orders 1-4, uniform weights and one reference.

    Without smoothing any order with zero clipped matches yields 0.0. The
    ``epsilon`` mode replaces a zero numerator by ``epsilon``.
    """
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise ValueError("need at least one candidate/reference pair")
    if smoothing not in (SMOOTH_NONE, SMOOTH_EPSILON):
        raise ValueError(f"unknown smoothing {smoothing!r}")

    matches = [0] * 4
    totals = [0] * 4
    cand_len = ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, 5):
            cand_counts = _ngrams(cand, n)
            ref_counts = _ngrams(ref, n)
            matches[n - 1] += sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
            totals[n - 1] += max(len(cand) - n + 1, 0)

    if cand_len == 0:
        return 0.0
    log_precision = 0.0
    for m, t in zip(matches, totals):
        if m == 0:
            if smoothing == SMOOTH_NONE or t == 0:
                return 0.0
            m = epsilon
        log_precision += 0.25 * math.log(m / t)
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return min(1.0, brevity * math.exp(log_precision))


def _align(candidate: Sequence[str], reference: Sequence[str]) -> list[tuple[int, int]]:
    """Greedy two-stage unigram alignment: exact forms first, then stems."""
    cand_free = set(range(len(candidate)))
    ref_free = set(range(len(reference)))
    pairs: list[tuple[int, int]] = []
    for key in (lambda w: w, stem):
        cand_keys = {i: key(candidate[i]) for i in cand_free}
        ref_keys = {j: key(reference[j]) for j in ref_free}
        for i in sorted(cand_free):
            for j in sorted(ref_free):
                if cand_keys[i] == ref_keys[j]:
                    pairs.append((i, j))
                    cand_free.discard(i)
                    ref_free.discard(j)
                    break
    return sorted(pairs)


def _chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev: tuple[int, int] | None = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor(
    candidate: Sequence[str],
    reference: Sequence[str],
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    """Sentence METEOR with exact and Porter-stem matching (no synonym stage)."""
    if not candidate or not reference:
        raise ValueError("meteor needs non-empty candidate and reference")
    candidate = [w.lower() for w in candidate]
    reference = [w.lower() for w in reference]
    pairs = _align(candidate, reference)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(candidate)
    recall = m / len(reference)
    fmean = precision * recall / (alpha * precision + (1 - alpha) * recall)
    penalty = gamma * (_chunks(pairs) / m) ** beta
    return fmean * (1 - penalty)


def _check_binary(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("need at least one label")


def accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    _check_binary(predictions, labels)
    return sum(int(p == l) for p, l in zip(predictions, labels)) / len(labels)


def micro_f1(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Micro-averaged F1 over both classes.

    For single-label binary decisions every error is one false positive (for
    the predicted class) and one false negative (for the true class), so this
    equals accuracy.
    """
    _check_binary(predictions, labels)
    tp = fp = fn = 0
    for cls in (0, 1):
        for p, l in zip(predictions, labels):
            tp += p == cls and l == cls
            fp += p == cls and l != cls
            fn += p != cls and l == cls
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def cohens_kappa(rater_a: Sequence[int], rater_b: Sequence[int]) -> float:
    _check_binary(rater_a, rater_b)
    n = len(rater_a)
    observed = sum(int(x == y) for x, y in zip(rater_a, rater_b)) / n
    count_a = Counter(rater_a)
    count_b = Counter(rater_b)
    expected = sum(count_a[c] * count_b[c] for c in set(count_a) | set(count_b)) / (n * n)
    if expected == 1.0:
        if observed == 1.0:
            return 1.0
        raise ValueError("kappa undefined: degenerate marginals")
    return (observed - expected) / (1 - expected)


def sample_size(population: int, confidence: float = 0.95, margin: float = 0.05) -> int:
    """Sample size for a proportion (p = 0.5) with finite-population correction."""
    if population < 1:
        raise ValueError("population must be >= 1")
    z = next((v for k, v in Z_SCORES.items() if math.isclose(k, confidence)), None)
    if z is None:
        raise ValueError(f"unsupported confidence {confidence}; use one of {sorted(Z_SCORES)}")
    if not 0.0 < margin < 1.0:
        raise ValueError("margin must be in (0, 1)")
    n0 = z * z * 0.25 / (margin * margin)
    return math.ceil(n0 / (1 + (n0 - 1) / population))


def corpus_meteor(candidates: Sequence[Sequence[str]], references: Sequence[Sequence[str]]) -> float:
    """Mean sentence METEOR; empty sides score 0."""
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise ValueError("need at least one pair")
    scores = [meteor(c, r) if c and r else 0.0 for c, r in zip(candidates, references)]
    return sum(scores) / len(scores)
