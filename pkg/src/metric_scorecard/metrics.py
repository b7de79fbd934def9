"""BLEU (sentence and corpus level) and ROUGE-N / ROUGE-L.

All scores here are similarity-oriented: higher means the hypothesis is more
similar to the reference.  Every score lies in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .textproc import TokenSequence, _as_tokens, ngrams

__all__ = [
    "MetricScore",
    "BleuConfig",
    "RougeConfig",
    "RougeScore",
    "modified_precision",
    "bleu",
    "corpus_bleu",
    "rouge_n",
    "rouge_l",
    "lcs_length",
]

Tokens = TokenSequence | Sequence[str]


@dataclass(frozen=True)
class MetricScore:
    """A named metric's value for one (reference, hypothesis) pair."""

    metric_name: str
    value: float
    range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        lo, hi = self.range
        if not math.isfinite(self.value):
            raise ValueError(f"{self.metric_name}: score must be finite, got {self.value}")
        if not (lo <= self.value <= hi):
            raise ValueError(f"{self.metric_name}: score {self.value} outside declared range [{lo}, {hi}]")


@dataclass(frozen=True)
class BleuConfig:
    """BLEU parameters.

    ``weights`` defaults to uniform 1/max_order.  ``smoothing_epsilon`` floors
    the numerator of any n-gram precision that would otherwise be zero, which
    keeps the geometric mean finite at sentence level.
    """

    max_order: int = 4
    weights: tuple[float, ...] | None = None
    smoothing_epsilon: float = 0.01

    def __post_init__(self) -> None:
        if not (1 <= self.max_order <= 9):
            raise ValueError(f"max_order must be in [1, 9], got {self.max_order}")
        if self.weights is not None:
            if len(self.weights) != self.max_order:
                raise ValueError("weights length must equal max_order")
            if any(w < 0 for w in self.weights):
                raise ValueError("weights must be non-negative")
            if abs(math.fsum(self.weights) - 1.0) > 1e-9:
                raise ValueError("weights must sum to 1")
        if self.smoothing_epsilon <= 0:
            raise ValueError("smoothing_epsilon must be positive")

    def effective_weights(self) -> tuple[float, ...]:
        if self.weights is not None:
            return self.weights
        return tuple(1.0 / self.max_order for _ in range(self.max_order))


@dataclass(frozen=True)
class RougeConfig:
    """ROUGE variant selector: n-gram order for ROUGE-N, or the LCS variant."""

    variant: str = "n"  # "n" or "l"
    order: int = 1
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.variant not in ("n", "l"):
            raise ValueError(f"variant must be 'n' or 'l', got {self.variant!r}")
        if self.variant == "n" and self.order < 1:
            raise ValueError(f"order must be >= 1 for ROUGE-N, got {self.order}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class RougeScore:
    """Recall/precision/F for one ROUGE evaluation.

    ``degenerate`` marks pairs where a side had no n-grams (or no tokens for
    ROUGE-L), i.e. recall or precision was undefined and reported as 0.
    """

    recall: float
    precision: float
    f_score: float
    degenerate: bool = False

    def as_metric_score(self, name: str) -> MetricScore:
        return MetricScore(metric_name=name, value=self.f_score)


def modified_precision(reference: Tokens, hypothesis: Tokens, n: int) -> tuple[int, int]:
    """Clipped n-gram matches and total hypothesis n-grams.

    Each hypothesis n-gram's match count is clipped by its count in the
    reference, so repeating a reference word cannot inflate precision.
    """
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    ref_counts = ngrams(reference, n).counts
    hyp_counts = ngrams(hypothesis, n).counts
    clipped = sum(min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items())
    total = sum(hyp_counts.values())
    return clipped, total


def _combine_bleu(
    clipped: Sequence[int],
    totals: Sequence[int],
    ref_len: int,
    hyp_len: int,
    config: BleuConfig,
) -> float:
    if ref_len == 0 and hyp_len == 0:
        return 1.0
    if ref_len == 0 or hyp_len == 0:
        return 0.0
    eps = config.smoothing_epsilon
    log_sum = 0.0
    for w, c, t in zip(config.effective_weights(), clipped, totals):
        if t == 0:
            p = eps
        elif c == 0:
            p = eps / t
        else:
            p = c / t
        log_sum += w * math.log(p)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return min(1.0, bp * math.exp(log_sum))


def bleu(reference: Tokens, hypothesis: Tokens, config: BleuConfig | None = None) -> MetricScore:
    """Sentence-level BLEU with epsilon-floor smoothing.

    Score is ``BP * exp(sum_n w_n * log p_n)`` where p_n is the modified
    n-gram precision, floored at ``eps / total_n`` when zero (and at ``eps``
    when the hypothesis has no n-grams of that order).  Empty reference and
    hypothesis score 1.0 by convention; an empty side otherwise scores 0.
    """
    if config is None:
        config = BleuConfig()
    ref = _as_tokens(reference)
    hyp = _as_tokens(hypothesis)
    clipped, totals = [], []
    for n in range(1, config.max_order + 1):
        c, t = modified_precision(ref, hyp, n)
        clipped.append(c)
        totals.append(t)
    value = _combine_bleu(clipped, totals, len(ref), len(hyp), config)
    return MetricScore(metric_name="bleu", value=value)


def corpus_bleu(
    pairs: Sequence[tuple[Tokens, Tokens]],
    config: BleuConfig | None = None,
) -> MetricScore:
    """Corpus-level BLEU: counts and lengths are summed over pairs before combining.

    This is not the mean of sentence scores; a single-pair corpus reduces to
    :func:`bleu` on that pair.
    """
    if config is None:
        config = BleuConfig()
    if not pairs:
        raise ValueError("corpus_bleu requires at least one pair")
    clipped = [0] * config.max_order
    totals = [0] * config.max_order
    ref_len = hyp_len = 0
    for reference, hypothesis in pairs:
        ref = _as_tokens(reference)
        hyp = _as_tokens(hypothesis)
        ref_len += len(ref)
        hyp_len += len(hyp)
        for i, n in enumerate(range(1, config.max_order + 1)):
            c, t = modified_precision(ref, hyp, n)
            clipped[i] += c
            totals[i] += t
    value = _combine_bleu(clipped, totals, ref_len, hyp_len, config)
    return MetricScore(metric_name="bleu", value=value)


def _f_measure(recall: float, precision: float, beta: float) -> float:
    if recall == 0.0 and precision == 0.0:
        return 0.0
    b2 = beta * beta
    return (1.0 + b2) * precision * recall / (recall + b2 * precision)


def rouge_n(reference: Tokens, hypothesis: Tokens, n: int = 1, beta: float = 1.0) -> RougeScore:
    """ROUGE-N: clipped n-gram recall, precision, and F-measure."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    ref_total = ngrams(reference, n).total()
    clipped, hyp_total = modified_precision(reference, hypothesis, n)
    degenerate = ref_total == 0 or hyp_total == 0
    recall = clipped / ref_total if ref_total else 0.0
    precision = clipped / hyp_total if hyp_total else 0.0
    return RougeScore(
        recall=recall,
        precision=precision,
        f_score=_f_measure(recall, precision, beta),
        degenerate=degenerate,
    )


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence, by dynamic programming."""
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(reference: Tokens, hypothesis: Tokens, beta: float = 1.0) -> RougeScore:
    """ROUGE-L: longest-common-subsequence recall, precision, and F-measure."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    ref = _as_tokens(reference)
    hyp = _as_tokens(hypothesis)
    if not ref or not hyp:
        return RougeScore(recall=0.0, precision=0.0, f_score=0.0, degenerate=True)
    lcs = lcs_length(ref, hyp)
    recall = lcs / len(ref)
    precision = lcs / len(hyp)
    return RougeScore(
        recall=recall,
        precision=precision,
        f_score=_f_measure(recall, precision, beta),
        degenerate=False,
    )
