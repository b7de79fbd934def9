"""Rank-correlation and linear-correlation statistics for the criterion runners.

Undefined correlations (a constant side, so zero variance or an empty tau-b
denominator) raise :class:`UndefinedCorrelationError` instead of silently
returning 0: a constant metric must stay visible as degenerate in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "PairedSamples",
    "UndefinedCorrelationError",
    "average_ranks",
    "pearson",
    "spearman",
    "kendall_tau_b",
]

# Above this size, kendall_tau_b switches from the per-pair Python loop to
# chunked numpy broadcasting (identical result, bounded memory).
_KENDALL_VECTOR_THRESHOLD = 64
_KENDALL_CHUNK = 512


class UndefinedCorrelationError(ValueError):
    """A correlation statistic is undefined for the given samples."""

    def __init__(self, statistic: str, side: str, reason: str) -> None:
        self.statistic = statistic
        self.side = side  # "x", "y", or "both"
        self.reason = reason
        super().__init__(f"{statistic} undefined ({side} side): {reason}")


@dataclass(frozen=True)
class PairedSamples:
    """Two parallel lists of finite reals, at least two points."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys):
            raise ValueError(f"paired samples differ in length: {len(self.xs)} vs {len(self.ys)}")
        if len(self.xs) < 2:
            raise ValueError(f"need at least 2 paired samples, got {len(self.xs)}")
        if not all(math.isfinite(v) for v in self.xs) or not all(math.isfinite(v) for v in self.ys):
            raise ValueError("paired samples must be finite")

    @classmethod
    def from_sequences(cls, xs: Sequence[float], ys: Sequence[float]) -> "PairedSamples":
        return cls(xs=tuple(float(v) for v in xs), ys=tuple(float(v) for v in ys))

    def __len__(self) -> int:
        return len(self.xs)


def pearson(samples: PairedSamples) -> float:
    """Product-moment correlation, clamped into [-1, 1] against rounding."""
    xs, ys = samples.xs, samples.ys
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 and syy == 0.0:
        raise UndefinedCorrelationError("pearson", "both", "both sides are constant")
    if sxx == 0.0:
        raise UndefinedCorrelationError("pearson", "x", "x side is constant")
    if syy == 0.0:
        raise UndefinedCorrelationError("pearson", "y", "y side is constant")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their rank positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(samples: PairedSamples) -> float:
    """Spearman rank correlation: Pearson applied to average ranks."""
    rx = average_ranks(samples.xs)
    ry = average_ranks(samples.ys)
    try:
        return pearson(PairedSamples.from_sequences(rx, ry))
    except UndefinedCorrelationError as err:
        raise UndefinedCorrelationError("spearman", err.side, "all values tied on that side") from None


def _kendall_counts_loop(xs: Sequence[float], ys: Sequence[float]) -> tuple[int, int, int]:
    concordant_minus_discordant = 0
    x_untied_pairs = 0
    y_untied_pairs = 0
    n = len(xs)
    for i in range(n):
        xi, yi = xs[i], ys[i]
        for j in range(i + 1, n):
            dx = xi - xs[j]
            dy = yi - ys[j]
            if dx != 0.0:
                x_untied_pairs += 1
            if dy != 0.0:
                y_untied_pairs += 1
            if dx != 0.0 and dy != 0.0:
                concordant_minus_discordant += 1 if (dx > 0.0) == (dy > 0.0) else -1
    return concordant_minus_discordant, x_untied_pairs, y_untied_pairs


def _kendall_counts_numpy(xs: Sequence[float], ys: Sequence[float]) -> tuple[int, int, int]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    n = len(x)
    num = 0
    x_untied = 0
    y_untied = 0
    for start in range(0, n, _KENDALL_CHUNK):
        stop = min(start + _KENDALL_CHUNK, n)
        sx = np.sign(x[start:stop, None] - x[None, :]).astype(np.int8)
        sy = np.sign(y[start:stop, None] - y[None, :]).astype(np.int8)
        # Mask to strictly-upper-triangle pairs (i < j) within this row block.
        cols = np.arange(n)[None, :]
        rows = np.arange(start, stop)[:, None]
        upper = cols > rows
        num += int(np.sum((sx * sy)[upper], dtype=np.int64))
        x_untied += int(np.sum((sx != 0) & upper, dtype=np.int64))
        y_untied += int(np.sum((sy != 0) & upper, dtype=np.int64))
    return num, x_untied, y_untied


def kendall_tau_b(samples: PairedSamples) -> float:
    """Kendall's tau-b: (C - D) / sqrt(pairs untied in x * pairs untied in y).

    Tie-corrected, so heavily tied samples (three-way entailment rankings)
    stay comparable.  Raises when either side is entirely tied.
    """
    xs, ys = samples.xs, samples.ys
    if len(xs) <= _KENDALL_VECTOR_THRESHOLD:
        num, x_untied, y_untied = _kendall_counts_loop(xs, ys)
    else:
        num, x_untied, y_untied = _kendall_counts_numpy(xs, ys)
    if x_untied == 0 and y_untied == 0:
        raise UndefinedCorrelationError("kendall_tau_b", "both", "both sides are constant")
    if x_untied == 0:
        raise UndefinedCorrelationError("kendall_tau_b", "x", "x side is constant")
    if y_untied == 0:
        raise UndefinedCorrelationError("kendall_tau_b", "y", "y side is constant")
    tau = num / math.sqrt(x_untied * y_untied)
    return max(-1.0, min(1.0, tau))
