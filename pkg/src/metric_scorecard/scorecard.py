"""The three-criterion metric scorecard and its serializable report.

Criteria:

1. similarity_correlation - correlation with human similarity judgements.
2. entailment_ranking - can the metric rank a premise's entailed hypothesis
   above its neutral one, and neutral above contradiction.
3. corruption_robustness - do scores fall strictly as the hypothesis is
   corrupted harder.

Runners are metric-agnostic: anything exposing ``descriptor`` and
``score_batch`` flows through unchanged, builtin or external.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

from .bridge import ExternalMetric, FunctionMetric, MetricDescriptor, PairScore
from .corpora import EntailmentTriple, SentencePair, SimilarityRecord
from .corruption import CorruptionTriple
from .stats import PairedSamples, UndefinedCorrelationError, kendall_tau_b, pearson, spearman

__all__ = [
    "SCHEMA",
    "CriterionResult",
    "ScorecardReport",
    "run_similarity_criterion",
    "run_entailment_criterion",
    "run_corruption_criterion",
    "build_report",
    "emit_report",
]

SCHEMA = "scorecard/1"

Metric = FunctionMetric | ExternalMetric

_DEFINITIONS = {
    "similarity_correlation": (
        "pearson/spearman/kendall between metric scores and human similarity judgements"
    ),
    "entailment_ranking": (
        "pooled rank correlation between metric scores and gold ordinals "
        "(contradiction=0, neutral=1, entailment=2); kendall_mean_per_triple "
        "averages per-triple tau-b over triples where it is defined"
    ),
    "corruption_robustness": (
        "monotonicity_rate = fraction of triples with score(original) > score(corrupted) "
        "> score(more_corrupted), ties counting as violations; pooled correlations pair "
        "the negated corruption rank (0, -1, -2) with the metric score"
    ),
}


@dataclass
class CriterionResult:
    """Per-metric statistics for one criterion.

    Statistics are present only when defined; an undefined statistic appears
    in ``degenerate[metric][stat]`` with the reason instead of a number.
    """

    criterion: str
    sample_count: int
    metrics: dict[str, dict[str, float | int]]
    degenerate: dict[str, dict[str, str]]
    definition: str = ""

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "definition": self.definition,
            "sample_count": self.sample_count,
            "metrics": self.metrics,
            "degenerate": self.degenerate,
        }


def _chunked(pairs: Sequence[SentencePair], n_chunks: int) -> list[list[SentencePair]]:
    size, rem = divmod(len(pairs), n_chunks)
    chunks, start = [], 0
    for i in range(n_chunks):
        stop = start + size + (1 if i < rem else 0)
        if stop > start:
            chunks.append(list(pairs[start:stop]))
        start = stop
    return chunks


def score_corpus(metric: Metric, pairs: Sequence[SentencePair], jobs: int = 1) -> list[PairScore]:
    """Score pairs, optionally fanning builtin metrics across threads.

    Results are reassembled in input order, so they are independent of
    ``jobs``.  External metrics always run on their single request stream.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or not getattr(metric, "parallel_safe", False) or len(pairs) < 2:
        return metric.score_batch(list(pairs))
    chunks = _chunked(pairs, min(jobs, len(pairs)))
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        scored = list(pool.map(metric.score_batch, chunks))
    return [slot for chunk in scored for slot in chunk]


def _stat_or_flag(
    name: str,
    fn,
    xs: list[float],
    ys: list[float],
    stats: dict,
    flags: dict,
) -> None:
    if len(xs) < 2:
        flags[name] = "fewer than 2 scored pairs"
        return
    try:
        stats[name] = fn(PairedSamples.from_sequences(xs, ys))
    except UndefinedCorrelationError as err:
        flags[name] = str(err)


def _failed_count(slots: list[PairScore]) -> int:
    return sum(1 for s in slots if not s.ok)


def run_similarity_criterion(
    metrics: Sequence[Metric],
    records: Sequence[SimilarityRecord],
    jobs: int = 1,
) -> CriterionResult:
    """Criterion 1: correlation with human similarity judgements."""
    if len(records) < 2:
        raise ValueError("similarity criterion needs at least 2 records")
    golds = [r.human_score for r in records]
    if min(golds) == max(golds):
        raise ValueError("similarity criterion needs non-constant human scores")
    pairs = [r.pair for r in records]
    per_metric: dict[str, dict] = {}
    degenerate: dict[str, dict] = {}
    for metric in metrics:
        name = metric.descriptor.name
        slots = score_corpus(metric, pairs, jobs=jobs)
        xs = [s.value for s in slots if s.ok]
        ys = [g for s, g in zip(slots, golds) if s.ok]
        stats: dict[str, float | int] = {}
        flags: dict[str, str] = {}
        _stat_or_flag("pearson", pearson, xs, ys, stats, flags)
        _stat_or_flag("spearman", spearman, xs, ys, stats, flags)
        _stat_or_flag("kendall", kendall_tau_b, xs, ys, stats, flags)
        stats["failed_pairs"] = _failed_count(slots)
        per_metric[name] = stats
        if flags:
            degenerate[name] = flags
    return CriterionResult(
        criterion="similarity_correlation",
        sample_count=len(records),
        metrics=per_metric,
        degenerate=degenerate,
        definition=_DEFINITIONS["similarity_correlation"],
    )


def _entailment_pairs(triples: Sequence[EntailmentTriple]) -> tuple[list[SentencePair], list[int]]:
    pairs: list[SentencePair] = []
    golds: list[int] = []
    for i, triple in enumerate(triples):
        for label, hyp, ordinal in triple.hypotheses():
            pairs.append(SentencePair(id=f"{i}#{label}", reference=triple.premise, hypothesis=hyp))
            golds.append(ordinal)
    return pairs, golds


def run_entailment_criterion(
    metrics: Sequence[Metric],
    triples: Sequence[EntailmentTriple],
    jobs: int = 1,
) -> CriterionResult:
    """Criterion 2: ranking entailment above neutral above contradiction."""
    if not triples:
        raise ValueError("entailment criterion needs at least 1 triple")
    pairs, golds = _entailment_pairs(triples)
    per_metric: dict[str, dict] = {}
    degenerate: dict[str, dict] = {}
    for metric in metrics:
        name = metric.descriptor.name
        slots = score_corpus(metric, pairs, jobs=jobs)
        xs = [s.value for s in slots if s.ok]
        ys = [float(g) for s, g in zip(slots, golds) if s.ok]
        stats: dict[str, float | int] = {}
        flags: dict[str, str] = {}
        _stat_or_flag("spearman_pooled", spearman, xs, ys, stats, flags)
        _stat_or_flag("kendall_pooled", kendall_tau_b, xs, ys, stats, flags)
        taus = []
        for t in range(len(triples)):
            triple_slots = slots[3 * t : 3 * t + 3]
            if not all(s.ok for s in triple_slots):
                continue
            try:
                taus.append(
                    kendall_tau_b(
                        PairedSamples.from_sequences(
                            [s.value for s in triple_slots], golds[3 * t : 3 * t + 3]
                        )
                    )
                )
            except UndefinedCorrelationError:
                continue
        if taus:
            stats["kendall_mean_per_triple"] = sum(taus) / len(taus)
        else:
            flags["kendall_mean_per_triple"] = "tau-b undefined on every triple (constant metric scores)"
        stats["per_triple_defined"] = len(taus)
        stats["failed_pairs"] = _failed_count(slots)
        per_metric[name] = stats
        if flags:
            degenerate[name] = flags
    return CriterionResult(
        criterion="entailment_ranking",
        sample_count=len(triples),
        metrics=per_metric,
        degenerate=degenerate,
        definition=_DEFINITIONS["entailment_ranking"],
    )


def _corruption_pairs(triples: Sequence[CorruptionTriple]) -> tuple[list[SentencePair], list[int]]:
    pairs: list[SentencePair] = []
    ranks: list[int] = []
    for triple in triples:
        for rank, sp in enumerate((triple.original, triple.corrupted, triple.more_corrupted)):
            pairs.append(SentencePair(id=f"{sp.id}#{rank}", reference=sp.reference, hypothesis=sp.hypothesis))
            ranks.append(rank)
    return pairs, ranks


def run_corruption_criterion(
    metrics: Sequence[Metric],
    triples: Sequence[CorruptionTriple],
    jobs: int = 1,
) -> CriterionResult:
    """Criterion 3: strictly decreasing scores under harder corruption."""
    if not triples:
        raise ValueError("corruption criterion needs at least 1 triple")
    pairs, ranks = _corruption_pairs(triples)
    per_metric: dict[str, dict] = {}
    degenerate: dict[str, dict] = {}
    for metric in metrics:
        name = metric.descriptor.name
        slots = score_corpus(metric, pairs, jobs=jobs)
        satisfied = 0
        for t in range(len(triples)):
            s0, s1, s2 = slots[3 * t : 3 * t + 3]
            if s0.ok and s1.ok and s2.ok and s0.value > s1.value > s2.value:
                satisfied += 1
        xs = [float(-rank) for s, rank in zip(slots, ranks) if s.ok]
        ys = [s.value for s in slots if s.ok]
        stats: dict[str, float | int] = {"monotonicity_rate": satisfied / len(triples)}
        flags: dict[str, str] = {}
        _stat_or_flag("spearman_pooled", spearman, xs, ys, stats, flags)
        _stat_or_flag("kendall_pooled", kendall_tau_b, xs, ys, stats, flags)
        stats["failed_pairs"] = _failed_count(slots)
        per_metric[name] = stats
        if flags:
            degenerate[name] = flags
    return CriterionResult(
        criterion="corruption_robustness",
        sample_count=len(triples),
        metrics=per_metric,
        degenerate=degenerate,
        definition=_DEFINITIONS["corruption_robustness"],
    )


@dataclass
class ScorecardReport:
    """All criterion results for one run; the body is byte-reproducible."""

    results: list[CriterionResult]
    metrics: list[MetricDescriptor]
    seed: int | None = None
    config_digest: str = ""
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def body_dict(self) -> dict:
        return {
            "config_digest": self.config_digest,
            "seed": self.seed,
            "metrics": [
                {
                    "name": d.name,
                    "kind": d.kind,
                    "range": list(d.range),
                    "orientation": d.orientation,
                }
                for d in self.metrics
            ],
            "criteria": [r.to_dict() for r in self.results],
        }

    def body_bytes(self) -> bytes:
        return (json.dumps(self.body_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")

    def to_dict(self) -> dict:
        body = self.body_dict()
        return {
            "schema": SCHEMA,
            "created_at": self.created_at,
            "body_sha256": hashlib.sha256(self.body_bytes()).hexdigest(),
            "body": body,
        }


def build_report(
    results: Sequence[CriterionResult],
    metrics: Sequence[Metric],
    seed: int | None = None,
    config_digest: str = "",
) -> ScorecardReport:
    if not results:
        raise ValueError("cannot build a report from an empty criterion list")
    if not metrics:
        raise ValueError("cannot build a report without metrics")
    return ScorecardReport(
        results=list(results),
        metrics=[m.descriptor for m in metrics],
        seed=seed,
        config_digest=config_digest,
    )


def _fmt_cell(value: float | int) -> str:
    if isinstance(value, int):
        return str(value)
    return f"{value:.4f}"


def _markdown_table(result: CriterionResult) -> str:
    metric_names = list(result.metrics)
    stat_names: list[str] = []
    for stats in result.metrics.values():
        for key in stats:
            if key not in stat_names:
                stat_names.append(key)
    for flags in result.degenerate.values():
        for key in flags:
            if key not in stat_names:
                stat_names.append(key)
    lines = [
        f"## {result.criterion} (n={result.sample_count})",
        "",
        result.definition,
        "",
        "| statistic | " + " | ".join(metric_names) + " |",
        "|" + "---|" * (len(metric_names) + 1),
    ]
    for stat in stat_names:
        cells = []
        for name in metric_names:
            if stat in result.metrics[name]:
                cells.append(_fmt_cell(result.metrics[name][stat]))
            elif stat in result.degenerate.get(name, {}):
                cells.append(f"undefined ({result.degenerate[name][stat]})")
            else:
                cells.append("-")
        lines.append(f"| {stat} | " + " | ".join(cells) + " |")
    lines.append("")
    return "\n".join(lines)


def emit_report(report: ScorecardReport, format: str = "json") -> str:
    """Render the report as a JSON document or human-readable markdown."""
    if not report.results:
        raise ValueError("cannot emit a report with no criterion results")
    if format == "json":
        return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if format == "markdown":
        head = [
            "# Metric scorecard",
            "",
            f"- schema: {SCHEMA}",
            f"- created: {report.created_at}",
            f"- config digest: {report.config_digest or '(none)'}",
            f"- seed: {report.seed if report.seed is not None else '(none)'}",
            f"- metrics: {', '.join(d.name for d in report.metrics)}",
            "",
        ]
        return "\n".join(head) + "\n".join(_markdown_table(r) for r in report.results)
    raise ValueError(f"unknown report format {format!r} (expected 'json' or 'markdown')")
