"""Ingestion and validation of similarity, entailment, and pair corpora.

Canonical formats are plain TSV (tab-separated, no quoting, literal tabs
forbidden inside text) and JSONL, both UTF-8 with "\\n" line endings.
Loaders never silently drop lines: malformed input raises with the line
number, and suspicious-but-legal input (empty sides, empty files) emits a
:class:`CorpusWarning`.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "SentencePair",
    "SimilarityRecord",
    "EntailmentTriple",
    "GOLD_ORDER",
    "CorpusError",
    "ParseError",
    "ValidationError",
    "CorpusWarning",
    "load_pairs",
    "load_similarity",
    "load_entailment_triples",
    "write_pairs",
    "write_similarity",
    "write_entailment_triples",
    "group_entailment_pairs",
    "convert_stsb_lines",
    "convert_nli_jsonl_lines",
]

# Fixed gold ordinals for the three-way entailment ranking.
GOLD_ORDER = {"entailment": 2, "neutral": 1, "contradiction": 0}


class CorpusError(Exception):
    """Base for corpus ingestion failures."""

    def __init__(self, message: str, path: str | Path | None = None, line_no: int | None = None) -> None:
        self.path = str(path) if path is not None else None
        self.line_no = line_no
        where = ""
        if self.path is not None:
            where = f"{self.path}:"
        if line_no is not None:
            where += f"{line_no}: "
        elif where:
            where += " "
        super().__init__(where + message)


class ParseError(CorpusError):
    """A line could not be parsed under the declared format."""


class ValidationError(CorpusError):
    """A parsed record violates a corpus invariant."""


class CorpusWarning(UserWarning):
    """Legal but suspicious corpus content (empty text, empty file)."""


@dataclass(frozen=True)
class SentencePair:
    """One (reference, hypothesis) sentence pair with a corpus-unique id."""

    id: str
    reference: str
    hypothesis: str


@dataclass(frozen=True)
class SimilarityRecord:
    """A sentence pair with its human similarity judgement on the 0-5 scale."""

    pair: SentencePair
    human_score: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.human_score <= 5.0):
            raise ValueError(f"human_score must be in [0, 5], got {self.human_score}")


@dataclass(frozen=True)
class EntailmentTriple:
    """A premise with one hypothesis per logical relation.

    The gold ranking is fixed: entailment (2) above neutral (1) above
    contradiction (0).
    """

    premise: str
    entailment_hyp: str
    neutral_hyp: str
    contradiction_hyp: str

    def __post_init__(self) -> None:
        hyps = (self.entailment_hyp, self.neutral_hyp, self.contradiction_hyp)
        if len(set(hyps)) != 3:
            raise ValueError("the three hypotheses of an entailment triple must be distinct")

    def hypotheses(self) -> list[tuple[str, str, int]]:
        """(label, hypothesis, gold ordinal) in fixed label order."""
        return [
            ("entailment", self.entailment_hyp, GOLD_ORDER["entailment"]),
            ("neutral", self.neutral_hyp, GOLD_ORDER["neutral"]),
            ("contradiction", self.contradiction_hyp, GOLD_ORDER["contradiction"]),
        ]


def _check_no_tabs(text: str, what: str, path: str | Path, line_no: int | None) -> None:
    if "\t" in text or "\n" in text:
        raise ValidationError(f"{what} contains a literal tab or newline (forbidden in TSV)", path, line_no)


def _read_lines(path: str | Path) -> list[str]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CorpusError("file not found", path) from None
    return raw.splitlines()


def _warn_if_empty_sides(pair: SentencePair, path: str | Path, line_no: int) -> None:
    if pair.reference == "" or pair.hypothesis == "":
        warnings.warn(
            CorpusWarning(f"{path}:{line_no}: pair {pair.id!r} has an empty text side"),
            stacklevel=3,
        )


def load_pairs(path: str | Path, format: str = "tsv") -> list[SentencePair]:
    """Load sentence pairs from TSV (id, reference, hypothesis) or JSONL."""
    if format not in ("tsv", "jsonl"):
        raise ValueError(f"unknown pair format {format!r} (expected 'tsv' or 'jsonl')")
    lines = _read_lines(path)
    pairs: list[SentencePair] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if format == "tsv":
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", path, line_no)
            pair_id, reference, hypothesis = fields
        else:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise ParseError(f"invalid JSON: {err.msg}", path, line_no) from None
            for key in ("id", "reference", "hypothesis"):
                if key not in obj:
                    raise ParseError(f"missing field {key!r}", path, line_no)
            pair_id, reference, hypothesis = str(obj["id"]), obj["reference"], obj["hypothesis"]
            if not isinstance(reference, str) or not isinstance(hypothesis, str):
                raise ParseError("reference and hypothesis must be strings", path, line_no)
        if pair_id in seen:
            raise ValidationError(f"duplicate pair id {pair_id!r}", path, line_no)
        seen.add(pair_id)
        pair = SentencePair(id=pair_id, reference=reference, hypothesis=hypothesis)
        _warn_if_empty_sides(pair, path, line_no)
        pairs.append(pair)
    if not pairs:
        warnings.warn(CorpusWarning(f"{path}: empty corpus"), stacklevel=2)
    return pairs


def load_similarity(path: str | Path, format: str = "tsv") -> list[SimilarityRecord]:
    """Load similarity records from TSV (id, sentence1, sentence2, score)."""
    if format != "tsv":
        raise ValueError(f"unknown similarity format {format!r} (expected 'tsv')")
    lines = _read_lines(path)
    records: list[SimilarityRecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", path, line_no)
        rec_id, sentence1, sentence2, score_text = fields
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"score {score_text!r} is not a number", path, line_no) from None
        if not (0.0 <= score <= 5.0):
            raise ValidationError(f"score {score} outside [0, 5]", path, line_no)
        if rec_id in seen:
            raise ValidationError(f"duplicate record id {rec_id!r}", path, line_no)
        seen.add(rec_id)
        pair = SentencePair(id=rec_id, reference=sentence1, hypothesis=sentence2)
        _warn_if_empty_sides(pair, path, line_no)
        records.append(SimilarityRecord(pair=pair, human_score=score))
    if not records:
        warnings.warn(CorpusWarning(f"{path}: empty corpus"), stacklevel=2)
    return records


_TRIPLE_FIELDS = ("premise", "entailment", "neutral", "contradiction")


def load_entailment_triples(path: str | Path, format: str = "jsonl") -> list[EntailmentTriple]:
    """Load entailment triples from JSONL with premise/entailment/neutral/contradiction fields."""
    if format != "jsonl":
        raise ValueError(f"unknown triple format {format!r} (expected 'jsonl')")
    lines = _read_lines(path)
    triples: list[EntailmentTriple] = []
    for line_no, line in enumerate(lines, start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid JSON: {err.msg}", path, line_no) from None
        for key in _TRIPLE_FIELDS:
            if key not in obj:
                raise ParseError(f"missing field {key!r}", path, line_no)
            if not isinstance(obj[key], str):
                raise ParseError(f"field {key!r} must be a string", path, line_no)
        try:
            triple = EntailmentTriple(
                premise=obj["premise"],
                entailment_hyp=obj["entailment"],
                neutral_hyp=obj["neutral"],
                contradiction_hyp=obj["contradiction"],
            )
        except ValueError as err:
            raise ValidationError(str(err), path, line_no) from None
        triples.append(triple)
    if not triples:
        warnings.warn(CorpusWarning(f"{path}: empty corpus"), stacklevel=2)
    return triples


def write_pairs(pairs: Sequence[SentencePair], path: str | Path, format: str = "tsv") -> None:
    """Write pairs in canonical TSV or JSONL form."""
    if format not in ("tsv", "jsonl"):
        raise ValueError(f"unknown pair format {format!r}")
    out: list[str] = []
    for i, p in enumerate(pairs, start=1):
        if format == "tsv":
            _check_no_tabs(p.id, "id", path, i)
            _check_no_tabs(p.reference, "reference", path, i)
            _check_no_tabs(p.hypothesis, "hypothesis", path, i)
            out.append(f"{p.id}\t{p.reference}\t{p.hypothesis}\n")
        else:
            obj = {"id": p.id, "reference": p.reference, "hypothesis": p.hypothesis}
            out.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
    Path(path).write_text("".join(out), encoding="utf-8", newline="\n")


def write_similarity(records: Sequence[SimilarityRecord], path: str | Path) -> None:
    """Write similarity records in canonical TSV form (score uses repr round-trip)."""
    out = []
    for i, r in enumerate(records, start=1):
        for text, what in ((r.pair.id, "id"), (r.pair.reference, "sentence1"), (r.pair.hypothesis, "sentence2")):
            _check_no_tabs(text, what, path, i)
        out.append(f"{r.pair.id}\t{r.pair.reference}\t{r.pair.hypothesis}\t{r.human_score!r}\n")
    Path(path).write_text("".join(out), encoding="utf-8", newline="\n")


def write_entailment_triples(triples: Sequence[EntailmentTriple], path: str | Path) -> None:
    """Write triples in canonical JSONL form (fixed key order)."""
    out = []
    for t in triples:
        obj = {
            "premise": t.premise,
            "entailment": t.entailment_hyp,
            "neutral": t.neutral_hyp,
            "contradiction": t.contradiction_hyp,
        }
        out.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
    Path(path).write_text("".join(out), encoding="utf-8", newline="\n")


def group_entailment_pairs(labeled: Iterable[tuple[str, str, str]]) -> list[EntailmentTriple]:
    """Group (premise, hypothesis, label) rows into entailment triples.

    Deterministic rule: group by premise in first-appearance order, keep only
    premises that have at least one hypothesis per label, and pick the first
    hypothesis per label in input order.  Premises whose three picked
    hypotheses are not distinct are skipped with a warning.
    """
    by_premise: dict[str, dict[str, str]] = {}
    order: list[str] = []
    for premise, hypothesis, label in labeled:
        if label not in GOLD_ORDER:
            raise ValidationError(f"unknown entailment label {label!r}")
        if premise not in by_premise:
            by_premise[premise] = {}
            order.append(premise)
        by_premise[premise].setdefault(label, hypothesis)
    triples: list[EntailmentTriple] = []
    for premise in order:
        picked = by_premise[premise]
        if len(picked) != 3:
            continue
        try:
            triples.append(
                EntailmentTriple(
                    premise=premise,
                    entailment_hyp=picked["entailment"],
                    neutral_hyp=picked["neutral"],
                    contradiction_hyp=picked["contradiction"],
                )
            )
        except ValueError:
            warnings.warn(
                CorpusWarning(f"premise {premise[:60]!r}: duplicate hypotheses across labels, skipped"),
                stacklevel=2,
            )
    return triples


def convert_stsb_lines(lines: Iterable[str]) -> list[SimilarityRecord]:
    """Convert the original STS-B distribution TSV into similarity records.

    The official files carry genre, filename, year, index, score, sentence1,
    sentence2 (plus occasional trailing license columns).  Record ids are
    zero-padded line indices, which keeps ids unique and stable for a fixed
    input file.
    """
    records: list[SimilarityRecord] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) < 7:
            raise ParseError(f"expected >= 7 tab-separated fields, got {len(fields)}", None, line_no)
        score_text, sentence1, sentence2 = fields[4], fields[5], fields[6]
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"score {score_text!r} is not a number", None, line_no) from None
        if not (0.0 <= score <= 5.0):
            raise ValidationError(f"score {score} outside [0, 5]", None, line_no)
        pair = SentencePair(id=f"{len(records):04d}", reference=sentence1, hypothesis=sentence2)
        records.append(SimilarityRecord(pair=pair, human_score=score))
    return records


def convert_nli_jsonl_lines(lines: Iterable[str]) -> list[EntailmentTriple]:
    """Convert MNLI-style labeled-pair JSONL into entailment triples.

    Expects objects with sentence1 (premise), sentence2 (hypothesis), and
    gold_label; rows labeled "-" (annotator no-consensus) are skipped with a
    warning.  Grouping follows :func:`group_entailment_pairs`.
    """
    labeled: list[tuple[str, str, str]] = []
    skipped = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid JSON: {err.msg}", None, line_no) from None
        for key in ("sentence1", "sentence2", "gold_label"):
            if key not in obj:
                raise ParseError(f"missing field {key!r}", None, line_no)
        label = obj["gold_label"]
        if label == "-":
            skipped += 1
            continue
        if label not in GOLD_ORDER:
            raise ValidationError(f"unknown gold_label {label!r}", None, line_no)
        labeled.append((obj["sentence1"], obj["sentence2"], label))
    if skipped:
        warnings.warn(CorpusWarning(f"skipped {skipped} rows labeled '-'"), stacklevel=2)
    return group_entailment_pairs(labeled)
