"""Command-line entry point: score, corrupt, and scorecard subcommands.

Exit codes are part of the contract: 0 success, 1 usage error, 2 data error,
3 scorer failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .bridge import (
    BUILTIN_METRIC_NAMES,
    ExternalMetric,
    FunctionMetric,
    ScorerError,
    build_registry,
    builtin_metrics,
)
from .corpora import CorpusError, SentencePair, load_entailment_triples, load_pairs, load_similarity
from .corruption import CorruptionSpec, corrupt, derive_pair_seed, make_triples
from .metrics import BleuConfig
from .scorecard import (
    build_report,
    emit_report,
    run_corruption_criterion,
    run_entailment_criterion,
    run_similarity_criterion,
    score_corpus,
)
from .textproc import TokenizerConfig, TokenSequence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SCORER = 3


class UsageError(Exception):
    """Bad flags or unknown identifiers; exits 1."""


class ConfigError(Exception):
    """Structurally invalid run config; exits 2."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems by default; the CLI contract wants 1.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _sniff_format(path: str) -> str:
    return "jsonl" if path.endswith((".jsonl", ".json")) else "tsv"


def _resolve_builtin(name: str, jobs_metrics: Sequence[FunctionMetric]) -> FunctionMetric:
    for metric in jobs_metrics:
        if metric.descriptor.name.casefold() == name.casefold():
            return metric
    raise UsageError(
        f"unknown metric {name!r}; registered metrics: {', '.join(BUILTIN_METRIC_NAMES)}"
    )


def cmd_score(args: argparse.Namespace) -> int:
    metrics = builtin_metrics()
    metric = _resolve_builtin(args.metric, metrics)
    pairs = load_pairs(args.pairs, format=args.format or _sniff_format(args.pairs))
    slots = score_corpus(metric, pairs, jobs=args.jobs)
    lines = []
    for slot in slots:
        if not slot.ok:
            raise ScorerError(f"pair {slot.pair_id!r}: {slot.error}")
        lines.append(f"{slot.pair_id}\t{slot.value!r}\n")
    _write_output("".join(lines), args.out)
    return EXIT_OK


def _corrupt_one(pair: SentencePair, spec: CorruptionSpec) -> SentencePair:
    if spec.level == 0:
        return pair
    seq = TokenSequence(tokens=tuple(pair.hypothesis.split()), source=pair.hypothesis)
    per_pair = CorruptionSpec(
        level=spec.level,
        ops_enabled=spec.ops_enabled,
        rate=spec.rate,
        seed=derive_pair_seed(spec.seed, pair.id),
    )
    corrupted = corrupt(seq, per_pair)
    return SentencePair(pair.id, pair.reference, " ".join(corrupted.tokens))


def cmd_corrupt(args: argparse.Namespace) -> int:
    ops = tuple(args.ops.split(",")) if args.ops else None
    try:
        spec = CorruptionSpec(
            level=args.level,
            rate=args.rate,
            seed=args.seed,
            **({"ops_enabled": ops} if ops else {}),
        )
    except ValueError as err:
        raise UsageError(str(err)) from None
    pairs = load_pairs(args.pairs, format=args.format or _sniff_format(args.pairs))
    lines = []
    for pair in pairs:
        out = _corrupt_one(pair, spec)
        obj = {"id": out.id, "reference": out.reference, "hypothesis": out.hypothesis}
        lines.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
    _write_output("".join(lines), args.out)
    return EXIT_OK


@dataclass
class RunConfig:
    """Parsed, validated scorecard run configuration."""

    seed: int | None
    tokenizer: TokenizerConfig
    bleu: BleuConfig
    rouge_beta: float
    metric_specs: list[dict]
    datasets: dict[str, dict]
    corruption_low: CorruptionSpec | None
    corruption_high: CorruptionSpec | None
    output_path: str | None
    output_format: str
    digest: str
    base_dir: Path = field(default_factory=Path)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path) -> "RunConfig":
        digest = hashlib.sha256(
            json.dumps(raw, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
        ).hexdigest()
        seed = raw.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        try:
            tokenizer = TokenizerConfig.from_dict(raw.get("tokenizer", {}))
        except (TypeError, ValueError) as err:
            raise ConfigError(f"tokenizer: {err}") from None
        try:
            bleu = BleuConfig(**raw.get("bleu", {}))
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bleu: {err}") from None
        rouge_beta = raw.get("rouge_beta", 1.0)
        metric_specs = []
        for entry in raw.get("metrics", []):
            if isinstance(entry, str):
                metric_specs.append({"kind": "builtin", "name": entry})
            elif isinstance(entry, dict) and "command" in entry:
                if not isinstance(entry["command"], list) or not entry["command"]:
                    raise ConfigError(f"external metric command must be a nonempty list: {entry!r}")
                metric_specs.append(
                    {
                        "kind": "external",
                        "name": entry.get("name"),
                        "command": [str(c) for c in entry["command"]],
                        "timeout": float(entry.get("timeout", 30.0)),
                    }
                )
            else:
                raise ConfigError(f"metric entries must be names or external specs: {entry!r}")
        if not metric_specs:
            raise ConfigError("config must list at least one metric")
        datasets = {}
        for key in ("similarity", "entailment", "pairs"):
            entry = raw.get("datasets", {}).get(key)
            if entry is None:
                continue
            if isinstance(entry, str):
                entry = {"path": entry}
            if "path" not in entry:
                raise ConfigError(f"datasets.{key} needs a path")
            path = base_dir / entry["path"]
            if not path.exists():
                raise ConfigError(f"datasets.{key}: file not found: {path}")
            datasets[key] = {"path": path, "format": entry.get("format") or _sniff_format(str(path))}
        if not datasets:
            raise ConfigError("config must reference at least one dataset")
        corruption_low = corruption_high = None
        if "corruption" in raw:
            block = raw["corruption"]
            if "pairs" not in datasets:
                raise ConfigError("corruption criterion needs datasets.pairs")
            if seed is None:
                raise ConfigError("seed is mandatory for any run involving corruption")
            try:
                corruption_low = CorruptionSpec.from_dict({"seed": seed, **block.get("low", {})})
                corruption_high = CorruptionSpec.from_dict({"seed": seed, **block.get("high", {})})
            except (KeyError, TypeError, ValueError) as err:
                raise ConfigError(f"corruption: {err}") from None
        elif "pairs" in datasets:
            raise ConfigError("datasets.pairs is configured but no corruption block is present")
        output = raw.get("output", {})
        output_format = output.get("format", "json")
        if output_format not in ("json", "markdown"):
            raise ConfigError(f"output.format must be 'json' or 'markdown', got {output_format!r}")
        return cls(
            seed=seed,
            tokenizer=tokenizer,
            bleu=bleu,
            rouge_beta=rouge_beta,
            metric_specs=metric_specs,
            datasets=datasets,
            corruption_low=corruption_low,
            corruption_high=corruption_high,
            output_path=output.get("path"),
            output_format=output_format,
            digest=digest,
            base_dir=base_dir,
        )


def cmd_scorecard(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorpusError("config file not found", config_path) from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{config_path}: config is not valid JSON: {err}") from None
    config = RunConfig.from_dict(raw, base_dir=config_path.parent)

    builtins = builtin_metrics(config.tokenizer, config.bleu, config.rouge_beta)
    metrics: list[FunctionMetric | ExternalMetric] = []
    externals: list[ExternalMetric] = []
    try:
        for spec in config.metric_specs:
            if spec["kind"] == "builtin":
                metrics.append(_resolve_builtin(spec["name"], builtins))
            else:
                ext = ExternalMetric(spec["command"], name=spec.get("name"), timeout=spec["timeout"])
                ext.start()  # handshake failures must surface before any criterion runs
                externals.append(ext)
                metrics.append(ext)
        registry = build_registry(metrics)
        ordered = [registry.metrics[name] for name in registry.names()]

        results = []
        if "similarity" in config.datasets:
            ds = config.datasets["similarity"]
            records = load_similarity(ds["path"], format=ds["format"])
            results.append(run_similarity_criterion(ordered, records, jobs=args.jobs))
        if "entailment" in config.datasets:
            ds = config.datasets["entailment"]
            triples = load_entailment_triples(ds["path"], format=ds["format"])
            results.append(run_entailment_criterion(ordered, triples, jobs=args.jobs))
        if "pairs" in config.datasets:
            ds = config.datasets["pairs"]
            pairs = load_pairs(ds["path"], format=ds["format"])
            assert config.corruption_low is not None and config.corruption_high is not None
            triples = make_triples(pairs, config.corruption_low, config.corruption_high)
            results.append(run_corruption_criterion(ordered, triples, jobs=args.jobs))

        report = build_report(results, ordered, seed=config.seed, config_digest=config.digest)
        rendered = emit_report(report, format=args.format or config.output_format)
    finally:
        for ext in externals:
            ext.close()

    if args.out is not None:
        out = args.out
    elif config.output_path is not None:
        p = Path(config.output_path)
        out = str(p if p.is_absolute() else config.base_dir / p)
    else:
        out = None
    _write_output(rendered, out)
    return EXIT_OK


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metric-scorecard", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_score = sub.add_parser("score", help="score sentence pairs with one builtin metric")
    p_score.add_argument("--metric", required=True, help="metric id: " + ", ".join(BUILTIN_METRIC_NAMES))
    p_score.add_argument("--pairs", required=True, help="pair corpus (TSV: id, reference, hypothesis; or JSONL)")
    p_score.add_argument("--format", choices=["tsv", "jsonl"], help="pair file format (default: by extension)")
    p_score.add_argument("--out", help="output TSV path (default: stdout)")
    p_score.add_argument("--jobs", type=int, default=1, help="parallel scoring threads; results are independent of N")
    p_score.set_defaults(fn=cmd_score)

    p_corrupt = sub.add_parser("corrupt", help="write a corrupted copy of a pair corpus")
    p_corrupt.add_argument("--pairs", required=True, help="pair corpus to corrupt")
    p_corrupt.add_argument("--level", required=True, type=int, help="corruption severity level (0 = identity)")
    p_corrupt.add_argument("--seed", required=True, type=int, help="RNG seed (per-pair seeds derive from it)")
    p_corrupt.add_argument("--ops", help="comma-separated ops (default: char_typo,word_delete,word_insert,word_swap)")
    p_corrupt.add_argument("--rate", type=float, default=0.10, help="fraction of tokens touched per level")
    p_corrupt.add_argument("--format", choices=["tsv", "jsonl"], help="pair file format (default: by extension)")
    p_corrupt.add_argument("--out", help="output JSONL path (default: stdout)")
    p_corrupt.set_defaults(fn=cmd_corrupt)

    p_card = sub.add_parser("scorecard", help="run configured criteria and write the report")
    p_card.add_argument("--config", required=True, help="run config JSON (see README for the schema)")
    p_card.add_argument("--out", help="report path (overrides config output.path; default: stdout)")
    p_card.add_argument("--format", choices=["json", "markdown"], help="report format (overrides config)")
    p_card.add_argument("--jobs", type=int, default=1, help="parallel scoring threads; results are independent of N")
    p_card.set_defaults(fn=cmd_scorecard)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, ConfigError, FileNotFoundError, ValueError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except ScorerError as err:
        print(f"scorer failure: {err}", file=sys.stderr)
        return EXIT_SCORER


if __name__ == "__main__":
    sys.exit(main())
