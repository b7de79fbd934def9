"""Uniform metric abstraction plus the out-of-process scorer protocol.

External scorers speak "scorer/1": newline-delimited JSON over the child's
stdin/stdout.  The scorer emits one handshake line on startup::

    {"protocol": "scorer/1", "name": "<metric>", "range": [lo, hi]}

then answers each request line ``{"id", "ref", "hyp"}`` with either
``{"id", "score"}`` or ``{"id", "error"}``.  Responses may arrive out of
order; ids reconcile them.  The bridge enforces the declared range - external
scorers are trusted on determinism but not on range.
"""

from __future__ import annotations

import json
import math
import subprocess
import threading
from collections import deque
from dataclasses import dataclass, field
from queue import Empty, Queue
from typing import Callable, Iterable, Sequence

from .corpora import SentencePair
from .metrics import BleuConfig, MetricScore, bleu, rouge_l, rouge_n
from .textproc import TokenizerConfig, tokenize

__all__ = [
    "ScorerError",
    "ScorerTimeoutError",
    "ProtocolViolationError",
    "ScorerUnavailableError",
    "MetricDescriptor",
    "PairScore",
    "FunctionMetric",
    "ExternalMetric",
    "MetricRegistry",
    "build_registry",
    "builtin_metrics",
    "BUILTIN_METRIC_NAMES",
    "PROTOCOL_NAME",
]

PROTOCOL_NAME = "scorer/1"

BUILTIN_METRIC_NAMES = ("bleu", "rouge1", "rouge2", "rougeL")


class ScorerError(Exception):
    """Base for scoring failures."""


class ScorerTimeoutError(ScorerError):
    """The external scorer did not answer within the configured timeout."""


class ProtocolViolationError(ScorerError):
    """The external scorer broke the scorer/1 contract."""


class ScorerUnavailableError(ScorerError):
    """The external scorer process could not be started or died repeatedly."""

    def __init__(self, message: str, stderr: str = "") -> None:
        self.stderr = stderr
        if stderr:
            message = f"{message}\n--- scorer stderr ---\n{stderr}"
        super().__init__(message)


@dataclass(frozen=True)
class MetricDescriptor:
    """What the scorecard knows about one metric."""

    name: str
    kind: str  # "builtin" | "external"
    range: tuple[float, float] = (0.0, 1.0)
    orientation: str = "similarity"  # higher = more similar
    command: tuple[str, ...] | None = None
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if self.kind not in ("builtin", "external"):
            raise ValueError(f"kind must be 'builtin' or 'external', got {self.kind!r}")
        if not self.name:
            raise ValueError("metric name must be nonempty")
        if self.kind == "external" and not self.command:
            raise ValueError("external metrics must declare a launch command")
        lo, hi = self.range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"invalid score range [{lo}, {hi}]")


@dataclass(frozen=True)
class PairScore:
    """One slot of a batch result: a value or an error, never both."""

    pair_id: str
    value: float | None
    error: str | None = None
    error_kind: str | None = None  # "scorer_error" | "protocol_violation"

    @property
    def ok(self) -> bool:
        return self.error is None


class FunctionMetric:
    """In-process metric: a pure function from a sentence pair to a score."""

    parallel_safe = True

    def __init__(self, descriptor: MetricDescriptor, fn: Callable[[SentencePair], float]) -> None:
        self.descriptor = descriptor
        self._fn = fn

    def score_pair(self, pair: SentencePair) -> MetricScore:
        value = float(self._fn(pair))
        return MetricScore(metric_name=self.descriptor.name, value=value, range=self.descriptor.range)

    def score_batch(self, pairs: Sequence[SentencePair]) -> list[PairScore]:
        out = []
        for pair in pairs:
            score = self.score_pair(pair)
            out.append(PairScore(pair_id=pair.id, value=score.value))
        return out

    def close(self) -> None:
        pass


def _drain(stream, sink: deque) -> None:
    for line in stream:
        sink.append(line)
    stream.close()


class _LineReader(threading.Thread):
    """Pushes child stdout lines onto a queue; None marks EOF."""

    def __init__(self, stream) -> None:
        super().__init__(daemon=True)
        self.stream = stream
        self.lines: Queue = Queue()

    def run(self) -> None:
        for line in self.stream:
            self.lines.put(line)
        self.lines.put(None)


class ExternalMetric:
    """Bridge to a scorer/1 subprocess.

    The process is started lazily (or via :meth:`start`).  If it dies
    mid-batch it is restarted once and the batch is replayed; a second death
    fails the run with the captured stderr.
    """

    parallel_safe = False

    def __init__(
        self,
        command: Sequence[str],
        name: str | None = None,
        timeout: float = 30.0,
        restart_on_crash: bool = True,
    ) -> None:
        if not command:
            raise ValueError("external scorer needs a nonempty launch command")
        self._command = tuple(command)
        self._expected_name = name
        self._timeout = timeout
        self._restart_on_crash = restart_on_crash
        self._restarts_used = 0
        self._proc: subprocess.Popen | None = None
        self._reader: _LineReader | None = None
        self._stderr_tail: deque = deque(maxlen=200)
        self.descriptor: MetricDescriptor | None = None

    # -- process lifecycle -------------------------------------------------

    def start(self) -> MetricDescriptor:
        """Spawn the scorer and validate its handshake."""
        if self._proc is not None and self._proc.poll() is None and self.descriptor is not None:
            return self.descriptor
        try:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as err:
            raise ScorerUnavailableError(f"cannot launch scorer {self._command[0]!r}: {err}") from None
        threading.Thread(target=_drain, args=(self._proc.stderr, self._stderr_tail), daemon=True).start()
        self._reader = _LineReader(self._proc.stdout)
        self._reader.start()
        try:
            self.descriptor = self._read_handshake()
        except _ProcessDied:
            self.close()
            raise ScorerUnavailableError(
                f"scorer {self._command[0]!r} exited before completing the handshake",
                stderr=self._stderr_text(),
            ) from None
        except ProtocolViolationError:
            self.close()
            raise
        return self.descriptor

    def _read_handshake(self) -> MetricDescriptor:
        handshake = self._next_line(context="handshake")
        try:
            obj = json.loads(handshake)
        except json.JSONDecodeError:
            raise ProtocolViolationError(f"handshake is not valid JSON: {handshake!r}") from None
        if obj.get("protocol") != PROTOCOL_NAME:
            raise ProtocolViolationError(f"unsupported protocol {obj.get('protocol')!r}, want {PROTOCOL_NAME!r}")
        name = obj.get("name")
        rng = obj.get("range")
        if not isinstance(name, str) or not name:
            raise ProtocolViolationError(f"handshake missing scorer name: {handshake!r}")
        if self._expected_name is not None and name != self._expected_name:
            raise ProtocolViolationError(f"scorer announced name {name!r}, config expects {self._expected_name!r}")
        if (
            not isinstance(rng, (list, tuple))
            or len(rng) != 2
            or not all(isinstance(v, (int, float)) for v in rng)
        ):
            raise ProtocolViolationError(f"handshake missing numeric range: {handshake!r}")
        return MetricDescriptor(
            name=name,
            kind="external",
            range=(float(rng[0]), float(rng[1])),
            command=self._command,
            timeout=self._timeout,
        )

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            if self._proc.stdin and not self._proc.stdin.closed:
                self._proc.stdin.close()
        except (BrokenPipeError, OSError):
            pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> "ExternalMetric":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- plumbing ----------------------------------------------------------

    def _stderr_text(self) -> str:
        return "".join(self._stderr_tail).strip()

    def _next_line(self, context: str) -> str:
        assert self._reader is not None
        try:
            line = self._reader.lines.get(timeout=self._timeout)
        except Empty:
            self.close()
            raise ScorerTimeoutError(
                f"scorer produced no {context} within {self._timeout}s"
            ) from None
        if line is None:
            raise _ProcessDied(context)
        return line

    def _send(self, request: dict) -> None:
        assert self._proc is not None and self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(request, ensure_ascii=False, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise _ProcessDied("request write") from None

    # -- scoring -----------------------------------------------------------

    def score_batch(self, pairs: Sequence[SentencePair]) -> list[PairScore]:
        """Score pairs, pipelined; out-of-order replies reconcile by id."""
        if not pairs:
            return []
        ids = [p.id for p in pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("pair ids within a batch must be unique")
        if self.descriptor is None:
            self.start()
        try:
            return self._run_batch(pairs)
        except _ProcessDied:
            self._handle_crash()
            try:
                return self._run_batch(pairs)
            except _ProcessDied:
                raise ScorerUnavailableError(
                    f"scorer {self._command[0]!r} died twice", stderr=self._stderr_text()
                ) from None

    def _handle_crash(self) -> None:
        if not self._restart_on_crash or self._restarts_used >= 1:
            raise ScorerUnavailableError(
                f"scorer {self._command[0]!r} died", stderr=self._stderr_text()
            ) from None
        self._restarts_used += 1
        self.close()
        self._proc = None
        self.start()

    def _run_batch(self, pairs: Sequence[SentencePair]) -> list[PairScore]:
        assert self.descriptor is not None
        outstanding: dict[str, SentencePair] = {}
        results: dict[str, PairScore] = {}
        for pair in pairs:
            self._send({"id": pair.id, "ref": pair.reference, "hyp": pair.hypothesis})
            outstanding[pair.id] = pair
        while outstanding:
            line = self._next_line(context="response")
            results_entry = self._parse_response(line, outstanding)
            results[results_entry.pair_id] = results_entry
            del outstanding[results_entry.pair_id]
        return [results[p.id] for p in pairs]

    def _parse_response(self, line: str, outstanding: dict[str, SentencePair]) -> PairScore:
        assert self.descriptor is not None
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolViolationError(f"response is not valid JSON: {line!r}") from None
        rid = obj.get("id")
        if rid not in outstanding:
            raise ProtocolViolationError(f"response id {rid!r} does not match any outstanding request")
        if "error" in obj:
            return PairScore(pair_id=rid, value=None, error=str(obj["error"]), error_kind="scorer_error")
        score = obj.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise ProtocolViolationError(f"response for {rid!r} carries no numeric score: {line!r}")
        value = float(score)
        lo, hi = self.descriptor.range
        if not math.isfinite(value):
            return PairScore(
                pair_id=rid,
                value=None,
                error=f"non-finite score {value!r}",
                error_kind="protocol_violation",
            )
        if not (lo <= value <= hi):
            return PairScore(
                pair_id=rid,
                value=None,
                error=f"score {value} outside declared range [{lo}, {hi}]",
                error_kind="protocol_violation",
            )
        return PairScore(pair_id=rid, value=value)

    def score_pair(self, pair: SentencePair) -> MetricScore:
        slot = self.score_batch([pair])[0]
        if slot.error is not None:
            if slot.error_kind == "protocol_violation":
                raise ProtocolViolationError(f"pair {pair.id!r}: {slot.error}")
            raise ScorerError(f"pair {pair.id!r}: {slot.error}")
        assert self.descriptor is not None and slot.value is not None
        return MetricScore(metric_name=self.descriptor.name, value=slot.value, range=self.descriptor.range)


class _ProcessDied(Exception):
    """Internal signal: the child exited while work was outstanding."""


@dataclass
class MetricRegistry:
    """Immutable-after-construction name -> metric mapping (insertion ordered)."""

    metrics: dict[str, FunctionMetric | ExternalMetric] = field(default_factory=dict)

    def resolve(self, name: str) -> FunctionMetric | ExternalMetric:
        for key, metric in self.metrics.items():
            if key.casefold() == name.casefold():
                return metric
        raise KeyError(f"unknown metric {name!r}; registered: {', '.join(self.metrics)}")

    def names(self) -> list[str]:
        return list(self.metrics)


def build_registry(metrics: Iterable[FunctionMetric | ExternalMetric]) -> MetricRegistry:
    registry: dict[str, FunctionMetric | ExternalMetric] = {}
    for metric in metrics:
        descriptor = metric.descriptor
        if descriptor is None:
            raise ValueError("external metrics must be started (handshake) before registration")
        folded = descriptor.name.casefold()
        if any(k.casefold() == folded for k in registry):
            raise ValueError(f"duplicate metric name {descriptor.name!r} in registry")
        registry[descriptor.name] = metric
    return MetricRegistry(metrics=registry)


def builtin_metrics(
    tokenizer: TokenizerConfig | None = None,
    bleu_config: BleuConfig | None = None,
    rouge_beta: float = 1.0,
) -> list[FunctionMetric]:
    """The four builtin metrics: bleu, rouge1, rouge2, rougeL.

    ROUGE metrics report the F-score, which is the single scalar the
    scorecard ranks and correlates.
    """
    tok = tokenizer if tokenizer is not None else TokenizerConfig()
    bc = bleu_config if bleu_config is not None else BleuConfig()

    def _toks(pair: SentencePair):
        return tokenize(pair.reference, tok), tokenize(pair.hypothesis, tok)

    def bleu_fn(pair: SentencePair) -> float:
        ref, hyp = _toks(pair)
        return bleu(ref, hyp, bc).value

    def rouge_n_fn(order: int) -> Callable[[SentencePair], float]:
        def fn(pair: SentencePair) -> float:
            ref, hyp = _toks(pair)
            return rouge_n(ref, hyp, n=order, beta=rouge_beta).f_score

        return fn

    def rouge_l_fn(pair: SentencePair) -> float:
        ref, hyp = _toks(pair)
        return rouge_l(ref, hyp, beta=rouge_beta).f_score

    def make(name: str, fn: Callable[[SentencePair], float]) -> FunctionMetric:
        return FunctionMetric(MetricDescriptor(name=name, kind="builtin"), fn)

    return [
        make("bleu", bleu_fn),
        make("rouge1", rouge_n_fn(1)),
        make("rouge2", rouge_n_fn(2)),
        make("rougeL", rouge_l_fn),
    ]
