import pytest

from metric_scorecard.bridge import (
    ExternalMetric,
    FunctionMetric,
    MetricDescriptor,
    ProtocolViolationError,
    ScorerError,
    ScorerTimeoutError,
    ScorerUnavailableError,
    build_registry,
    builtin_metrics,
)
from metric_scorecard.corpora import SentencePair

from conftest import stub_command


def pairs_numeric(values):
    return [SentencePair(f"p{i}", "ref text", str(v)) for i, v in enumerate(values)]


# --- descriptors and registry -------------------------------------------------

def test_descriptor_validation():
    with pytest.raises(ValueError, match="launch command"):
        MetricDescriptor(name="x", kind="external")
    with pytest.raises(ValueError, match="kind"):
        MetricDescriptor(name="x", kind="magic")
    with pytest.raises(ValueError, match="range"):
        MetricDescriptor(name="x", kind="builtin", range=(1.0, 1.0))


def test_registry_rejects_duplicate_names_case_insensitively():
    m1 = FunctionMetric(MetricDescriptor("Alpha", "builtin"), lambda p: 0.5)
    m2 = FunctionMetric(MetricDescriptor("alpha", "builtin"), lambda p: 0.5)
    with pytest.raises(ValueError, match="duplicate"):
        build_registry([m1, m2])


def test_registry_resolves_case_insensitively():
    registry = build_registry(builtin_metrics())
    assert registry.resolve("ROUGEL").descriptor.name == "rougeL"
    with pytest.raises(KeyError, match="bleu, rouge1, rouge2, rougeL"):
        registry.resolve("meteor")


# --- builtin metrics ------------------------------------------------------------

def test_builtin_rouge1_identity_pair():
    registry = build_registry(builtin_metrics())
    pair = SentencePair("x", "The cat sat.", "The cat sat.")
    assert registry.resolve("rouge1").score_pair(pair).value == 1.0


def test_builtin_batch_matches_individual_calls():
    metric = builtin_metrics()[0]
    pairs = [
        SentencePair("a", "the cat sat", "the cat sat"),
        SentencePair("b", "the cat sat", "a dog ran"),
        SentencePair("c", "x y z", "x y"),
    ]
    batch = metric.score_batch(pairs)
    singles = [metric.score_pair(p).value for p in pairs]
    assert [s.value for s in batch] == singles
    assert [s.pair_id for s in batch] == ["a", "b", "c"]


def test_empty_batch():
    metric = builtin_metrics()[0]
    assert metric.score_batch([]) == []


# --- external scorer: conformance ------------------------------------------------

def test_constant_scorer_conformance():
    with ExternalMetric(stub_command("--behavior", "constant", "--name", "const")) as metric:
        assert metric.descriptor.name == "const"
        assert metric.descriptor.range == (0.0, 1.0)
        slots = metric.score_batch(pairs_numeric([1, 2, 3]))
        assert [s.value for s in slots] == [0.5, 0.5, 0.5]


def test_echo_scorer_scores_come_from_requests():
    with ExternalMetric(stub_command("--behavior", "echo")) as metric:
        slots = metric.score_batch(pairs_numeric([0.25, 0.75, 0.0]))
        assert [s.value for s in slots] == [0.25, 0.75, 0.0]


def test_out_of_order_responses_reconcile_by_id():
    # The reverse stub answers pipelined requests in swapped order with echo
    # scores, so misassociation would be visible in the values.
    with ExternalMetric(stub_command("--behavior", "reverse")) as metric:
        slots = metric.score_batch(pairs_numeric([0.9, 0.1, 0.7, 0.3]))
        assert [s.value for s in slots] == [0.9, 0.1, 0.7, 0.3]
        assert [s.pair_id for s in slots] == ["p0", "p1", "p2", "p3"]


def test_scorer_error_responses_occupy_their_slot():
    with ExternalMetric(stub_command("--behavior", "echo")) as metric:
        pairs = [
            SentencePair("ok1", "r", "0.5"),
            SentencePair("bad", "r", "not-a-number"),
            SentencePair("ok2", "r", "0.25"),
        ]
        slots = metric.score_batch(pairs)
        assert [s.ok for s in slots] == [True, False, True]
        assert slots[1].error_kind == "scorer_error"
        assert "not-a-number" in slots[1].error
        assert [s.pair_id for s in slots] == ["ok1", "bad", "ok2"]


def test_out_of_range_score_is_a_protocol_violation_slot():
    with ExternalMetric(stub_command("--behavior", "echo")) as metric:
        slots = metric.score_batch(pairs_numeric([0.5, 1.5]))
        assert slots[0].ok
        assert not slots[1].ok
        assert slots[1].error_kind == "protocol_violation"
        assert "range" in slots[1].error


def test_score_pair_raises_on_protocol_violation():
    with ExternalMetric(stub_command("--behavior", "echo")) as metric:
        with pytest.raises(ProtocolViolationError, match="range"):
            metric.score_pair(SentencePair("p", "r", "7.0"))


def test_mismatched_id_is_a_protocol_violation():
    with ExternalMetric(stub_command("--behavior", "bad-id")) as metric:
        with pytest.raises(ProtocolViolationError, match="does not match"):
            metric.score_batch(pairs_numeric([1]))


def test_garbage_response_is_a_protocol_violation():
    with ExternalMetric(stub_command("--behavior", "garbage")) as metric:
        with pytest.raises(ProtocolViolationError, match="not valid JSON"):
            metric.score_batch(pairs_numeric([1]))


# --- external scorer: lifecycle ----------------------------------------------------

def test_absent_binary_is_unavailable():
    metric = ExternalMetric(["/no/such/scorer-binary"])
    with pytest.raises(ScorerUnavailableError, match="cannot launch"):
        metric.start()


def test_bad_handshake_is_a_protocol_violation():
    metric = ExternalMetric(stub_command("--behavior", "bad-handshake"))
    with pytest.raises(ProtocolViolationError, match="handshake"):
        metric.start()


def test_wrong_protocol_is_rejected():
    metric = ExternalMetric(stub_command("--behavior", "wrong-protocol"))
    with pytest.raises(ProtocolViolationError, match="scorer/2"):
        metric.start()


def test_handshake_name_mismatch_is_rejected():
    metric = ExternalMetric(stub_command("--name", "stub"), name="expected-other")
    with pytest.raises(ProtocolViolationError, match="announced name"):
        metric.start()
    metric.close()


def test_crash_once_restarts_transparently(tmp_path):
    sentinel = tmp_path / "crashed.flag"
    cmd = stub_command("--behavior", "crash-once", "--sentinel", str(sentinel))
    with ExternalMetric(cmd) as metric:
        slots = metric.score_batch(pairs_numeric([1, 2]))
        assert [s.value for s in slots] == [0.5, 0.5]
    assert sentinel.exists()


def test_second_crash_fails_with_captured_stderr():
    metric = ExternalMetric(stub_command("--behavior", "crash-always"))
    with pytest.raises(ScorerUnavailableError, match="died twice") as excinfo:
        metric.score_batch(pairs_numeric([1]))
    assert "boom: simulated crash" in str(excinfo.value)
    metric.close()


def test_timeout_raises(tmp_path):
    cmd = stub_command("--behavior", "slow", "--delay", "5")
    metric = ExternalMetric(cmd, timeout=0.3)
    with pytest.raises(ScorerTimeoutError, match="0.3"):
        metric.score_batch(pairs_numeric([1]))


def test_duplicate_ids_in_batch_rejected():
    with ExternalMetric(stub_command()) as metric:
        dup = [SentencePair("same", "r", "1"), SentencePair("same", "r", "2")]
        with pytest.raises(ValueError, match="unique"):
            metric.score_batch(dup)


def test_empty_batch_never_touches_the_process():
    metric = ExternalMetric(["/no/such/scorer-binary"])
    assert metric.score_batch([]) == []
