"""N-gram text-evaluation metrics plus a three-criterion metric scorecard.

The package implements BLEU and ROUGE (the baseline metrics under test), a
seeded corruption engine, rank statistics, a subprocess scorer protocol so
external learned metrics can participate, and the scorecard runners that
judge every registered metric on similarity correlation, entailment ranking,
and corruption robustness.
"""

from .bridge import (
    BUILTIN_METRIC_NAMES,
    ExternalMetric,
    FunctionMetric,
    MetricDescriptor,
    MetricRegistry,
    PairScore,
    ProtocolViolationError,
    ScorerError,
    ScorerTimeoutError,
    ScorerUnavailableError,
    build_registry,
    builtin_metrics,
)
from .corpora import (
    GOLD_ORDER,
    CorpusError,
    CorpusWarning,
    EntailmentTriple,
    ParseError,
    SentencePair,
    SimilarityRecord,
    ValidationError,
    load_entailment_triples,
    load_pairs,
    load_similarity,
)
from .corruption import CORRUPTION_OPS, CorruptionSpec, CorruptionTriple, corrupt, make_triples
from .metrics import (
    BleuConfig,
    MetricScore,
    RougeConfig,
    RougeScore,
    bleu,
    corpus_bleu,
    modified_precision,
    rouge_l,
    rouge_n,
)
from .scorecard import (
    CriterionResult,
    ScorecardReport,
    build_report,
    emit_report,
    run_corruption_criterion,
    run_entailment_criterion,
    run_similarity_criterion,
)
from .stats import PairedSamples, UndefinedCorrelationError, kendall_tau_b, pearson, spearman
from .textproc import NGramCounts, TokenizerConfig, TokenSequence, ngrams, tokenize

__version__ = "0.1.0"
