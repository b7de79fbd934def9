"""Deterministic, seeded text corruption at graded severity levels.

The random source is SplitMix64, chosen because it is a named, portable
64-bit generator that is trivial to reimplement bit-exactly anywhere.
Golden tests depend on its output stream; changing the generator or the
draw order is a breaking change.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .corpora import SentencePair
from .textproc import TokenSequence

__all__ = [
    "CORRUPTION_OPS",
    "CorruptionSpec",
    "CorruptionTriple",
    "SplitMix64",
    "derive_pair_seed",
    "corrupt",
    "make_triples",
]

CORRUPTION_OPS = ("char_typo", "word_delete", "word_insert", "word_swap")

_MASK64 = (1 << 64) - 1
_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class SplitMix64:
    """SplitMix64 PRNG (Steele, Lea & Flood); 64-bit state, 64-bit output."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via the multiply-shift reduction."""
        if n <= 0:
            raise ValueError(f"need a positive bound, got {n}")
        return (self.next_u64() * n) >> 64


def derive_pair_seed(global_seed: int, pair_id: str) -> int:
    """Per-pair seed, stable under corpus reordering and filtering."""
    digest = hashlib.sha256(f"{global_seed}:{pair_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class CorruptionSpec:
    """Severity level, enabled operations, per-level rate, and RNG seed.

    ``ceil(level * rate * len(tokens))`` operations are applied; level 0 is
    the identity.  ``ops_enabled`` is normalized to sorted order so that the
    op-selection stream does not depend on how the set was written.
    """

    level: int
    ops_enabled: tuple[str, ...] = CORRUPTION_OPS
    rate: float = 0.10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")
        if not (0.0 <= self.rate <= 1.0):
            raise ValueError(f"rate must be in [0, 1], got {self.rate}")
        unknown = set(self.ops_enabled) - set(CORRUPTION_OPS)
        if unknown:
            raise ValueError(f"unknown corruption ops: {sorted(unknown)}")
        if self.level > 0 and not self.ops_enabled:
            raise ValueError("ops_enabled must be nonempty when level > 0")
        object.__setattr__(self, "ops_enabled", tuple(sorted(set(self.ops_enabled))))

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "ops_enabled": list(self.ops_enabled),
            "rate": self.rate,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorruptionSpec":
        known = {
            "level": d["level"],
            "ops_enabled": tuple(d.get("ops_enabled", CORRUPTION_OPS)),
            "rate": d.get("rate", 0.10),
            "seed": d.get("seed", 0),
        }
        return cls(**known)


@dataclass(frozen=True)
class CorruptionTriple:
    """One pair at three corruption severities; the reference side stays gold."""

    original: SentencePair
    corrupted: SentencePair
    more_corrupted: SentencePair

    def __post_init__(self) -> None:
        if not (self.original.reference == self.corrupted.reference == self.more_corrupted.reference):
            raise ValueError("corruption must leave the reference side unchanged")


def _apply_char_typo(rng: SplitMix64, tokens: list[str]) -> None:
    if not tokens:
        return
    idx = rng.below(len(tokens))
    tok = tokens[idx]
    kind = rng.below(3)  # 0 transpose, 1 delete, 2 substitute
    if len(tok) < 2:
        kind = 2
    if kind == 0:
        i = rng.below(len(tok) - 1)
        tok = tok[:i] + tok[i + 1] + tok[i] + tok[i + 2 :]
    elif kind == 1:
        i = rng.below(len(tok))
        tok = tok[:i] + tok[i + 1 :]
    else:
        i = rng.below(len(tok))
        ch = _ALPHABET[rng.below(len(_ALPHABET))]
        tok = tok[:i] + ch + tok[i + 1 :]
    tokens[idx] = tok


def _apply_one(op: str, rng: SplitMix64, tokens: list[str]) -> None:
    if op == "word_delete":
        if tokens:
            del tokens[rng.below(len(tokens))]
    elif op == "word_insert":
        if tokens:
            tok = tokens[rng.below(len(tokens))]
            tokens.insert(rng.below(len(tokens) + 1), tok)
    elif op == "word_swap":
        if len(tokens) >= 2:
            i = rng.below(len(tokens))
            j = rng.below(len(tokens) - 1)
            if j >= i:
                j += 1
            tokens[i], tokens[j] = tokens[j], tokens[i]
    elif op == "char_typo":
        _apply_char_typo(rng, tokens)
    else:  # pragma: no cover - spec validation prevents this
        raise ValueError(f"unknown corruption op {op!r}")


def corrupt(seq: TokenSequence, spec: CorruptionSpec) -> TokenSequence:
    """Apply ``ceil(level * rate * len(seq))`` seeded edit operations.

    Pure function of (sequence, spec).  The op count is fixed from the input
    length, so running the same seed at a higher level replays the lower
    level's edits and then continues, and a sequence corrupted down to zero
    tokens absorbs any further deletions.
    """
    n_ops = math.ceil(spec.level * spec.rate * len(seq.tokens))
    if n_ops == 0:
        return seq
    rng = SplitMix64(spec.seed)
    tokens = list(seq.tokens)
    for _ in range(n_ops):
        op = spec.ops_enabled[rng.below(len(spec.ops_enabled))]
        _apply_one(op, rng, tokens)
    return TokenSequence(tokens=tuple(tokens), source=" ".join(tokens))


def _split_ws(text: str) -> TokenSequence:
    return TokenSequence(tokens=tuple(text.split()), source=text)


def make_triples(
    pairs: Sequence[SentencePair],
    spec_low: CorruptionSpec,
    spec_high: CorruptionSpec,
) -> list[CorruptionTriple]:
    """Corrupt each pair's hypothesis at two severities.

    Requires ``spec_high.level > spec_low.level``.  Each pair gets its own
    seed derived from (spec seed, pair id), so adding or removing pairs from
    the corpus never changes the corruption of the pairs that remain.
    Hypotheses are treated as whitespace-separated words; edited hypotheses
    are re-joined with single spaces.
    """
    if spec_high.level <= spec_low.level:
        raise ValueError(
            f"spec_high.level ({spec_high.level}) must exceed spec_low.level ({spec_low.level})"
        )
    triples: list[CorruptionTriple] = []
    for pair in pairs:
        seq = _split_ws(pair.hypothesis)
        low = replace(spec_low, seed=derive_pair_seed(spec_low.seed, pair.id))
        high = replace(spec_high, seed=derive_pair_seed(spec_high.seed, pair.id))
        corrupted = corrupt(seq, low)
        more_corrupted = corrupt(seq, high)
        triples.append(
            CorruptionTriple(
                original=pair,
                corrupted=SentencePair(pair.id, pair.reference, " ".join(corrupted.tokens)),
                more_corrupted=SentencePair(pair.id, pair.reference, " ".join(more_corrupted.tokens)),
            )
        )
    return triples
