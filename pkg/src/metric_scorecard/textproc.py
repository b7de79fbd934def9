"""Tokenization, normalization, and n-gram extraction shared by every metric."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "TokenizerConfig",
    "TokenSequence",
    "NGramCounts",
    "tokenize",
    "ngrams",
]

# Small list of high-frequency English function words; only consulted when
# TokenizerConfig.drop_stopwords is on (off by default).
_STOPWORDS = frozenset(
    """a an and are as at be but by for from has have he her his i in is it its
    of on or she that the their they this to was were will with you""".split()
)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class TokenizerConfig:
    """Knobs for :func:`tokenize`.

    Defaults lowercase and isolate punctuation; stemming and stopword
    removal exist for ROUGE-style preprocessing experiments and default off.
    """

    lowercase: bool = True
    isolate_punctuation: bool = True
    stem: bool = False
    drop_stopwords: bool = False

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "isolate_punctuation": self.isolate_punctuation,
            "stem": self.stem,
            "drop_stopwords": self.drop_stopwords,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TokenizerConfig":
        known = {f: d[f] for f in ("lowercase", "isolate_punctuation", "stem", "drop_stopwords") if f in d}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown tokenizer config keys: {sorted(unknown)}")
        return cls(**known)


@dataclass(frozen=True)
class TokenSequence:
    """A normalized token list for one sentence.

    ``tokens`` never contains empty strings.  Instances produced by
    :func:`tokenize` satisfy ``tokenize(source, config).tokens == tokens``
    for the config they were built with.
    """

    tokens: tuple[str, ...]
    source: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if any(t == "" for t in self.tokens):
            raise ValueError("TokenSequence must not contain empty tokens")

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "TokenSequence":
        """Build a synthetic sequence from pre-split tokens (source is the space join)."""
        toks = tuple(tokens)
        return cls(tokens=toks, source=" ".join(toks))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def _strip_plural(word: str) -> str:
    # Conservative S-stemmer: plural suffixes only, never shortens below 3 chars.
    if len(word) > 4 and word.endswith("sses"):
        return word[:-2]
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 3 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def tokenize(raw: str, config: TokenizerConfig | None = None) -> TokenSequence:
    """Tokenize ``raw`` deterministically.

    The input is NFC-normalized, optionally lowercased, punctuation characters
    are split out as standalone tokens, and the result is split on whitespace.
    Empty input yields an empty sequence.
    """
    if config is None:
        config = TokenizerConfig()
    text = unicodedata.normalize("NFC", raw)
    if config.lowercase:
        text = text.lower()
    if config.isolate_punctuation:
        out: list[str] = []
        for ch in text:
            if _is_punct(ch):
                out.append(" ")
                out.append(ch)
                out.append(" ")
            else:
                out.append(ch)
        text = "".join(out)
    tokens = text.split()
    if config.drop_stopwords:
        tokens = [t for t in tokens if t.lower() not in _STOPWORDS]
    if config.stem:
        tokens = [_strip_plural(t) for t in tokens]
    return TokenSequence(tokens=tuple(tokens), source=raw)


@dataclass(frozen=True)
class NGramCounts:
    """Multiset of the contiguous n-grams of one token sequence."""

    n: int
    counts: dict[tuple[str, ...], int]

    def total(self) -> int:
        return sum(self.counts.values())


def _as_tokens(seq: TokenSequence | Sequence[str]) -> tuple[str, ...]:
    if isinstance(seq, TokenSequence):
        return seq.tokens
    return tuple(seq)


def ngrams(seq: TokenSequence | Sequence[str], n: int) -> NGramCounts:
    """Count all contiguous n-grams of ``seq``.

    Sequences shorter than ``n`` yield empty counts.  Raises ``ValueError``
    for ``n < 1``.
    """
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    tokens = _as_tokens(seq)
    grams = Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return NGramCounts(n=n, counts=dict(grams))
