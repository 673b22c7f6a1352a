"""Raw narrative text to base directed graph.

Cleaning lowercases, strips punctuation and digits, removes stopwords and
maps each surviving token to a lemma (override dictionary first, then
ordered suffix rules, identity as fallback). The resulting lemma sequence
drives a unigram sequentiality graph: one node per distinct lemma
weighted by occurrence count, one edge per consecutive distinct pair.

The shipped stopword list and lemma overrides are plain data files and
fully user-overridable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .core import PlainGraph

DEFAULT_MIN_LEMMAS = 15
DEFAULT_MAX_LEMMAS = 300

# (suffix, replacement, minimum stem length), first match wins. Identity
# entries shield endings the generic -s rule must not touch.
SuffixRule = tuple[str, str, int]
DEFAULT_SUFFIX_RULES: tuple[SuffixRule, ...] = (
    ("sses", "ss", 2),
    ("ies", "y", 2),
    ("ches", "ch", 2),
    ("shes", "sh", 2),
    ("xes", "x", 2),
    ("zes", "z", 2),
    ("ing", "", 3),
    ("ed", "", 3),
    ("ss", "ss", 1),
    ("us", "us", 1),
    ("is", "is", 1),
    ("as", "as", 1),
    ("s", "", 3),
)

_NON_WORD = re.compile(r"[^a-z'\-]+")
_SENTENCE_SPLIT = re.compile(r"[.!?]+")


def _data_text(name: str) -> str:
    return resources.files("mlgraph").joinpath("data", name).read_text(encoding="utf-8")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """One token per line, UTF-8; blank lines and # comments ignored."""
    text = Path(path).read_text(encoding="utf-8") if path else _data_text("stopwords.txt")
    words = set()
    for line in text.splitlines():
        token = line.strip().lower()
        if token and not token.startswith("#"):
            words.add(token)
    return frozenset(words)


def load_lemma_overrides(path: str | Path | None = None) -> dict[str, str]:
    """Tab-separated surface-to-lemma pairs, one per line."""
    text = Path(path).read_text(encoding="utf-8") if path else _data_text("lemma_exceptions.tsv")
    table: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        surface, lemma = line.split("\t")
        table[surface.strip().lower()] = lemma.strip().lower()
    return table


@dataclass(frozen=True)
class PipelineConfig:
    stopwords: frozenset[str]
    lemma_overrides: Mapping[str, str]
    suffix_rules: tuple[SuffixRule, ...] = DEFAULT_SUFFIX_RULES
    min_lemmas: int = DEFAULT_MIN_LEMMAS
    max_lemmas: int = DEFAULT_MAX_LEMMAS
    sentence_breaks: bool = False

    @classmethod
    def default(
        cls,
        stopwords_path: str | Path | None = None,
        lemma_path: str | Path | None = None,
        min_lemmas: int = DEFAULT_MIN_LEMMAS,
        max_lemmas: int = DEFAULT_MAX_LEMMAS,
        sentence_breaks: bool = False,
    ) -> "PipelineConfig":
        return cls(
            stopwords=load_stopwords(stopwords_path),
            lemma_overrides=load_lemma_overrides(lemma_path),
            min_lemmas=min_lemmas,
            max_lemmas=max_lemmas,
            sentence_breaks=sentence_breaks,
        )


@dataclass(frozen=True)
class LemmaSequence:
    """Cleaned, lemmatized token stream of one narrative.

    ``breaks`` marks positions after which sequentiality must not cross
    (only populated when sentence breaks are enabled). The lemma budget L
    is simply the sequence length.
    """

    lemmas: tuple[str, ...]
    breaks: frozenset[int] = field(default_factory=frozenset)

    @property
    def budget(self) -> int:
        return len(self.lemmas)


def lemmatize_token(token: str, cfg: PipelineConfig) -> str:
    """Dictionary lookup first, then ordered suffix rules, else identity."""
    override = cfg.lemma_overrides.get(token)
    if override is not None:
        return override
    for suffix, replacement, min_stem in cfg.suffix_rules:
        if token.endswith(suffix) and len(token) - len(suffix) >= min_stem:
            stem = token[: len(token) - len(suffix)] + replacement
            if not replacement and suffix in ("ing", "ed"):
                if (
                    len(stem) >= 2
                    and stem[-1] == stem[-2]
                    and stem[-1] not in "aeioulsz"
                ):
                    stem = stem[:-1]  # stopped -> stop
                elif stem.endswith("i"):
                    stem = stem[:-1] + "y"  # tried -> try
            return stem if stem else token
    return token


def _raw_tokens(text: str) -> list[str]:
    text = text.lower().replace("’", "'").replace("‘", "'")
    pieces = _NON_WORD.sub(" ", text).split()
    out = []
    for piece in pieces:
        piece = piece.strip("-'")
        if piece.endswith("'s"):
            piece = piece[:-2]
        piece = piece.replace("'", "")
        if piece:
            out.append(piece)
    return out


def clean_and_lemmatize(text: str, cfg: PipelineConfig) -> LemmaSequence:
    """Full cleaning pass: lowercase, strip, filter, lemmatize, re-filter.

    Stopwords are removed both before and after lemmatization so the
    output never contains one (a rule can map a content token onto a
    function word). Hyphenated words stay single tokens. Order preserved;
    empty output is fine.
    """
    segments: Iterable[str]
    if cfg.sentence_breaks:
        segments = [s for s in _SENTENCE_SPLIT.split(text) if s.strip()]
    else:
        segments = [text]
    lemmas: list[str] = []
    breaks: set[int] = set()
    for segment in segments:
        for token in _raw_tokens(segment):
            if token in cfg.stopwords:
                continue
            lemma = lemmatize_token(token, cfg)
            if lemma in cfg.stopwords:
                continue
            lemmas.append(lemma)
        if cfg.sentence_breaks and lemmas:
            breaks.add(len(lemmas) - 1)
    return LemmaSequence(tuple(lemmas), frozenset(breaks))


def build_sequence_graph(seq: LemmaSequence) -> PlainGraph:
    """Unigram sequentiality graph of a lemma sequence.

    Node weights count occurrences, so the total node weight equals the
    lemma budget exactly. Consecutive duplicate lemmas contribute weight
    but no edge (self-loops are banned); edges never cross a recorded
    break position.
    """
    g = PlainGraph()
    for lemma in seq.lemmas:
        g.add_node(lemma)
    for i in range(len(seq.lemmas) - 1):
        if i in seq.breaks:
            continue
        u, v = seq.lemmas[i], seq.lemmas[i + 1]
        if u != v:
            g.add_edge(u, v)
    return g


def admit(seq: LemmaSequence, cfg: PipelineConfig) -> bool:
    """Length filter: keep narratives with min <= L <= max, inclusive."""
    return cfg.min_lemmas <= seq.budget <= cfg.max_lemmas
