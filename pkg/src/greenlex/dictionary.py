"""Green dictionary construction and token-sequence matching.

Two rule kinds classify a normalized document:

* Single: a contiguous token sequence ("energy conservation").
* Cooc: a keyword sequence plus OR-alternatives; the rule fires when the
  keyword and any alternative occur with start positions at most ``window``
  tokens apart (default 20, inclusive).

Rule files are TSV: ``S<TAB>phrase`` or ``C<TAB>keyword<TAB>alt1 OR
alt2<TAB>window`` with the window column optional. Every phrase passes
through the same normalizer as the documents, so surface variants match
regardless of inflection; alternatives are split on the literal token
``OR`` before normalization (lowercase "or" would be eaten as a stopword).
Rules that normalize to identical token sequences collapse to the first
occurrence; plural and singular spellings of the same entry are expected
in curated rule files.

Seed expansion queries a trained embedding for the nearest neighbors of
each seed expression (per constituent word, plus the concatenated
collocation form when it is in the vocabulary) and emits the union as
Single-rule candidates for manual curation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Normalizer, PatentRecord, ProcessedDoc, RESERVED_TAGS
from .embedding import CbowModel, top_k_neighbors
from .errors import ValidationError

DEFAULT_WINDOW = 20
DEFAULT_NEIGHBORS = 15

SINGLE = "single"
COOC = "cooc"

_OR_SPLIT = re.compile(r"\bOR\b")


@dataclass(frozen=True)
class DictRule:
    kind: str
    tokens: tuple[str, ...]  # the phrase (Single) or keyword sequence (Cooc)
    alternatives: tuple[tuple[str, ...], ...] = ()
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if self.kind not in (SINGLE, COOC):
            raise ValidationError(f"unknown rule kind: {self.kind!r}")
        if not self.tokens:
            raise ValidationError("rule has no tokens")
        if self.kind == COOC:
            if not self.alternatives or any(not alt for alt in self.alternatives):
                raise ValidationError("co-occurrence rule needs non-empty alternatives")
            if self.window < 1:
                raise ValidationError("window must be >= 1")

    @property
    def rule_id(self) -> str:
        if self.kind == SINGLE:
            return "S:" + " ".join(self.tokens)
        alts = " OR ".join(" ".join(alt) for alt in self.alternatives)
        return f"C:{' '.join(self.tokens)}|{alts}|w={self.window}"


@dataclass(frozen=True)
class Provenance:
    kind: str  # "seed", "expanded", or "manual"
    seed: str | None = None
    rank: int | None = None
    similarity: float | None = None


@dataclass(frozen=True)
class GreenDictionary:
    rules: tuple[DictRule, ...]
    provenance: tuple[Provenance, ...]

    def __post_init__(self):
        if len(self.rules) != len(self.provenance):
            raise ValidationError("rules and provenance are not aligned")
        if not self.rules:
            raise ValidationError("dictionary has no rules")


@dataclass(frozen=True)
class FiredRule:
    """positions: start indices for Single, (keyword, alternative) start pairs for Cooc."""

    rule: DictRule
    positions: tuple


@dataclass(frozen=True)
class MatchOutcome:
    matched: bool
    fired_rules: tuple[FiredRule, ...]


def load_seeds(path: str | Path) -> list[str]:
    """Seed expressions, one per line, each 1-3 words."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            expr = line.strip().lower()
            if not expr or expr.startswith("#"):
                continue
            if not 1 <= len(expr.split()) <= 3:
                raise ValidationError(f"{path}:{lineno}: seed must be 1-3 words: {expr!r}")
            if expr not in out:
                out.append(expr)
    if not out:
        raise ValidationError(f"{path}: no seed expressions")
    return out


def load_exclusions(path: str | Path) -> frozenset[str]:
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                out.add(word)
    return frozenset(out)


def _normalize_phrase(raw: str, normalizer: Normalizer, where: str) -> tuple[str, ...]:
    tokens = normalizer.normalize_text("", raw)
    if not tokens:
        raise ValidationError(f"{where}: rule normalizes to empty: {raw!r}")
    return tokens


def compile_dictionary(path: str | Path, normalizer: Normalizer) -> GreenDictionary:
    """Parse and normalize a rule file; duplicate normalized rules collapse."""
    path = Path(path)
    rules: list[DictRule] = []
    seen: set = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            where = f"{path}:{lineno}"
            if parts[0] == "S" and len(parts) == 2:
                rule = DictRule(SINGLE, _normalize_phrase(parts[1], normalizer, where))
            elif parts[0] == "C" and len(parts) in (3, 4):
                keyword = _normalize_phrase(parts[1], normalizer, where)
                alts = []
                for chunk in _OR_SPLIT.split(parts[2]):
                    if chunk.strip():
                        alts.append(_normalize_phrase(chunk, normalizer, where))
                if not alts:
                    raise ValidationError(f"{where}: no alternatives in {parts[2]!r}")
                window = DEFAULT_WINDOW
                if len(parts) == 4 and parts[3].strip():
                    try:
                        window = int(parts[3])
                    except ValueError:
                        raise ValidationError(f"{where}: bad window {parts[3]!r}") from None
                    if window < 1:
                        raise ValidationError(f"{where}: window must be >= 1")
                rule = DictRule(COOC, keyword, tuple(alts), window)
            else:
                raise ValidationError(f"{where}: expected 'S<TAB>phrase' or 'C<TAB>kw<TAB>alts[<TAB>window]'")
            key = (rule.kind, rule.tokens, rule.alternatives, rule.window)
            if key in seen:
                continue
            seen.add(key)
            rules.append(rule)
    if not rules:
        raise ValidationError(f"{path}: no rules")
    return GreenDictionary(tuple(rules), tuple(Provenance("manual") for _ in rules))


def rule_line(rule: DictRule) -> str:
    """Render a rule back to its TSV file form."""
    if rule.kind == SINGLE:
        return "S\t" + " ".join(rule.tokens)
    alts = " OR ".join(" ".join(alt) for alt in rule.alternatives)
    return f"C\t{' '.join(rule.tokens)}\t{alts}\t{rule.window}"


def expand_seeds(
    model: CbowModel,
    seeds: Sequence[str],
    k: int = DEFAULT_NEIGHBORS,
    exclusions: Iterable[str] = (),
    normalizer: Normalizer | None = None,
) -> tuple[GreenDictionary, list[str]]:
    """Expand seed expressions into a candidate dictionary.

    Every seed becomes a Single rule. Each seed is queried per constituent
    vocabulary word (and by the concatenation of its words when that form
    is in the vocabulary); the top k neighbors per query become Single-rule
    candidates, minus excluded words and the number/measure tags. Duplicate
    candidates keep the highest similarity. Seeds with no vocabulary
    presence are returned in the skipped list, not errors. Output order:
    seeds in input order, then candidates by descending similarity (ties
    lexicographic).
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    excluded = {w.lower() for w in exclusions} | set(RESERVED_TAGS)

    rules: list[DictRule] = []
    provenance: list[Provenance] = []
    seen: set[tuple[str, ...]] = set()
    skipped: list[str] = []
    candidates: dict[str, tuple[float, str, int]] = {}

    for seed in seeds:
        if normalizer is not None:
            tokens = normalizer.normalize_text("", seed)
        else:
            tokens = tuple(seed.lower().split())
        if not tokens:
            skipped.append(seed)
            continue
        if tokens not in seen:
            seen.add(tokens)
            rules.append(DictRule(SINGLE, tokens))
            provenance.append(Provenance("seed", seed=seed))
        queries = [t for t in tokens if t in model.vocab]
        collocation = "".join(tokens)
        if len(tokens) > 1 and collocation in model.vocab:
            queries.append(collocation)
        if not queries:
            skipped.append(seed)
            continue
        for query in queries:
            for rank, (word, sim) in enumerate(top_k_neighbors(model, query, k), start=1):
                if word in excluded:
                    continue
                prev = candidates.get(word)
                if prev is None or sim > prev[0]:
                    candidates[word] = (sim, seed, rank)

    ordered = sorted(candidates.items(), key=lambda item: (-item[1][0], item[0]))
    for word, (sim, seed, rank) in ordered:
        tokens = (word,)
        if tokens in seen:
            continue
        seen.add(tokens)
        rules.append(DictRule(SINGLE, tokens))
        provenance.append(Provenance("expanded", seed=seed, rank=rank, similarity=sim))

    return GreenDictionary(tuple(rules), tuple(provenance)), skipped


def _starts(tokens: Sequence[str], index: dict, phrase: tuple[str, ...]) -> list[int]:
    """Start positions where phrase occurs contiguously in tokens."""
    m = len(phrase)
    first = index.get(phrase[0])
    if first is None:
        return []
    if m == 1:
        return first
    n = len(tokens)
    return [p for p in first if p + m <= n and tuple(tokens[p : p + m]) == phrase]


def match_document(doc, dictionary: GreenDictionary) -> MatchOutcome:
    """Evaluate every rule against one normalized document.

    For Cooc rules the recorded positions are all (keyword_start,
    alternative_start) pairs within the window; the rule fires when at
    least one pair qualifies, i.e. the nearest occurrence starts are at
    most ``window`` apart.
    """
    tokens = tuple(_doc_tokens(doc))
    index: dict[str, list[int]] = {}
    for i, tok in enumerate(tokens):
        index.setdefault(tok, []).append(i)

    fired: list[FiredRule] = []
    for rule in dictionary.rules:
        if rule.kind == SINGLE:
            starts = _starts(tokens, index, rule.tokens)
            if starts:
                fired.append(FiredRule(rule, tuple(starts)))
            continue
        kw_starts = _starts(tokens, index, rule.tokens)
        if not kw_starts:
            continue
        pairs = set()
        for alt in rule.alternatives:
            for a in _starts(tokens, index, alt):
                for kws in kw_starts:
                    if abs(kws - a) <= rule.window:
                        pairs.add((kws, a))
        if pairs:
            fired.append(FiredRule(rule, tuple(sorted(pairs))))
    return MatchOutcome(bool(fired), tuple(fired))


def _doc_tokens(doc) -> Sequence[str]:
    return getattr(doc, "tokens", doc)


def classify_true_green(
    record: PatentRecord, doc: ProcessedDoc, dictionary: GreenDictionary
) -> tuple[bool, MatchOutcome]:
    """True green = baseline green flag AND at least one dictionary rule fires."""
    outcome = match_document(doc, dictionary)
    return record.baseline_green and outcome.matched, outcome
