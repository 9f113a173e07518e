"""Text novelty scoring by first appearance against a historical baseline.

The baseline lexicon collects every unigram, consecutive bigram and
trigram, and unordered within-document keyword pair from documents whose
priority year precedes the cutoff (default 1980). Scoring then walks the
remaining corpus in strict (priority_year, patent_id) order and counts,
per document, how many of its grams have never been seen before; each
document's grams join the running lexicon immediately after it is scored,
so a term is novel exactly once. Keywords are all tokens that survive
normalization, the number/measure tags included.

``update="per_year"`` relaxes the running update: every document in a
priority-year cohort is scored against the lexicon frozen at the start of
that year and the cohort's grams merge once at year end. This makes the
per-year scores order-independent within the cohort but no longer matches
the strict sequential definition; the default is strict.

Lexicon files: magic ``GLNV1\\0``, u32 cutoff year, then four sections
(unigrams, bigrams, trigrams, pairs), each a u64 entry count followed by
sorted length-prefixed UTF-8 strings with gram tokens joined by single
spaces. Little-endian throughout.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, replace
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import ProcessedDoc
from .errors import FormatError, ValidationError

LEXICON_MAGIC = b"GLNV1\x00"

DEFAULT_CUTOFF_YEAR = 1980
TOP_QUANTILE = "top_quantile"
MIN_NEW_PAIRS = "min_new_pairs"


@dataclass
class BaselineLexicon:
    unigrams: set
    bigrams: set
    trigrams: set
    keyword_pairs: set
    cutoff_year: int

    def copy(self) -> "BaselineLexicon":
        return BaselineLexicon(
            set(self.unigrams),
            set(self.bigrams),
            set(self.trigrams),
            set(self.keyword_pairs),
            self.cutoff_year,
        )


@dataclass(frozen=True)
class NoveltyProfile:
    patent_id: str
    priority_year: int
    new_unigrams: int
    new_bigrams: int
    new_trigrams: int
    new_pairs: int
    high_novelty: bool = False


def doc_grams(tokens: Sequence[str]) -> tuple[set, set, set, set]:
    """Unique unigrams, consecutive bi/trigrams, and unordered keyword pairs."""
    unigrams = set(tokens)
    bigrams = {tuple(tokens[i : i + 2]) for i in range(len(tokens) - 1)}
    trigrams = {tuple(tokens[i : i + 3]) for i in range(len(tokens) - 2)}
    pairs = set(combinations(sorted(unigrams), 2))
    return unigrams, bigrams, trigrams, pairs


def build_baseline(
    docs: Iterable[tuple[ProcessedDoc, int | None]], cutoff_year: int = DEFAULT_CUTOFF_YEAR
) -> BaselineLexicon:
    """Collect grams from documents with priority_year < cutoff_year.

    Takes (doc, priority_year) pairs; docs without a priority year are
    ignored. An empty baseline is legal but warned about, since every
    scored gram would then be new.
    """
    lex = BaselineLexicon(set(), set(), set(), set(), cutoff_year)
    n_docs = 0
    for doc, year in docs:
        if year is None or year >= cutoff_year:
            continue
        n_docs += 1
        uni, bi, tri, pairs = doc_grams(doc.tokens)
        lex.unigrams |= uni
        lex.bigrams |= bi
        lex.trigrams |= tri
        lex.keyword_pairs |= pairs
    if n_docs == 0:
        warnings.warn(f"no documents before cutoff year {cutoff_year}; baseline lexicon is empty")
    return lex


def score_novelty(
    docs: Iterable[tuple[ProcessedDoc, int]],
    baseline: BaselineLexicon,
    update: str = "per_doc",
) -> list[NoveltyProfile]:
    """Count first-appearance grams per document against the running lexicon.

    ``docs`` are (doc, priority_year) pairs, strictly ordered by
    (priority_year, patent_id); out-of-order input is an error, because
    the running update makes scores order-dependent.
    """
    if update not in ("per_doc", "per_year"):
        raise ValidationError(f"unknown update mode: {update!r}")
    running = baseline.copy()
    profiles: list[NoveltyProfile] = []
    last_key: tuple[int, str] | None = None

    pending: list[tuple[set, set, set, set]] = []
    pending_year: int | None = None

    def merge_pending():
        for uni, bi, tri, pairs in pending:
            running.unigrams |= uni
            running.bigrams |= bi
            running.trigrams |= tri
            running.keyword_pairs |= pairs
        pending.clear()

    for doc, year in docs:
        if year is None:
            raise ValidationError(f"document {doc.patent_id} has no priority_year")
        key = (year, doc.patent_id)
        if last_key is not None and key <= last_key:
            raise ValidationError(
                f"documents out of order: {key} after {last_key} "
                "(sort by priority_year then patent_id)"
            )
        last_key = key
        if update == "per_year" and pending_year is not None and year != pending_year:
            merge_pending()
        pending_year = year

        uni, bi, tri, pairs = doc_grams(doc.tokens)
        profiles.append(
            NoveltyProfile(
                patent_id=doc.patent_id,
                priority_year=year,
                new_unigrams=len(uni - running.unigrams),
                new_bigrams=len(bi - running.bigrams),
                new_trigrams=len(tri - running.trigrams),
                new_pairs=len(pairs - running.keyword_pairs),
            )
        )
        if update == "per_doc":
            running.unigrams |= uni
            running.bigrams |= bi
            running.trigrams |= tri
            running.keyword_pairs |= pairs
        else:
            pending.append((uni, bi, tri, pairs))
    merge_pending()
    return profiles


def flag_high_novelty(
    profiles: Sequence[NoveltyProfile],
    rule: str = TOP_QUANTILE,
    q: float = 0.25,
    min_pairs: int = 1,
) -> list[NoveltyProfile]:
    """Mark high-novelty profiles; returns new profiles in input order.

    top_quantile flags new_pairs at or above the (1 - q) quantile within
    each priority-year cohort (quantile method "higher", so the threshold
    is an attained value and ties at the threshold are all flagged).
    min_new_pairs flags new_pairs >= min_pairs regardless of cohort.
    """
    if rule == TOP_QUANTILE:
        if not 0.0 < q < 1.0:
            raise ValidationError("q must be in (0, 1)")
        thresholds: dict[int, float] = {}
        by_year: dict[int, list[int]] = {}
        for p in profiles:
            by_year.setdefault(p.priority_year, []).append(p.new_pairs)
        for year, values in by_year.items():
            thresholds[year] = float(np.quantile(np.asarray(values), 1.0 - q, method="higher"))
        return [replace(p, high_novelty=p.new_pairs >= thresholds[p.priority_year]) for p in profiles]
    if rule == MIN_NEW_PAIRS:
        if min_pairs < 1:
            raise ValidationError("min_pairs must be >= 1")
        return [replace(p, high_novelty=p.new_pairs >= min_pairs) for p in profiles]
    raise ValidationError(f"unknown high-novelty rule: {rule!r}")


def _write_section(fh, grams: set) -> None:
    entries = sorted(" ".join(g) if isinstance(g, tuple) else g for g in grams)
    fh.write(struct.pack("<Q", len(entries)))
    for entry in entries:
        raw = entry.encode("utf-8")
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)


def save_lexicon(lexicon: BaselineLexicon, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(LEXICON_MAGIC)
        fh.write(struct.pack("<I", lexicon.cutoff_year))
        _write_section(fh, lexicon.unigrams)
        _write_section(fh, lexicon.bigrams)
        _write_section(fh, lexicon.trigrams)
        _write_section(fh, lexicon.keyword_pairs)


def _read_exact(fh, n: int) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise FormatError("unexpected EOF in lexicon file")
    return raw


def _read_section(fh, arity: int) -> set:
    (count,) = struct.unpack("<Q", _read_exact(fh, 8))
    out = set()
    for _ in range(count):
        (slen,) = struct.unpack("<I", _read_exact(fh, 4))
        entry = _read_exact(fh, slen).decode("utf-8")
        out.add(entry if arity == 1 else tuple(entry.split(" ")))
    return out


def load_lexicon(path: str | Path) -> BaselineLexicon:
    with open(path, "rb") as fh:
        magic = fh.read(len(LEXICON_MAGIC))
        if magic != LEXICON_MAGIC:
            raise FormatError("not a lexicon file or unsupported version")
        (cutoff,) = struct.unpack("<I", _read_exact(fh, 4))
        unigrams = _read_section(fh, 1)
        bigrams = _read_section(fh, 2)
        trigrams = _read_section(fh, 3)
        pairs = _read_section(fh, 2)
        if fh.read(1):
            raise FormatError("trailing bytes in lexicon file")
    return BaselineLexicon(unigrams, bigrams, trigrams, pairs, cutoff)
