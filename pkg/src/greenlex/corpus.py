"""Patent ingestion, text normalization, and firm panel loading.

Patent corpora arrive as JSONL (one object per line) or CSV with the same
field names; ``cpc_codes`` is a JSON array in JSONL and a ``|``-separated
cell in CSV. Malformed rows never abort a load: they are written to a
sibling ``<input>.rejects.jsonl`` report and the loader returns the rows
that survived. Duplicate patent ids are a hard error because silently
keeping either copy would corrupt downstream counts.

Normalization is deliberately dependency-free. Lemmas, POS tags, and
stopwords are injected as plain data files so a run can be reproduced
without pinning a tagger model. The pipeline, applied to the title and
then the abstract:

1. lowercase
2. replace dimension patterns (``10 x 20``, ``3x4x5cm``) and numbers with
   attached units (``5mm``) by ``<measure>``, remaining standalone numbers
   by ``<num>``
3. tokenize on ASCII letter runs; anything else is a separator
4. resolve each token to its lemma, then drop it if the lemma is a
   stopword or carries a POS tag outside the retained set (words absent
   from the POS lexicon are kept and treated as proper nouns)

All filters run on the resolved lemma, and lemma chains are followed to a
fixed point, so normalizing already-normalized text is a no-op. The token
space produced here is shared by the embedding, dictionary, and novelty
stages.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

import pandas as pd

from .errors import ValidationError

NUM_TAG = "<num>"
MEASURE_TAG = "<measure>"
RESERVED_TAGS = frozenset({NUM_TAG, MEASURE_TAG})

# POS classes retained by normalization; everything else is dropped.
KEEP_POS = frozenset({"NOUN", "ADJ", "VERB", "ADV", "PROPN"})

_NUM = r"\d+(?:[.,]\d+)?"
_UNIT = r"[a-z]{1,4}"
# Dimension patterns: 2 or 3 numbers joined by x/×, each with an optional
# short unit ("10 x 20", "3x4x5", "10cm x 20cm").
_MEASURE_RE = re.compile(
    rf"(?<![a-z0-9]){_NUM}(?:\s?{_UNIT}(?![a-z0-9]))?"
    rf"(?:\s?[x×]\s?{_NUM}(?:\s?{_UNIT}(?![a-z0-9]))?){{1,2}}(?![a-z0-9])"
)
# A number with a unit attached ("5mm", "20kwh"). A spaced unit ("5 mm")
# yields <num> plus the unit token instead.
_UNIT_NUM_RE = re.compile(rf"(?<![a-z0-9]){_NUM}{_UNIT}(?![a-z0-9])")
_NUM_RE = re.compile(rf"(?<![a-z0-9]){_NUM}(?![a-z0-9])")
_TOKEN_RE = re.compile(r"<num>|<measure>|[a-z][a-z0-9]*")


@dataclass(frozen=True)
class PatentRecord:
    """One patent as ingested; text fields are verbatim."""

    patent_id: str
    family_id: str
    title: str
    abstract: str
    cpc_codes: tuple[str, ...]
    priority_year: int | None = None
    grant_year: int | None = None
    citation_count: int = 0
    family_size: int = 1
    baseline_green: bool = False


@dataclass(frozen=True)
class ProcessedDoc:
    """Normalized token sequence for one patent (title tokens first)."""

    patent_id: str
    tokens: tuple[str, ...]


_PATENT_FIELDS = tuple(f.name for f in fields(PatentRecord))
_OPTIONAL_INT_FIELDS = ("priority_year", "grant_year")


def _as_bool(value, field: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("true", "1"):
            return True
        if v in ("false", "0", ""):
            return False
    raise ValueError(f"bad type: {field}")


def _record_from_mapping(row: Mapping, csv_mode: bool = False) -> PatentRecord:
    """Build a validated PatentRecord from a parsed row. Raises ValueError."""
    for field in _PATENT_FIELDS:
        if field in _OPTIONAL_INT_FIELDS:
            continue
        if field not in row or row[field] is None:
            raise ValueError(f"missing field: {field}")

    def text(field: str) -> str:
        v = row[field]
        if not isinstance(v, str):
            raise ValueError(f"bad type: {field}")
        return v

    def opt_year(field: str) -> int | None:
        v = row.get(field)
        if v is None or (csv_mode and v == ""):
            return None
        if csv_mode:
            try:
                return int(v)
            except ValueError:
                raise ValueError(f"bad type: {field}") from None
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValueError(f"bad type: {field}")
        return v

    def count(field: str, minimum: int) -> int:
        v = row[field]
        if csv_mode:
            try:
                v = int(v)
            except (TypeError, ValueError):
                raise ValueError(f"bad type: {field}") from None
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValueError(f"bad type: {field}")
        if v < minimum:
            raise ValueError(f"invalid row: {field} {v} < {minimum}")
        return v

    codes = row["cpc_codes"]
    if csv_mode:
        if not isinstance(codes, str):
            raise ValueError("bad type: cpc_codes")
        codes = [c for c in codes.split("|") if c]
    if not isinstance(codes, (list, tuple)) or any(
        not isinstance(c, str) or not c for c in codes
    ):
        raise ValueError("bad type: cpc_codes")

    pid = text("patent_id")
    if not pid:
        raise ValueError("missing field: patent_id")
    priority = opt_year("priority_year")
    grant = opt_year("grant_year")
    if priority is not None and grant is not None and priority > grant:
        raise ValueError(f"invalid row: priority_year {priority} > grant_year {grant}")

    return PatentRecord(
        patent_id=pid,
        family_id=text("family_id"),
        title=text("title"),
        abstract=text("abstract"),
        cpc_codes=tuple(codes),
        priority_year=priority,
        grant_year=grant,
        citation_count=count("citation_count", 0),
        family_size=count("family_size", 1),
        baseline_green=_as_bool(row["baseline_green"], "baseline_green"),
    )


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("jsonl", "csv"):
            raise ValidationError(f"unknown patent format: {fmt!r}")
        return fmt
    if path.suffix.lower() == ".csv":
        return "csv"
    return "jsonl"


def load_patents(path: str | Path, fmt: str | None = None) -> list[PatentRecord]:
    """Load a patent corpus, writing malformed rows to ``<input>.rejects.jsonl``.

    Rows that fail schema or invariant checks are skipped and reported with
    their line number and reason; the rejects file is only created when at
    least one row is rejected. Duplicate patent ids raise ValidationError.
    """
    path = Path(path)
    fmt = _infer_format(path, fmt)
    records: list[PatentRecord] = []
    rejects: list[dict] = []

    if fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    if not isinstance(row, dict):
                        raise ValueError("row is not an object")
                    records.append(_record_from_mapping(row))
                except ValueError as exc:
                    rejects.append({"line": lineno, "reason": str(exc)})
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = set(reader.fieldnames or ())
            missing = [f for f in _PATENT_FIELDS if f not in header]
            if missing:
                raise ValidationError(f"{path}: missing columns: {', '.join(missing)}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    records.append(_record_from_mapping(row, csv_mode=True))
                except ValueError as exc:
                    rejects.append({"line": lineno, "reason": str(exc)})

    if rejects:
        reject_path = path.with_name(path.name + ".rejects.jsonl")
        with open(reject_path, "w", encoding="utf-8") as fh:
            for item in rejects:
                fh.write(json.dumps(item, sort_keys=True) + "\n")

    seen: dict[str, int] = {}
    dupes: list[str] = []
    for rec in records:
        seen[rec.patent_id] = seen.get(rec.patent_id, 0) + 1
    dupes = sorted(pid for pid, n in seen.items() if n > 1)
    if dupes:
        raise ValidationError(f"duplicate patent_id: {', '.join(dupes)}")
    return records


def save_patents(records: Iterable[PatentRecord], path: str | Path, fmt: str | None = None) -> None:
    """Write records to JSONL or CSV; the inverse of load_patents."""
    path = Path(path)
    fmt = _infer_format(path, fmt)
    if fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                row = {
                    "patent_id": rec.patent_id,
                    "family_id": rec.family_id,
                    "title": rec.title,
                    "abstract": rec.abstract,
                    "cpc_codes": list(rec.cpc_codes),
                    "priority_year": rec.priority_year,
                    "grant_year": rec.grant_year,
                    "citation_count": rec.citation_count,
                    "family_size": rec.family_size,
                    "baseline_green": rec.baseline_green,
                }
                fh.write(json.dumps(row) + "\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_PATENT_FIELDS)
            for rec in records:
                writer.writerow(
                    [
                        rec.patent_id,
                        rec.family_id,
                        rec.title,
                        rec.abstract,
                        "|".join(rec.cpc_codes),
                        "" if rec.priority_year is None else rec.priority_year,
                        "" if rec.grant_year is None else rec.grant_year,
                        rec.citation_count,
                        rec.family_size,
                        "true" if rec.baseline_green else "false",
                    ]
                )


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One word per line; blank lines and #-comments ignored."""
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word and not word.startswith("#"):
                out.add(word.lower())
    return frozenset(out)


def load_lemmas(path: str | Path) -> dict[str, str]:
    """TSV of surface form and lemma."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValidationError(f"{path}:{lineno}: expected 'surface<TAB>lemma'")
            out[parts[0].lower()] = parts[1].lower()
    return out


def load_pos_tags(path: str | Path) -> dict[str, str]:
    """TSV of word and POS tag (NOUN, ADJ, VERB, ADV, PROPN, or OTHER)."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValidationError(f"{path}:{lineno}: expected 'word<TAB>tag'")
            out[parts[0].lower()] = parts[1].upper()
    return out


@dataclass(frozen=True)
class Normalizer:
    """Text normalization with injected lemma, POS, and stopword data."""

    stopwords: frozenset[str]
    lemmas: Mapping[str, str]
    pos_tags: Mapping[str, str]
    keep_pos: frozenset[str] = KEEP_POS

    @classmethod
    def from_files(
        cls,
        stopwords_path: str | Path,
        lemmas_path: str | Path,
        pos_path: str | Path,
    ) -> "Normalizer":
        return cls(
            stopwords=load_stopwords(stopwords_path),
            lemmas=load_lemmas(lemmas_path),
            pos_tags=load_pos_tags(pos_path),
        )

    def lemma(self, token: str) -> str:
        """Resolve the lemma chain for one token.

        Chains are followed to a fixed point; a cycle in the map resolves to
        its lexicographically smallest member so repeated application is
        stable either way.
        """
        path = [token]
        index = {token: 0}
        cur = token
        while True:
            nxt = self.lemmas.get(cur)
            if nxt is None or nxt == cur:
                return cur
            if nxt in index:
                return min(path[index[nxt]:])
            index[nxt] = len(path)
            path.append(nxt)
            cur = nxt

    def _clean(self, text: str) -> list[str]:
        s = text.lower()
        s = _MEASURE_RE.sub(f" {MEASURE_TAG} ", s)
        s = _UNIT_NUM_RE.sub(f" {MEASURE_TAG} ", s)
        s = _NUM_RE.sub(f" {NUM_TAG} ", s)
        out = []
        for tok in _TOKEN_RE.findall(s):
            if tok in RESERVED_TAGS:
                out.append(tok)
                continue
            lem = self.lemma(tok)
            if lem in self.stopwords:
                continue
            tag = self.pos_tags.get(lem)
            if tag is not None and tag not in self.keep_pos:
                continue
            out.append(lem)
        return out

    def normalize_text(self, title: str, abstract: str) -> tuple[str, ...]:
        """Normalized tokens, title first. Idempotent on its own output."""
        return tuple(self._clean(title) + self._clean(abstract))

    def process(self, record: PatentRecord, include_title: bool = True) -> ProcessedDoc:
        title = record.title if include_title else ""
        return ProcessedDoc(record.patent_id, self.normalize_text(title, record.abstract))


def default_normalizer() -> Normalizer:
    """Normalizer built from the data files bundled with the package."""
    from .assets import asset_path

    return Normalizer.from_files(
        asset_path("stopwords.txt"), asset_path("lemmas.tsv"), asset_path("pos_lexicon.tsv")
    )


FIRM_PANEL_COLUMNS = (
    "firm_id",
    "year",
    "country",
    "nace2",
    "employees",
    "age_years",
    "sales",
    "market_share",
    "labor_productivity",
    "capital_intensity",
    "roce",
    "ebit",
    "tfp",
    "granted_patent",
    "granted_true_green",
    "granted_high_novelty",
)

NUMERIC_PANEL_COLUMNS = (
    "employees",
    "age_years",
    "sales",
    "market_share",
    "labor_productivity",
    "capital_intensity",
    "roce",
    "ebit",
    "tfp",
)

FLAG_PANEL_COLUMNS = ("granted_patent", "granted_true_green", "granted_high_novelty")


def load_firm_panel(path: str | Path) -> pd.DataFrame:
    """Load a firm-year panel CSV into a typed DataFrame.

    Empty cells in numeric columns become NaN and the rows are retained
    (regressions drop them casewise); empty grant flags are False. Rows
    violating an invariant (duplicate firm-year, market_share outside
    [0, 1], negative employees or age) raise ValidationError with the
    offending line number.
    """
    path = Path(path)
    rows: list[dict] = []
    seen: set[tuple[str, int]] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = set(reader.fieldnames or ())
        missing = [c for c in FIRM_PANEL_COLUMNS if c not in header]
        if missing:
            raise ValidationError(f"{path}: missing columns: {', '.join(missing)}")
        for lineno, raw in enumerate(reader, start=2):
            out: dict = {}
            firm_id = (raw["firm_id"] or "").strip()
            if not firm_id:
                raise ValidationError(f"{path}:{lineno}: empty firm_id")
            try:
                year = int(raw["year"])
            except (TypeError, ValueError):
                raise ValidationError(f"{path}:{lineno}: bad year {raw['year']!r}") from None
            key = (firm_id, year)
            if key in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate firm-year {key}")
            seen.add(key)
            out["firm_id"] = firm_id
            out["year"] = year
            out["country"] = (raw["country"] or "").strip().upper()
            out["nace2"] = (raw["nace2"] or "").strip()
            if not out["country"] or not out["nace2"]:
                raise ValidationError(f"{path}:{lineno}: empty country or nace2")
            for col in NUMERIC_PANEL_COLUMNS:
                cell = (raw[col] or "").strip()
                if cell == "":
                    out[col] = float("nan")
                    continue
                try:
                    out[col] = float(cell)
                except ValueError:
                    raise ValidationError(
                        f"{path}:{lineno}: bad numeric value {cell!r} in {col}"
                    ) from None
            ms = out["market_share"]
            if ms == ms and not 0.0 <= ms <= 1.0:
                raise ValidationError(f"{path}:{lineno}: market_share {ms} outside [0, 1]")
            for col in ("employees", "age_years"):
                v = out[col]
                if v == v and v < 0:
                    raise ValidationError(f"{path}:{lineno}: negative {col}")
            for col in FLAG_PANEL_COLUMNS:
                try:
                    out[col] = _as_bool(raw[col], col)
                except ValueError:
                    raise ValidationError(
                        f"{path}:{lineno}: bad flag value {raw[col]!r} in {col}"
                    ) from None
            rows.append(out)

    frame = pd.DataFrame(rows, columns=list(FIRM_PANEL_COLUMNS))
    if len(frame) == 0:
        return frame
    frame["year"] = frame["year"].astype("int64")
    for col in NUMERIC_PANEL_COLUMNS:
        frame[col] = frame[col].astype("float64")
    for col in FLAG_PANEL_COLUMNS:
        frame[col] = frame[col].astype(bool)
    return frame
