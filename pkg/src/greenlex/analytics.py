"""Descriptive analytics over a classified patent corpus.

Inputs are (PatentRecord, true_green) pairs. A patent with codes in
several technology classes counts once in each class at the chosen prefix
level, so class tallies are deliberately not additive to the corpus size.

The specialization index for class c compares its green share against all
other classes pooled: (G_c / N_c) / (sum of other G / sum of other N),
where G counts true-green patents and N counts the remaining patents of
the class. Cells where that ratio is undefined (no non-green patents in
the class, or no green patents elsewhere) are reported as missing, never
as infinity or zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import PatentRecord
from .econometrics import Design
from .errors import ValidationError

CLASS_LEVELS = (1, 3)


@dataclass(frozen=True)
class ClassCounts:
    class_code: str
    n_total: int
    n_green: int
    n_true_green: int


@dataclass(frozen=True)
class RcaRow:
    class_code: str
    rca: float | None


@dataclass(frozen=True)
class ShareRow:
    year: int
    n_total: int
    n_green: int
    n_true_green: int
    share_green: float
    share_true_green: float


def class_counts(
    flagged: Iterable[tuple[PatentRecord, bool]], level: int = 3
) -> list[ClassCounts]:
    """Tally patents per class prefix; multi-class patents count once per class."""
    if level not in CLASS_LEVELS:
        raise ValidationError(f"level must be one of {CLASS_LEVELS}")
    totals: dict[str, list[int]] = {}
    for record, true_green in flagged:
        classes = {code[:level] for code in record.cpc_codes if code}
        for cls in classes:
            cell = totals.setdefault(cls, [0, 0, 0])
            cell[0] += 1
            if record.baseline_green:
                cell[1] += 1
            if true_green:
                cell[2] += 1
    return [
        ClassCounts(cls, cell[0], cell[1], cell[2]) for cls, cell in sorted(totals.items())
    ]


def rca_index(counts: Sequence[ClassCounts], basis: str = "true_green") -> list[RcaRow]:
    """Revealed-advantage index per class against all other classes pooled.

    basis selects which flag counts as green ("true_green" or "green").
    Requires at least two classes; undefined cells are None.
    """
    if basis not in ("true_green", "green"):
        raise ValidationError(f"unknown rca basis: {basis!r}")
    if len(counts) < 2:
        raise ValidationError("specialization index needs at least two classes")
    greens = [c.n_true_green if basis == "true_green" else c.n_green for c in counts]
    others = [c.n_total - g for c, g in zip(counts, greens)]
    if any(o < 0 for o in others):
        raise ValidationError("green count exceeds total count in a class")
    total_g = sum(greens)
    total_n = sum(others)
    rows: list[RcaRow] = []
    for c, g, n in zip(counts, greens, others):
        rest_g = total_g - g
        rest_n = total_n - n
        if n == 0 or rest_g == 0 or rest_n == 0:
            rows.append(RcaRow(c.class_code, None))
            continue
        rows.append(RcaRow(c.class_code, (g / n) / (rest_g / rest_n)))
    return rows


def share_over_time(
    flagged: Iterable[tuple[PatentRecord, bool]], by: str = "grant_year"
) -> list[ShareRow]:
    """Yearly green and true-green shares; patents missing the year are skipped."""
    if by not in ("grant_year", "priority_year"):
        raise ValidationError(f"unknown year basis: {by!r}")
    per_year: dict[int, list[int]] = {}
    for record, true_green in flagged:
        year = getattr(record, by)
        if year is None:
            continue
        cell = per_year.setdefault(year, [0, 0, 0])
        cell[0] += 1
        if record.baseline_green:
            cell[1] += 1
        if true_green:
            cell[2] += 1
    return [
        ShareRow(year, n, g, t, g / n, t / n)
        for year, (n, g, t) in sorted(per_year.items())
    ]


CITATION_COLUMNS = ("true_green", "age", "family_size")


def citation_design(
    flagged: Iterable[tuple[PatentRecord, bool]], class_level: int = 3
) -> tuple[Design, int]:
    """Design for the citation regression; returns (design, n_dropped).

    Outcome is log(citations + 1). Regressors: the true-green dummy, patent
    age (grant year minus priority year, which varies within the absorbed
    cells), and family size. Fixed effects absorb primary class x priority
    year; standard errors cluster on the patent family. Patents missing
    either year or carrying no classification code are dropped and counted.
    """
    y: list[float] = []
    x: list[list[float]] = []
    groups: list[str] = []
    clusters: list[str] = []
    dropped = 0
    for record, true_green in flagged:
        if record.priority_year is None or record.grant_year is None or not record.cpc_codes:
            dropped += 1
            continue
        primary = record.cpc_codes[0][:class_level]
        y.append(math.log(record.citation_count + 1.0))
        x.append(
            [
                1.0 if true_green else 0.0,
                float(record.grant_year - record.priority_year),
                float(record.family_size),
            ]
        )
        groups.append(f"{primary}x{record.priority_year}")
        clusters.append(record.family_id)
    design = Design.build(
        y=y, x=x, columns=list(CITATION_COLUMNS), group_labels=groups, cluster_labels=clusters
    )
    return design, dropped
