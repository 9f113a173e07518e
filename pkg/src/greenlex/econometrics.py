"""Panel estimators for firm-level analysis.

Everything here is written against plain numpy arrays. The pieces:

* ``ols_fixed_effects``: OLS with one absorbed fixed-effect grouping via
  within-group demeaning (algebraically identical to including group
  dummies), heteroskedasticity-robust or cluster-robust (CR1) standard
  errors, and adjusted R-squared that counts the absorbed groups.
* ``logit_fit``: maximum-likelihood logit via iteratively reweighted least
  squares with explicit separation detection.
* ``propensity_design`` / ``match_nn`` / ``atet``: the propensity-score
  matching chain. Matching is greedy nearest-neighbor without replacement
  inside the common-support window, processing treated units in
  descending score order; every tie (processing order and raw distance)
  breaks on unit id so results are reproducible.
* ``premia_regressions`` / ``run_psm`` / ``subgroup_atet``: table-level
  drivers that isolate per-outcome failures instead of aborting.

Degrees-of-freedom conventions: with an absorbed grouping of G levels and
p regressors, both the CR1 small-sample factor and adjusted R-squared use
k = p + G estimated parameters. Reported p-values use a t distribution
with G_c - 1 degrees of freedom under clustering (G_c clusters) and
n - k otherwise.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .errors import EstimationError, SeparationError, ValidationError

# EU membership before/after the 2000s accession rounds, as ISO-2 codes
# ("EL" is the EU spelling for Greece).
OLD_EU_MEMBERS = frozenset(
    {"AT", "BE", "DK", "FI", "FR", "DE", "GR", "EL", "IE", "IT", "LU", "NL", "PT", "ES", "SE"}
)
NEW_EU_MEMBERS = frozenset(
    {"BG", "HR", "CY", "CZ", "EE", "HU", "LV", "LT", "MT", "PL", "RO", "SK", "SI"}
)

# Outcome -> transform for the premia and matching tables.
PREMIA_TRANSFORMS: dict[str, str] = {
    "sales": "log",
    "market_share": "level",
    "labor_productivity": "log",
    "capital_intensity": "log",
    "roce": "ihs",
    "ebit": "level",
    "tfp": "log",
}

PROPENSITY_COVARIATES = (
    "lag_log_capital",
    "d_log_capital",
    "lag_roce",
    "d_roce",
    "log_age",
)


def ihs(x):
    """Inverse hyperbolic sine, log(x + sqrt(x^2 + 1)); defined on all reals."""
    return np.arcsinh(x)


@dataclass
class Design:
    """Aligned outcome, regressors, and optional group/cluster labels."""

    y: np.ndarray
    x: np.ndarray
    columns: list[str]
    group_labels: np.ndarray | None = None
    cluster_labels: np.ndarray | None = None

    @classmethod
    def build(cls, y, x, columns, group_labels=None, cluster_labels=None) -> "Design":
        y = np.asarray(y, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2:
            raise ValidationError("x must be a 2-d matrix")
        n, p = x.shape
        if y.shape != (n,):
            raise ValidationError(f"y has {y.shape[0]} rows, x has {n}")
        if len(columns) != p:
            raise ValidationError(f"{len(columns)} column names for {p} columns")
        if n == 0:
            raise ValidationError("empty design")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
            raise ValidationError("design contains non-finite cells")
        groups = None if group_labels is None else np.asarray(group_labels, dtype=object)
        clusters = None if cluster_labels is None else np.asarray(cluster_labels, dtype=object)
        for name, arr in (("group_labels", groups), ("cluster_labels", clusters)):
            if arr is not None and arr.shape != (n,):
                raise ValidationError(f"{name} not aligned with rows")
        return cls(y, x, list(columns), groups, clusters)


@dataclass(frozen=True)
class OlsResult:
    columns: tuple[str, ...]
    coef: np.ndarray
    se: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    n_obs: int
    adj_r2: float
    n_groups: int
    n_clusters: int | None
    note: str | None = None


def _demean_by_group(values: np.ndarray, inverse: np.ndarray, n_groups: int) -> np.ndarray:
    counts = np.bincount(inverse, minlength=n_groups).astype(np.float64)
    if values.ndim == 1:
        means = np.bincount(inverse, weights=values, minlength=n_groups) / counts
        return values - means[inverse]
    out = np.empty_like(values)
    for j in range(values.shape[1]):
        means = np.bincount(inverse, weights=values[:, j], minlength=n_groups) / counts
        out[:, j] = values[:, j] - means[inverse]
    return out


def _check_rank(x: np.ndarray, columns: Sequence[str]) -> None:
    """Raise if x is column-rank deficient, naming the dependent columns."""
    from scipy.linalg import qr

    if x.shape[1] == 0:
        raise ValidationError("design has no regressors")
    _, r, pivot = qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    tol = max(x.shape) * np.finfo(np.float64).eps * scale
    rank = int(np.sum(diag > tol))
    if rank < x.shape[1]:
        dropped = sorted(columns[j] for j in pivot[rank:])
        raise EstimationError(
            "rank-deficient design after demeaning; collinear columns: " + ", ".join(dropped)
        )


def ols_fixed_effects(design: Design) -> OlsResult:
    """OLS with an optional absorbed fixed-effect grouping.

    With group labels, y and x are demeaned within groups before the fit,
    which reproduces the dummy-variable estimator exactly; adjusted
    R-squared is computed on the un-demeaned outcome and counts the
    absorbed groups among the estimated parameters. Cluster-robust (CR1)
    errors are used when cluster labels are present, HC1 otherwise.
    """
    y, x = design.y, design.x
    n, p = x.shape

    n_groups = 0
    if design.group_labels is not None:
        _, inverse = np.unique(design.group_labels, return_inverse=True)
        n_groups = int(inverse.max()) + 1
        y_t = _demean_by_group(y, inverse, n_groups)
        x_t = _demean_by_group(x, inverse, n_groups)
    else:
        y_t, x_t = y, x

    k_total = p + n_groups
    if n - k_total <= 0:
        raise EstimationError(
            f"{n} observations cannot identify {k_total} parameters (including absorbed groups)"
        )
    _check_rank(x_t, design.columns)

    coef, *_ = np.linalg.lstsq(x_t, y_t, rcond=None)
    resid = y_t - x_t @ coef
    bread = np.linalg.inv(x_t.T @ x_t)

    n_clusters: int | None = None
    if design.cluster_labels is not None:
        labels, inverse = np.unique(design.cluster_labels, return_inverse=True)
        n_clusters = len(labels)
        if n_clusters < 2:
            raise EstimationError("cluster-robust errors need at least 2 clusters")
        meat = np.zeros((p, p))
        for g in range(n_clusters):
            idx = inverse == g
            s = x_t[idx].T @ resid[idx]
            meat += np.outer(s, s)
        scale = (n_clusters / (n_clusters - 1)) * ((n - 1) / (n - k_total))
        df = n_clusters - 1
    else:
        meat = (x_t * resid[:, None] ** 2).T @ x_t
        scale = n / (n - k_total)
        df = n - k_total
    vcov = scale * bread @ meat @ bread

    se = np.sqrt(np.clip(np.diag(vcov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = np.where(se > 0, coef / se, np.nan)
    p_values = np.where(np.isnan(t_stats), np.nan, 2.0 * stats.t.sf(np.abs(t_stats), df))

    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    note = None
    if tss == 0.0:
        adj_r2 = float("nan")
        note = "degenerate: zero outcome variance"
    else:
        adj_r2 = 1.0 - (rss / (n - k_total)) / (tss / (n - 1))

    return OlsResult(
        columns=tuple(design.columns),
        coef=coef,
        se=se,
        t_stats=t_stats,
        p_values=p_values,
        n_obs=n,
        adj_r2=adj_r2,
        n_groups=n_groups,
        n_clusters=n_clusters,
        note=note,
    )


@dataclass(frozen=True)
class LogitResult:
    columns: tuple[str, ...]
    coef: np.ndarray
    fitted: np.ndarray
    n_iter: int
    converged: bool


def logit_fit(design: Design, max_iter: int = 100, score_tol: float = 1e-8) -> LogitResult:
    """Logit by iteratively reweighted least squares.

    Stops when the largest score component falls below 1e-8 or after 100
    iterations. A constant outcome or coefficients running away to
    infinity raise SeparationError; fixed effects are not absorbed here,
    enter them as dummy columns.
    """
    if design.group_labels is not None:
        raise ValidationError("logit does not absorb fixed effects; enter dummies in x")
    y, x = design.y, design.x
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValidationError("logit outcome must be 0/1")
    if y.min() == y.max():
        raise SeparationError("outcome is constant; the likelihood has no maximum")

    n, p = x.shape
    beta = np.zeros(p)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        with np.errstate(over="ignore"):
            prob = 1.0 / (1.0 + np.exp(-(x @ beta)))
        score = x.T @ (y - prob)
        if np.max(np.abs(score)) < score_tol:
            converged = True
            break
        w = prob * (1.0 - prob)
        info = (x * w[:, None]).T @ x
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise SeparationError(
                "singular information matrix; covariates are collinear or separate the outcome"
            ) from None
        beta = beta + step
        if np.max(np.abs(beta)) > 1e3:
            raise SeparationError(
                "coefficients diverging; the data are likely perfectly separable"
            )
    with np.errstate(over="ignore"):
        fitted = 1.0 / (1.0 + np.exp(-(x @ beta)))
    return LogitResult(tuple(design.columns), beta, fitted, it, converged)


@dataclass
class PropensityData:
    """Logit design plus the row-level unit bookkeeping for matching."""

    design: Design
    units: list[tuple[str, int]]  # (firm_id, year) per design row
    years: np.ndarray
    treated: np.ndarray
    n_dropped: int


def _lagged_covariates(df: pd.DataFrame) -> tuple[pd.DataFrame, np.ndarray]:
    """Covariate frame plus a usability mask, aligned to df's rows.

    df must be sorted by (firm_id, year). The mask is true where the firm
    has a row in the immediately preceding year and every covariate is
    finite.
    """
    grouped = df.groupby("firm_id", sort=False)
    prev_year = grouped["year"].shift(1)
    lag_capital = grouped["capital_intensity"].shift(1).to_numpy()
    lag_roce = grouped["roce"].shift(1).to_numpy()

    with np.errstate(divide="ignore", invalid="ignore"):
        cov = pd.DataFrame(
            {
                "lag_log_capital": np.log(lag_capital),
                "d_log_capital": np.log(df["capital_intensity"].to_numpy()) - np.log(lag_capital),
                "lag_roce": lag_roce,
                "d_roce": df["roce"].to_numpy() - lag_roce,
                "log_age": np.log(df["age_years"].to_numpy()),
            },
            index=df.index,
        )
    has_lag = (prev_year == df["year"] - 1).to_numpy()
    usable = has_lag & np.isfinite(cov.to_numpy()).all(axis=1)
    return cov, usable


def _assemble_logit_design(
    sub: pd.DataFrame, cov: pd.DataFrame, treated: np.ndarray
) -> PropensityData:
    blocks = [np.ones((len(sub), 1)), cov.to_numpy(dtype=np.float64)]
    columns = ["intercept", *PROPENSITY_COVARIATES]
    for fe in ("country", "nace2", "year"):
        dummies = pd.get_dummies(sub[fe].astype(str), prefix=fe, drop_first=True)
        dummies = dummies[sorted(dummies.columns)]
        if len(dummies.columns):
            blocks.append(dummies.to_numpy(dtype=np.float64))
            columns.extend(dummies.columns)
    x = np.hstack(blocks)

    if not treated.any():
        raise EstimationError("no treated units in the estimation sample")
    if treated.all():
        raise EstimationError("no control units in the estimation sample")

    design = Design.build(treated.astype(np.float64), x, columns)
    units = list(zip(sub["firm_id"].tolist(), sub["year"].tolist()))
    return PropensityData(design, units, sub["year"].to_numpy(), treated, 0)


def propensity_design(panel: pd.DataFrame, treatment: str = "granted_true_green") -> PropensityData:
    """Build the treatment logit design from a firm-year panel.

    Covariates: lagged log capital intensity, its year-on-year log change,
    lagged ROCE, its year-on-year change, log firm age, plus country,
    industry, and year dummy columns (first level dropped) and an
    intercept. Lags are strict one-year lags within firm; rows without a
    usable lag or with non-finite covariates are dropped and counted.
    """
    if treatment not in panel.columns:
        raise ValidationError(f"treatment column {treatment!r} not in panel")
    df = panel.sort_values(["firm_id", "year"]).reset_index(drop=True)
    cov, usable = _lagged_covariates(df)
    n_dropped = int(len(df) - usable.sum())
    if not usable.any():
        raise EstimationError("no rows with a usable one-year lag")
    sub = df.loc[usable].reset_index(drop=True)
    cov = cov.loc[usable].reset_index(drop=True)
    treated = sub[treatment].to_numpy(dtype=bool)
    data = _assemble_logit_design(sub, cov, treated)
    data.n_dropped = n_dropped
    return data


@dataclass(frozen=True)
class MatchedPair:
    treated_id: object
    control_id: object
    distance: float
    treated_score: float
    control_score: float


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[MatchedPair, ...]
    support: tuple[float, float]
    n_dropped_support: int
    n_unmatched_treated: int


def match_nn(
    scores: Sequence[float], treated: Sequence[bool], unit_ids: Sequence | None = None
) -> MatchResult:
    """Greedy 1-nearest-neighbor matching without replacement.

    Common support is [max of group minima, min of group maxima]; units
    outside are discarded and counted. Treated units are processed in
    descending score order (ties by unit id) and each takes the closest
    still-unmatched control by absolute score difference, distance ties
    going to the smaller unit id. Pairings are invariant to positive
    affine transforms of the scores.
    """
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.asarray(treated, dtype=bool)
    if scores.shape != mask.shape or scores.ndim != 1:
        raise ValidationError("scores and treated flags must be aligned 1-d arrays")
    if not np.all(np.isfinite(scores)):
        raise ValidationError("scores must be finite")
    ids = list(unit_ids) if unit_ids is not None else list(range(len(scores)))
    if len(ids) != len(scores):
        raise ValidationError("unit_ids not aligned with scores")
    if not mask.any() or mask.all():
        raise EstimationError("matching needs both treated and control units")

    t_scores = scores[mask]
    c_scores = scores[~mask]
    lo = max(t_scores.min(), c_scores.min())
    hi = min(t_scores.max(), c_scores.max())
    if lo > hi:
        raise EstimationError("empty common-support overlap")

    in_support = (scores >= lo) & (scores <= hi)
    n_dropped = int((~in_support).sum())

    treated_units = sorted(
        ((scores[i], ids[i]) for i in range(len(ids)) if mask[i] and in_support[i]),
        key=lambda u: (-u[0], u[1]),
    )
    # controls as a (score, id) list kept sorted; within equal scores ids
    # ascend, so the first element of an equal-score run has the least id
    controls = sorted((scores[i], ids[i]) for i in range(len(ids)) if not mask[i] and in_support[i])

    pairs: list[MatchedPair] = []
    unmatched = 0
    for t_score, t_id in treated_units:
        if not controls:
            unmatched += 1
            continue
        # candidates: the equal-score run just below and just at/above the
        # treated score; a run's first element carries its least unit id
        pos = bisect_left(controls, (t_score,))
        candidates = []
        if pos < len(controls):
            start = bisect_left(controls, (controls[pos][0],))
            candidates.append((controls[pos][0] - t_score, controls[start][1], start))
        if pos > 0:
            start = bisect_left(controls, (controls[pos - 1][0],))
            candidates.append((t_score - controls[pos - 1][0], controls[start][1], start))
        dist, _, idx = min(candidates, key=lambda c: (c[0], c[1]))
        c_score, c_id = controls.pop(idx)
        pairs.append(MatchedPair(t_id, c_id, dist, t_score, c_score))
    return MatchResult(tuple(pairs), (float(lo), float(hi)), n_dropped, unmatched)


@dataclass(frozen=True)
class PsmResult:
    atet: float
    se: float
    t_stat: float
    n_treated: int
    n_untreated: int
    n_pairs: int
    n_dropped_support: int
    matched_pairs: tuple[MatchedPair, ...]


def atet(
    pairs: Sequence[MatchedPair],
    outcomes: Mapping,
    n_treated: int,
    n_untreated: int,
    n_dropped_support: int = 0,
) -> PsmResult:
    """Average treated-minus-control outcome over matched pairs.

    se is the standard deviation of the pair differences over the square
    root of the pair count; needs at least two pairs.
    """
    if len(pairs) < 2:
        raise EstimationError("need at least 2 matched pairs")
    diffs = np.array([outcomes[p.treated_id] - outcomes[p.control_id] for p in pairs])
    if not np.all(np.isfinite(diffs)):
        raise ValidationError("pair outcomes must be present and finite")
    estimate = float(diffs.mean())
    se = float(diffs.std(ddof=1) / math.sqrt(len(diffs)))
    t_stat = estimate / se if se > 0 else float("nan")
    return PsmResult(
        atet=estimate,
        se=se,
        t_stat=t_stat,
        n_treated=n_treated,
        n_untreated=n_untreated,
        n_pairs=len(diffs),
        n_dropped_support=n_dropped_support,
        matched_pairs=tuple(pairs),
    )


@dataclass
class PsmOutcome:
    """Matching result for one outcome, or the reason it was skipped."""

    outcome: str
    transform: str
    result: PsmResult | None = None
    error: str | None = None


def _transform_outcome(values: np.ndarray, transform: str) -> np.ndarray:
    if transform == "log":
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(values)
    if transform == "ihs":
        return ihs(values)
    if transform == "level":
        return np.asarray(values, dtype=np.float64)
    raise ValidationError(f"unknown transform {transform!r}")


def _firm_level_any(panel: pd.DataFrame, mask: np.ndarray) -> pd.Series:
    """Per-firm flag: does any row of the firm satisfy mask."""
    return pd.Series(mask, index=panel.index).groupby(panel["firm_id"]).transform("any")


def run_psm(
    panel: pd.DataFrame,
    outcomes: Sequence[str] | None = None,
    treatment: str = "granted_true_green",
    control_pool: str = "patenting",
    treated_mask: np.ndarray | None = None,
    pool_mask: np.ndarray | None = None,
    transforms: Mapping[str, str] = PREMIA_TRANSFORMS,
) -> list[PsmOutcome]:
    """Propensity-score matching ATET for each outcome.

    Treated observations are firm-years with the treatment flag set. The
    default control pool is every firm-year of firms that patent at some
    point but are never treated ("patenting"); "all" admits never-treated
    non-patenting firms too. Explicit treated/pool row masks override
    both. For each outcome the full chain (logit, per-year matching, pair
    differences) reruns on the rows where that outcome is observed, so an
    outcome that fails reports an error without affecting the others.
    """
    if outcomes is None:
        outcomes = list(transforms)
    panel = panel.reset_index(drop=True)
    if treated_mask is None:
        if treatment not in panel.columns:
            raise ValidationError(f"treatment column {treatment!r} not in panel")
        treated_mask = panel[treatment].to_numpy(dtype=bool)
    else:
        treated_mask = np.asarray(treated_mask, dtype=bool)
    if pool_mask is None:
        ever_treated = _firm_level_any(panel, treated_mask).to_numpy()
        if control_pool == "patenting":
            ever_patents = _firm_level_any(
                panel, panel["granted_patent"].to_numpy(dtype=bool)
            ).to_numpy()
            pool_mask = ever_patents & ~ever_treated
        elif control_pool == "all":
            pool_mask = ~ever_treated
        else:
            raise ValidationError("control_pool must be 'patenting' or 'all'")
    else:
        pool_mask = np.asarray(pool_mask, dtype=bool)

    results: list[PsmOutcome] = []
    for outcome in outcomes:
        transform = transforms.get(outcome, "level")
        row = PsmOutcome(outcome=outcome, transform=transform)
        try:
            row.result = _psm_one_outcome(
                panel, outcome, transform, treated_mask, pool_mask
            )
        except (ValidationError, EstimationError, SeparationError) as exc:
            row.error = str(exc)
        results.append(row)
    return results


def _psm_one_outcome(
    panel: pd.DataFrame,
    outcome: str,
    transform: str,
    treated_mask: np.ndarray,
    pool_mask: np.ndarray,
) -> PsmResult:
    if outcome not in panel.columns:
        raise ValidationError(f"outcome column {outcome!r} not in panel")
    # lag covariates are computed on the full sorted panel so that a row
    # whose neighbor lacks this outcome still keeps its one-year lag
    df = panel.copy()
    df["__treated"] = treated_mask
    df["__pool"] = pool_mask & ~treated_mask
    df = df.sort_values(["firm_id", "year"]).reset_index(drop=True)
    cov, usable = _lagged_covariates(df)

    y_all = _transform_outcome(df[outcome].to_numpy(dtype=np.float64), transform)
    observed = np.isfinite(y_all)
    keep = usable & observed & (df["__treated"].to_numpy() | df["__pool"].to_numpy())
    if not keep.any():
        raise EstimationError("no usable rows for this outcome")

    sub = df.loc[keep].reset_index(drop=True)
    data = _assemble_logit_design(
        sub, cov.loc[keep].reset_index(drop=True), sub["__treated"].to_numpy(dtype=bool)
    )
    data.n_dropped = int(len(df) - keep.sum())
    fit = logit_fit(data.design)

    outcome_by_unit = dict(zip(data.units, y_all[keep]))

    all_pairs: list[MatchedPair] = []
    n_dropped_support = 0
    for year in np.unique(data.years):
        idx = data.years == year
        t_year = data.treated[idx]
        if not t_year.any() or t_year.all():
            continue
        ids = [data.units[i] for i in np.flatnonzero(idx)]
        try:
            matched = match_nn(fit.fitted[idx], t_year, ids)
        except EstimationError:
            continue
        all_pairs.extend(matched.pairs)
        n_dropped_support += matched.n_dropped_support

    return atet(
        all_pairs,
        outcome_by_unit,
        n_treated=int(data.treated.sum()),
        n_untreated=int((~data.treated).sum()),
        n_dropped_support=n_dropped_support,
    )


PREMIA_COLUMNS = ("true_green_firm", "patenting_firm", "log_employees")


@dataclass
class OutcomeRegression:
    """Fixed-effects fit for one outcome, or the reason it failed."""

    outcome: str
    transform: str
    result: OlsResult | None = None
    error: str | None = None


def premia_regressions(
    panel: pd.DataFrame,
    outcomes: Sequence[str] | None = None,
    transforms: Mapping[str, str] = PREMIA_TRANSFORMS,
    treatment: str = "granted_true_green",
) -> list[OutcomeRegression]:
    """Outcome-on-status regressions across the firm panel.

    Each outcome (transformed per ``transforms``) is regressed on two
    time-invariant firm flags, ever granted a matched-green patent and
    ever granted any patent, plus log(1 + employees) as a size control,
    country and year dummies, and absorbed industry fixed effects, with
    standard errors clustered by firm. Rows missing the outcome or the
    size control are dropped casewise; a failing outcome is reported in
    place without stopping the rest.
    """
    panel = panel.reset_index(drop=True)
    if treatment not in panel.columns:
        raise ValidationError(f"treatment column {treatment!r} not in panel")
    tg_firm = _firm_level_any(panel, panel[treatment].to_numpy(dtype=bool)).to_numpy()
    pat_firm = _firm_level_any(
        panel, panel["granted_patent"].to_numpy(dtype=bool)
    ).to_numpy()

    results: list[OutcomeRegression] = []
    for outcome in outcomes if outcomes is not None else list(transforms):
        transform = transforms.get(outcome, "level")
        row = OutcomeRegression(outcome=outcome, transform=transform)
        try:
            row.result = _premia_one_outcome(panel, outcome, transform, tg_firm, pat_firm)
        except (ValidationError, EstimationError) as exc:
            row.error = str(exc)
        results.append(row)
    return results


def _premia_one_outcome(
    panel: pd.DataFrame,
    outcome: str,
    transform: str,
    tg_firm: np.ndarray,
    pat_firm: np.ndarray,
) -> OlsResult:
    if outcome not in panel.columns:
        raise ValidationError(f"outcome column {outcome!r} not in panel")
    y = _transform_outcome(panel[outcome].to_numpy(dtype=np.float64), transform)
    with np.errstate(invalid="ignore"):
        size = np.log1p(panel["employees"].to_numpy(dtype=np.float64))
    keep = np.isfinite(y) & np.isfinite(size)
    if not keep.any():
        raise EstimationError("no usable rows for this outcome")

    sub = panel.loc[keep].reset_index(drop=True)
    blocks = [np.column_stack([tg_firm[keep], pat_firm[keep], size[keep]])]
    columns = list(PREMIA_COLUMNS)
    for fe in ("country", "year"):
        dummies = pd.get_dummies(sub[fe].astype(str), prefix=fe, drop_first=True)
        dummies = dummies[sorted(dummies.columns)]
        if len(dummies.columns):
            blocks.append(dummies.to_numpy(dtype=np.float64))
            columns.extend(dummies.columns)
    design = Design.build(
        y[keep],
        np.hstack(blocks),
        columns,
        group_labels=sub["nace2"].astype(str).to_numpy(),
        cluster_labels=sub["firm_id"].to_numpy(),
    )
    return ols_fixed_effects(design)


@dataclass
class SubgroupResult:
    split: str
    subgroup: str
    outcomes: list[PsmOutcome] = field(default_factory=list)
    skipped: str | None = None


def subgroup_atet(
    panel: pd.DataFrame,
    split: str,
    outcomes: Sequence[str] | None = None,
    control_pool: str = "patenting",
    transforms: Mapping[str, str] = PREMIA_TRANSFORMS,
    treatment: str = "granted_true_green",
) -> list[SubgroupResult]:
    """Matching ATETs within subgroups of the panel.

    Splits: "size_median" partitions firms by whether their average
    employee count is at or below the median of firm averages;
    "eu_accession" partitions by pre-2004 versus accession-round EU
    membership of the firm's country; "novelty" instead redefines
    treatment as a matched-green grant that is also high-novelty and
    draws controls from high-novelty grants of never-treated firms. A
    subgroup with no treated units is reported as skipped.
    """
    panel = panel.reset_index(drop=True)

    if split == "novelty":
        if "granted_high_novelty" not in panel.columns:
            raise ValidationError("panel lacks granted_high_novelty")
        treated = panel[treatment].to_numpy(dtype=bool) & panel[
            "granted_high_novelty"
        ].to_numpy(dtype=bool)
        if not treated.any():
            return [SubgroupResult(split, "high_novelty", [], "no treated units in subgroup")]
        ever_treated = _firm_level_any(panel, treated).to_numpy()
        pool = panel["granted_high_novelty"].to_numpy(dtype=bool) & ~ever_treated
        rows = run_psm(
            panel,
            outcomes=outcomes,
            treated_mask=treated,
            pool_mask=pool,
            transforms=transforms,
        )
        return [SubgroupResult(split, "high_novelty", rows)]

    if split == "size_median":
        firm_size = panel.groupby("firm_id")["employees"].mean().dropna()
        if firm_size.empty:
            raise ValidationError("no employee data for the size split")
        median = float(np.median(firm_size.to_numpy()))
        small = set(firm_size.index[firm_size.to_numpy() <= median])
        large = set(firm_size.index) - small
        groups = [
            ("small", panel["firm_id"].isin(small).to_numpy()),
            ("large", panel["firm_id"].isin(large).to_numpy()),
        ]
    elif split == "eu_accession":
        country = panel["country"].astype(str).str.upper()
        groups = [
            ("old_members", country.isin(OLD_EU_MEMBERS).to_numpy()),
            ("new_members", country.isin(NEW_EU_MEMBERS).to_numpy()),
        ]
    else:
        raise ValidationError(
            "split must be one of 'size_median', 'eu_accession', 'novelty'"
        )

    results = []
    for name, mask in groups:
        sub = panel.loc[mask].reset_index(drop=True)
        if sub.empty or not sub[treatment].to_numpy(dtype=bool).any():
            results.append(SubgroupResult(split, name, [], "no treated units in subgroup"))
            continue
        rows = run_psm(
            sub,
            outcomes=outcomes,
            treatment=treatment,
            control_pool=control_pool,
            transforms=transforms,
        )
        results.append(SubgroupResult(split, name, rows))
    return results
