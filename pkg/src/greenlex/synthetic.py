"""Synthetic data generators for tests, benchmarks, and the demo fixtures.

Two families: small text corpora (token documents and full patent
records) and firm-year panels with a known treatment effect baked in.
Everything is driven by numpy Generators seeded explicitly, so a given
(seed, size) pair always reproduces the same data.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from .corpus import FIRM_PANEL_COLUMNS, PatentRecord, ProcessedDoc

# Filler vocabulary for synthetic patent text. Deliberately plain words
# that survive normalization as nouns or verbs.
GENERIC_WORDS = (
    "device", "system", "method", "apparatus", "process", "material", "layer",
    "surface", "component", "module", "unit", "assembly", "structure", "element",
    "signal", "circuit", "sensor", "controller", "housing", "membrane", "valve",
    "pump", "motor", "shaft", "gear", "frame", "panel", "coating", "substrate",
    "mixture", "compound", "polymer", "resin", "alloy", "fluid", "vapor",
    "pressure", "temperature", "voltage", "current", "frequency", "output",
    "input", "chamber", "reactor", "filter", "duct", "nozzle", "bearing",
    "fastener", "conduit", "pipeline", "network", "interface", "memory",
    "processor", "algorithm", "configuration", "measurement", "detection",
)

# Short green phrases that overlap the packaged dictionary, used to plant
# positives in synthetic corpora.
GREEN_PHRASES = (
    "solar energy",
    "wind turbine",
    "anaerobic digestion",
    "carbon capture",
    "renewable energy",
    "electric vehicle",
    "fuel cell",
    "geothermal energy",
    "biomass",
    "photovoltaic cell",
)

CPC_CODES = (
    "Y02E 10/50", "Y02E 10/70", "Y02T 10/60", "H01L 31/00", "H01M 8/10",
    "F03D 1/00", "C02F 3/28", "B60L 50/50", "F24T 10/00", "G06F 17/00",
    "A61K 38/00", "B29C 45/00",
)


def make_token_docs(
    n_docs: int, vocab_size: int, doc_len: int = 30, seed: int = 0
) -> list[ProcessedDoc]:
    """Documents of iid tokens w000..w{V-1} with a Zipf-like skew."""
    rng = np.random.default_rng(seed)
    words = np.array([f"w{i:03d}" for i in range(vocab_size)])
    weights = 1.0 / np.arange(1, vocab_size + 1)
    weights /= weights.sum()
    docs = []
    for i in range(n_docs):
        ids = rng.choice(vocab_size, size=doc_len, p=weights)
        docs.append(ProcessedDoc(patent_id=f"D{i:05d}", tokens=tuple(words[ids])))
    return docs


def make_patent_records(
    n: int,
    seed: int = 0,
    green_fraction: float = 0.3,
    year_range: tuple[int, int] = (1960, 2015),
    cpc_pool: tuple[str, ...] | None = None,
) -> list[PatentRecord]:
    """Synthetic patent records with plantable green phrases.

    About ``green_fraction`` of the records get one green phrase inserted
    into the abstract; those records are flagged baseline-green most of
    the time, the rest occasionally, so matched and baseline labels
    disagree in both directions. ``cpc_pool`` restricts the codes drawn,
    which keeps class-by-year cells populated in small corpora.
    """
    rng = np.random.default_rng(seed)
    pool = np.array(cpc_pool if cpc_pool is not None else CPC_CODES)
    records = []
    lo, hi = year_range
    for i in range(n):
        title_words = rng.choice(GENERIC_WORDS, size=rng.integers(4, 8))
        abstract_words = list(rng.choice(GENERIC_WORDS, size=rng.integers(20, 35)))
        has_green = rng.random() < green_fraction
        if has_green:
            phrase = GREEN_PHRASES[rng.integers(0, len(GREEN_PHRASES))]
            pos = int(rng.integers(0, len(abstract_words)))
            abstract_words[pos:pos] = phrase.split()
        priority_year = int(rng.integers(lo, hi + 1))
        grant_year = priority_year + int(rng.integers(2, 7))
        n_codes = int(rng.integers(1, min(4, len(pool) + 1)))
        codes = tuple(rng.choice(pool, size=n_codes, replace=False))
        baseline = bool(rng.random() < (0.8 if has_green else 0.15))
        records.append(
            PatentRecord(
                patent_id=f"P{i:06d}",
                family_id=f"F{rng.integers(0, max(2, n // 2)):06d}",
                title=" ".join(title_words),
                abstract=" ".join(abstract_words),
                cpc_codes=codes,
                priority_year=priority_year,
                grant_year=grant_year,
                citation_count=int(rng.poisson(3.0)),
                family_size=int(rng.integers(1, 6)),
                baseline_green=baseline,
            )
        )
    return records


def make_firm_panel(
    n_firms: int = 800,
    years: tuple[int, int] = (2012, 2019),
    seed: int = 0,
    tau: float = 0.5,
    treat_intercept: float = -3.6,
    missing_rate: float = 0.0,
) -> pd.DataFrame:
    """Firm-year panel with a known log-sales treatment effect ``tau``.

    Treatment (a matched-green grant) is assigned each year by a logit on
    lagged log capital intensity, its change, lagged ROCE, its change,
    and log age, with country and year shifts; log sales is linear in the
    same covariates plus country, industry, and year effects, ``tau``
    times the treatment flag, and N(0, 0.5) noise. Matching on a
    correctly specified propensity score therefore recovers ``tau``.
    Other outcome columns are filled with simple covariate-driven values
    so the full table code has something to run on.
    """
    rng = np.random.default_rng(seed)
    y0, y1 = years
    n_years = y1 - y0 + 1
    countries = np.array(["DE", "FR", "PL", "ES"])
    industries = np.array(["10", "20", "26", "35", "62"])

    firm_country = rng.choice(len(countries), size=n_firms)
    firm_industry = rng.choice(len(industries), size=n_firms)
    firm_birth = y0 - rng.integers(3, 40, size=n_firms)
    firm_mu_k = rng.normal(1.0, 0.5, size=n_firms)
    firm_roce_shift = rng.normal(0.0, 0.03, size=n_firms)
    firm_log_emp = rng.normal(3.0, 1.0, size=n_firms)
    country_fx = rng.normal(0.0, 0.2, size=len(countries))
    industry_fx = rng.normal(0.0, 0.2, size=len(industries))
    year_fx = rng.normal(0.0, 0.1, size=n_years)

    # AR(1) log capital intensity around the firm mean
    log_k = np.empty((n_firms, n_years))
    log_k[:, 0] = firm_mu_k + rng.normal(0.0, 0.4, size=n_firms)
    for t in range(1, n_years):
        log_k[:, t] = (
            firm_mu_k + 0.8 * (log_k[:, t - 1] - firm_mu_k) + rng.normal(0.0, 0.3, size=n_firms)
        )
    roce = 0.10 + firm_roce_shift[:, None] + rng.normal(0.0, 0.04, size=(n_firms, n_years))

    rows = []
    treated_flags = np.zeros((n_firms, n_years), dtype=bool)
    for t in range(1, n_years):
        d_log_k = log_k[:, t] - log_k[:, t - 1]
        d_roce = roce[:, t] - roce[:, t - 1]
        log_age = np.log((y0 + t) - firm_birth)
        eta = (
            treat_intercept
            + 0.6 * log_k[:, t - 1]
            + 0.4 * d_log_k
            + 2.0 * roce[:, t - 1]
            + 1.0 * d_roce
            + 0.1 * log_age
            + 0.3 * country_fx[firm_country]
        )
        prob = 1.0 / (1.0 + np.exp(-eta))
        treated_flags[:, t] = rng.random(n_firms) < prob

    for i in range(n_firms):
        for t in range(n_years):
            year = y0 + t
            age = year - firm_birth[i]
            lag_k = log_k[i, t - 1] if t > 0 else log_k[i, 0]
            d_k = log_k[i, t] - lag_k
            lag_r = roce[i, t - 1] if t > 0 else roce[i, t]
            d_r = roce[i, t] - lag_r
            treated = treated_flags[i, t]
            log_sales = (
                2.0
                + 0.30 * lag_k
                + 0.20 * d_k
                + 1.5 * lag_r
                + 0.8 * d_r
                + 0.25 * np.log(age)
                + country_fx[firm_country[i]]
                + industry_fx[firm_industry[i]]
                + year_fx[t]
                + tau * treated
                + rng.normal(0.0, 0.5)
            )
            employees = float(np.exp(firm_log_emp[i] + rng.normal(0.0, 0.1)))
            sales = float(np.exp(log_sales))
            patenting = bool(treated or rng.random() < 0.25)
            high_nov = bool(treated and rng.random() < 0.5) or bool(
                patenting and not treated and rng.random() < 0.1
            )
            rows.append(
                {
                    "firm_id": f"f{i:05d}",
                    "year": year,
                    "country": countries[firm_country[i]],
                    "nace2": industries[firm_industry[i]],
                    "employees": employees,
                    "age_years": float(age),
                    "sales": sales,
                    "market_share": float(np.clip(rng.beta(1.2, 60.0), 0.0, 1.0)),
                    "labor_productivity": sales / employees,
                    "capital_intensity": float(np.exp(log_k[i, t])),
                    "roce": float(roce[i, t]),
                    "ebit": float(sales * (roce[i, t] + rng.normal(0.0, 0.02))),
                    "tfp": float(np.exp(0.5 + 0.2 * lag_k + rng.normal(0.0, 0.3))),
                    "granted_patent": patenting,
                    "granted_true_green": bool(treated),
                    "granted_high_novelty": high_nov,
                }
            )
    panel = pd.DataFrame(rows, columns=list(FIRM_PANEL_COLUMNS))
    if missing_rate > 0.0:
        for col in ("roce", "tfp", "ebit"):
            mask = rng.random(len(panel)) < missing_rate
            panel.loc[mask, col] = np.nan
    return panel
