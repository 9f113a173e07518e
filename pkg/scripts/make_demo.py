"""Regenerate the packaged demo fixtures.

Run from the repository root:

    python3 scripts/make_demo.py

Output is deterministic; regenerating without changing the parameters
below leaves the files byte-identical.
"""

from pathlib import Path

from greenlex import synthetic
from greenlex.corpus import save_patents

DEMO_DIR = Path(__file__).resolve().parents[1] / "src" / "greenlex" / "data" / "demo"

# five CPC codes with distinct 3-character prefixes so class-by-year
# cells stay populated in a 240-patent corpus
CPC_POOL = ("Y02E 10/50", "H01L 31/00", "F03D 1/00", "C02F 3/28", "B60L 50/50")

CONFIG = """\
# Demo pipeline configuration. Paths are relative to this file.
seed = 42

[paths]
corpus = "patents.jsonl"
firm_panel = "firm_panel.csv"

[embedding]
d = 32
context = 2
min_count = 2
epochs = 3
learning_rate = 0.05

# Expansion runs as its own stage; classification sticks to the shipped
# rules because a 32-dim model trained on 240 tiny documents produces
# neighbors too noisy to gate classification on.
[dictionary]
use_expansion = false
neighbors = 5

[novelty]
cutoff_year = 1980

[analytics]
class_level = 3
year_basis = "grant_year"

[psm]
control_pool = "patenting"
outcomes = ["sales", "labor_productivity", "roce", "market_share"]
splits = ["eu_accession"]
"""


def main() -> None:
    DEMO_DIR.mkdir(parents=True, exist_ok=True)
    records = synthetic.make_patent_records(
        240, seed=7, green_fraction=0.35, year_range=(1972, 1991), cpc_pool=CPC_POOL
    )
    save_patents(records, DEMO_DIR / "patents.jsonl")
    panel = synthetic.make_firm_panel(
        n_firms=150, years=(2013, 2019), seed=11, tau=0.5,
        treat_intercept=-3.3, missing_rate=0.02,
    )
    panel.to_csv(DEMO_DIR / "firm_panel.csv", index=False)
    (DEMO_DIR / "config.toml").write_text(CONFIG, encoding="utf-8")
    print(f"wrote fixtures to {DEMO_DIR}")


if __name__ == "__main__":
    main()
