"""Command-line pipeline driver.

Subcommands cover the full flow: ingest and validate a patent corpus,
train or tune the embedding, expand the seed vocabulary, classify
matched-green patents, score novelty, build descriptive stats, and run
the citation, premia, and matching estimators on a firm panel. ``demo``
chains the stages end-to-end on the packaged fixture data.

Configuration is a TOML file (``--config``); command-line flags override
config values. Every run writes a ``<command>_manifest.json`` naming the
tool version, the config hash, and a SHA-256 per input and output file,
so a run can be audited without timestamps or machine-specific paths.

Exit codes: 0 success, 2 validation error, 3 runtime error. Errors are
emitted as a single JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import __version__, analytics, econometrics, novelty
from .assets import asset_path
from .corpus import Normalizer, default_normalizer, load_firm_panel, load_patents, save_patents
from .dictionary import (
    DictRule,
    GreenDictionary,
    Provenance,
    classify_true_green,
    compile_dictionary,
    expand_seeds,
    load_exclusions,
    load_seeds,
    match_document,
    rule_line,
)
from .embedding import (
    TrainConfig,
    TuneResult,
    load_gold_pairs,
    load_model,
    save_model,
    train_cbow,
    tune_hyperparams,
)
from .errors import GreenlexError, ValidationError

# fixed stage ids so per-stage seeds are stable across releases
STAGE_IDS = {
    "ingest": 0, "train": 1, "tune": 2, "expand": 3, "classify": 4,
    "novelty": 5, "stats": 6, "cite-reg": 7, "premia": 8, "psm": 9, "demo": 10,
}

DEFAULTS = {
    "seed": 1,
    "embedding": {
        "d": 450, "context": 2, "min_count": 40, "epochs": 5,
        "learning_rate": 0.025, "loss": "full_softmax", "negative_k": 5,
    },
    "tune": {"contexts": [2], "min_counts": [40], "dims": [450]},
    "dictionary": {"neighbors": 15, "use_expansion": False},
    "novelty": {
        "cutoff_year": 1980, "rule": "top_quantile", "q": 0.25,
        "min_pairs": 1, "per_year": False,
    },
    "analytics": {"class_level": 3, "year_basis": "grant_year"},
    "psm": {"control_pool": "patenting", "outcomes": list(econometrics.PREMIA_TRANSFORMS), "splits": []},
}


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    """Cell formatting: None -> empty, floats via repr for stable bytes."""
    if value is None:
        return ""
    if isinstance(value, float):
        if value != value:
            return "nan"
        return repr(value)
    return str(value)


class RunContext:
    """Resolved config plus manifest bookkeeping for one subcommand."""

    def __init__(self, command: str, config: dict, config_text: str, out_dir: Path):
        self.command = command
        self.config = config
        self.config_text = config_text
        self.out_dir = out_dir
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    @property
    def seed(self) -> int:
        return int(self.config.get("seed", DEFAULTS["seed"]))

    def stage_seed(self, stage: str) -> int:
        ss = np.random.SeedSequence([self.seed, STAGE_IDS[stage]])
        return int(ss.generate_state(1)[0])

    def section(self, name: str) -> dict:
        merged = dict(DEFAULTS.get(name, {}))
        merged.update(self.config.get(name, {}))
        return merged

    def input_path(self, key: str, flag_value=None, default: Path | None = None) -> Path:
        """Resolve a required input path: flag > config [paths] > default."""
        raw = flag_value or self.config.get("paths", {}).get(key)
        path = Path(raw) if raw else default
        if path is None:
            raise ValidationError(f"no {key!r} path configured")
        if not path.exists():
            raise ValidationError(f"{key} file not found: {path}")
        self.inputs[path.name] = _sha256(path)
        return path

    def out(self, name: str) -> Path:
        return self.out_dir / name

    def record_output(self, path: Path) -> None:
        self.outputs[path.name] = _sha256(path)

    def write_manifest(self) -> Path:
        manifest = {
            "tool": "greenlex",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "config_sha256": hashlib.sha256(self.config_text.encode("utf-8")).hexdigest(),
            "inputs": self.inputs,
            "outputs": self.outputs,
        }
        path = self.out(f"{self.command.replace('-', '_')}_manifest.json")
        _write_json(path, manifest)
        return path


def _normalizer_from(ctx: RunContext, args) -> Normalizer:
    paths = ctx.config.get("paths", {})
    if any(k in paths for k in ("stopwords", "lemmas", "pos_tags")):
        return Normalizer.from_files(
            ctx.input_path("stopwords", default=asset_path("stopwords.txt")),
            ctx.input_path("lemmas", default=asset_path("lemmas.tsv")),
            ctx.input_path("pos_tags", default=asset_path("pos_lexicon.tsv")),
        )
    return default_normalizer()


def _load_corpus(ctx: RunContext, args) -> list:
    path = ctx.input_path("corpus", getattr(args, "corpus", None))
    return load_patents(path)


def _train_config(ctx: RunContext, args, stage: str = "train") -> TrainConfig:
    emb = ctx.section("embedding")
    return TrainConfig(
        d=int(emb["d"]),
        context=int(emb["context"]),
        min_count=int(emb["min_count"]),
        epochs=int(emb["epochs"]),
        learning_rate=float(emb["learning_rate"]),
        loss=str(emb["loss"]),
        negative_k=int(emb["negative_k"]),
        seed=ctx.stage_seed(stage),
        workers=int(args.workers),
    )


# ---------------------------------------------------------------- commands


def cmd_ingest(ctx: RunContext, args) -> None:
    records = _load_corpus(ctx, args)
    out = ctx.out("corpus.jsonl")
    save_patents(records, out)
    ctx.record_output(out)
    summary = ctx.out("ingest_summary.json")
    _write_json(summary, {"n_records": len(records)})
    ctx.record_output(summary)


def cmd_train(ctx: RunContext, args) -> None:
    records = _load_corpus(ctx, args)
    norm = _normalizer_from(ctx, args)
    docs = [norm.process(r) for r in records]
    model = train_cbow(docs, _train_config(ctx, args))
    out = ctx.out("model.bin")
    save_model(model, out)
    ctx.record_output(out)
    log = ctx.out("train_log.json")
    _write_json(
        log,
        {
            "vocab_size": len(model.vocab),
            "epoch_mean_loss": [float(x) for x in model.epoch_losses],
        },
    )
    ctx.record_output(log)


def cmd_tune(ctx: RunContext, args) -> None:
    records = _load_corpus(ctx, args)
    norm = _normalizer_from(ctx, args)
    docs = [norm.process(r) for r in records]
    gold = load_gold_pairs(ctx.input_path("gold_pairs"))
    grid = ctx.section("tune")
    base = _train_config(ctx, args, stage="tune")
    result: TuneResult = tune_hyperparams(
        docs,
        gold,
        contexts=[int(c) for c in grid["contexts"]],
        min_counts=[int(m) for m in grid["min_counts"]],
        dims=[int(d) for d in grid["dims"]],
        base_config=base,
    )
    out = ctx.out("tune_grid.csv")
    _write_csv(
        out,
        ["context", "min_count", "d", "pearson_r", "coverage"],
        [[r.context, r.min_count, r.d, _fmt(r.pearson_r), _fmt(r.coverage)] for r in result.rows],
    )
    ctx.record_output(out)
    best = ctx.out("tune_best.json")
    _write_json(
        best,
        None
        if result.best is None
        else {
            "context": result.best.context,
            "min_count": result.best.min_count,
            "d": result.best.d,
            "pearson_r": result.best.pearson_r,
            "coverage": result.best.coverage,
        },
    )
    ctx.record_output(best)


def cmd_expand(ctx: RunContext, args) -> None:
    model = load_model(ctx.input_path("model", getattr(args, "model", None)))
    norm = _normalizer_from(ctx, args)
    seeds = load_seeds(ctx.input_path("seeds", default=asset_path("seeds.txt")))
    exclusions = load_exclusions(ctx.input_path("exclusions", default=asset_path("exclusions.txt")))
    k = int(ctx.section("dictionary")["neighbors"])
    dictionary, skipped = expand_seeds(model, seeds, k=k, exclusions=exclusions, normalizer=norm)
    # rules file stays loadable as-is; provenance goes to a side report
    out = ctx.out("expanded_rules.tsv")
    with open(out, "w", encoding="utf-8") as fh:
        for rule in dictionary.rules:
            fh.write(rule_line(rule) + "\n")
    ctx.record_output(out)
    report = ctx.out("expansion_report.tsv")
    with open(report, "w", encoding="utf-8") as fh:
        fh.write("rule\tsource\tseed\trank\tsimilarity\n")
        for rule, prov in zip(dictionary.rules, dictionary.provenance):
            fields = [
                rule.rule_id,
                prov.kind,
                prov.seed or "",
                "" if prov.rank is None else str(prov.rank),
                "" if prov.similarity is None else repr(prov.similarity),
            ]
            fh.write("\t".join(fields) + "\n")
    ctx.record_output(report)
    rep = ctx.out("skipped_seeds.json")
    _write_json(rep, {"skipped": sorted(skipped)})
    ctx.record_output(rep)


def _build_dictionary(ctx: RunContext, args, norm: Normalizer) -> GreenDictionary:
    rules_path = ctx.input_path("rules", getattr(args, "rules", None), default=asset_path("rules.tsv"))
    dictionary = compile_dictionary(rules_path, norm)
    if not ctx.section("dictionary")["use_expansion"]:
        return dictionary
    model = load_model(ctx.input_path("model", getattr(args, "model", None)))
    seeds = load_seeds(ctx.input_path("seeds", default=asset_path("seeds.txt")))
    exclusions = load_exclusions(ctx.input_path("exclusions", default=asset_path("exclusions.txt")))
    k = int(ctx.section("dictionary")["neighbors"])
    expanded, _ = expand_seeds(model, seeds, k=k, exclusions=exclusions, normalizer=norm)
    rules = list(dictionary.rules)
    provenance = list(dictionary.provenance)
    seen = {r.rule_id for r in rules}
    for rule, prov in zip(expanded.rules, expanded.provenance):
        if rule.rule_id not in seen:
            seen.add(rule.rule_id)
            rules.append(rule)
            provenance.append(prov)
    return GreenDictionary(tuple(rules), tuple(provenance))


def cmd_classify(ctx: RunContext, args) -> None:
    records = _load_corpus(ctx, args)
    norm = _normalizer_from(ctx, args)
    dictionary = _build_dictionary(ctx, args, norm)
    out = ctx.out("classified.jsonl")
    with open(out, "w", encoding="utf-8") as fh:
        for record in sorted(records, key=lambda r: r.patent_id):
            doc = norm.process(record)
            flag, outcome = classify_true_green(record, doc, dictionary)
            fh.write(
                json.dumps(
                    {
                        "patent_id": record.patent_id,
                        "true_green": flag,
                        "fired_rules": [
                            {"rule": f.rule.rule_id, "positions": [list(p) if isinstance(p, tuple) else p for p in f.positions]}
                            for f in outcome.fired_rules
                        ],
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    ctx.record_output(out)


def cmd_novelty(ctx: RunContext, args) -> None:
    records = _load_corpus(ctx, args)
    norm = _normalizer_from(ctx, args)
    cfg = ctx.section("novelty")
    cutoff = int(cfg["cutoff_year"])

    baseline_docs = [
        (norm.process(r, include_title=False), r.priority_year)
        for r in records
        if r.priority_year is not None
    ]
    lexicon = novelty.build_baseline(baseline_docs, cutoff_year=cutoff)
    scored_input = sorted(
        (
            (norm.process(r), r.priority_year)
            for r in records
            if r.priority_year is not None and r.priority_year >= cutoff
        ),
        key=lambda pair: (pair[1], pair[0].patent_id),
    )
    update = "per_year" if cfg["per_year"] else "per_doc"
    profiles = novelty.score_novelty(scored_input, lexicon, update=update)
    profiles = novelty.flag_high_novelty(
        profiles,
        rule=str(cfg["rule"]),
        q=float(cfg["q"]),
        min_pairs=int(cfg["min_pairs"]),
    )
    out = ctx.out("novelty.jsonl")
    with open(out, "w", encoding="utf-8") as fh:
        for p in profiles:
            fh.write(json.dumps(asdict(p), sort_keys=True) + "\n")
    ctx.record_output(out)
    lex_out = ctx.out("baseline_lexicon.bin")
    novelty.save_lexicon(lexicon, lex_out)
    ctx.record_output(lex_out)


def _load_classification(ctx: RunContext, args) -> dict[str, bool]:
    path = ctx.input_path("classification", getattr(args, "classification", None))
    flags: dict[str, bool] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            flags[row["patent_id"]] = bool(row["true_green"])
    return flags


def _flagged_records(records, flags) -> list:
    return [(r, flags.get(r.patent_id, False)) for r in records]


def cmd_stats(ctx: RunContext, args) -> None:
    records = _load_corpus(ctx, args)
    flags = _load_classification(ctx, args)
    flagged = _flagged_records(records, flags)
    cfg = ctx.section("analytics")
    level = int(cfg["class_level"])

    if records:
        counts = analytics.class_counts(flagged, level=level)
    else:
        counts = []
    counts_rows = []
    for c in counts:
        share = (c.n_true_green / c.n_green) if c.n_green else None
        counts_rows.append([c.class_code, c.n_total, c.n_green, c.n_true_green, _fmt(share)])
    out_counts = ctx.out("class_counts.csv")
    _write_csv(
        out_counts,
        ["class_code", "n_total", "n_green", "n_true_green", "true_green_share_of_green"],
        counts_rows,
    )
    ctx.record_output(out_counts)

    rca_rows = []
    if len(counts) >= 2:
        by_true = {r.class_code: r.rca for r in analytics.rca_index(counts, basis="true_green")}
        by_green = {r.class_code: r.rca for r in analytics.rca_index(counts, basis="green")}
        for c in counts:
            rca_rows.append([c.class_code, _fmt(by_true[c.class_code]), _fmt(by_green[c.class_code])])
    out_rca = ctx.out("rca.csv")
    _write_csv(out_rca, ["class_code", "rca_true_green", "rca_green"], rca_rows)
    ctx.record_output(out_rca)

    shares = analytics.share_over_time(flagged, by=str(cfg["year_basis"])) if records else []
    out_shares = ctx.out("shares.csv")
    _write_csv(
        out_shares,
        ["year", "n_total", "n_green", "n_true_green", "share_green", "share_true_green"],
        [
            [s.year, s.n_total, s.n_green, s.n_true_green, _fmt(s.share_green), _fmt(s.share_true_green)]
            for s in shares
        ],
    )
    ctx.record_output(out_shares)


def cmd_cite_reg(ctx: RunContext, args) -> None:
    records = _load_corpus(ctx, args)
    flags = _load_classification(ctx, args)
    flagged = _flagged_records(records, flags)
    level = int(ctx.section("analytics")["class_level"])
    design, n_dropped = analytics.citation_design(flagged, class_level=level)
    result = econometrics.ols_fixed_effects(design)
    out = ctx.out("cite_reg.csv")
    _write_csv(
        out,
        ["term", "coef", "se", "t_stat", "p_value"],
        [
            [c, _fmt(float(result.coef[i])), _fmt(float(result.se[i])),
             _fmt(float(result.t_stats[i])), _fmt(float(result.p_values[i]))]
            for i, c in enumerate(result.columns)
        ],
    )
    ctx.record_output(out)
    summary = ctx.out("cite_reg_summary.json")
    _write_json(
        summary,
        {
            "n_obs": result.n_obs,
            "n_dropped": n_dropped,
            "n_groups": result.n_groups,
            "n_clusters": result.n_clusters,
            "adj_r2": result.adj_r2,
            "note": result.note,
        },
    )
    ctx.record_output(summary)


def cmd_premia(ctx: RunContext, args) -> None:
    panel = load_firm_panel(ctx.input_path("firm_panel", getattr(args, "panel", None)))
    cfg = ctx.section("psm")
    rows = econometrics.premia_regressions(panel, outcomes=list(cfg["outcomes"]))
    out = ctx.out("premia.csv")
    csv_rows = []
    for reg in rows:
        if reg.error or reg.result is None:
            csv_rows.append([reg.outcome, reg.transform, "", "", "", "", "", "", "", reg.error or ""])
            continue
        res = reg.result
        for i, term in enumerate(econometrics.PREMIA_COLUMNS):
            csv_rows.append(
                [
                    reg.outcome, reg.transform, term,
                    _fmt(float(res.coef[i])), _fmt(float(res.se[i])),
                    _fmt(float(res.t_stats[i])), _fmt(float(res.p_values[i])),
                    res.n_obs, _fmt(res.adj_r2), res.note or "",
                ]
            )
    _write_csv(
        out,
        ["outcome", "transform", "term", "coef", "se", "t_stat", "p_value", "n_obs", "adj_r2", "note"],
        csv_rows,
    )
    ctx.record_output(out)


def _psm_rows(split: str, subgroup: str, outcomes) -> list[list]:
    rows = []
    for o in outcomes:
        if o.error or o.result is None:
            rows.append([split, subgroup, o.outcome, o.transform, "", "", "", "", "", "", "", o.error or ""])
            continue
        r = o.result
        rows.append(
            [
                split, subgroup, o.outcome, o.transform,
                _fmt(r.atet), _fmt(r.se), _fmt(r.t_stat),
                r.n_treated, r.n_untreated, r.n_pairs, r.n_dropped_support, "",
            ]
        )
    return rows


def cmd_psm(ctx: RunContext, args) -> None:
    panel = load_firm_panel(ctx.input_path("firm_panel", getattr(args, "panel", None)))
    cfg = ctx.section("psm")
    outcomes = list(cfg["outcomes"])
    pool = str(cfg["control_pool"])

    main = econometrics.run_psm(panel, outcomes=outcomes, control_pool=pool)
    rows = _psm_rows("", "all", main)
    for split in cfg["splits"]:
        for sub in econometrics.subgroup_atet(panel, str(split), outcomes=outcomes, control_pool=pool):
            if sub.skipped:
                rows.append([sub.split, sub.subgroup, "", "", "", "", "", "", "", "", "", sub.skipped])
            else:
                rows.extend(_psm_rows(sub.split, sub.subgroup, sub.outcomes))
    out = ctx.out("psm.csv")
    _write_csv(
        out,
        ["split", "subgroup", "outcome", "transform", "atet", "se", "t_stat",
         "n_treated", "n_untreated", "n_pairs", "n_dropped_support", "note"],
        rows,
    )
    ctx.record_output(out)

    pair_rows = []
    for o in main:
        if o.result is None:
            continue
        for p in o.result.matched_pairs:
            t_firm, t_year = p.treated_id
            c_firm, _ = p.control_id
            pair_rows.append([o.outcome, t_year, t_firm, c_firm, _fmt(p.distance)])
    pair_rows.sort(key=lambda r: (r[0], r[1], r[2]))
    out_pairs = ctx.out("psm_pairs.csv")
    _write_csv(out_pairs, ["outcome", "year", "treated_firm", "control_firm", "distance"], pair_rows)
    ctx.record_output(out_pairs)


def cmd_demo(ctx: RunContext, args) -> None:
    """Chain every stage on the packaged fixtures into one output dir."""
    demo_dir = asset_path("demo")
    demo_config_path = demo_dir / "config.toml"
    config_text = demo_config_path.read_text(encoding="utf-8")
    config = tomllib.loads(config_text)
    paths = config.setdefault("paths", {})
    for key, value in list(paths.items()):
        paths[key] = str((demo_dir / value).resolve())

    stage_args = argparse.Namespace(workers=1, corpus=None, model=None, rules=None,
                                    classification=None, panel=None)
    manifests = []
    for name, fn in (
        ("ingest", cmd_ingest),
        ("train", cmd_train),
        ("expand", cmd_expand),
        ("classify", cmd_classify),
        ("novelty", cmd_novelty),
        ("stats", cmd_stats),
        ("cite-reg", cmd_cite_reg),
        ("premia", cmd_premia),
        ("psm", cmd_psm),
    ):
        stage_ctx = RunContext(name, config, config_text, ctx.out_dir)
        if name in ("expand", "classify"):
            stage_args.model = str(stage_ctx.out_dir / "model.bin")
        if name in ("stats", "cite-reg"):
            stage_args.classification = str(stage_ctx.out_dir / "classified.jsonl")
        fn(stage_ctx, stage_args)
        manifests.append(stage_ctx.write_manifest().name)
        ctx.outputs.update(stage_ctx.outputs)
        if name == "ingest":
            # downstream stages read the validated copy
            stage_args.corpus = str(stage_ctx.out_dir / "corpus.jsonl")
    _write_json(ctx.out("demo_stages.json"), {"stages": manifests})
    ctx.record_output(ctx.out("demo_stages.json"))


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "tune": cmd_tune,
    "expand": cmd_expand,
    "classify": cmd_classify,
    "novelty": cmd_novelty,
    "stats": cmd_stats,
    "cite-reg": cmd_cite_reg,
    "premia": cmd_premia,
    "psm": cmd_psm,
    "demo": cmd_demo,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenlex",
        description="Green-patent text mining and firm-level estimation pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"greenlex {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--config", type=Path, default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None, help="root seed (overrides config)")
        p.add_argument("--workers", type=int, default=1, help="parallel workers where supported")
        p.add_argument("--out-dir", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--corpus", type=Path, default=None, help="patent corpus (JSONL or CSV)")
        p.add_argument("--model", type=Path, default=None, help="embedding model file")
        p.add_argument("--rules", type=Path, default=None, help="rule definitions TSV")
        p.add_argument("--classification", type=Path, default=None, help="classified.jsonl from classify")
        p.add_argument("--panel", type=Path, default=None, help="firm panel CSV")
    return parser


def _emit_error(exc: BaseException, code: int) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config_text = ""
        config: dict = {}
        if args.config is not None:
            if not Path(args.config).exists():
                raise ValidationError(f"config file not found: {args.config}")
            config_text = Path(args.config).read_text(encoding="utf-8")
            try:
                config = tomllib.loads(config_text)
            except tomllib.TOMLDecodeError as exc:
                raise ValidationError(f"config does not parse: {exc}") from None
            base = Path(args.config).resolve().parent
            for key, value in list(config.get("paths", {}).items()):
                config["paths"][key] = str((base / value).resolve())
        if args.seed is not None:
            config["seed"] = args.seed
        ctx = RunContext(args.command, config, config_text, args.out_dir)
        COMMANDS[args.command](ctx, args)
        ctx.write_manifest()
        return 0
    except ValidationError as exc:
        _emit_error(exc, 2)
        return 2
    except GreenlexError as exc:
        _emit_error(exc, 3)
        return 3
    except Exception as exc:  # anything unexpected is a runtime failure
        _emit_error(exc, 3)
        return 3


if __name__ == "__main__":
    sys.exit(main())
