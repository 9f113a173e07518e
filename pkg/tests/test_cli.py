"""Command-line entry points: wiring, manifests, and the error contract."""

import hashlib
import json

import pytest

from greenlex import cli, corpus
from greenlex.synthetic import make_firm_panel, make_patent_records


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture()
def workspace(tmp_path):
    records = make_patent_records(40, seed=3, green_fraction=0.4, year_range=(1975, 1990))
    corpus_path = tmp_path / "patents.jsonl"
    corpus.save_patents(records, corpus_path)
    rules_path = tmp_path / "rules.tsv"
    rules_path.write_text("S\tsolar energy\nC\tturbine\twind\t5\n", encoding="utf-8")
    panel_path = tmp_path / "panel.csv"
    make_firm_panel(n_firms=60, years=(2014, 2018), seed=4).to_csv(panel_path, index=False)
    train_config = tmp_path / "train.toml"
    train_config.write_text(
        "[embedding]\nd = 8\nepochs = 1\nmin_count = 2\n", encoding="utf-8"
    )
    out_dir = tmp_path / "out"
    return {
        "dir": tmp_path,
        "corpus": corpus_path,
        "rules": rules_path,
        "panel": panel_path,
        "train_config": train_config,
        "out": out_dir,
    }


def run(argv):
    return cli.main([str(a) for a in argv])


def train_args(ws, extra=()):
    return [
        "train", "--config", ws["train_config"], "--corpus", ws["corpus"],
        "--out-dir", ws["out"], *extra,
    ]


# ---------------------------------------------------------------- manifests


def test_ingest_writes_outputs_and_manifest(workspace):
    ws = workspace
    assert run(["ingest", "--corpus", ws["corpus"], "--out-dir", ws["out"]]) == 0
    out = ws["out"]
    assert (out / "corpus.jsonl").exists()
    summary = json.loads((out / "ingest_summary.json").read_text())
    assert summary["n_records"] == 40

    manifest = json.loads((out / "ingest_manifest.json").read_text())
    assert set(manifest) == {
        "tool", "version", "command", "seed", "config_sha256", "inputs", "outputs",
    }
    assert manifest["command"] == "ingest"
    # recorded digests must match the bytes on disk, keyed by bare file name
    assert manifest["inputs"]["patents.jsonl"] == sha256(ws["corpus"])
    for name, digest in manifest["outputs"].items():
        assert digest == sha256(out / name)
    assert "ingest_manifest.json" not in manifest["outputs"]


def test_manifest_is_deterministic_across_runs(workspace, tmp_path):
    ws = workspace
    other = tmp_path / "out2"
    run(["ingest", "--corpus", ws["corpus"], "--out-dir", ws["out"]])
    run(["ingest", "--corpus", ws["corpus"], "--out-dir", other])
    first = (ws["out"] / "ingest_manifest.json").read_bytes()
    second = (other / "ingest_manifest.json").read_bytes()
    assert first == second  # no timestamps, no absolute paths


# ----------------------------------------------------------------- training


def test_train_writes_model_and_log(workspace):
    ws = workspace
    assert run(train_args(ws)) == 0
    assert (ws["out"] / "model.bin").exists()
    log = json.loads((ws["out"] / "train_log.json").read_text())
    assert log["vocab_size"] > 0
    assert len(log["epoch_mean_loss"]) == 1


def test_seed_flag_controls_model_bytes(workspace, tmp_path):
    ws = workspace
    dirs = [tmp_path / f"run{i}" for i in range(3)]
    for d, seed in zip(dirs, ("1", "1", "2")):
        args = ["train", "--config", ws["train_config"], "--corpus", ws["corpus"],
                "--out-dir", d, "--seed", seed]
        assert run(args) == 0
    same_a = (dirs[0] / "model.bin").read_bytes()
    same_b = (dirs[1] / "model.bin").read_bytes()
    different = (dirs[2] / "model.bin").read_bytes()
    assert same_a == same_b
    assert same_a != different


def test_tune_writes_one_row_per_grid_point(workspace):
    ws = workspace
    gold = ws["dir"] / "gold.tsv"
    gold.write_text(
        "unit\tnetwork\t0.8\nframe\tsubstrate\t0.3\nmodule\tcomponent\t0.6\n",
        encoding="utf-8",
    )
    config = ws["dir"] / "tune.toml"
    config.write_text(
        "[paths]\ncorpus = \"patents.jsonl\"\ngold_pairs = \"gold.tsv\"\n"
        "[tune]\ncontexts = [1, 2]\nmin_counts = [2]\ndims = [4, 8]\n"
        "[embedding]\nepochs = 1\n",
        encoding="utf-8",
    )
    assert run(["tune", "--config", config, "--out-dir", ws["out"]]) == 0
    rows = (ws["out"] / "tune_grid.csv").read_text().strip().splitlines()
    assert rows[0].startswith("context,")
    assert len(rows) == 1 + 4
    best = json.loads((ws["out"] / "tune_best.json").read_text())
    assert {"context", "min_count", "d"} <= set(best)


# ------------------------------------------------------------ classification


def test_classify_rows_sorted_and_complete(workspace):
    ws = workspace
    args = ["classify", "--corpus", ws["corpus"], "--rules", ws["rules"],
            "--out-dir", ws["out"]]
    assert run(args) == 0
    rows = [json.loads(line) for line in
            (ws["out"] / "classified.jsonl").read_text().splitlines()]
    assert len(rows) == 40
    ids = [r["patent_id"] for r in rows]
    assert ids == sorted(ids)
    assert all(isinstance(r["true_green"], bool) for r in rows)
    fired = [r for r in rows if r["fired_rules"]]
    assert fired, "synthetic corpus should trip the solar/wind rules"
    for row in fired:
        for hit in row["fired_rules"]:
            assert hit["rule"].startswith(("S:", "C:"))
            assert all(isinstance(p, list) and len(p) == 2 for p in hit["positions"]) or all(
                isinstance(p, int) for p in hit["positions"]
            )


def test_expansion_without_model_is_a_config_error(workspace, capsys):
    ws = workspace
    config = ws["dir"] / "expand.toml"
    config.write_text(
        "[paths]\ncorpus = \"patents.jsonl\"\n[dictionary]\nuse_expansion = true\n",
        encoding="utf-8",
    )
    code = run(["classify", "--config", config, "--rules", ws["rules"],
                "--out-dir", ws["out"]])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "ValidationError"
    assert err["error"]["exit_code"] == 2


def test_expand_produces_loadable_rules(workspace):
    ws = workspace
    run(train_args(ws))
    (ws["dir"] / "seeds.txt").write_text("solar energy\nwind\n", encoding="utf-8")
    config = ws["dir"] / "expand.toml"
    config.write_text("[paths]\nseeds = \"seeds.txt\"\n", encoding="utf-8")
    args = ["expand", "--config", config, "--model", ws["out"] / "model.bin",
            "--out-dir", ws["out"]]
    assert run(args) == 0
    from greenlex.corpus import default_normalizer
    from greenlex.dictionary import compile_dictionary

    expanded = compile_dictionary(ws["out"] / "expanded_rules.tsv", default_normalizer())
    assert len(expanded.rules) >= 2
    report = (ws["out"] / "expansion_report.tsv").read_text().splitlines()
    assert report[0] == "rule\tsource\tseed\trank\tsimilarity"


# ------------------------------------------------------- downstream commands


def test_novelty_and_stats_pipeline(workspace):
    ws = workspace
    run(["classify", "--corpus", ws["corpus"], "--rules", ws["rules"],
         "--out-dir", ws["out"]])
    assert run(["novelty", "--corpus", ws["corpus"], "--out-dir", ws["out"]]) == 0
    profiles = [json.loads(line) for line in
                (ws["out"] / "novelty.jsonl").read_text().splitlines()]
    assert profiles
    assert all(p["new_pairs"] >= 0 for p in profiles)
    assert (ws["out"] / "baseline_lexicon.bin").exists()

    args = ["stats", "--corpus", ws["corpus"],
            "--classification", ws["out"] / "classified.jsonl", "--out-dir", ws["out"]]
    assert run(args) == 0
    counts = (ws["out"] / "class_counts.csv").read_text().splitlines()
    assert counts[0].split(",")[0] == "class_code"
    assert len(counts) > 1
    assert (ws["out"] / "rca.csv").exists()
    assert (ws["out"] / "shares.csv").exists()


def test_stats_on_empty_corpus_writes_headers_only(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    classification = tmp_path / "classified.jsonl"
    classification.write_text("")
    out = tmp_path / "out"
    args = ["stats", "--corpus", empty, "--classification", classification,
            "--out-dir", out]
    assert run(args) == 0
    assert len((out / "class_counts.csv").read_text().splitlines()) == 1


def test_cite_reg_and_premia_and_psm(workspace):
    ws = workspace
    run(["classify", "--corpus", ws["corpus"], "--rules", ws["rules"],
         "--out-dir", ws["out"]])
    code = run(["cite-reg", "--corpus", ws["corpus"],
                "--classification", ws["out"] / "classified.jsonl",
                "--out-dir", ws["out"]])
    assert code == 0
    assert (ws["out"] / "cite_reg_manifest.json").exists()
    summary = json.loads((ws["out"] / "cite_reg_summary.json").read_text())
    assert summary["n_obs"] > 0

    assert run(["premia", "--panel", ws["panel"], "--out-dir", ws["out"]]) == 0
    premia_rows = (ws["out"] / "premia.csv").read_text().splitlines()
    assert len(premia_rows) > 1

    assert run(["psm", "--panel", ws["panel"], "--out-dir", ws["out"]]) == 0
    psm_rows = (ws["out"] / "psm.csv").read_text().splitlines()
    assert psm_rows[0].split(",")[:3] == ["split", "subgroup", "outcome"]
    assert len(psm_rows) > 1
    assert (ws["out"] / "psm_pairs.csv").exists()


# ------------------------------------------------------------ error contract


def test_missing_config_file_exits_2(tmp_path, capsys):
    code = run(["train", "--config", tmp_path / "nope.toml", "--out-dir", tmp_path])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "ValidationError"


def test_unparseable_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[paths\ncorpus = ")
    code = run(["train", "--config", bad, "--out-dir", tmp_path])
    assert code == 2
    assert "parse" in json.loads(capsys.readouterr().err)["error"]["message"]


def test_missing_input_file_exits_2(tmp_path, capsys):
    code = run(["classify", "--corpus", tmp_path / "ghost.jsonl", "--out-dir", tmp_path])
    assert code == 2
    capsys.readouterr()


def test_config_paths_resolve_relative_to_config_file(workspace, tmp_path):
    ws = workspace
    nested = ws["dir"] / "conf"
    nested.mkdir()
    config = nested / "run.toml"
    config.write_text("[paths]\ncorpus = \"../patents.jsonl\"\n", encoding="utf-8")
    out = tmp_path / "viaconfig"
    assert run(["ingest", "--config", config, "--out-dir", out]) == 0
    assert json.loads((out / "ingest_summary.json").read_text())["n_records"] == 40
