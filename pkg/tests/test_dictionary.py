"""Rule compilation, matching semantics, and seed expansion."""

import numpy as np
import pytest

from greenlex.corpus import PatentRecord, ProcessedDoc, default_normalizer
from greenlex.dictionary import (
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
from greenlex.embedding import CbowModel, TrainConfig, Vocabulary
from greenlex.errors import ValidationError

NORM = default_normalizer()


def doc(*tokens):
    return ProcessedDoc("D", tuple(tokens))


def single(*tokens):
    return DictRule("single", tuple(tokens))


def cooc(keyword, alternatives, window=20):
    return DictRule(
        "cooc",
        tuple(keyword.split()),
        tuple(tuple(a.split()) for a in alternatives),
        window,
    )


def dictionary(*rules):
    return GreenDictionary(tuple(rules), tuple(Provenance("manual") for _ in rules))


# ---------------------------------------------------------- seeds and files


def test_load_seeds_dedupes_and_validates(tmp_path):
    path = tmp_path / "seeds.txt"
    path.write_text("solar power\n# comment\nSolar Power\nwind\n")
    assert load_seeds(path) == ["solar power", "wind"]
    path.write_text("one two three four\n")
    with pytest.raises(ValidationError, match="1-3 words"):
        load_seeds(path)
    path.write_text("# nothing\n")
    with pytest.raises(ValidationError, match="no seed"):
        load_seeds(path)


def test_load_exclusions_lowercases(tmp_path):
    path = tmp_path / "excl.txt"
    path.write_text("Generic\n# note\nterm\n")
    assert load_exclusions(path) == frozenset({"generic", "term"})


# --------------------------------------------------------------- compilation


def test_compile_singles_and_coocs(tmp_path):
    path = tmp_path / "rules.tsv"
    path.write_text(
        "# comment line\n"
        "S\tsolar panels\n"
        "C\tcarbon\tcapture OR storage\n"
        "C\twaste\theat recovery\t5\n"
    )
    d = compile_dictionary(path, NORM)
    kinds = [r.kind for r in d.rules]
    assert kinds == ["single", "cooc", "cooc"]
    # plural lemma applied inside the rule text
    assert d.rules[0].tokens == ("solar", "panel")
    assert d.rules[1].alternatives == (("capture",), ("storage",))
    assert d.rules[1].window == 20
    assert d.rules[2].window == 5
    assert all(p.kind == "manual" for p in d.provenance)


def test_compile_or_split_happens_before_normalization(tmp_path):
    # "OR" must be a standalone uppercase word; mid-word "or" never splits
    path = tmp_path / "rules.tsv"
    path.write_text("C\tsensor\tmonitoring OR corrosion\n")
    d = compile_dictionary(path, NORM)
    assert d.rules[0].alternatives == (("monitoring",), ("corrosion",))


def test_compile_collapses_duplicates_after_normalization(tmp_path):
    path = tmp_path / "rules.tsv"
    path.write_text("S\tsolar panel\nS\tsolar panels\nS\tSOLAR PANEL\n")
    d = compile_dictionary(path, NORM)
    assert len(d.rules) == 1


def test_compile_rejects_malformed_lines(tmp_path):
    path = tmp_path / "rules.tsv"
    for bad in ("X\tfoo\n", "S\n", "C\tkw\n", "C\tkw\talts\tnotanumber\n", "C\tkw\talts\t0\n"):
        path.write_text(bad)
        with pytest.raises(ValidationError):
            compile_dictionary(path, NORM)
    path.write_text("# only comments\n")
    with pytest.raises(ValidationError, match="no rules"):
        compile_dictionary(path, NORM)


def test_rule_line_roundtrips_through_compile(tmp_path):
    path = tmp_path / "rules.tsv"
    original = [single("solar", "panel"), cooc("carbon", ["capture", "storage"], 7)]
    path.write_text("".join(rule_line(r) + "\n" for r in original))
    d = compile_dictionary(path, NORM)
    assert list(d.rules) == original


def test_rule_ids_are_stable_and_distinct():
    assert single("solar", "panel").rule_id == "S:solar panel"
    rule = cooc("carbon", ["capture", "storage"])
    assert rule.rule_id == "C:carbon|capture OR storage|w=20"
    assert single("a").rule_id != cooc("a", ["b"]).rule_id


# ------------------------------------------------------------------ matching


def test_single_rule_matches_contiguous_sequence():
    d = dictionary(single("solar", "panel"))
    hit = match_document(doc("a", "solar", "panel", "b"), d)
    assert hit.matched
    assert hit.fired_rules[0].positions == (1,)
    assert not match_document(doc("solar", "x", "panel"), d).matched
    assert not match_document(doc("panel", "solar"), d).matched


def test_single_rule_reports_every_start_position():
    d = dictionary(single("ab"))
    hit = match_document(doc("ab", "x", "ab", "ab"), d)
    assert hit.fired_rules[0].positions == (0, 2, 3)


def test_cooc_rule_requires_both_parts():
    d = dictionary(cooc("carbon", ["capture"]))
    assert match_document(doc("carbon", "x", "capture"), d).matched
    assert not match_document(doc("carbon", "x", "x"), d).matched
    assert not match_document(doc("x", "capture"), d).matched


def test_cooc_window_boundary_inclusive():
    d = dictionary(cooc("kw", ["alt"], window=20))
    inside = ["kw"] + ["pad"] * 19 + ["alt"]  # starts 0 and 20
    outside = ["kw"] + ["pad"] * 20 + ["alt"]  # starts 0 and 21
    assert match_document(doc(*inside), d).matched
    assert not match_document(doc(*outside), d).matched


def test_cooc_window_counts_both_directions():
    d = dictionary(cooc("kw", ["alt"], window=3))
    assert match_document(doc("alt", "x", "x", "kw"), d).matched
    assert not match_document(doc("alt", "x", "x", "x", "kw"), d).matched


def test_cooc_reports_all_qualifying_pairs_sorted():
    d = dictionary(cooc("kw", ["alt"], window=5))
    hit = match_document(doc("kw", "alt", "x", "kw", "alt"), d)
    pairs = hit.fired_rules[0].positions
    assert pairs == ((0, 1), (0, 4), (3, 1), (3, 4))


def test_cooc_alternatives_any_of():
    d = dictionary(cooc("kw", ["altone", "alttwo bee"], window=4))
    assert match_document(doc("kw", "alttwo", "bee"), d).matched
    assert match_document(doc("altone", "kw"), d).matched
    assert not match_document(doc("kw", "alttwo"), d).matched


def test_multiple_rules_all_fire():
    d = dictionary(single("a"), single("b"), cooc("a", ["b"], 5))
    hit = match_document(doc("a", "b"), d)
    assert [f.rule.rule_id for f in hit.fired_rules] == ["S:a", "S:b", "C:a|b|w=5"]


def test_classification_requires_baseline_and_match():
    d = dictionary(single("solar"))
    green_doc = doc("solar")
    plain_doc = doc("cat")
    cases = [
        (True, green_doc, True),
        (True, plain_doc, False),
        (False, green_doc, False),
        (False, plain_doc, False),
    ]
    for baseline, the_doc, expected in cases:
        record = PatentRecord("P", "F", "", "", ("Y02",), baseline_green=baseline)
        flag, outcome = classify_true_green(record, the_doc, d)
        assert flag is expected
        assert outcome.matched is (the_doc is green_doc)


# ---------------------------------------------------------- naive-scan oracle


def naive_fired(tokens, rule):
    """Quadratic reference matcher, independent of the library routine."""
    n = len(tokens)

    def starts(phrase):
        m = len(phrase)
        return [i for i in range(n - m + 1) if tuple(tokens[i : i + m]) == tuple(phrase)]

    if rule.kind == "single":
        return tuple(starts(rule.tokens))
    hits = []
    for i in starts(rule.tokens):
        for alt in rule.alternatives:
            for j in starts(alt):
                if abs(i - j) <= rule.window:
                    hits.append((i, j))
    return tuple(sorted(set(hits)))


def test_match_document_agrees_with_naive_scan_on_random_docs():
    rng = np.random.default_rng(42)
    words = [f"t{i}" for i in range(12)]
    rules = [
        single("t0"),
        single("t1", "t2"),
        single("t3", "t4", "t5"),
        cooc("t0", ["t1"], 1),
        cooc("t2", ["t3", "t4 t5"], 3),
        cooc("t6", ["t7"], 20),
    ]
    d = dictionary(*rules)
    for _ in range(300):
        tokens = [words[k] for k in rng.integers(0, len(words), rng.integers(2, 40))]
        result = match_document(doc(*tokens), d)
        expected = {r.rule_id: naive_fired(tokens, r) for r in rules}
        expected = {k: v for k, v in expected.items() if v}
        got = {f.rule.rule_id: f.positions for f in result.fired_rules}
        assert got == expected
        assert result.matched == bool(expected)


# ------------------------------------------------------------- seed expansion


def expansion_model():
    """Hand-built vectors: neighbors of "solar" are (by cosine) "panel",
    then "battery", then the rest; "windpower" exists as a collocation."""
    words = {
        "solar": 8, "panel": 7, "battery": 6, "cat": 5,
        "wind": 4, "power": 3, "windpower": 2, "<num>": 9,
    }
    base = {
        "solar": [1.0, 0.0, 0.0],
        "panel": [0.95, 0.05, 0.0],
        "battery": [0.8, 0.2, 0.0],
        "cat": [-1.0, 0.5, 0.0],
        "wind": [0.0, 1.0, 0.0],
        "power": [0.1, 0.9, 0.0],
        "windpower": [0.0, 0.95, 0.05],
        "<num>": [0.99, 0.01, 0.0],
    }
    vocab = Vocabulary(sorted(words, key=lambda w: (-words[w], w)), words, 1)
    w_in = np.array([base[w] for w in vocab.words], dtype=float)
    return CbowModel(vocab, w_in, np.zeros((3, len(vocab))), TrainConfig(d=3, min_count=1))


def test_expansion_adds_neighbors_excluding_tags_and_exclusions():
    model = expansion_model()
    d, skipped = expand_seeds(model, ["solar"], k=2, exclusions=["battery"], normalizer=NORM)
    ids = [r.rule_id for r in d.rules]
    # seed itself plus neighbors; "<num>" (reserved) and "battery" (excluded)
    # never become rules, so "panel" and the next eligible word enter
    assert ids[0] == "S:solar"
    assert "S:panel" in ids
    assert all("<num>" not in i and "battery" not in i for i in ids)
    assert skipped == []


def test_expansion_queries_collocation_form():
    model = expansion_model()
    d, _ = expand_seeds(model, ["wind power"], k=1, normalizer=NORM)
    ids = [r.rule_id for r in d.rules]
    assert ids[0] == "S:wind power"
    # collocation "windpower" is in the vocabulary, so it is queried too;
    # its nearest neighbor "wind" (itself a constituent query) appears once
    assert len(ids) == len(set(ids))
    assert len(d.rules) == len(d.provenance)


def test_expansion_skips_seeds_without_vocabulary_presence():
    model = expansion_model()
    d, skipped = expand_seeds(model, ["solar", "geothermal well"], k=1, normalizer=NORM)
    assert skipped == ["geothermal well"]
    # the skipped seed still contributes its own Single rule
    assert "S:geothermal well" in [r.rule_id for r in d.rules]


def test_expansion_provenance_and_order():
    model = expansion_model()
    d, _ = expand_seeds(model, ["solar", "wind"], k=2, normalizer=NORM)
    kinds = [p.kind for p in d.provenance]
    n_seeds = kinds.count("seed")
    assert kinds[:n_seeds] == ["seed"] * n_seeds
    assert set(kinds[n_seeds:]) == {"expanded"}
    sims = [p.similarity for p in d.provenance[n_seeds:]]
    assert sims == sorted(sims, reverse=True)
    for p in d.provenance[n_seeds:]:
        assert p.seed in ("solar", "wind")
        assert p.rank >= 1
