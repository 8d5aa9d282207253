"""Acceptance suite: one test per criterion, numbered.

Run with ``pytest -v tests/test_acceptance.py`` to get one PASSED/FAILED
line per criterion.
"""

import time

import numpy as np
import pytest

from bruteforce import enumerate_readings
from prosogate.chart import ParseConfig, extract_pred_arg, parse, \
    propose_trace_sites
from prosogate.evaluation import (BenchReport, ConfusionCounts, bench,
                                  crosstab, fmt_pct, metrics, rank_experiment)
from prosogate.mlp import MlpClassifier, TrainConfig, train
from prosogate.prosody import extract_features
from prosogate.synth import synth_corpus


@pytest.fixture(scope="module")
def synth_104():
    return synth_corpus(seed=42, turns=104)


def _turns(demo_corpus):
    return {t.turn_id: t for t in demo_corpus}


def test_criterion_01_metric_formula_fixture():
    """Reference confusion counts reproduce the reference percentages."""
    t0 = time.perf_counter()
    report = metrics(ConfusionCounts(138, 274, 6, 703))
    elapsed = time.perf_counter() - t0
    assert report.as_pct() == {"recall": "95.8", "precision": "33.5",
                               "error": "25.0"}
    assert elapsed < 0.001


def test_criterion_02_speedup_formula_fixture():
    report = BenchReport(overall_with=704.8, overall_without=1304.2,
                         turn_count=109)
    assert fmt_pct(report.speedup, 2) == "45.96"


def test_criterion_03_gate_off_equivalence(grammar, demo_corpus):
    assert len(demo_corpus) >= 20
    for turn in demo_corpus:
        off = parse(turn, grammar, ParseConfig(mode="off"))
        zero = parse(turn, grammar, ParseConfig(threshold=0.0))
        assert off.readings == zero.readings
        assert len(off.forest) == len(zero.forest)
        for key in ("lexical_edges", "empty_edges", "derived_edges",
                    "proposed_sites"):
            assert off.stats[key] == zero.stats[key]


def test_criterion_04_oracle_equivalence(grammar, demo_corpus):
    config = ParseConfig(threshold=0.01)
    checked = 0
    for turn in demo_corpus:
        if len(turn.words) > 6:
            continue
        assert set(parse(turn, grammar, config).readings) == \
            enumerate_readings(turn, grammar, config), turn.turn_id
        checked += 1
    assert checked >= 15


def test_criterion_05_reference_tree_reproduction(grammar, demo_corpus):
    result = parse(_turns(demo_corpus)["d01"], grammar, ParseConfig())
    assert result.readings == [
        "(filler-head gestern/gestern (v2-selection reparierte/reparierte_f_v2"
        " (head-subject er/er (head-complement (head-complement den/den"
        " wagen/wagen) t/reparierte_f_v2@5))))"]
    empty, = [e for e in result._chart.edges if e.kind == "empty"]
    assert empty.span == (5, 5)
    loc = empty.category.get("LOC")
    assert loc is empty.category.get("DSL").items[0]
    from prosogate.fs import equivalent
    assert equivalent(loc, grammar.entries_by_id["reparierte_f"]
                      .category.get("LOC"))


def test_criterion_06_scope_argument_invariance(grammar, demo_corpus):
    turns = _turns(demo_corpus)
    a = parse(turns["d04"], grammar, ParseConfig())
    b = parse(turns["d05"], grammar, ParseConfig())
    assert {extract_pred_arg(a, i) for i in range(len(a.readings))} == \
        {extract_pred_arg(b, i) for i in range(len(b.readings))}
    main = extract_pred_arg(parse(turns["d01"], grammar, ParseConfig()), 0)
    embedded = extract_pred_arg(parse(turns["d02"], grammar, ParseConfig()), 0)
    fix_records = {r for r in main if r[0] == "fix"}
    assert fix_records and fix_records <= set(embedded)


def test_criterion_07_reduction_with_full_recall(synth_104):
    gated = ParseConfig(threshold=0.01)
    ungated = ParseConfig(mode="off")
    sites_gated = sites_all = misses = 0
    for turn in synth_104:
        proposed = set(propose_trace_sites(turn, gated))
        sites_gated += len(proposed)
        sites_all += len(propose_trace_sites(turn, ungated))
        misses += len(set(turn.gold_traces) - proposed)
    assert misses == 0
    assert sites_gated <= sites_all / 2
    # reference result on the original speech data: 1121 -> 412 proposed
    # sites with 6 misses; not reproducible without that data
    print(f"\n  site reduction {sites_all} -> {sites_gated}, "
          f"{misses} gold misses (reference: 1121 -> 412, 6 misses)")


def test_criterion_08_runtime_speedup_direction(grammar, synth_104):
    t0 = time.perf_counter()
    report = bench(synth_104, grammar, ParseConfig(threshold=0.01),
                   ParseConfig(mode="off"))
    assert time.perf_counter() - t0 < 60
    assert report.speedup > 0
    assert report.empty_edges_with < report.empty_edges_without
    print(f"\n  speedup {fmt_pct(report.speedup, 2)} % "
          f"(reference: about 46 %)")


def test_criterion_09_classifier_property_suite(synth_104):
    # gradient check on a small net
    rng = np.random.default_rng(0)
    clf = MlpClassifier(5, 3, 3, seed=1)
    x = rng.normal(size=5)
    target = np.array([0.0, 1.0])
    eps = 1e-6
    for p, g in zip(clf.params, clf.gradients(x, target)):
        fp, fg = p.reshape(-1), g.reshape(-1)
        for k in range(fp.size):
            orig = fp[k]
            fp[k] = orig + eps
            up = clf.loss(x, target)
            fp[k] = orig - eps
            down = clf.loss(x, target)
            fp[k] = orig
            numeric = (up - down) / (2 * eps)
            assert abs(numeric - fg[k]) / max(abs(numeric), abs(fg[k]),
                                              1e-8) <= 1e-4
    # posteriors sum to one
    p_plus, p_minus = clf.classify(x[:5] * 0 + 0.3)
    assert abs(p_plus + p_minus - 1.0) <= 1e-9
    # balanced epochs
    data = [(rng.normal(size=4), "S3-") for _ in range(90)]
    data += [(rng.normal(2.0, 1.0, size=4), "S3+") for _ in range(10)]
    balanced = train(data, TrainConfig(epochs=1, hidden1=3, hidden2=3), seed=0)
    assert balanced.train_log[0]["presented"] == {"S3+": 90, "S3-": 90}
    # separable Gaussians, with a nearest-centroid oracle
    train_set, test_set = [], []
    for i in range(1300):
        for label, center in (("S3+", 1.5), ("S3-", -1.5)):
            vec = rng.normal(center, 1.0, size=8)
            (train_set if i < 1000 else test_set).append((vec, label))
    gauss = train(train_set, TrainConfig(epochs=3, hidden1=8, hidden2=4),
                  seed=0)
    centroids = {lab: np.mean([v for v, l in train_set if l == lab], axis=0)
                 for lab in ("S3+", "S3-")}
    mlp_acc = np.mean([(gauss.classify(v)[0] >= 0.5) == (l == "S3+")
                       for v, l in test_set])
    oracle_acc = np.mean([
        min(centroids, key=lambda lab: np.linalg.norm(v - centroids[lab])) == l
        for v, l in test_set])
    assert oracle_acc >= 0.95
    assert mlp_acc >= 0.95
    # boundary recognition on the synthetic prosody corpus
    pairs = {"train": [], "test": []}
    for i, turn in enumerate(synth_104):
        records = [s.features for s in turn.syllables]
        part = "train" if i < 70 else "test"
        for w, syl in enumerate(turn.word_final_syllables(), start=1):
            if turn.s3_labels[w - 1] == "S3?":
                continue
            pairs[part].append((extract_features(records, syl),
                                turn.s3_labels[w - 1]))
    boundary = train(pairs["train"], TrainConfig(epochs=5), seed=0)
    rate = np.mean([(boundary.classify(v)[0] >= 0.5) == (l == "S3+")
                    for v, l in pairs["test"]])
    assert rate > 0.80
    print(f"\n  boundary recognition rate {rate:.1%} "
          f"(reference: over 80 %)")


def test_criterion_10_rank_experiment_shape():
    corpus = synth_corpus(seed=7, turns=134, v2_only=True)
    hist = rank_experiment([(t.gap_scores, t.gold_traces[0]) for t in corpus])
    assert hist.total == 134
    counts = [hist.counts[r] for r in range(1, 5)]
    assert counts[0] > max(list(hist.counts.values())[1:])
    assert counts == sorted(counts, reverse=True)
    print(f"\n  rank buckets {dict(hist.counts)} "
          f"(reference shape: 96, 22, 7, 4, ...)")


def test_criterion_11_crosstab_fixture():
    labels_a = ["S3+"] * 110
    labels_b = ["S3+"] * 84 + ["S3-"] * 26
    (label, cases, cells), = crosstab(labels_a, labels_b)
    assert label == "S3+"
    assert cases == 110
    assert round(cells["S3+"]) == 76
    assert round(cells["S3-"]) == 24
