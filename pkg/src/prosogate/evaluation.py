"""Trace-detection metrics, label cross-tabulations, the rank
experiment, and the with/without-prosody runtime benchmark.

Zero-denominator conventions (degenerate turns must not poison corpus
aggregates): recall := 1 when there are no gold positions, precision :=
1 when nothing was proposed, error := 0 when the position universe is
empty. Percentages render at one decimal, half-up, matching the
reporting style of the reference results; internal values stay at full
precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP


class EvalError(Exception):
    pass


def fmt_pct(fraction, decimals=1):
    """Format a fraction as a percentage string, half-up rounding."""
    q = Decimal(1).scaleb(-decimals) if decimals else Decimal(1)
    return str((Decimal(repr(float(fraction))) * 100).quantize(
        q, rounding=ROUND_HALF_UP))


@dataclass
class ConfusionCounts:
    correct: int = 0
    false_alarm: int = 0
    miss: int = 0
    reject: int = 0  # neither gold nor proposed

    def __add__(self, other):
        return ConfusionCounts(
            self.correct + other.correct,
            self.false_alarm + other.false_alarm,
            self.miss + other.miss,
            self.reject + other.reject)

    @property
    def total(self):
        return self.correct + self.false_alarm + self.miss + self.reject


@dataclass
class MetricReport:
    recall: float
    precision: float
    error: float

    def as_pct(self, decimals=1):
        return {k: fmt_pct(getattr(self, k), decimals)
                for k in ("recall", "precision", "error")}


def score_trace_hypotheses(gold_per_turn, proposed_per_turn, universe_per_turn):
    """Confusion counts over parallel per-turn gap-index sets.

    correct = gold AND proposed, false_alarm = proposed only, miss =
    gold only, reject = neither; summed over turns.
    """
    if not len(gold_per_turn) == len(proposed_per_turn) == len(universe_per_turn):
        raise EvalError("per-turn sequences must have equal length")
    counts = ConfusionCounts()
    for gold, proposed, universe in zip(gold_per_turn, proposed_per_turn,
                                        universe_per_turn):
        gold, proposed, universe = set(gold), set(proposed), set(universe)
        outside = (gold | proposed) - universe
        if outside:
            raise EvalError(f"positions {sorted(outside)} outside the universe")
        counts = counts + ConfusionCounts(
            correct=len(gold & proposed),
            false_alarm=len(proposed - gold),
            miss=len(gold - proposed),
            reject=len(universe - (gold | proposed)))
    return counts


def metrics(c):
    """Recall / precision / error with the documented zero conventions."""
    recall = c.correct / (c.correct + c.miss) if c.correct + c.miss else 1.0
    precision = (c.correct / (c.correct + c.false_alarm)
                 if c.correct + c.false_alarm else 1.0)
    error = (c.miss + c.false_alarm) / c.total if c.total else 0.0
    return MetricReport(recall=recall, precision=precision, error=error)


def crosstab(labels_a, labels_b, exclude_turn_final=False, turn_final=None):
    """Row-normalized percentage table of labels_b per labels_a value.

    Returns a list of rows (label_a, cases, {label_b: percentage}), rows
    and columns ordered by first appearance. With exclude_turn_final,
    positions flagged in the parallel ``turn_final`` sequence are
    dropped before tabulating.
    """
    if len(labels_a) != len(labels_b):
        raise EvalError(
            f"label sequences differ in length: {len(labels_a)} vs {len(labels_b)}")
    if exclude_turn_final:
        if turn_final is None or len(turn_final) != len(labels_a):
            raise EvalError("exclude_turn_final needs an aligned flag sequence")
        pairs = [(a, b) for a, b, tf in zip(labels_a, labels_b, turn_final)
                 if not tf]
    else:
        pairs = list(zip(labels_a, labels_b))
    row_order, col_order, cells = [], [], {}
    for a, b in pairs:
        if a not in cells:
            cells[a] = {}
            row_order.append(a)
        if b not in col_order:
            col_order.append(b)
        cells[a][b] = cells[a].get(b, 0) + 1
    rows = []
    for a in row_order:
        cases = sum(cells[a].values())
        rows.append((a, cases,
                     {b: 100.0 * cells[a].get(b, 0) / cases for b in col_order}))
    return rows


MAX_RANK = 7


@dataclass
class RankHistogram:
    counts: dict = field(default_factory=lambda: {r: 0 for r in
                                                  list(range(1, MAX_RANK + 1)) + [">7"]})
    total: int = 0

    def record(self, rank):
        self.counts[rank if rank <= MAX_RANK else ">7"] += 1
        self.total += 1


def rank_experiment(sentences):
    """Histogram of the gold trace gap's score rank per sentence.

    Each sentence is (gap_scores, gold_gap); gaps are ranked by score
    descending with ties broken by lower gap index first.
    """
    hist = RankHistogram()
    for scores, gold_gap in sentences:
        if gold_gap is None or not 1 <= gold_gap <= len(scores):
            raise EvalError(f"sentence without a valid gold gap: {gold_gap}")
        ordered = sorted(range(1, len(scores) + 1),
                         key=lambda g: (-scores[g - 1], g))
        hist.record(ordered.index(gold_gap) + 1)
    return hist


@dataclass
class BenchReport:
    overall_with: float  # seconds, prosody gating on
    overall_without: float
    turn_count: int
    empty_edges_with: int = 0
    empty_edges_without: int = 0
    proposed_sites_with: int = 0
    proposed_sites_without: int = 0

    @property
    def average_with(self):
        return self.overall_with / self.turn_count if self.turn_count else 0.0

    @property
    def average_without(self):
        return self.overall_without / self.turn_count if self.turn_count else 0.0

    @property
    def speedup(self):
        if self.overall_without == 0:
            return 0.0
        return 1.0 - self.overall_with / self.overall_without


def bench(corpus, grammar, config_on, config_off, repeats=1):
    """Parse the corpus sequentially under both configs and time it.

    For every turn whose gold trace gaps all pass the gate, the two
    reading sets must be identical; a mismatch or any parse error aborts
    with the failing turn id. Each config runs ``repeats`` times; totals
    are averaged over repeats.
    """
    from .chart import parse, propose_trace_sites, ParseError

    totals = {"on": 0.0, "off": 0.0}
    edges = {"on": 0, "off": 0}
    sites = {"on": 0, "off": 0}
    readings = {"on": {}, "off": {}}
    for rep in range(repeats):
        for key, config in (("on", config_on), ("off", config_off)):
            for turn in corpus:
                try:
                    result = parse(turn, grammar, config)
                except ParseError as exc:
                    raise EvalError(f"turn {turn.turn_id!r}: {exc}") from exc
                totals[key] += result.stats["elapsed_ms"] / 1000.0
                if rep == 0:
                    edges[key] += result.stats["empty_edges"]
                    sites[key] += result.stats["proposed_sites"]
                    readings[key][turn.turn_id] = set(result.readings)
    for turn in corpus:
        gold = set(turn.gold_traces or [])
        gated = set(propose_trace_sites(turn, config_on))
        if gold <= gated:
            if readings["on"][turn.turn_id] != readings["off"][turn.turn_id]:
                raise EvalError(
                    f"turn {turn.turn_id!r}: gated reading set differs although "
                    f"all gold sites pass the gate")
    return BenchReport(
        overall_with=totals["on"] / repeats,
        overall_without=totals["off"] / repeats,
        turn_count=len(corpus),
        empty_edges_with=edges["on"],
        empty_edges_without=edges["off"],
        proposed_sites_with=sites["on"],
        proposed_sites_without=sites["off"])
