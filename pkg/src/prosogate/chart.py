"""Bottom-up chart parser with prosody-gated empty verbal heads.

Positions are inter-word gaps: word i (1-based) spans (i-1, i); gap i is
the position after word i, so a zero-width empty edge hypothesized at
gap g has span (g, g). Three constraints govern empty edges:

a) an empty edge only appears at or to the right of the end of the
   lexical edge that licenses it;
b) the trace must sit inside the projection its licensing verb selects —
   enforced structurally, since the v2-selection schema can only
   discharge a DSL value that unifies with the verb's own trace LOCAL;
c) every empty edge instantiates the precomputed trace template of an
   overt verb in the input, never an underspecified skeleton.

Empty edges may only serve as right daughters (right-periphery
restriction), which also guarantees termination: no derived edge is ever
zero-width, so empty edges cannot feed each other.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from . import fs


class ParseError(Exception):
    pass


class UnknownWordError(ParseError):
    def __init__(self, word):
        super().__init__(f"unknown word {word!r}")
        self.word = word


class EdgeCapExceeded(ParseError):
    def __init__(self, cap, stats):
        super().__init__(f"edge cap {cap} exceeded")
        self.stats = stats


class InputFormatError(ParseError):
    pass


@dataclass
class ParseConfig:
    """Gating configuration for empty-edge introduction.

    mode "off" is equivalent to threshold mode with tau = 0 (every gap
    passes, since scores are non-negative).
    """

    mode: str = "threshold"  # threshold | rank | off
    threshold: float = 0.01
    rank_limit: int = 2
    max_edges: int = 20000
    assume_final_boundary: bool = False
    max_readings: int = 2000

    def __post_init__(self):
        if self.mode not in ("threshold", "rank", "off"):
            raise ValueError(f"bad gate mode {self.mode!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        if self.rank_limit < 1:
            raise ValueError("rank limit must be positive")


@dataclass
class Edge:
    edge_id: int
    start: int
    end: int
    category: object  # FS
    kind: str  # lexical | empty | derived
    entry: object = None  # LexEntry for lexical/empty edges
    licenser: int | None = None  # edge id of the licensing V2 lexical edge
    # (schema name, left edge id, right edge id) alternatives; a packed
    # forest node may collect several derivations of the same category.
    derivations: list = field(default_factory=list)

    @property
    def span(self):
        return (self.start, self.end)


@dataclass
class TraceStackEntry:
    licenser_id: int
    entry: object  # the V2 LexEntry (carries the trace template)
    licenser_end: int


def propose_trace_sites(turn, config):
    """Select the gap indices eligible for empty-edge introduction.

    Threshold mode returns gaps with score >= tau in ascending order;
    rank mode the top-N scores (ties broken by lower gap index first) in
    descending-score order; mode off returns every gap.
    """
    n = len(turn.words)
    scores = turn.gap_scores
    if scores is None or len(scores) != n:
        raise InputFormatError(
            f"turn {turn.turn_id!r}: need one gap score per word "
            f"(got {0 if scores is None else len(scores)} for {n} words)"
        )
    gaps = list(range(1, n + 1))
    if config.mode == "off":
        return gaps
    if config.mode == "rank":
        ordered = sorted(gaps, key=lambda g: (-scores[g - 1], g))
        return ordered[: config.rank_limit]
    sites = [g for g in gaps if scores[g - 1] >= config.threshold]
    if config.assume_final_boundary and n not in sites:
        sites.append(n)
    return sites


def is_root_category(cat):
    """Saturated and trace-free: empty SUBCAT and empty (bound) DSL."""
    subcat = cat.get("LOC", "SUBCAT")
    dsl = cat.get("DSL")
    return (
        subcat is not None and fs.is_elist(subcat)
        and (dsl is None or fs.is_elist(dsl))
    )


class Chart:
    def __init__(self, n_words):
        self.n = n_words
        self.edges = []
        self.by_start = {}  # start -> [edge]
        self.by_end = {}
        self.seen = {}  # (start, end, kind, canonical cat) -> edge

    def add(self, start, end, category, kind, entry=None, licenser=None,
            derivation=None):
        """Insert or pack an edge. Returns (edge, is_new)."""
        key = (start, end, kind, fs.canonical(category))
        edge = self.seen.get(key)
        if edge is not None:
            if derivation is not None and derivation not in edge.derivations:
                edge.derivations.append(derivation)
            return edge, False
        edge = Edge(len(self.edges), start, end, category, kind,
                    entry=entry, licenser=licenser)
        if derivation is not None:
            edge.derivations.append(derivation)
        self.edges.append(edge)
        self.by_start.setdefault(start, []).append(edge)
        self.by_end.setdefault(end, []).append(edge)
        self.seen[key] = edge
        return edge, True


@dataclass
class ParseResult:
    turn_id: str
    n_words: int
    readings: list  # bracketed derivation strings, sorted
    proposed_sites: list
    stats: dict
    _chart: object = None
    _root_trees: list = None  # DerivTree per reading, aligned with readings

    @property
    def forest(self):
        return [e for e in self._chart.edges
                if e.start == 0 and e.end == self.n_words
                and is_root_category(e.category)]


def parse(turn, grammar, config):
    """Exhaustively parse one turn; see module docstring for the gating.

    Raises UnknownWordError for out-of-lexicon words and EdgeCapExceeded
    (with partial statistics attached) when config.max_edges is hit. An
    unparseable turn yields an empty reading list, not an error.
    """
    t0 = time.perf_counter()
    n = len(turn.words)
    sites = propose_trace_sites(turn, config)
    chart = Chart(n)
    agenda = deque()
    stack = []
    stats = {"lexical_edges": 0, "empty_edges": 0, "derived_edges": 0,
             "proposed_sites": len(sites), "elapsed_ms": 0.0}

    def cap_check():
        if len(chart.edges) > config.max_edges:
            stats["elapsed_ms"] = (time.perf_counter() - t0) * 1000.0
            raise EdgeCapExceeded(config.max_edges, stats)

    # (i) lexical edges, (ii) trace stack
    for i, word in enumerate(turn.words):
        entries = grammar.entries(word)
        if not entries:
            raise UnknownWordError(word)
        for entry in entries:
            edge, _ = chart.add(i, i + 1, entry.category, "lexical", entry=entry)
            agenda.append(edge)
            stats["lexical_edges"] += 1
            if entry.is_v2:
                stack.append(TraceStackEntry(edge.edge_id, entry, i + 1))

    # (iii) empty edges at eligible gaps, one per (gap, template); the
    # leftmost qualifying V2 edge is recorded as licenser.
    placed = set()
    for g in sorted(sites):
        for item in stack:
            if g < item.licenser_end:
                continue  # constraint a
            if (g, item.entry.entry_id) in placed:
                continue
            placed.add((g, item.entry.entry_id))
            edge, is_new = chart.add(g, g, item.entry.trace_template, "empty",
                                     entry=item.entry, licenser=item.licenser_id)
            if is_new:
                agenda.append(edge)
                stats["empty_edges"] += 1

    # (iv) close under the schemata; empty edges only as right daughters.
    def combine(left, right):
        for schema in grammar.schemata:
            mother = schema.apply(left.category, right.category)
            if mother is None:
                continue
            new_edge, is_new = chart.add(
                left.start, right.end, mother, "derived",
                derivation=(schema, left.edge_id, right.edge_id))
            if is_new:
                stats["derived_edges"] += 1
                agenda.append(new_edge)
                cap_check()

    while agenda:
        edge = agenda.popleft()
        if edge.kind != "empty":
            for right in list(chart.by_start.get(edge.end, [])):
                if right is not edge:
                    combine(edge, right)
        for left in list(chart.by_end.get(edge.start, [])):
            if left is not edge and left.kind != "empty" and left.start < left.end:
                combine(left, edge)

    roots = [e for e in chart.edges
             if e.start == 0 and e.end == n and is_root_category(e.category)]
    trees = []
    for root in roots:
        trees.extend(_unpack(root, chart, config.max_readings - len(trees)))
    trees.sort(key=lambda t: t.label())
    readings = [t.label() for t in trees]
    stats["elapsed_ms"] = (time.perf_counter() - t0) * 1000.0
    return ParseResult(
        turn_id=turn.turn_id, n_words=n, readings=readings,
        proposed_sites=sites, stats=stats, _chart=chart, _root_trees=trees)


class DerivTree:
    """One concrete derivation unpacked from the forest."""

    __slots__ = ("edge", "schema", "left", "right", "_label")

    def __init__(self, edge, schema=None, left=None, right=None):
        self.edge = edge
        self.schema = schema
        self.left = left
        self.right = right
        self._label = None

    def label(self):
        if self._label is None:
            self._label = derivation_label(
                self.edge.kind, self.edge.entry, self.edge.start,
                self.schema.name if self.schema else None,
                self.left.label() if self.left else None,
                self.right.label() if self.right else None)
        return self._label


def derivation_label(kind, entry, start, schema=None, left=None, right=None):
    """Shared bracketed-string format for chart and oracle derivations."""
    if kind == "lexical":
        return f"{entry.orth}/{entry.entry_id}"
    if kind == "empty":
        return f"t/{entry.entry_id}@{start}"
    return f"({schema} {left} {right})"


def _unpack(edge, chart, limit):
    if limit <= 0:
        return []
    if edge.kind != "derived":
        return [DerivTree(edge)]
    out = []
    for schema, lid, rid in edge.derivations:
        lefts = _unpack(chart.edges[lid], chart, limit - len(out))
        for lt in lefts:
            rights = _unpack(chart.edges[rid], chart, limit - len(out))
            for rt in rights:
                out.append(DerivTree(edge, schema, lt, rt))
                if len(out) >= limit:
                    return out
    return out


def extract_pred_arg(result, reading_index):
    """Read the flat predicate-argument record off one reading.

    The derivation is replayed in a single unification workspace so that
    every lexical SEM block ends up fully instantiated; records are
    (relation, ((role, value), ...)) tuples with deterministic order.
    Raises IndexError("no reading") on an empty forest or bad index.
    """
    trees = result._root_trees
    if not trees or not 0 <= reading_index < len(trees):
        raise IndexError("no reading")
    sems = []

    def build(tree):
        edge = tree.edge
        if edge.kind in ("lexical", "empty"):
            cat = fs.copy_fs(edge.entry.category if edge.kind == "lexical"
                             else edge.entry.trace_template)
            sem = cat.get("LOC", "SEM")
            if sem is not None:
                sems.append(sem)
            return cat
        left = build(tree.left)
        right = build(tree.right)
        inst = fs.copy_fs(tree.schema.pattern)
        fs.unify_mut(inst.attrs["LEFT"], left)
        fs.unify_mut(fs._deref(inst).attrs["RIGHT"], right)
        return fs._deref(inst).attrs["MOTHER"]

    build(trees[reading_index])
    records = set()
    for sem in sems:
        sem = fs.resolve(sem)
        reln = sem.get("RELN")
        if reln is None or reln.kind != fs.ATOM:
            continue
        args = sem.get("ARGS")
        roles = []
        if args is not None and args.kind == fs.AVM:
            for role in sorted(args.attrs):
                val = args.attrs[role]
                roles.append((role, val.atom if val.kind == fs.ATOM else "_"))
        records.add((reln.atom, tuple(roles)))
    return tuple(sorted(records))
