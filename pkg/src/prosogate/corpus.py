"""Turn records and JSON Lines corpus I/O.

Gap indexing is 1-based: gap i is the position after word i, and gap n
(n = word count) is the turn-final gap. ``gap_scores[i-1]`` is the score
of gap i. Exact line schema:

    {"id": str, "words": [str], "gap_scores": [num]?,
     "gold_traces": [int]?, "s3_labels": [str]?,
     "syllables": [{"word": int, "features": {...}}]?}

An optional leading line ``{"_meta": {...}}`` carries provenance
(generator seed or source description).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .prosody import SyllableRecord

S3_LABELS = ("S3+", "S3-", "S3?")


class CorpusError(Exception):
    pass


@dataclass
class Syllable:
    word: int  # 1-based index of the word this syllable belongs to
    features: SyllableRecord


@dataclass
class TurnRecord:
    turn_id: str
    words: list
    gap_scores: list | None = None
    gold_traces: list | None = None  # sorted 1-based gap indices
    s3_labels: list | None = None  # one label per gap
    syllables: list | None = None  # [Syllable]

    def validate(self):
        n = len(self.words)
        if not self.words:
            raise CorpusError(f"turn {self.turn_id!r}: empty word list")
        if self.gap_scores is not None and len(self.gap_scores) != n:
            raise CorpusError(
                f"turn {self.turn_id!r}: gap_scores has "
                f"{len(self.gap_scores)} entries for {n} words")
        if self.gold_traces is not None:
            bad = [g for g in self.gold_traces if not 1 <= g <= n]
            if bad:
                raise CorpusError(
                    f"turn {self.turn_id!r}: gold_traces {bad} outside 1..{n}")
        if self.s3_labels is not None:
            if len(self.s3_labels) != n:
                raise CorpusError(
                    f"turn {self.turn_id!r}: s3_labels has "
                    f"{len(self.s3_labels)} entries for {n} words")
            bad = [l for l in self.s3_labels if l not in S3_LABELS]
            if bad:
                raise CorpusError(
                    f"turn {self.turn_id!r}: bad s3_labels {bad}")
        if self.syllables is not None:
            for s in self.syllables:
                if not 1 <= s.word <= n:
                    raise CorpusError(
                        f"turn {self.turn_id!r}: syllables references "
                        f"word {s.word} outside 1..{n}")

    def word_final_syllables(self):
        """Per word (1-based), the index into self.syllables of its final
        syllable. Raises CorpusError for a word with no final-flagged
        syllable."""
        final = {}
        for i, s in enumerate(self.syllables or []):
            if s.features.word_final:
                final[s.word] = i
        missing = [w for w in range(1, len(self.words) + 1) if w not in final]
        if missing:
            raise CorpusError(
                f"turn {self.turn_id!r}: words {missing} have no "
                f"word-final syllable")
        return [final[w] for w in range(1, len(self.words) + 1)]

    def to_dict(self):
        d = {"id": self.turn_id, "words": list(self.words)}
        if self.gap_scores is not None:
            # up to 6 fractional digits on the wire
            d["gap_scores"] = [round(float(s), 6) for s in self.gap_scores]
        if self.gold_traces is not None:
            d["gold_traces"] = sorted(self.gold_traces)
        if self.s3_labels is not None:
            d["s3_labels"] = list(self.s3_labels)
        if self.syllables is not None:
            d["syllables"] = [{"word": s.word, "features": s.features.to_dict()}
                              for s in self.syllables]
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            syllables = None
            if d.get("syllables") is not None:
                syllables = [
                    Syllable(word=s["word"],
                             features=SyllableRecord.from_dict(s["features"]))
                    for s in d["syllables"]]
            turn = cls(
                turn_id=d["id"],
                words=list(d["words"]),
                gap_scores=d.get("gap_scores"),
                gold_traces=sorted(d["gold_traces"]) if d.get("gold_traces")
                is not None else None,
                s3_labels=d.get("s3_labels"),
                syllables=syllables,
            )
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"bad turn record: {exc}") from exc
        turn.validate()
        return turn


@dataclass
class Corpus:
    turns: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.turns)

    def __len__(self):
        return len(self.turns)

    def validate(self):
        seen = set()
        for t in self.turns:
            if t.turn_id in seen:
                raise CorpusError(f"duplicate turn id {t.turn_id!r}")
            seen.add(t.turn_id)
            t.validate()


def loads_corpus(text):
    corpus = Corpus()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: malformed JSON: {exc}") from exc
        if "_meta" in obj:
            corpus.provenance = obj["_meta"]
            continue
        try:
            corpus.turns.append(TurnRecord.from_dict(obj))
        except CorpusError as exc:
            raise CorpusError(f"line {lineno}: {exc}") from exc
    corpus.validate()
    return corpus


def load_corpus(path):
    with open(path, encoding="utf-8") as f:
        return loads_corpus(f.read())


def dumps_corpus(corpus):
    lines = []
    if corpus.provenance:
        lines.append(json.dumps({"_meta": corpus.provenance}, sort_keys=True))
    for t in corpus.turns:
        lines.append(json.dumps(t.to_dict(), sort_keys=True))
    return "\n".join(lines) + "\n"


def save_corpus(corpus, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_corpus(corpus))
