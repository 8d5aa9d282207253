"""Synthetic corpus generator.

Stands in for the labelled speech data this kind of experiment normally
runs on: turns are composed from sentence templates over the shipped
fragment grammar's vocabulary, word-final syllables at syntactic
boundaries draw their measurements from the S3+ distribution (others
from S3-), and gap scores are calibrated so that every gold trace gap
scores >= 0.01 while most non-boundary gaps fall below any reasonable
threshold. Deterministic given the seed.
"""

from __future__ import annotations

import random

from .corpus import Corpus, Syllable, TurnRecord
from .prosody import SyllableRecord, DEFAULT_LAYOUT

PRONOUNS = ["er", "sie", "ich", "du"]
DETS = ["den", "das"]
NOUNS = {"den": "wagen", "das": "auto"}
ADVS = ["gestern", "heute"]
TRANS = ["reparierte", "kaufte"]

# (pattern, gold final trace?) -- slot names are expanded per turn.
V2_PATTERNS = [
    (["ADV", "VT", "PRON", "DET", "NOUN"], True),
    (["PRON", "VT", "ADV", "DET", "NOUN"], True),
    (["ADV", "schlief", "PRON3"], True),
    (["PRON3", "schlief", "ADV"], True),
    (["ich", "glaube", "du", "sollst", "nicht", "töten"], True),
    (["ich", "glaube", "daß", "du", "nicht", "töten", "sollst"], True),
    (["PRON3", "dachte", "daß", "PRON3", "ADV", "DET", "NOUN", "VT"], True),
    (["ich", "glaube", "daß", "PRON3", "schlief"], True),
]
NO_TRACE_PATTERNS = [
    (["daß", "PRON3", "ADV", "DET", "NOUN", "VT"], False),
    (["daß", "PRON3", "schlief"], False),
    (["im", "april"], False),
]

# Rough syllable counts so turns have realistic syllable streams.
SYLLABLE_COUNT = {
    "er": 1, "sie": 1, "ich": 1, "du": 1, "den": 1, "das": 1,
    "wagen": 2, "auto": 2, "april": 2, "gestern": 2, "heute": 2,
    "nicht": 1, "daß": 1, "im": 1, "reparierte": 4, "kaufte": 2,
    "schlief": 1, "dachte": 2, "glaube": 2, "sollst": 1, "töten": 2,
}


def _expand(pattern, rng):
    words = []
    det = None
    for slot in pattern:
        if slot == "PRON":
            words.append(rng.choice(PRONOUNS))
        elif slot == "PRON3":
            words.append(rng.choice(["er", "sie"]))
        elif slot == "ADV":
            words.append(rng.choice(ADVS))
        elif slot == "VT":
            words.append(rng.choice(TRANS))
        elif slot == "DET":
            det = rng.choice(DETS)
            words.append(det)
        elif slot == "NOUN":
            words.append(NOUNS[det])
        else:
            words.append(slot)
    return words


def _syllable(rng, mean, word_final, layout):
    def draw(n):
        return [rng.gauss(mean, 1.0) for _ in range(n)]

    vals = draw(13)
    return SyllableRecord(
        nucleus_dur=vals[0],
        f0_min=vals[1], f0_max=vals[2], f0_onset=vals[3], f0_offset=vals[4],
        f0_min_pos=vals[5], f0_max_pos=vals[6], f0_onset_pos=vals[7],
        f0_offset_pos=vals[8],
        energy_max=vals[9], energy_max_pos=vals[10],
        energy_mean=vals[11], f0_mean=vals[12],
        accent=rng.random() < 0.4,
        word_final=word_final,
        pause_before=0.0,
        pause_after=max(0.0, rng.gauss(0.15 * mean, 0.05)) if word_final else 0.0,
        f0_regression=draw(layout.f0_reg_len),
        energy_regression=draw(layout.energy_reg_len),
    )


def _gap_score(rng, label, is_gold):
    if is_gold:
        return 0.3 + 0.69 * rng.random()  # calibrated: never below 0.01
    if label == "S3+":
        return 0.2 + 0.7 * rng.random()
    if label == "S3?":
        return 10.0 ** (-4.0 * rng.random())
    return 10.0 ** (-9.0 * rng.random())  # mostly far below 0.01


def synth_corpus(seed=42, turns=104, separation=2.0, placement="final",
                 v2_only=False, max_words=None, layout=DEFAULT_LAYOUT):
    """Generate a corpus of template sentences with syllables, S3 labels,
    calibrated gap scores, and gold trace positions.

    placement "final" puts the gold trace at the clause-final gap of V2
    turns (mixed with trace-less subordinate/fragment turns); "none"
    generates only trace-less turns. v2_only restricts to V2 templates
    with exactly one gold gap each, as needed for the rank experiment.
    """
    if turns <= 0:
        raise ValueError("need at least one turn")
    if placement not in ("final", "none"):
        raise ValueError(f"unknown placement rule {placement!r}")
    rng = random.Random(seed)
    if placement == "none":
        pool = NO_TRACE_PATTERNS
    elif v2_only:
        pool = V2_PATTERNS
    else:
        pool = V2_PATTERNS + V2_PATTERNS + NO_TRACE_PATTERNS
    if max_words is not None:
        pool = [p for p in pool if len(p[0]) <= max_words]
        if not pool:
            raise ValueError(f"no template with at most {max_words} words")

    corpus = Corpus(provenance={
        "generator": "synth", "seed": seed,
        "params": {"turns": turns, "separation": separation,
                   "placement": placement, "v2_only": v2_only,
                   "max_words": max_words}})
    for k in range(turns):
        pattern, has_trace = pool[rng.randrange(len(pool))]
        words = _expand(pattern, rng)
        n = len(words)
        gold = [n] if has_trace else []
        labels = []
        for gap in range(1, n + 1):
            if gap == n:
                labels.append("S3+")  # clause boundary at the turn end
            elif rng.random() < 0.05:
                labels.append("S3?")
            else:
                labels.append("S3-")
        scores = [
            round(_gap_score(rng, labels[g - 1], g in gold), 6)
            for g in range(1, n + 1)]
        syllables = []
        for w, word in enumerate(words, start=1):
            count = SYLLABLE_COUNT.get(word, 2)
            for s in range(count):
                final = s == count - 1
                if final and labels[w - 1] == "S3+":
                    mean = separation / 2.0
                elif final and labels[w - 1] == "S3?":
                    mean = 0.0
                else:
                    mean = -separation / 2.0
                syllables.append(
                    Syllable(word=w, features=_syllable(rng, mean, final, layout)))
        corpus.turns.append(TurnRecord(
            turn_id=f"s{k:04d}", words=words, gap_scores=scores,
            gold_traces=gold, s3_labels=labels, syllables=syllables))
    corpus.validate()
    return corpus
