"""Two-output multilayer perceptron for boundary posteriors.

Architecture is fixed at two sigmoid hidden layers (40/20 nodes by
default) and two sigmoid output nodes, one for S3+ and one for S3-.
Training is plain stochastic gradient descent on squared error against
one-hot targets (1 for the node matching the reference label, 0 for the
other), with per-epoch class balancing: the minority class is resampled
with replacement up to the majority count, so each epoch presents an
equal number of vectors from each class.

``classify`` normalizes the two outputs to a proper posterior (sum 1) by
default; the raw sigmoid outputs are available with ``raw=True``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

OUTPUT_NODES = 2  # S3+ at index 0, S3- at index 1
LABEL_INDEX = {"S3+": 0, "S3-": 1}


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.2
    hidden1: int = 40
    hidden2: int = 20


class MlpClassifier:
    def __init__(self, input_dim, hidden1=40, hidden2=20, seed=0,
                 layout_id="default-242", weights=None):
        self.dims = (input_dim, hidden1, hidden2, OUTPUT_NODES)
        self.seed = seed
        self.layout_id = layout_id
        self.train_log = []
        if weights is not None:
            self.params = weights
        else:
            rng = np.random.default_rng(seed)
            self.params = []
            for fan_in, fan_out in zip(self.dims, self.dims[1:]):
                scale = 1.0 / np.sqrt(fan_in)
                self.params.append(
                    rng.uniform(-scale, scale, size=(fan_in, fan_out)))
                self.params.append(np.zeros(fan_out))
        for p, shape in zip(self.params, self._shapes()):
            if p.shape != shape:
                raise ValueError(f"weight shape {p.shape} != declared {shape}")

    def _shapes(self):
        shapes = []
        for fan_in, fan_out in zip(self.dims, self.dims[1:]):
            shapes.append((fan_in, fan_out))
            shapes.append((fan_out,))
        return shapes

    def _forward(self, x):
        """Returns the activation of every layer, input included."""
        acts = [np.asarray(x, dtype=np.float64)]
        a = acts[0]
        for i in range(0, len(self.params), 2):
            a = _sigmoid(a @ self.params[i] + self.params[i + 1])
            acts.append(a)
        return acts

    def raw_outputs(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dims[0]:
            raise ValueError(
                f"vector length {x.shape[-1]} != input dimension {self.dims[0]}")
        return self._forward(x)[-1]

    def classify(self, x, raw=False):
        """(p_S3+, p_S3-); normalized to sum 1 unless raw=True."""
        out = self.raw_outputs(x)
        if not raw:
            out = out / out.sum(axis=-1, keepdims=True)
        return float(out[..., 0]), float(out[..., 1])

    def loss(self, x, target):
        out = self._forward(x)[-1]
        return 0.5 * float(np.sum((out - target) ** 2))

    def gradients(self, x, target):
        """Analytic squared-error gradients, aligned with self.params."""
        acts = self._forward(x)
        delta = (acts[-1] - target) * acts[-1] * (1.0 - acts[-1])
        grads = [None] * len(self.params)
        for i in range(len(self.params) - 2, -1, -2):
            layer = i // 2
            grads[i] = np.outer(acts[layer], delta)
            grads[i + 1] = delta
            if layer > 0:
                delta = (delta @ self.params[i].T) * acts[layer] * (1.0 - acts[layer])
        return grads

    def to_json(self):
        return json.dumps({
            "dims": list(self.dims),
            "seed": self.seed,
            "layout_id": self.layout_id,
            "weights": [p.tolist() for p in self.params],
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        dims = d["dims"]
        weights = [np.array(w, dtype=np.float64) for w in d["weights"]]
        return cls(dims[0], dims[1], dims[2], seed=d["seed"],
                   layout_id=d["layout_id"], weights=weights)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())


def train(data, config=None, seed=0, layout_id="default-242"):
    """Train a classifier on (vector, s3 label) pairs.

    S3? items are excluded (they are held out for evaluation, never
    trained on). Deterministic given the seed, which drives both weight
    initialization and the per-epoch balancing resample. The per-epoch
    presented class counts are recorded on clf.train_log.
    """
    if config is None:
        config = TrainConfig()
    vectors, labels = [], []
    for vec, label in data:
        if label == "S3?":
            continue
        if label not in LABEL_INDEX:
            raise ValueError(f"bad training label {label!r}")
        vectors.append(np.asarray(vec, dtype=np.float64))
        labels.append(LABEL_INDEX[label])
    if not vectors:
        raise ValueError("no trainable vectors (after S3? exclusion)")
    labels = np.array(labels)
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"inconsistent vector dimensions: {sorted(dims)}")
    X = np.stack(vectors)
    idx_plus = np.flatnonzero(labels == 0)
    idx_minus = np.flatnonzero(labels == 1)
    if len(idx_plus) == 0 or len(idx_minus) == 0:
        raise ValueError("training data must contain both S3+ and S3-")

    clf = MlpClassifier(X.shape[1], config.hidden1, config.hidden2,
                        seed=seed, layout_id=layout_id)
    targets = np.eye(OUTPUT_NODES)
    rng = np.random.default_rng(seed + 1)
    majority = max(len(idx_plus), len(idx_minus))

    for epoch in range(config.epochs):
        epoch_idx = []
        for cls_idx in (idx_plus, idx_minus):
            take = cls_idx
            if len(cls_idx) < majority:
                extra = rng.choice(cls_idx, size=majority - len(cls_idx),
                                   replace=True)
                take = np.concatenate([cls_idx, extra])
            epoch_idx.append(take)
        order = np.concatenate(epoch_idx)
        rng.shuffle(order)
        for i in order:
            grads = clf.gradients(X[i], targets[labels[i]])
            for p, g in zip(clf.params, grads):
                p -= config.learning_rate * g
        clf.train_log.append({
            "epoch": epoch,
            "presented": {"S3+": majority, "S3-": majority},
        })
    return clf


def score_turn(clf, turn, layout=None):
    """Write boundary scores into a turn from its syllable records.

    The score of the gap after word i is the normalized p(S3+) of that
    word's final syllable. Returns the score list (also stored on the
    turn). Alignment problems (a word with no final-flagged syllable)
    surface as CorpusError from the turn itself.
    """
    from .prosody import DEFAULT_LAYOUT, extract_features

    if layout is None:
        layout = DEFAULT_LAYOUT
    records = [s.features for s in turn.syllables or []]
    finals = turn.word_final_syllables()
    scores = []
    for syl_index in finals:
        vec = extract_features(records, syl_index, layout)
        p_plus, _ = clf.classify(vec)
        scores.append(p_plus)
    turn.gap_scores = scores
    return scores
