"""Hidden-state pooling and the pooled-embedding classifier.

The classifier is a single-hidden-layer MLP (tanh hidden layer, logistic
output) trained with seeded full-batch gradient descent on cross-entropy
plus optional l2. Everything is numpy; no GPU, no autograd.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyBatch,
    EmptySequence,
    SingleClassError,
)

DEFAULT_HIDDEN_WIDTH = 64

# Logistic inputs are clamped here before exponentiation when producing
# probabilities, keeping predict() strictly inside (0, 1).
_LOGIT_CLAMP = 30.0


def pool_hidden_states(vectors) -> np.ndarray:
    """Mean-pool a K x d matrix of per-token hidden states into one vector."""
    arr = np.asarray(vectors, dtype=float)
    if arr.size == 0 or arr.ndim != 2 or arr.shape[0] < 1:
        raise EmptySequence("need at least one K x d row to pool")
    if not np.all(np.isfinite(arr)):
        raise ValueError("hidden-state entries must be finite")
    return arr.mean(axis=0)


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 0  # 0 = full batch
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


@dataclass
class HiddenClassifier:
    w1: np.ndarray  # (H, d)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H,)
    b2: float
    seed: int = 0
    epochs: int = 0

    @property
    def d(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_width(self) -> int:
        return self.w1.shape[0]


def init_classifier(d: int, hidden_width: int = DEFAULT_HIDDEN_WIDTH, seed: int = 0) -> HiddenClassifier:
    """Symmetric uniform init scaled by fan-in, seeded for determinism."""
    rng = np.random.default_rng(seed)
    lim1 = 1.0 / np.sqrt(d)
    lim2 = 1.0 / np.sqrt(hidden_width)
    return HiddenClassifier(
        w1=rng.uniform(-lim1, lim1, size=(hidden_width, d)),
        b1=np.zeros(hidden_width),
        w2=rng.uniform(-lim2, lim2, size=hidden_width),
        b2=0.0,
        seed=seed,
    )


def _forward_logit(clf: HiddenClassifier, x: np.ndarray):
    a = np.tanh(x @ clf.w1.T + clf.b1)   # (n, H)
    z = a @ clf.w2 + clf.b2              # (n,)
    return a, z


def predict(clf: HiddenClassifier, h) -> float:
    """Probability of the positive class for one pooled embedding."""
    h = np.asarray(h, dtype=float)
    if h.shape != (clf.d,):
        raise DimensionMismatch(f"expected embedding of length {clf.d}, got shape {h.shape}")
    _, z = _forward_logit(clf, h[None, :])
    z = float(np.clip(z[0], -_LOGIT_CLAMP, _LOGIT_CLAMP))
    return 1.0 / (1.0 + np.exp(-z))


def predict_batch(clf: HiddenClassifier, hs) -> np.ndarray:
    hs = np.asarray(hs, dtype=float)
    if hs.ndim != 2 or hs.shape[1] != clf.d:
        raise DimensionMismatch(f"expected (n, {clf.d}) embeddings, got shape {hs.shape}")
    _, z = _forward_logit(clf, hs)
    z = np.clip(z, -_LOGIT_CLAMP, _LOGIT_CLAMP)
    return 1.0 / (1.0 + np.exp(-z))


def loss_and_gradient(clf: HiddenClassifier, batch, l2: float = 0.0):
    """Mean cross-entropy (+ l2 on weights) and its analytic gradient.

    Returns (loss, grads) with grads keyed like the parameter fields.
    The loss uses the stable log1p form of the logistic cross-entropy, so
    no clamping enters the training path and finite differences agree.
    """
    batch = list(batch)
    if not batch:
        raise EmptyBatch("loss_and_gradient needs a nonempty batch")
    x = np.asarray([e for e, _ in batch], dtype=float)
    y = np.asarray([lab for _, lab in batch], dtype=float)
    if x.ndim != 2 or x.shape[1] != clf.d:
        raise DimensionMismatch(f"expected (n, {clf.d}) embeddings, got shape {x.shape}")
    n = len(batch)

    a, z = _forward_logit(clf, x)
    # softplus(z) - y z == -[y log p + (1-y) log(1-p)]
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    loss += 0.5 * l2 * (float(np.sum(clf.w1 ** 2)) + float(np.sum(clf.w2 ** 2)))

    p = 1.0 / (1.0 + np.exp(-np.clip(z, -_LOGIT_CLAMP, _LOGIT_CLAMP)))
    dz = (p - y) / n                      # (n,)
    gw2 = a.T @ dz + l2 * clf.w2          # (H,)
    gb2 = float(np.sum(dz))
    da = np.outer(dz, clf.w2)             # (n, H)
    dpre = da * (1.0 - a ** 2)            # (n, H)
    gw1 = dpre.T @ x + l2 * clf.w1        # (H, d)
    gb1 = dpre.sum(axis=0)                # (H,)
    return loss, {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2}


def train(examples, cfg: TrainConfig, hidden_width: int = DEFAULT_HIDDEN_WIDTH) -> HiddenClassifier:
    """Gradient-descent training; deterministic per cfg.seed.

    batch_size 0 (the default) runs full-batch descent, for which the
    full-batch loss is non-increasing at a small enough learning rate.
    """
    examples = list(examples)
    if len(examples) < 2:
        raise EmptyBatch("need at least 2 training examples")
    labels = {lab for _, lab in examples}
    if labels != {0, 1}:
        raise SingleClassError("training data must contain both classes")
    d = len(examples[0][0])
    for e, _ in examples:
        if len(e) != d:
            raise DimensionMismatch("inconsistent embedding lengths in training data")

    clf = init_classifier(d, hidden_width, cfg.seed)
    rng = np.random.default_rng(cfg.seed + 1)
    n = len(examples)
    bs = cfg.batch_size if cfg.batch_size else n

    for _ in range(cfg.epochs):
        if bs >= n:
            batches = [examples]
        else:
            order = rng.permutation(n)
            batches = [
                [examples[i] for i in order[start:start + bs]]
                for start in range(0, n, bs)
            ]
        for batch in batches:
            _, grads = loss_and_gradient(clf, batch, cfg.l2)
            clf.w1 = clf.w1 - cfg.learning_rate * grads["w1"]
            clf.b1 = clf.b1 - cfg.learning_rate * grads["b1"]
            clf.w2 = clf.w2 - cfg.learning_rate * grads["w2"]
            clf.b2 = clf.b2 - cfg.learning_rate * grads["b2"]
    clf.epochs = cfg.epochs
    return clf


def save_classifier(clf: HiddenClassifier, path) -> None:
    """Flat text persistence: header (d, H, seed, epochs) then one parameter
    per line in w1, b1, w2, b2 order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{clf.d} {clf.hidden_width} {clf.seed} {clf.epochs}\n")
        for value in np.concatenate(
            [clf.w1.ravel(), clf.b1, clf.w2, np.asarray([clf.b2])]
        ):
            fh.write(repr(float(value)) + "\n")


def load_classifier(path) -> HiddenClassifier:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError("bad classifier header")
        d, hidden_width, seed, epochs = (int(v) for v in header)
        values = np.asarray([float(line) for line in fh if line.strip()])
    expected = hidden_width * d + hidden_width + hidden_width + 1
    if values.size != expected:
        raise ValueError(f"expected {expected} parameters, got {values.size}")
    w1 = values[: hidden_width * d].reshape(hidden_width, d)
    rest = values[hidden_width * d:]
    return HiddenClassifier(
        w1=w1,
        b1=rest[:hidden_width],
        w2=rest[hidden_width: 2 * hidden_width],
        b2=float(rest[2 * hidden_width]),
        seed=seed,
        epochs=epochs,
    )
