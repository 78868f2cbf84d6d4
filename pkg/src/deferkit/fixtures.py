"""Synthetic dataset generation for end-to-end runs and calibration demos.

Two profiles:

* "default": labels drawn at the requested imbalance; verbalised and
  hidden-state probabilities produced from jointly Gaussian latent scores
  whose total correlation (label signal plus noise) is steered to the
  requested target; embeddings as Gaussian class clusters so the pooled
  classifier has signal; canonical guidance text consistent with the
  verbalised probability.

* "imbalanced-miscal": a deterministic layout for the calibration-metric
  demonstration: the first bin is perfectly calibrated and holds nearly all
  (negative-heavy) mass, while every other decile bin holds a small group
  whose confidence is off its empirical label rate by exactly 0.5. Mass
  weighting keeps the classic error small even though most of the
  confidence range is badly calibrated.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DatasetManifest, PredictionRecord
from .errors import ParameterRange
from .guidance import GuidanceDocument, emit_guidance

PROFILES = ("default", "imbalanced-miscal")


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _guidance_text(t_hat: float) -> str:
    prob = round(t_hat, 2)
    verdict = 1 if prob >= 0.5 else 0
    doc = GuidanceDocument(
        verdict=verdict,
        probability=prob,
        reason_for="Findings in the report are consistent with the disorder.",
        reason_against="Key confirmatory findings are not explicitly described.",
    )
    return emit_guidance(doc)


def generate_fixture(
    n: int,
    imbalance: float = 0.95,
    correlation: float = 0.53,
    profile: str = "default",
    seed: int = 0,
    embedding_dim: int = 8,
    signal: float = 1.2,
) -> DatasetManifest:
    """Build a synthetic labeled dataset; deterministic per seed."""
    if n < 1:
        raise ParameterRange(f"n must be >= 1, got {n}")
    if not 0.0 <= imbalance < 1.0:
        raise ParameterRange(f"imbalance out of [0, 1): {imbalance}")
    if not -1.0 <= correlation <= 1.0:
        raise ParameterRange(f"correlation out of [-1, 1]: {correlation}")
    if profile not in PROFILES:
        raise ParameterRange(f"unknown profile {profile!r}")
    if embedding_dim < 1:
        raise ParameterRange(f"embedding_dim must be >= 1, got {embedding_dim}")

    if profile == "imbalanced-miscal":
        return _miscalibrated_fixture(n, seed, embedding_dim)

    rng = np.random.default_rng(seed)
    p_pos = 1.0 - imbalance
    y = (rng.random(n) < p_pos).astype(int)
    m = 2.0 * y - 1.0

    # Total latent correlation = (s^2 v + c_noise) / (s^2 v + 1) with
    # v = Var(2y-1); solve the noise correlation for the requested target.
    v = 4.0 * p_pos * (1.0 - p_pos)
    c_noise = correlation * (signal ** 2 * v + 1.0) - signal ** 2 * v
    c_noise = float(np.clip(c_noise, -0.999, 0.999))
    n_t = rng.standard_normal(n)
    w = rng.standard_normal(n)
    n_e = c_noise * n_t + math.sqrt(max(0.0, 1.0 - c_noise ** 2)) * w

    z_t = signal * m + n_t
    z_e = signal * m + n_e
    t_hat = _sigmoid(z_t)
    epsilon_hat = _sigmoid(1.5 * z_e)  # sharper hidden-state source

    centers = {
        0: rng.normal(-1.0, 1.0, size=embedding_dim),
        1: rng.normal(1.0, 1.0, size=embedding_dim),
    }
    records = []
    for i in range(n):
        emb = centers[int(y[i])] + 0.5 * rng.standard_normal(embedding_dim)
        t = float(np.clip(t_hat[i], 0.0, 1.0))
        records.append(PredictionRecord(
            id=f"case-{i:06d}",
            report_text=f"Synthetic report {i}: "
                        + ("findings suggestive of stenosis." if y[i] else "no acute findings."),
            label=int(y[i]),
            t_hat=t,
            epsilon_hat=float(np.clip(epsilon_hat[i], 0.0, 1.0)),
            embedding=tuple(float(v) for v in emb),
            guidance_text=_guidance_text(t),
        ))
    return DatasetManifest(records=tuple(records), d=embedding_dim)


# Deterministic miscalibration layout, per base block of 2030 records:
#   bin 1: 1850 records at confidence 0.02, exactly 37 positive (error 0)
#   bins 2..10: 20 records each at the decile midpoint c, with positives
#     chosen so |c - label rate| = 0.5 exactly (rate c+0.5 below the
#     boundary, c-0.5 above it).
_BASE_FIRST_BIN = (1850, 0.02, 37)
_BASE_MISCAL_BIN_SIZE = 20


def _miscalibrated_fixture(n: int, seed: int, embedding_dim: int) -> DatasetManifest:
    block = _BASE_FIRST_BIN[0] + 9 * _BASE_MISCAL_BIN_SIZE
    scale = max(1, n // block)
    rng = np.random.default_rng(seed)

    rows: list[tuple[float, int]] = []
    count1, conf1, pos1 = (_BASE_FIRST_BIN[0] * scale, _BASE_FIRST_BIN[1],
                           _BASE_FIRST_BIN[2] * scale)
    rows.extend((conf1, 1 if i < pos1 else 0) for i in range(count1))
    for m in range(2, 11):
        c = (m - 0.5) / 10.0
        rate = c + 0.5 if c < 0.5 else c - 0.5
        size = _BASE_MISCAL_BIN_SIZE * scale
        pos = round(rate * size)
        rows.extend((c, 1 if i < pos else 0) for i in range(size))

    records = []
    for i, (conf, label) in enumerate(rows):
        emb = rng.standard_normal(embedding_dim) + (2.0 if label else -2.0)
        records.append(PredictionRecord(
            id=f"case-{i:06d}",
            report_text=f"Synthetic miscalibrated case {i}.",
            label=label,
            t_hat=conf,
            epsilon_hat=conf,
            embedding=tuple(float(v) for v in emb),
            guidance_text=_guidance_text(conf),
        ))
    return DatasetManifest(records=tuple(records), d=embedding_dim)
