"""Blend verbalised and hidden-state probabilities into a combined prediction."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from .core import DatasetManifest
from .errors import EmptyInput, MissingSource, SingleClassError

DEFAULT_ALPHA = 0.5


def combine(t_hat: Optional[float], epsilon_hat: Optional[float], alpha: float) -> float:
    """Convex blend alpha * epsilon_hat + (1 - alpha) * t_hat."""
    if t_hat is None or epsilon_hat is None:
        raise MissingSource("combine needs both the verbalised and hidden-state probability")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha out of [0, 1]: {alpha}")
    return alpha * epsilon_hat + (1.0 - alpha) * t_hat


def _f1_at_half(mu_values, labels) -> float:
    tp = fp = fn = 0
    for mu, y in zip(mu_values, labels):
        pred = 1 if mu >= 0.5 else 0
        if pred == 1 and y == 1:
            tp += 1
        elif pred == 1 and y == 0:
            fp += 1
        elif pred == 0 and y == 1:
            fn += 1
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def fit_alpha(validation, grid_step: float = 0.01) -> float:
    """Grid-search the blend weight maximizing F1 of thresholded combined
    predictions at 0.5. Ties break toward 0.5, then toward the smaller alpha.

    validation: iterable of (t_hat, epsilon_hat, label).
    """
    validation = list(validation)
    if not validation:
        raise EmptyInput("fit_alpha needs a nonempty validation set")
    if not (0.0 < grid_step <= 0.5):
        raise ValueError(f"grid_step out of (0, 0.5]: {grid_step}")
    labels = [y for _, _, y in validation]
    if len(set(labels)) < 2:
        raise SingleClassError("validation set must contain both classes")

    grid = []
    k = 0
    while True:
        alpha = k * grid_step
        if alpha >= 1.0 - 1e-12:
            grid.append(1.0)
            break
        grid.append(alpha)
        k += 1

    best_alpha = None
    best_score = -1.0
    for alpha in grid:
        mu = [combine(t, e, alpha) for t, e, _ in validation]
        score = _f1_at_half(mu, labels)
        if (
            best_alpha is None
            or score > best_score + 1e-12
            or (
                abs(score - best_score) <= 1e-12
                and (
                    abs(alpha - 0.5) < abs(best_alpha - 0.5) - 1e-12
                    or (
                        abs(abs(alpha - 0.5) - abs(best_alpha - 0.5)) <= 1e-12
                        and alpha < best_alpha
                    )
                )
            )
        ):
            best_alpha = alpha
            best_score = score
    return best_alpha


def attach_combined(manifest: DatasetManifest, alpha: float = DEFAULT_ALPHA) -> DatasetManifest:
    """Fill mu_hat on every record that has both source probabilities."""
    new_records = []
    for record in manifest.records:
        if record.t_hat is not None and record.epsilon_hat is not None:
            record = replace(record, mu_hat=combine(record.t_hat, record.epsilon_hat, alpha))
        new_records.append(record)
    return DatasetManifest(records=tuple(new_records), d=manifest.d)
