"""Single source of truth for the run report consumed by the CLI, the HTTP
service, and the dashboard: per-source classification, calibration triple,
reliability series, accuracy-rejection curves, and the fitted blend weight.
"""

from __future__ import annotations

from typing import Optional

from . import calibration, deferral, evaluation, fusion
from .calibration import CalibrationConfig
from .core import DatasetManifest
from .errors import UnlabeledRecords

SCHEMA_VERSION = 1


def _classification_entry(preds, labels) -> dict:
    rep = evaluation.classification_metrics(preds, labels)
    return {
        "tp": rep.tp, "fp": rep.fp, "fn": rep.fn, "tn": rep.tn,
        "precision": rep.precision, "recall": rep.recall, "f1": rep.f1,
        "accuracy": rep.accuracy,
    }


def _calibration_entry(preds, labels, cfg: CalibrationConfig) -> dict:
    pairs = list(zip(preds, labels))
    width = calibration.bin_predictions(pairs, cfg, calibration.EQUAL_WIDTH)
    mass = calibration.bin_predictions(pairs, cfg, calibration.EQUAL_MASS)
    rows = calibration.reliability_data(width, cfg.gamma)
    return {
        "ece": calibration.ece(width),
        "ace": calibration.ace(mass),
        "ece_imb": calibration.ece_imb(width, cfg.gamma),
        "gamma": cfg.gamma,
        "bin_count": cfg.bin_count,
        "reliability": [
            {
                "lower": r.lower, "upper": r.upper, "count": r.count,
                "mean_confidence": r.mean_confidence, "mean_label": r.mean_label,
                "ece_weight": r.ece_weight, "gamma_weight": r.gamma_weight,
            }
            for r in rows
        ],
    }


def compute_run_report(
    manifest: DatasetManifest,
    cfg: CalibrationConfig = CalibrationConfig(),
    alpha: Optional[float] = None,
    fit_alpha: bool = False,
    grid_step: float = 0.01,
) -> dict:
    """Build the full metrics document for a labeled dataset.

    Sources missing from the data yield explicit nulls rather than being
    silently skipped. The combined prediction uses the fixed alpha unless
    fit_alpha asks for a validation-split grid search.
    """
    labeled = [r for r in manifest.records if r.label is not None]
    if not labeled:
        raise UnlabeledRecords("run report needs labeled records")

    used_alpha = alpha if alpha is not None else fusion.DEFAULT_ALPHA
    alpha_fitted = False
    if fit_alpha:
        val = [
            (r.t_hat, r.epsilon_hat, r.label)
            for r in labeled
            if r.split == "validation" and r.t_hat is not None and r.epsilon_hat is not None
        ]
        if not val:
            val = [
                (r.t_hat, r.epsilon_hat, r.label)
                for r in labeled
                if r.t_hat is not None and r.epsilon_hat is not None
            ]
        if val and len({y for _, _, y in val}) == 2:
            used_alpha = fusion.fit_alpha(val, grid_step)
            alpha_fitted = True

    manifest = fusion.attach_combined(manifest, used_alpha)
    labeled = [r for r in manifest.records if r.label is not None]
    labels = [r.label for r in labeled]

    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "n": len(labeled),
        "class_balance": manifest.class_balance,
        "alpha": used_alpha,
        "alpha_fitted": alpha_fitted,
        "classification": {},
        "calibration": {},
        "deferral": {"auarc": {}, "arc": {}},
    }

    source_preds = {}
    for source in deferral.SOURCES:
        try:
            preds = [deferral.source_value(r, source) for r in labeled]
        except Exception:
            report["classification"][source] = None
            report["calibration"][source] = None
            continue
        source_preds[source] = preds
        report["classification"][source] = _classification_entry(preds, labels)
        report["calibration"][source] = _calibration_entry(preds, labels, cfg)

    for rank_source in source_preds:
        for clf_source in source_preds:
            curve = deferral.accuracy_rejection_curve(labeled, rank_source, clf_source)
            key = f"{rank_source}|{clf_source}"
            report["deferral"]["auarc"][key] = deferral.auarc(curve)
            if rank_source == clf_source or (
                rank_source == deferral.HIDDEN_STATE and clf_source == deferral.COMBINED
            ):
                report["deferral"]["arc"][key] = [list(p) for p in curve.points]

    return report
