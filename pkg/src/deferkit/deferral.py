"""Relative-confidence ranking, threshold partitioning, and accuracy-rejection curves.

The relative confidence of a probability p is 2|p - 0.5|: distance from the
0.5 decision boundary rescaled to [0, 1]. Lower relative confidence means
higher deferral priority.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import PredictionRecord
from .errors import BudgetRange, MissingSource, UnlabeledRecords

VERBALISED = "verbalised"
HIDDEN_STATE = "hidden_state"
COMBINED = "combined"

SOURCES = (VERBALISED, HIDDEN_STATE, COMBINED)

_SOURCE_FIELD = {
    VERBALISED: "t_hat",
    HIDDEN_STATE: "epsilon_hat",
    COMBINED: "mu_hat",
}


def source_value(record: PredictionRecord, source: str) -> float:
    try:
        field_name = _SOURCE_FIELD[source]
    except KeyError:
        raise ValueError(f"unknown source {source!r}") from None
    value = getattr(record, field_name)
    if value is None:
        raise MissingSource(f"record {record.id!r} has no {source} probability")
    return value


def relative_confidence(p_hat: float) -> float:
    return min(2.0 * abs(p_hat - 0.5), 1.0)


@dataclass(frozen=True)
class RankedCase:
    id: str
    p_hat: float
    p_tilde: float


@dataclass(frozen=True)
class DeferralRanking:
    entries: tuple[RankedCase, ...]  # ascending p_tilde, id tie-break
    rank_source: str

    def __len__(self) -> int:
        return len(self.entries)


def rank_for_deferral(records: Sequence[PredictionRecord], source: str) -> DeferralRanking:
    """Sort cases by ascending relative confidence (highest deferral priority
    first). Ties in relative confidence order by ascending id."""
    entries = []
    for record in records:
        p_hat = source_value(record, source)
        entries.append(RankedCase(id=record.id, p_hat=p_hat, p_tilde=relative_confidence(p_hat)))
    entries.sort(key=lambda e: (e.p_tilde, e.id))
    return DeferralRanking(entries=tuple(entries), rank_source=source)


def partition(ranking: DeferralRanking, theta: float) -> tuple[list[str], list[str]]:
    """Split into (deferred, autonomous) ids: deferred iff p_tilde < theta."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta out of [0, 1]: {theta}")
    deferred = [e.id for e in ranking.entries if e.p_tilde < theta]
    autonomous = [e.id for e in ranking.entries if e.p_tilde >= theta]
    return deferred, autonomous


@dataclass(frozen=True)
class BudgetThreshold:
    theta: float
    deferred_count: int   # what partition() at theta actually defers
    boundary_tie: bool    # True when ties at the boundary defer fewer than k


def threshold_for_budget(ranking: DeferralRanking, k: int) -> BudgetThreshold:
    """Threshold deferring exactly the k highest-priority cases when the
    k-th and (k+1)-th sorted relative confidences are distinct. With a tie
    at that boundary the strict-inequality partition defers fewer, which is
    reported via boundary_tie."""
    n = len(ranking.entries)
    if not 0 <= k < n:
        raise BudgetRange(f"budget {k} out of [0, {n})")
    theta = ranking.entries[k].p_tilde
    deferred, _ = partition(ranking, theta)
    return BudgetThreshold(
        theta=theta,
        deferred_count=len(deferred),
        boundary_tie=len(deferred) != k,
    )


@dataclass(frozen=True)
class AccuracyRejectionCurve:
    points: tuple[tuple[float, float], ...]  # (rejection rate, retained accuracy)
    rank_source: str
    classification_source: str


def accuracy_rejection_curve(
    records: Sequence[PredictionRecord],
    rank_source: str,
    classification_source: str,
    threshold: float = 0.5,
) -> AccuracyRejectionCurve:
    """Defer cases one at a time in priority order and measure accuracy of
    the retained set, classified by thresholding the classification source.

    Ranking and classification may use different sources. The final point
    (1, 1) is appended by convention; accuracy over an empty retained set is
    undefined.
    """
    records = list(records)
    by_id = {}
    for record in records:
        if record.label is None:
            raise UnlabeledRecords(f"record {record.id!r} has no label")
        by_id[record.id] = record
    ranking = rank_for_deferral(records, rank_source)

    correct = {}
    for record in records:
        p = source_value(record, classification_source)
        correct[record.id] = (1 if p >= threshold else 0) == record.label

    n = len(records)
    # Defer in priority order: entry 0 leaves first.
    retained_correct = sum(correct.values())
    retained_n = n
    points = []
    for j, entry in enumerate(ranking.entries):
        points.append((j / n, retained_correct / retained_n))
        retained_correct -= 1 if correct[entry.id] else 0
        retained_n -= 1
    points.append((1.0, 1.0))
    return AccuracyRejectionCurve(
        points=tuple(points),
        rank_source=rank_source,
        classification_source=classification_source,
    )


def auarc(curve: AccuracyRejectionCurve) -> float:
    """Trapezoidal integral of the accuracy-rejection curve over [0, 1]."""
    total = 0.0
    pts = curve.points
    for (r0, a0), (r1, a1) in zip(pts, pts[1:]):
        total += (r1 - r0) * (a0 + a1) / 2.0
    return total
