"""Binning and calibration metrics: ECE, ACE, and the imbalance-weighted ECE.

Equal-width bins follow the interval convention ((m-1)/M, m/M] with 0
assigned to bin 1, so binning is total on [0, 1]. Equal-mass bins split the
confidence-sorted predictions into M consecutive runs whose sizes differ by
at most one, the first n mod M bins taking the extra element.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyInput, GammaRange, StrategyMismatch

DEFAULT_BIN_COUNT = 10
DEFAULT_GAMMA = 0.3

EQUAL_WIDTH = "equal_width"
EQUAL_MASS = "equal_mass"


@dataclass(frozen=True)
class CalibrationConfig:
    bin_count: int = DEFAULT_BIN_COUNT
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if self.bin_count < 1:
            raise ValueError("bin_count must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise GammaRange(f"gamma out of [0, 1]: {self.gamma}")


@dataclass(frozen=True)
class Bin:
    lower: float
    upper: float
    count: int
    mean_confidence: Optional[float]  # None for empty bins
    mean_label: Optional[float]


@dataclass(frozen=True)
class BinningReport:
    strategy: str
    bins: tuple[Bin, ...]
    n: int

    @property
    def bin_count(self) -> int:
        return len(self.bins)


def bin_predictions(
    preds: Sequence[tuple[float, int]],
    cfg: CalibrationConfig = CalibrationConfig(),
    strategy: str = EQUAL_WIDTH,
    ids: Optional[Sequence] = None,
) -> BinningReport:
    """Bin (probability, label) pairs. For equal-mass binning, ties in
    confidence are ordered by id (input index when ids are omitted) so the
    assignment is deterministic."""
    preds = list(preds)
    if not preds:
        raise EmptyInput("bin_predictions needs at least one prediction")
    n = len(preds)
    m_bins = cfg.bin_count

    if strategy == EQUAL_WIDTH:
        members: list[list[tuple[float, int]]] = [[] for _ in range(m_bins)]
        for p, y in preds:
            # ((m-1)/M, m/M]; p == 0 lands in bin 1.
            idx = 0
            for m in range(m_bins):
                if p <= (m + 1) / m_bins:
                    idx = m
                    break
            members[idx].append((p, y))
        bins = []
        for m in range(m_bins):
            group = members[m]
            bins.append(Bin(
                lower=m / m_bins,
                upper=(m + 1) / m_bins,
                count=len(group),
                mean_confidence=sum(p for p, _ in group) / len(group) if group else None,
                mean_label=sum(y for _, y in group) / len(group) if group else None,
            ))
        return BinningReport(strategy=EQUAL_WIDTH, bins=tuple(bins), n=n)

    if strategy == EQUAL_MASS:
        if ids is None:
            ids = range(n)
        order = sorted(range(n), key=lambda i: (preds[i][0], ids[i]))
        base, extra = divmod(n, m_bins)
        bins = []
        pos = 0
        for m in range(m_bins):
            size = base + (1 if m < extra else 0)
            group = [preds[order[i]] for i in range(pos, pos + size)]
            pos += size
            bins.append(Bin(
                lower=group[0][0] if group else float("nan"),
                upper=group[-1][0] if group else float("nan"),
                count=len(group),
                mean_confidence=sum(p for p, _ in group) / len(group) if group else None,
                mean_label=sum(y for _, y in group) / len(group) if group else None,
            ))
        return BinningReport(strategy=EQUAL_MASS, bins=tuple(bins), n=n)

    raise ValueError(f"unknown strategy {strategy!r}")


def ece(report: BinningReport) -> float:
    """Bin-mass-weighted mean absolute confidence/label gap."""
    if report.strategy != EQUAL_WIDTH:
        raise StrategyMismatch("ece needs an equal-width binning report")
    total = 0.0
    for b in report.bins:
        if b.count:
            total += (b.count / report.n) * abs(b.mean_confidence - b.mean_label)
    return total


def ace(report: BinningReport) -> float:
    """Unweighted mean absolute gap over equal-mass bins."""
    if report.strategy != EQUAL_MASS:
        raise StrategyMismatch("ace needs an equal-mass binning report")
    m_bins = report.bin_count
    total = 0.0
    for b in report.bins:
        if b.count:
            total += abs(b.mean_confidence - b.mean_label) / m_bins
    return total


def gamma_weights(report: BinningReport, gamma: float) -> list[float]:
    """Per-bin blend (1-gamma)|B_m|/n + gamma/M. Sums to 1 for any gamma."""
    if not 0.0 <= gamma <= 1.0:
        raise GammaRange(f"gamma out of [0, 1]: {gamma}")
    m_bins = report.bin_count
    return [
        (1.0 - gamma) * (b.count / report.n) + gamma / m_bins
        for b in report.bins
    ]


def ece_imb(report: BinningReport, gamma: float = DEFAULT_GAMMA) -> float:
    """Imbalance-weighted calibration error. Empty bins carry their uniform
    weight share but contribute zero error (no evidence of miscalibration
    where no predictions fall). gamma=0 reproduces ece exactly."""
    if report.strategy != EQUAL_WIDTH:
        raise StrategyMismatch("ece_imb needs an equal-width binning report")
    weights = gamma_weights(report, gamma)
    total = 0.0
    for w, b in zip(weights, report.bins):
        if b.count:
            total += w * abs(b.mean_confidence - b.mean_label)
    return total


@dataclass(frozen=True)
class ReliabilityRow:
    lower: float
    upper: float
    count: int
    mean_confidence: Optional[float]
    mean_label: Optional[float]
    ece_weight: float
    gamma_weight: float


def reliability_data(report: BinningReport, gamma: float = DEFAULT_GAMMA) -> list[ReliabilityRow]:
    """Per-bin series behind a reliability diagram, carrying both the mass
    weights and the imbalance-blended weights."""
    weights = gamma_weights(report, gamma)
    return [
        ReliabilityRow(
            lower=b.lower,
            upper=b.upper,
            count=b.count,
            mean_confidence=b.mean_confidence,
            mean_label=b.mean_label,
            ece_weight=b.count / report.n,
            gamma_weight=w,
        )
        for b, w in zip(report.bins, weights)
    ]
