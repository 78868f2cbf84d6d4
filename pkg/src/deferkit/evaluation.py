"""Classification metrics, agreement analyses, and nonparametric tests.

Undefined ratios (empty denominators) surface as None, never as a silent 0:
imbalanced fixtures routinely produce empty positive-prediction sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .core import PredictionRecord
from .errors import (
    AllZeroDifferences,
    DegenerateMargin,
    DegenerateVariance,
    EmptyInput,
    IncompleteSession,
    LengthMismatch,
    MissingSource,
)

GREATER = "greater"
LESS = "less"


# ---------------------------------------------------------------------------
# Classification metrics


@dataclass(frozen=True)
class ClassificationReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n


def _report_from_counts(tp: int, fp: int, fn: int, tn: int) -> ClassificationReport:
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else None
    return ClassificationReport(tp=tp, fp=fp, fn=fn, tn=tn,
                                precision=precision, recall=recall, f1=f1)


def classification_metrics(preds, labels, threshold: float = 0.5) -> ClassificationReport:
    preds = list(preds)
    labels = list(labels)
    if len(preds) != len(labels):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(labels)} labels")
    if not preds:
        raise EmptyInput("classification_metrics needs at least one prediction")
    tp = fp = fn = tn = 0
    for p, y in zip(preds, labels):
        pred = 1 if p >= threshold else 0
        if pred and y:
            tp += 1
        elif pred and not y:
            fp += 1
        elif not pred and y:
            fn += 1
        else:
            tn += 1
    return _report_from_counts(tp, fp, fn, tn)


@dataclass(frozen=True)
class MicroMacroF1:
    micro: Optional[float]
    macro: Optional[float]
    excluded: int  # conditions with undefined F1, left out of the macro mean


def micro_macro_f1(per_condition: Sequence[ClassificationReport]) -> MicroMacroF1:
    """Micro pools the confusion counts, macro averages the per-condition F1
    scores (undefined ones excluded and counted)."""
    if not per_condition:
        raise EmptyInput("micro_macro_f1 needs at least one condition")
    tp = sum(r.tp for r in per_condition)
    fp = sum(r.fp for r in per_condition)
    fn = sum(r.fn for r in per_condition)
    micro = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else None
    defined = [r.f1 for r in per_condition if r.f1 is not None]
    macro = sum(defined) / len(defined) if defined else None
    return MicroMacroF1(micro=micro, macro=macro,
                        excluded=len(per_condition) - len(defined))


def pearson_correlation(a, b) -> float:
    a = np.asarray(list(a), dtype=float)
    b = np.asarray(list(b), dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise EmptyInput("pearson_correlation needs at least 2 pairs")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        raise DegenerateVariance("zero variance in one of the inputs")
    return float(da @ db) / denom


@dataclass(frozen=True)
class AgreementReport:
    pearson_rho: float
    # Among cases where the combined prediction is correct and the two
    # sources disagree (thresholded at 0.5):
    hidden_correct_fraction: Optional[float]
    verbalised_correct_fraction: Optional[float]
    disagreement_count: int


def disagreement_attribution(records: Sequence[PredictionRecord]) -> AgreementReport:
    t_vals, e_vals = [], []
    hidden_correct = 0
    disagreements = 0
    for record in records:
        if record.t_hat is None or record.epsilon_hat is None or record.mu_hat is None:
            raise MissingSource(f"record {record.id!r} lacks a prediction source")
        if record.label is None:
            raise MissingSource(f"record {record.id!r} has no label")
        t_vals.append(record.t_hat)
        e_vals.append(record.epsilon_hat)
        t_cls = 1 if record.t_hat >= 0.5 else 0
        e_cls = 1 if record.epsilon_hat >= 0.5 else 0
        mu_cls = 1 if record.mu_hat >= 0.5 else 0
        if mu_cls == record.label and t_cls != e_cls:
            disagreements += 1
            if e_cls == record.label:
                hidden_correct += 1
    rho = pearson_correlation(t_vals, e_vals)
    if disagreements:
        frac = hidden_correct / disagreements
        return AgreementReport(pearson_rho=rho, hidden_correct_fraction=frac,
                               verbalised_correct_fraction=1.0 - frac,
                               disagreement_count=disagreements)
    return AgreementReport(pearson_rho=rho, hidden_correct_fraction=None,
                           verbalised_correct_fraction=None, disagreement_count=0)


# ---------------------------------------------------------------------------
# Nonparametric tests


def _midranks(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# Exact Mann-Whitney enumeration walks C(n1+n2, n1) rank assignments; cap
# the enumeration size and fall back to the tie-corrected normal
# approximation beyond it.
_EXACT_U_MAX_ARRANGEMENTS = 200_000


def mann_whitney_u(a, b, alternative: str = GREATER) -> tuple[float, float]:
    """One-sided rank-sum test. alternative='greater' tests whether a tends
    larger than b; 'less' the reverse. Exact tail by enumeration of rank
    assignments when feasible, tie-corrected normal approximation otherwise.
    Exact tails include the observed value (P(U' >= U))."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if not a or not b:
        raise EmptyInput("mann_whitney_u needs two nonempty samples")
    if alternative not in (GREATER, LESS):
        raise ValueError(f"alternative must be {GREATER!r} or {LESS!r}")
    n1, n2 = len(a), len(b)
    pooled = a + b
    ranks = _midranks(pooled)
    u_a = float(ranks[:n1].sum()) - n1 * (n1 + 1) / 2.0

    total = math.comb(n1 + n2, n1)
    if n1 * n2 <= 10_000 and total <= _EXACT_U_MAX_ARRANGEMENTS:
        m = min(n1, n2)
        offset = m * (m + 1) / 2.0
        hits = 0
        for combo in combinations(range(n1 + n2), m):
            u = sum(ranks[i] for i in combo) - offset
            # U for the size-m sample; convert to U_a when a is the larger one.
            u_small = u
            u_for_a = u_small if m == n1 else n1 * n2 - u_small
            if alternative == GREATER:
                hits += u_for_a >= u_a - 1e-9
            else:
                hits += u_for_a <= u_a + 1e-9
        p = hits / total
    else:
        mu = n1 * n2 / 2.0
        n = n1 + n2
        _, tie_counts = np.unique(np.asarray(pooled), return_counts=True)
        tie_term = float(np.sum(tie_counts ** 3 - tie_counts))
        var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
        if var <= 0:
            p = 1.0
        else:
            z = (u_a - mu) / math.sqrt(var)
            p = _norm_sf(z) if alternative == GREATER else _norm_sf(-z)
    return u_a, min(max(p, math.ulp(0.0)), 1.0)


_EXACT_WILCOXON_MAX_N = 20


def wilcoxon_signed_rank(x, y, alternative: str = GREATER) -> tuple[float, float]:
    """Paired one-sided signed-rank test on differences x - y. Zero
    differences are dropped; exact tail by the signed-rank distribution for
    n <= 20, tie-corrected normal approximation beyond."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} paired values")
    if alternative not in (GREATER, LESS):
        raise ValueError(f"alternative must be {GREATER!r} or {LESS!r}")
    diffs = [xi - yi for xi, yi in zip(x, y) if xi != yi]
    if not diffs:
        raise AllZeroDifferences("all paired differences are zero")
    n = len(diffs)
    ranks = _midranks([abs(d) for d in diffs])
    w_plus = float(sum(r for r, d in zip(ranks, diffs) if d > 0))

    if n <= _EXACT_WILCOXON_MAX_N:
        # Distribution of W+ under sign flips, via convolution over doubled
        # (integer) midranks.
        doubled = [int(round(2 * r)) for r in ranks]
        max_sum = sum(doubled)
        counts = np.zeros(max_sum + 1, dtype=float)
        counts[0] = 1.0
        for r2 in doubled:
            counts[r2:] += counts[:-r2].copy() if r2 else counts.copy()
        counts /= 2.0 ** n
        obs2 = int(round(2 * w_plus))
        if alternative == GREATER:
            p = float(counts[obs2:].sum())
        else:
            p = float(counts[:obs2 + 1].sum())
    else:
        mu = n * (n + 1) / 4.0
        _, tie_counts = np.unique(np.asarray([abs(d) for d in diffs]), return_counts=True)
        tie_term = float(np.sum(tie_counts ** 3 - tie_counts))
        var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
        z = (w_plus - mu) / math.sqrt(var)
        p = _norm_sf(z) if alternative == GREATER else _norm_sf(-z)
    return w_plus, min(max(p, math.ulp(0.0)), 1.0)


def chi_squared_independence(table) -> tuple[float, float]:
    """Pearson chi-squared test of independence on a 2x2 count table, no
    continuity correction, 1 degree of freedom."""
    arr = np.asarray(table, dtype=float)
    if arr.shape != (2, 2) or np.any(arr < 0):
        raise ValueError("table must be a 2x2 array of non-negative counts")
    row = arr.sum(axis=1)
    col = arr.sum(axis=0)
    n = arr.sum()
    if np.any(row == 0) or np.any(col == 0):
        raise DegenerateMargin("zero row or column margin")
    expected = np.outer(row, col) / n
    chi2 = float(np.sum((arr - expected) ** 2 / expected))
    # chi2 survival function at 1 dof
    p = math.erfc(math.sqrt(chi2 / 2.0))
    return chi2, p


# ---------------------------------------------------------------------------
# Review-session analysis

INITIAL_DECISION = "InitialDecision"
GUIDANCE_SHOWN = "GuidanceShown"
FINAL_DECISION = "FinalDecision"


@dataclass(frozen=True)
class ReviewEvent:
    seq: int
    session_id: str
    case_id: str
    kind: str
    prediction: Optional[int] = None
    timestamp: float = 0.0


@dataclass(frozen=True)
class SessionAnalysis:
    accuracy_unguided: dict[str, float]   # session id -> accuracy of initial answers
    accuracy_guided: dict[str, float]     # session id -> accuracy of final answers
    llm_accuracy: Optional[float]
    wilcoxon: Optional[tuple[float, float]]   # guided > unguided, one-sided
    chi_squared: Optional[tuple[float, float]]
    n_participants: int
    n_guidance_shown: int


def _collect_sessions(events: Sequence[ReviewEvent]):
    sessions: dict[str, dict[str, dict]] = {}
    for ev in events:
        case_states = sessions.setdefault(ev.session_id, {})
        state = case_states.setdefault(ev.case_id, {})
        if ev.kind == INITIAL_DECISION:
            state["initial"] = ev.prediction
        elif ev.kind == GUIDANCE_SHOWN:
            state["guidance"] = True
        elif ev.kind == FINAL_DECISION:
            state["final"] = ev.prediction
        else:
            raise IncompleteSession(f"unknown event kind {ev.kind!r} at seq {ev.seq}")
    return sessions


def analyze_session(events: Sequence[ReviewEvent], labels: dict[str, int]) -> SessionAnalysis:
    """Per-participant guided/unguided accuracy plus the two significance
    tests of the interactive protocol.

    The model's prediction per case is recoverable from the protocol itself:
    guidance is shown iff the initial prediction differed from the model's,
    so the model agreed with the initial answer exactly when no guidance
    event exists for the case.
    """
    sessions = _collect_sessions(events)

    unguided: dict[str, float] = {}
    guided: dict[str, float] = {}
    llm_pred: dict[str, int] = {}
    changed_vs_llm: list[tuple[bool, bool]] = []  # (changed prediction, llm correct)
    n_shown = 0

    for session_id, case_states in sessions.items():
        initial_correct = 0
        final_correct = 0
        for case_id, state in case_states.items():
            if "initial" not in state or "final" not in state:
                raise IncompleteSession(
                    f"case {case_id!r} in session {session_id!r} lacks a complete decision"
                )
            if case_id not in labels:
                raise IncompleteSession(f"no label for case {case_id!r}")
            label = labels[case_id]
            initial = state["initial"]
            final = state["final"]
            shown = state.get("guidance", False)
            model = (1 - initial) if shown else initial
            llm_pred.setdefault(case_id, model)
            initial_correct += initial == label
            final_correct += final == label
            if shown:
                n_shown += 1
                changed_vs_llm.append((final != initial, model == label))
        n_cases = len(case_states)
        unguided[session_id] = initial_correct / n_cases
        guided[session_id] = final_correct / n_cases

    llm_accuracy = (
        sum(1 for cid, pred in llm_pred.items() if pred == labels[cid]) / len(llm_pred)
        if llm_pred else None
    )

    wilcoxon = None
    if len(sessions) >= 1:
        ids = sorted(sessions)
        try:
            wilcoxon = wilcoxon_signed_rank(
                [guided[i] for i in ids], [unguided[i] for i in ids], GREATER
            )
        except AllZeroDifferences:
            wilcoxon = None

    chi = None
    if changed_vs_llm:
        table = [[0, 0], [0, 0]]
        for changed, llm_ok in changed_vs_llm:
            table[0 if changed else 1][0 if llm_ok else 1] += 1
        try:
            chi = chi_squared_independence(table)
        except DegenerateMargin:
            chi = None

    return SessionAnalysis(
        accuracy_unguided=unguided,
        accuracy_guided=guided,
        llm_accuracy=llm_accuracy,
        wilcoxon=wilcoxon,
        chi_squared=chi,
        n_participants=len(sessions),
        n_guidance_shown=n_shown,
    )
