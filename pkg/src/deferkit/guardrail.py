"""Acceptance gate for candidate guidance texts used as instruction data.

A candidate is accepted only if it parses as canonical guidance, satisfies
all document constraints mechanically, and its verdict agrees with the
ground-truth annotation (disagreement is flagged as a hallucination).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from . import guidance
from .errors import UnknownCaseId
from .guidance import FailureCode


class RejectReason(Enum):
    HALLUCINATION = "Hallucination"
    MALFORMED_LAYOUT = "MalformedLayout"
    MISSING_FIELD = "MissingField"
    BAD_PROBABILITY = "BadProbability"
    VERDICT_MISMATCH = "VerdictMismatch"
    OVERLONG_REASON = "OverlongReason"
    EMPTY_REASON = "EmptyReason"
    NON_TEXT_CONTENT = "NonTextContent"


_PARSE_CODE_MAP = {
    FailureCode.MISSING_FIELD: RejectReason.MISSING_FIELD,
    FailureCode.BAD_PROBABILITY: RejectReason.BAD_PROBABILITY,
    FailureCode.VERDICT_MISMATCH: RejectReason.VERDICT_MISMATCH,
    FailureCode.NON_CONFORMANT_LAYOUT: RejectReason.MALFORMED_LAYOUT,
}


@dataclass(frozen=True)
class GuardrailVerdict:
    reasons: tuple[RejectReason, ...]

    @property
    def accepted(self) -> bool:
        return not self.reasons


def check_candidate(raw, annotation: int) -> GuardrailVerdict:
    """Total function: never raises on arbitrary candidate bytes."""
    reasons: list[RejectReason] = []

    fields = guidance.split_fields(raw)
    if fields is not None:
        # Field-level checks give more specific reasons than the parser's
        # coarse layout code.
        for key in ("for", "against"):
            text = fields[key]
            if not text:
                reasons.append(RejectReason.EMPTY_REASON)
            elif len(text) > guidance.MAX_REASON_LENGTH:
                reasons.append(RejectReason.OVERLONG_REASON)
            elif not text.isprintable():
                reasons.append(RejectReason.NON_TEXT_CONTENT)

    outcome = guidance.parse_guidance(raw)
    if not outcome.success:
        code = _PARSE_CODE_MAP[outcome.failure_reason]
        if code not in reasons and not (
            fields is not None
            and code in (RejectReason.MISSING_FIELD, RejectReason.MALFORMED_LAYOUT)
            and reasons
        ):
            reasons.append(code)
        # dedupe while preserving order
        seen = set()
        reasons = [r for r in reasons if not (r in seen or seen.add(r))]
        return GuardrailVerdict(reasons=tuple(reasons))

    if reasons:
        return GuardrailVerdict(reasons=tuple(reasons))

    if outcome.document.verdict != annotation:
        return GuardrailVerdict(reasons=(RejectReason.HALLUCINATION,))
    return GuardrailVerdict(reasons=())


@dataclass
class RejectionStats:
    counts: Counter = field(default_factory=Counter)

    def as_dict(self) -> dict[str, int]:
        return {reason.value: self.counts.get(reason, 0) for reason in RejectReason}


def filter_candidates(candidates, annotations) -> tuple[list[tuple[str, str]], RejectionStats]:
    """Run the gate over (case id, raw text) candidates.

    Returns the accepted (id, text) pairs (a case may contribute several)
    and per-reason rejection counts. Every rejected candidate counts once
    per distinct reason.
    """
    accepted: list[tuple[str, str]] = []
    stats = RejectionStats()
    for case_id, raw in candidates:
        if case_id not in annotations:
            raise UnknownCaseId(f"no annotation for case {case_id!r}")
        verdict = check_candidate(raw, annotations[case_id])
        if verdict.accepted:
            accepted.append((case_id, raw))
        else:
            for reason in verdict.reasons:
                stats.counts[reason] += 1
    return accepted, stats
