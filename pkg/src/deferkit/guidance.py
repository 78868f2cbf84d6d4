"""Canonical dialectic guidance format: parse, emit, and generation error rate.

The wire format is four labeled lines in fixed order::

    VERDICT: present|absent
    PROBABILITY: <decimal in [0,1]>
    FOR: <why the disorder might be present>
    AGAINST: <why it might not>

Keys are case-insensitive; leading/trailing whitespace is tolerated.
Anything else fails with an enumerated code -- the parser is total and
never raises on arbitrary input.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import EmptyInput

MAX_REASON_LENGTH = 500

_FIELD_ORDER = ("verdict", "probability", "for", "against")


class FailureCode(Enum):
    MISSING_FIELD = "MissingField"
    BAD_PROBABILITY = "BadProbability"
    VERDICT_MISMATCH = "VerdictMismatch"
    NON_CONFORMANT_LAYOUT = "NonConformantLayout"


@dataclass(frozen=True)
class GuidanceDocument:
    """Structured dialectic guidance for one case."""

    verdict: int              # 1 = present, 0 = absent
    probability: float        # the verbalised probability of the positive class
    reason_for: str
    reason_against: str


@dataclass(frozen=True)
class ParseOutcome:
    document: Optional[GuidanceDocument] = None
    failure_reason: Optional[FailureCode] = None

    @property
    def success(self) -> bool:
        return self.document is not None


def split_fields(raw) -> Optional[dict[str, str]]:
    """Structural pass: return the four raw field values, or None when the
    text does not follow the four-labeled-lines layout."""
    if not isinstance(raw, str):
        return None
    lines = [line.strip() for line in raw.strip().splitlines() if line.strip()]
    if len(lines) != 4:
        return None
    fields: dict[str, str] = {}
    for line, expected_key in zip(lines, _FIELD_ORDER):
        key, sep, value = line.partition(":")
        if not sep or key.strip().lower() != expected_key:
            return None
        fields[expected_key] = value.strip()
    return fields


def parse_guidance(raw) -> ParseOutcome:
    """Parse guidance text into a GuidanceDocument; failures come back as
    enumerated codes, never exceptions."""
    fields = split_fields(raw)
    if fields is None:
        return ParseOutcome(failure_reason=FailureCode.NON_CONFORMANT_LAYOUT)

    verdict_text = fields["verdict"].lower()
    if not verdict_text:
        return ParseOutcome(failure_reason=FailureCode.MISSING_FIELD)
    if verdict_text not in ("present", "absent"):
        return ParseOutcome(failure_reason=FailureCode.NON_CONFORMANT_LAYOUT)
    verdict = 1 if verdict_text == "present" else 0

    prob_text = fields["probability"]
    if not prob_text:
        return ParseOutcome(failure_reason=FailureCode.MISSING_FIELD)
    try:
        probability = float(prob_text)
    except ValueError:
        return ParseOutcome(failure_reason=FailureCode.BAD_PROBABILITY)
    if probability != probability or not (0.0 <= probability <= 1.0):
        return ParseOutcome(failure_reason=FailureCode.BAD_PROBABILITY)

    reason_for = fields["for"]
    reason_against = fields["against"]
    if not reason_for or not reason_against:
        return ParseOutcome(failure_reason=FailureCode.MISSING_FIELD)
    if len(reason_for) > MAX_REASON_LENGTH or len(reason_against) > MAX_REASON_LENGTH:
        return ParseOutcome(failure_reason=FailureCode.NON_CONFORMANT_LAYOUT)

    if verdict != (1 if probability >= 0.5 else 0):
        return ParseOutcome(failure_reason=FailureCode.VERDICT_MISMATCH)

    return ParseOutcome(document=GuidanceDocument(
        verdict=verdict,
        probability=probability,
        reason_for=reason_for,
        reason_against=reason_against,
    ))


def emit_guidance(doc: GuidanceDocument) -> str:
    """Serialize a document to the canonical text. Probabilities are written
    at 2 decimal places, which is lossless for the coarse verbalised values
    this format carries."""
    verdict_text = "present" if doc.verdict == 1 else "absent"
    return (
        f"VERDICT: {verdict_text}\n"
        f"PROBABILITY: {doc.probability:.2f}\n"
        f"FOR: {doc.reason_for}\n"
        f"AGAINST: {doc.reason_against}\n"
    )


def error_rate(outcomes) -> float:
    """Generation error rate: failed parses / total attempts, in [0, 1]."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyInput("error_rate needs at least one outcome")
    failures = sum(1 for o in outcomes if not o.success)
    return failures / len(outcomes)
