import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deferkit import guidance
from deferkit.errors import EmptyInput
from deferkit.guidance import FailureCode, GuidanceDocument

CANONICAL = (
    "VERDICT: present\n"
    "PROBABILITY: 0.6\n"
    "FOR: Disc material narrows the foramen at this level.\n"
    "AGAINST: No explicit mention of nerve root compression.\n"
)


def test_canonical_document_extracts_verbalised_probability():
    outcome = guidance.parse_guidance(CANONICAL)
    assert outcome.success
    assert outcome.document.probability == 0.6
    assert outcome.document.verdict == 1


def test_missing_probability_line():
    text = "VERDICT: present\nFOR: a\nAGAINST: b\n"
    outcome = guidance.parse_guidance(text)
    assert not outcome.success
    assert outcome.failure_reason == FailureCode.NON_CONFORMANT_LAYOUT


def test_empty_probability_value():
    text = "VERDICT: present\nPROBABILITY:\nFOR: a\nAGAINST: b\n"
    outcome = guidance.parse_guidance(text)
    assert outcome.failure_reason == FailureCode.MISSING_FIELD


def test_verdict_mismatch():
    text = "VERDICT: present\nPROBABILITY: 0.2\nFOR: a\nAGAINST: b\n"
    outcome = guidance.parse_guidance(text)
    assert outcome.failure_reason == FailureCode.VERDICT_MISMATCH


def test_bad_probability():
    for value in ("1.5", "-0.1", "nan", "maybe"):
        text = f"VERDICT: present\nPROBABILITY: {value}\nFOR: a\nAGAINST: b\n"
        outcome = guidance.parse_guidance(text)
        assert outcome.failure_reason == FailureCode.BAD_PROBABILITY, value


def test_case_insensitive_keys_and_whitespace():
    text = "  verdict: Absent\n probability:  0.25 \n for: a\n AGAINST: b \n"
    outcome = guidance.parse_guidance(text)
    assert outcome.success
    assert outcome.document.verdict == 0
    assert outcome.document.probability == 0.25


def test_emit_formats_two_decimals():
    doc = GuidanceDocument(verdict=1, probability=0.6, reason_for="a", reason_against="b")
    text = guidance.emit_guidance(doc)
    assert "0.60" in text
    assert guidance.emit_guidance(doc) == text  # byte-stable


reasons = st.text(
    alphabet=st.characters(codec="utf-8", exclude_categories=("Cc", "Cs", "Zl", "Zp")),
    min_size=1, max_size=120,
).filter(lambda s: s.strip() == s and s and not s.lower().startswith(
    ("verdict:", "probability:", "for:", "against:")))


@st.composite
def documents(draw):
    # 2-decimal probabilities round-trip exactly through the serializer
    prob = draw(st.integers(0, 100)) / 100
    return GuidanceDocument(
        verdict=1 if prob >= 0.5 else 0,
        probability=prob,
        reason_for=draw(reasons),
        reason_against=draw(reasons),
    )


@given(documents())
@settings(max_examples=300)
def test_round_trip_identity(doc):
    outcome = guidance.parse_guidance(guidance.emit_guidance(doc))
    assert outcome.success
    assert outcome.document == doc


@given(st.text(max_size=400))
@settings(max_examples=500)
def test_parser_total_on_arbitrary_text(raw):
    outcome = guidance.parse_guidance(raw)
    assert outcome.success == (outcome.failure_reason is None)
    if outcome.success:
        assert 0.0 <= outcome.document.probability <= 1.0


@given(st.binary(max_size=400))
@settings(max_examples=300)
def test_parser_total_on_bytes(raw):
    # Callers may hand over undecoded bytes; the parser must not abort.
    outcome = guidance.parse_guidance(raw)
    assert not outcome.success or outcome.document is not None


def test_error_rate():
    ok = guidance.parse_guidance(CANONICAL)
    bad = guidance.parse_guidance("junk")
    assert guidance.error_rate([ok, ok, ok]) == 0.0
    assert guidance.error_rate([bad, ok, ok, ok]) == 0.25
    assert guidance.error_rate([bad, bad]) == 1.0
    with pytest.raises(EmptyInput):
        guidance.error_rate([])
