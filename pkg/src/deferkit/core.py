"""Canonical data model: prediction records, dataset ingestion and splits.

A dataset is a UTF-8 file of line-delimited JSON objects, one record per
line, with fields: id, report_text, label (0/1, optional), t_hat (optional),
epsilon_hat (optional), embedding (optional), guidance_text (optional),
split (optional).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .errors import DuplicateIdError, FractionError, IoError, SchemaError

SPLITS = ("instruct", "classifier_train", "validation", "test")

DEFAULT_EMBEDDING_DIM = 5120


def check_probability(value, name: str = "probability", line: Optional[int] = None) -> float:
    """Validate a probability value: a real number in [0, 1], NaN forbidden."""
    where = f" (line {line})" if line is not None else ""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{name} must be a number, got {value!r}{where}")
    value = float(value)
    if math.isnan(value) or not (0.0 <= value <= 1.0):
        raise SchemaError(f"{name} out of range [0, 1]: {value}{where}")
    return value


def check_label(value, name: str = "label", line: Optional[int] = None) -> int:
    where = f" (line {line})" if line is not None else ""
    if isinstance(value, bool) or value not in (0, 1):
        raise SchemaError(f"{name} must be 0 or 1, got {value!r}{where}")
    return int(value)


@dataclass(frozen=True)
class PredictionRecord:
    """One case: report text plus whatever prediction sources exist for it."""

    id: str
    report_text: str
    label: Optional[int] = None
    t_hat: Optional[float] = None
    epsilon_hat: Optional[float] = None
    mu_hat: Optional[float] = None
    embedding: Optional[tuple[float, ...]] = None
    guidance_text: Optional[str] = None
    split: Optional[str] = None


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[PredictionRecord, ...]
    d: int

    @property
    def class_balance(self) -> Optional[float]:
        """Fraction of positive labels among labeled records; None if unlabeled."""
        labeled = [r for r in self.records if r.label is not None]
        if not labeled:
            return None
        return sum(r.label for r in labeled) / len(labeled)

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self) -> dict[str, PredictionRecord]:
        return {r.id: r for r in self.records}


_ALLOWED_FIELDS = {
    "id", "report_text", "label", "t_hat", "epsilon_hat",
    "embedding", "guidance_text", "split",
}


def record_from_obj(obj: dict, expected_d: int, line: Optional[int] = None) -> PredictionRecord:
    where = f" (line {line})" if line is not None else ""
    if not isinstance(obj, dict):
        raise SchemaError(f"record must be an object{where}")
    for key in ("id", "report_text"):
        if key not in obj:
            raise SchemaError(f"missing required field {key!r}{where}")
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise SchemaError(f"id must be a nonempty string{where}")
    if not isinstance(obj["report_text"], str):
        raise SchemaError(f"report_text must be a string{where}")

    label = obj.get("label")
    if label is not None:
        label = check_label(label, "label", line)
    t_hat = obj.get("t_hat")
    if t_hat is not None:
        t_hat = check_probability(t_hat, "t_hat", line)
    epsilon_hat = obj.get("epsilon_hat")
    if epsilon_hat is not None:
        epsilon_hat = check_probability(epsilon_hat, "epsilon_hat", line)

    embedding = obj.get("embedding")
    if embedding is not None:
        if not isinstance(embedding, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in embedding
        ):
            raise SchemaError(f"embedding must be an array of numbers{where}")
        if len(embedding) != expected_d:
            raise SchemaError(
                f"embedding length {len(embedding)} != expected {expected_d}{where}"
            )
        if any(not math.isfinite(v) for v in embedding):
            raise SchemaError(f"embedding entries must be finite{where}")
        embedding = tuple(float(v) for v in embedding)

    split = obj.get("split")
    if split is not None and split not in SPLITS:
        raise SchemaError(f"unknown split {split!r}{where}")

    guidance_text = obj.get("guidance_text")
    if guidance_text is not None and not isinstance(guidance_text, str):
        raise SchemaError(f"guidance_text must be a string{where}")

    return PredictionRecord(
        id=obj["id"],
        report_text=obj["report_text"],
        label=label,
        t_hat=t_hat,
        epsilon_hat=epsilon_hat,
        embedding=embedding,
        guidance_text=guidance_text,
        split=split,
    )


def record_to_obj(record: PredictionRecord) -> dict:
    obj: dict = {"id": record.id, "report_text": record.report_text}
    if record.label is not None:
        obj["label"] = record.label
    if record.t_hat is not None:
        obj["t_hat"] = record.t_hat
    if record.epsilon_hat is not None:
        obj["epsilon_hat"] = record.epsilon_hat
    if record.embedding is not None:
        obj["embedding"] = list(record.embedding)
    if record.guidance_text is not None:
        obj["guidance_text"] = record.guidance_text
    if record.split is not None:
        obj["split"] = record.split
    return obj


def load_dataset(path, expected_d: int = DEFAULT_EMBEDDING_DIM) -> DatasetManifest:
    """Load and validate a line-delimited dataset file."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read dataset {path}: {exc}") from exc

    records: list[PredictionRecord] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON (line {lineno}): {exc}") from exc
        record = record_from_obj(obj, expected_d, line=lineno)
        if record.id in seen:
            raise DuplicateIdError(f"duplicate id {record.id!r} (line {lineno})")
        seen.add(record.id)
        records.append(record)
    return DatasetManifest(records=tuple(records), d=expected_d)


def save_dataset(manifest: DatasetManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in manifest.records:
            fh.write(json.dumps(record_to_obj(record)) + "\n")


def split_dataset(
    manifest: DatasetManifest, fractions: Sequence[float], seed: int
) -> DatasetManifest:
    """Randomly assign every record to one of the four splits.

    Split sizes are floor(n * fraction) with the remainder distributed one
    each to the splits in declaration order, so exact fractions of n stay
    exact. Deterministic per seed.
    """
    if len(fractions) != len(SPLITS):
        raise FractionError(f"need {len(SPLITS)} fractions, got {len(fractions)}")
    if any(f < 0 for f in fractions):
        raise FractionError("fractions must be non-negative")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise FractionError(f"fractions must sum to 1, got {sum(fractions)}")

    n = len(manifest.records)
    counts = [int(math.floor(n * f)) for f in fractions]
    remainder = n - sum(counts)
    for i in range(len(counts)):
        if remainder == 0:
            break
        if fractions[i] > 0:
            counts[i] += 1
            remainder -= 1
    # All-zero-fraction edge cannot occur (fractions sum to 1), so remainder
    # is always exhausted.

    order = list(range(n))
    random.Random(seed).shuffle(order)
    assignment: dict[int, str] = {}
    pos = 0
    for split_name, count in zip(SPLITS, counts):
        for idx in order[pos:pos + count]:
            assignment[idx] = split_name
        pos += count

    new_records = tuple(
        replace(record, split=assignment[i]) for i, record in enumerate(manifest.records)
    )
    return DatasetManifest(records=new_records, d=manifest.d)
