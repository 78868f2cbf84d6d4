"""HTTP review service: deferral queue, blind-first protocol, event log, metrics.

Protocol per (session, case): the reviewer answers first (InitialDecision).
If the answer matches the model's thresholded combined prediction the case
auto-finalizes; otherwise the guidance document is revealed (GuidanceShown)
and the reviewer must submit a FinalDecision (revise or keep). Guidance text
never leaves the server before a mismatching initial decision.

All mutations funnel through a single serialized appender onto an
append-only line-delimited event log; replaying the log reconstructs every
completed decision.
"""

from __future__ import annotations

import json
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import deferral, evaluation, guidance, report
from .calibration import CalibrationConfig
from .core import DatasetManifest
from .errors import CorruptLog, DeferkitError
from .evaluation import (
    FINAL_DECISION,
    GUIDANCE_SHOWN,
    INITIAL_DECISION,
    ReviewEvent,
    SessionAnalysis,
)
from .fusion import DEFAULT_ALPHA, attach_combined


class EventLog:
    """Append-only JSONL event log with strictly increasing sequence numbers."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._seq = 0
        open(path, "a", encoding="utf-8").close()
        try:
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._seq = json.loads(line)["seq"]
        except FileNotFoundError:
            pass

    def append(self, session_id: str, case_id: str, kind: str,
               prediction: Optional[int] = None) -> ReviewEvent:
        with self._lock:
            self._seq += 1
            event = ReviewEvent(
                seq=self._seq,
                session_id=session_id,
                case_id=case_id,
                kind=kind,
                prediction=prediction,
                timestamp=time.time(),
            )
            obj = {
                "seq": event.seq,
                "session_id": event.session_id,
                "case_id": event.case_id,
                "kind": event.kind,
                "timestamp": event.timestamp,
            }
            if prediction is not None:
                obj["prediction"] = prediction
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(obj) + "\n")
                fh.flush()
            return event


def read_events(path) -> list[ReviewEvent]:
    events: list[ReviewEvent] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                events.append(ReviewEvent(
                    seq=obj["seq"],
                    session_id=obj["session_id"],
                    case_id=obj["case_id"],
                    kind=obj["kind"],
                    prediction=obj.get("prediction"),
                    timestamp=obj.get("timestamp", 0.0),
                ))
            except (KeyError, ValueError) as exc:
                raise CorruptLog(f"unreadable event at line {lineno}: {exc}") from exc
    return events


def validate_events(events: list[ReviewEvent], llm_predictions: dict[str, int]) -> None:
    """Check the per-case protocol invariants; raise CorruptLog with the
    offending sequence number."""
    last_seq = 0
    state: dict[tuple[str, str], dict] = {}
    for ev in events:
        if ev.seq <= last_seq:
            raise CorruptLog(f"non-increasing sequence number at seq {ev.seq}")
        last_seq = ev.seq
        key = (ev.session_id, ev.case_id)
        st = state.setdefault(key, {})
        if ev.kind == INITIAL_DECISION:
            if st:
                raise CorruptLog(f"InitialDecision not first for case at seq {ev.seq}")
            st["initial"] = ev.prediction
        elif ev.kind == GUIDANCE_SHOWN:
            if "initial" not in st or "guidance" in st or "final" in st:
                raise CorruptLog(f"out-of-order GuidanceShown at seq {ev.seq}")
            llm = llm_predictions.get(ev.case_id)
            if llm is not None and llm == st["initial"]:
                raise CorruptLog(
                    f"GuidanceShown despite matching initial prediction at seq {ev.seq}"
                )
            st["guidance"] = True
        elif ev.kind == FINAL_DECISION:
            if "initial" not in st:
                raise CorruptLog(f"FinalDecision before InitialDecision at seq {ev.seq}")
            if "final" in st:
                raise CorruptLog(f"duplicate FinalDecision at seq {ev.seq}")
            if "guidance" not in st and ev.prediction != st["initial"]:
                raise CorruptLog(
                    f"FinalDecision differs from initial without guidance at seq {ev.seq}"
                )
            llm = llm_predictions.get(ev.case_id)
            if "guidance" not in st and llm is not None and llm != st["initial"]:
                raise CorruptLog(
                    f"auto-finalized despite model disagreement at seq {ev.seq}"
                )
            st["final"] = ev.prediction
        else:
            raise CorruptLog(f"unknown event kind {ev.kind!r} at seq {ev.seq}")
    for (session_id, case_id), st in state.items():
        if "final" not in st:
            raise CorruptLog(
                f"case {case_id!r} in session {session_id!r} never finalized"
            )


@dataclass
class ReviewSession:
    session_id: str
    participant_id: str
    case_order: list[str]
    cursor: int = 0
    # per-case: None = awaiting initial, "guidance" = awaiting final
    pending_guidance: Optional[str] = None
    initial: dict[str, int] = field(default_factory=dict)
    final: dict[str, int] = field(default_factory=dict)


@dataclass
class ServiceState:
    manifest: DatasetManifest
    alpha: float
    calibration_cfg: CalibrationConfig
    rank_source: str
    classification_source: str
    theta: Optional[float]
    budget: Optional[int]
    log: EventLog
    deferred_ids: list[str] = field(default_factory=list)
    sessions: dict[str, ReviewSession] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self.manifest = attach_combined(self.manifest, self.alpha)
        self.by_id = self.manifest.by_id()
        ranking = deferral.rank_for_deferral(self.manifest.records, self.rank_source)
        if self.budget is not None:
            self.theta = deferral.threshold_for_budget(ranking, self.budget).theta
        deferred, _ = deferral.partition(ranking, self.theta)
        self.deferred_ids = deferred

    def llm_prediction(self, case_id: str) -> int:
        record = self.by_id[case_id]
        p = deferral.source_value(record, self.classification_source)
        return 1 if p >= 0.5 else 0

    def llm_predictions(self) -> dict[str, int]:
        out = {}
        for record in self.manifest.records:
            try:
                out[record.id] = self.llm_prediction(record.id)
            except DeferkitError:
                pass
        return out

    def guidance_for(self, case_id: str) -> Optional[guidance.GuidanceDocument]:
        record = self.by_id[case_id]
        if record.guidance_text is None:
            return None
        outcome = guidance.parse_guidance(record.guidance_text)
        return outcome.document


def build_state(
    manifest: DatasetManifest,
    log_path,
    alpha: float = DEFAULT_ALPHA,
    calibration_cfg: CalibrationConfig = CalibrationConfig(),
    rank_source: str = deferral.HIDDEN_STATE,
    classification_source: str = deferral.COMBINED,
    theta: Optional[float] = None,
    budget: Optional[int] = None,
) -> ServiceState:
    if (theta is None) == (budget is None):
        raise ValueError("exactly one of theta/budget must be set")
    return ServiceState(
        manifest=manifest,
        alpha=alpha,
        calibration_cfg=calibration_cfg,
        rank_source=rank_source,
        classification_source=classification_source,
        theta=theta,
        budget=budget,
        log=EventLog(log_path),
    )


def replay_log(path, llm_predictions: dict[str, int], labels: dict[str, int]) -> SessionAnalysis:
    """Validate and analyze a persisted event log. Equals the live analysis
    on the same events."""
    events = read_events(path)
    validate_events(events, llm_predictions)
    return evaluation.analyze_session(events, labels)


class CreateSessionBody(BaseModel):
    participant_id: str
    seed: int = 0


class DecisionBody(BaseModel):
    prediction: int


def _fail(status: int, reason: str):
    raise HTTPException(status_code=status, detail={"reason": reason})


def build_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="deferkit review service")
    app.state.deferkit = state

    def get_session(session_id: str) -> ReviewSession:
        session = state.sessions.get(session_id)
        if session is None:
            _fail(404, "UnknownSession")
        return session

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        if not state.deferred_ids:
            _fail(409, "NoDeferredCases")
        order = list(state.deferred_ids)
        random.Random(body.seed).shuffle(order)
        session = ReviewSession(
            session_id=uuid.uuid4().hex,
            participant_id=body.participant_id,
            case_order=order,
        )
        with state._lock:
            state.sessions[session.session_id] = session
        return {
            "session_id": session.session_id,
            "participant_id": session.participant_id,
            "n_cases": len(order),
        }

    @app.get("/sessions/{session_id}/next")
    def next_case(session_id: str):
        session = get_session(session_id)
        if session.cursor >= len(session.case_order):
            return {"done": True}
        case_id = session.case_order[session.cursor]
        record = state.by_id[case_id]
        payload = {
            "done": False,
            "case": {
                "id": case_id,
                "report_text": record.report_text,
                "index": session.cursor,
                "total": len(session.case_order),
            },
            "phase": "GuidanceRevealed" if session.pending_guidance == case_id else "AwaitInitial",
        }
        if session.pending_guidance == case_id:
            doc = state.guidance_for(case_id)
            payload["guidance"] = _guidance_payload(doc)
        return payload

    def _guidance_payload(doc):
        return {
            "verdict": "present" if doc.verdict == 1 else "absent",
            "probability": doc.probability,
            "reason_for": doc.reason_for,
            "reason_against": doc.reason_against,
        }

    @app.post("/sessions/{session_id}/cases/{case_id}/initial")
    def submit_initial(session_id: str, case_id: str, body: DecisionBody):
        session = get_session(session_id)
        if body.prediction not in (0, 1):
            _fail(422, "BadPrediction")
        with state._lock:
            if session.cursor >= len(session.case_order) or \
                    session.case_order[session.cursor] != case_id:
                _fail(409, "OutOfOrder")
            if case_id in session.initial:
                _fail(409, "DuplicateDecision")
            llm = state.llm_prediction(case_id)
            session.initial[case_id] = body.prediction
            state.log.append(session_id, case_id, INITIAL_DECISION, body.prediction)
            if body.prediction == llm:
                session.final[case_id] = body.prediction
                state.log.append(session_id, case_id, FINAL_DECISION, body.prediction)
                session.cursor += 1
                return {"advance": True}
            doc = state.guidance_for(case_id)
            if doc is None:
                _fail(500, "MissingGuidance")
            session.pending_guidance = case_id
            state.log.append(session_id, case_id, GUIDANCE_SHOWN)
            return {"advance": False, "guidance": _guidance_payload(doc)}

    @app.post("/sessions/{session_id}/cases/{case_id}/final")
    def submit_final(session_id: str, case_id: str, body: DecisionBody):
        session = get_session(session_id)
        if body.prediction not in (0, 1):
            _fail(422, "BadPrediction")
        with state._lock:
            if session.pending_guidance != case_id:
                _fail(409, "GuidanceNotShown")
            if case_id in session.final:
                _fail(409, "DuplicateDecision")
            session.final[case_id] = body.prediction
            state.log.append(session_id, case_id, FINAL_DECISION, body.prediction)
            session.pending_guidance = None
            session.cursor += 1
            return {"advance": True}

    @app.get("/metrics")
    def metrics():
        try:
            doc = report.compute_run_report(
                state.manifest, state.calibration_cfg, alpha=state.alpha
            )
        except DeferkitError:
            _fail(409, "UnlabeledDataset")
        doc["deferred_count"] = len(state.deferred_ids)
        doc["theta"] = state.theta
        session_labels = {
            r.id: r.label for r in state.manifest.records if r.label is not None
        }
        try:
            analysis = replay_log(state.log.path, state.llm_predictions(), session_labels)
            doc["sessions"] = _analysis_payload(analysis)
        except (FileNotFoundError, CorruptLog):
            doc["sessions"] = None
        return doc

    @app.get("/metrics/reliability")
    def metrics_reliability(gamma: Optional[float] = None, source: str = deferral.COMBINED):
        from . import calibration as cal

        g = state.calibration_cfg.gamma if gamma is None else gamma
        if not 0.0 <= g <= 1.0:
            _fail(422, "GammaRange")
        labeled = [r for r in state.manifest.records if r.label is not None]
        if not labeled:
            _fail(409, "UnlabeledDataset")
        try:
            pairs = [(deferral.source_value(r, source), r.label) for r in labeled]
        except (DeferkitError, ValueError):
            _fail(409, "MissingSource")
        rep = cal.bin_predictions(pairs, state.calibration_cfg, cal.EQUAL_WIDTH)
        rows = cal.reliability_data(rep, g)
        return {
            "gamma": g,
            "source": source,
            "rows": [
                {
                    "lower": r.lower, "upper": r.upper, "count": r.count,
                    "mean_confidence": r.mean_confidence, "mean_label": r.mean_label,
                    "ece_weight": r.ece_weight, "gamma_weight": r.gamma_weight,
                }
                for r in rows
            ],
        }

    @app.get("/metrics/arc")
    def metrics_arc(rank_source: Optional[str] = None, clf_source: Optional[str] = None):
        labeled = [r for r in state.manifest.records if r.label is not None]
        if not labeled:
            _fail(409, "UnlabeledDataset")
        rank = rank_source or state.rank_source
        clf = clf_source or state.classification_source
        try:
            curve = deferral.accuracy_rejection_curve(labeled, rank, clf)
        except (DeferkitError, ValueError):
            _fail(409, "MissingSource")
        return {
            "rank_source": rank,
            "classification_source": clf,
            "points": [list(p) for p in curve.points],
            "auarc": deferral.auarc(curve),
        }

    return app


def _analysis_payload(analysis: SessionAnalysis) -> dict:
    return {
        "accuracy_unguided": analysis.accuracy_unguided,
        "accuracy_guided": analysis.accuracy_guided,
        "llm_accuracy": analysis.llm_accuracy,
        "wilcoxon": list(analysis.wilcoxon) if analysis.wilcoxon else None,
        "chi_squared": list(analysis.chi_squared) if analysis.chi_squared else None,
        "n_participants": analysis.n_participants,
        "n_guidance_shown": analysis.n_guidance_shown,
    }
