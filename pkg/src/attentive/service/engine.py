"""Session registry and ingestion pipeline.

The engine is transport-agnostic: the websocket/REST layer hands it
validated messages and it returns plain message dicts.  Cascade and
model parameters are loaded once and shared read-only; each session's
analytics state is mutated under its own lock (single logical writer),
and every accepted event is appended to the session's NDJSON log before
the caller sees the ack.
"""

from __future__ import annotations

import io
import json
import os
import secrets
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from attentive.affectmodel import (
    AffectModel,
    build_model,
    load_weights,
    predict,
    probs_to_intensities,
)
from attentive.analytics.events import PredictionEvent, canonical_json, event_to_json
from attentive.analytics.report import build_report, report_to_json
from attentive.analytics.session import AnalyticsConfig, SessionState
from attentive.attnindex import default_index_config, evaluate_index, normalize_index
from attentive.facegate import (
    Cascade,
    bilinear_resize,
    gate_frame,
    load_cascade,
    reference_cascade_path,
)
from attentive.facegate.images import ImageFormatError, read_pgm, read_raw_gray, rgb_to_gray
from attentive.service.config import ServiceConfig
from attentive.service.protocol import FrameUpload, ProtocolError


class EngineError(Exception):
    def __init__(self, code: str, text: str):
        super().__init__(f"{code}: {text}")
        self.code = code
        self.text = text


@dataclass
class Session:
    session_id: str
    title: str
    created_at: float
    status: str  # live | closed
    state: SessionState
    instructor_token: str
    learner_token: str
    log_path: str
    report_id: str | None = None
    learner_seq: int = 0
    last_ingest_wall: dict[str, float] = field(default_factory=dict)
    throttled_frames: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def info(self, include_tokens: bool = False) -> dict:
        out = {
            "sessionId": self.session_id,
            "title": self.title,
            "createdAt": self.created_at,
            "status": self.status,
            "config": self.state.config.to_dict(),
            "learnerCount": len(self.state.learners),
            "eventCount": len(self.state.events),
            "reportId": self.report_id,
        }
        if include_tokens:
            out["instructorToken"] = self.instructor_token
            out["learnerToken"] = self.learner_token
        return out


class ServiceEngine:
    def __init__(
        self,
        config: ServiceConfig,
        model: AffectModel | None = None,
        cascade: Cascade | None = None,
    ):
        self.config = config
        os.makedirs(os.path.join(config.data_dir, "sessions"), exist_ok=True)
        os.makedirs(os.path.join(config.data_dir, "reports"), exist_ok=True)
        if cascade is not None:
            self.cascade = cascade
        else:
            self.cascade = load_cascade(config.cascade_path or reference_cascade_path())
        if model is not None:
            self.model = model
        elif config.model_path:
            self.model = load_weights(config.model_path)
        else:
            self.model = build_model(seed=config.model_seed)
        self.index_config = default_index_config()
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- lifecycle -----------------------------------------------------------

    def create_session(self, title: str, overrides: dict | None = None) -> dict:
        analytics = AnalyticsConfig.from_dict(
            {**self.config.analytics.to_dict(), **(overrides or {})}
        )
        session_id = uuid.uuid4().hex[:12]
        session = Session(
            session_id=session_id,
            title=title,
            created_at=time.time(),
            status="live",
            state=SessionState(session_id, analytics),
            instructor_token="i-" + secrets.token_urlsafe(12),
            learner_token="l-" + secrets.token_urlsafe(12),
            log_path=os.path.join(self.config.data_dir, "sessions", f"{session_id}.ndjson"),
        )
        with self._registry_lock:
            self.sessions[session_id] = session
        open(session.log_path, "w").close()  # event log exists from creation
        with open(
            os.path.join(self.config.data_dir, "sessions", f"{session_id}.session.json"),
            "w",
            encoding="utf-8",
        ) as fh:
            fh.write(canonical_json(session.info()))
        return session.info(include_tokens=True)

    def get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise EngineError("NO_SESSION", f"unknown session {session_id!r}")
        return session

    def list_sessions(self) -> list[dict]:
        with self._registry_lock:
            return [s.info() for s in self.sessions.values()]

    def authorize(self, session: Session, token: str, instructor: bool = False) -> None:
        allowed = (
            (session.instructor_token,)
            if instructor
            else (session.learner_token, session.instructor_token)
        )
        if token not in allowed:
            raise EngineError("BAD_TOKEN", "missing or wrong token for this role")

    def join_learner(self, session_id: str, name: str) -> tuple[str, int]:
        session = self.get_session(session_id)
        if session.status != "live":
            raise EngineError("SESSION_CLOSED", "cannot join a closed session")
        with session.lock:
            session.learner_seq += 1
            learner_id = f"{name}-{session.learner_seq}"
        elapsed_ms = int((time.time() - session.created_at) * 1000)
        return learner_id, elapsed_ms

    # -- ingestion -----------------------------------------------------------

    def _decode_frame(self, msg: FrameUpload) -> np.ndarray:
        try:
            if msg.encoding == "pgm":
                return read_pgm(msg.payload)
            if msg.encoding == "raw":
                if not msg.width or not msg.height:
                    raise ImageFormatError("raw frames need width and height")
                return read_raw_gray(msg.payload, msg.width, msg.height)
            from PIL import Image, UnidentifiedImageError

            try:
                img = Image.open(io.BytesIO(msg.payload))
                img.load()
            except UnidentifiedImageError as exc:
                raise ImageFormatError("undecodable PNG payload") from exc
            arr = np.asarray(img.convert("RGB"))
            return rgb_to_gray(arr)
        except ImageFormatError as exc:
            raise EngineError("BAD_FRAME", str(exc)) from exc

    def _downsize(self, img: np.ndarray) -> np.ndarray:
        side = max(img.shape)
        limit = self.config.max_detect_side
        if side <= limit:
            return img
        scale = limit / side
        out_h = max(1, int(round(img.shape[0] * scale)))
        out_w = max(1, int(round(img.shape[1] * scale)))
        return np.clip(np.rint(bilinear_resize(img, out_h, out_w)), 0, 255).astype(np.uint8)

    def _throttled(self, session: Session, learner_id: str) -> bool:
        now = time.monotonic()
        last = session.last_ingest_wall.get(learner_id)
        min_interval = 1.0 / self.config.max_ingest_hz
        if last is not None and now - last < min_interval:
            session.throttled_frames += 1
            return True
        session.last_ingest_wall[learner_id] = now
        return False

    def ingest_frame(
        self, session_id: str, learner_id: str, msg: FrameUpload
    ) -> tuple[dict, list]:
        """Gate -> predict -> index -> analytics; returns (ack, alerts)."""
        session = self.get_session(session_id)
        if session.status != "live":
            raise EngineError("SESSION_CLOSED", "session no longer accepts frames")
        img = self._decode_frame(msg)
        if self._throttled(session, learner_id):
            return (
                {"learnerId": learner_id, "timestampMs": msg.timestamp_ms,
                 "invalid": True, "throttled": True},
                [],
            )
        face = gate_frame(self.cascade, self._downsize(img))
        if face is None:
            with session.lock:
                session.state.note_invalid_frame(learner_id, msg.timestamp_ms)
            return (
                {"learnerId": learner_id, "timestampMs": msg.timestamp_ms, "invalid": True},
                [],
            )
        probs = predict(self.model, face)
        return self._ingest_probs_matrix(session, learner_id, msg.timestamp_ms, probs)

    def ingest_probs(
        self, session_id: str, learner_id: str, timestamp_ms: int, probs
    ) -> tuple[dict, list]:
        session = self.get_session(session_id)
        if session.status != "live":
            raise EngineError("SESSION_CLOSED", "session no longer accepts events")
        return self._ingest_probs_matrix(session, learner_id, timestamp_ms, np.asarray(probs))

    def _ingest_probs_matrix(
        self, session: Session, learner_id: str, timestamp_ms: int, probs: np.ndarray
    ) -> tuple[dict, list]:
        intensities = probs_to_intensities(probs)
        raw = evaluate_index(intensities, self.index_config.weights)
        norm = normalize_index(raw, self.index_config)
        event = PredictionEvent(
            session_id=session.session_id,
            learner_id=learner_id,
            timestamp_ms=timestamp_ms,
            probs=tuple(tuple(float(v) for v in row) for row in probs),
            intensities=tuple(float(v) for v in intensities),
            raw_index=raw,
            norm_index=norm,
        )
        with session.lock:
            before = len(session.state.events)
            alerts = session.state.ingest(event)
            accepted = len(session.state.events) > before
            if accepted:
                with open(session.log_path, "a", encoding="utf-8") as fh:
                    fh.write(event_to_json(event) + "\n")
        ack = {"learnerId": learner_id, "timestampMs": timestamp_ms, "invalid": False,
               "accepted": accepted}
        return ack, alerts

    # -- analytics snapshots ---------------------------------------------------

    def snapshot(self, session_id: str) -> dict:
        """Consistent view for one AnalyticsUpdate."""
        session = self.get_session(session_id)
        with session.lock:
            stats = session.state.trailing_stats()
            cfg = session.state.config
            learners = []
            for lid in sorted(session.state.learners):
                learner = session.state.learners[lid]
                recent = list(learner.window)
                learners.append(
                    {
                        "learnerId": lid,
                        "presence": learner.presence(session.state.clock_ms, cfg).value,
                        "lastSeenMs": learner.last_seen_ms,
                        "events": learner.total_events,
                        "invalidFrames": learner.invalid_frames,
                        "windowNormIndex": (
                            sum(e.norm_index for e in recent) / len(recent) if recent else None
                        ),
                    }
                )
            return {
                "stats": stats.to_dict(),
                "config": cfg.to_dict(),
                "learners": learners,
                "status": session.status,
                "alertCount": len(session.state.alerts),
                "serverTimeMs": session.state.clock_ms,
            }

    def alerts_since(self, session_id: str, cursor: int) -> tuple[list[dict], int]:
        session = self.get_session(session_id)
        with session.lock:
            alerts = [a.to_dict() for a in session.state.alerts[cursor:]]
            return alerts, len(session.state.alerts)

    def update_session_config(self, session_id: str, changes: dict) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            merged = {**session.state.config.to_dict(), **changes}
            session.state.config = AnalyticsConfig.from_dict(merged)
            return session.state.config.to_dict()

    # -- reports ---------------------------------------------------------------

    def close_session(self, session_id: str) -> str:
        """Close, build and persist the report; idempotent."""
        session = self.get_session(session_id)
        with session.lock:
            if session.status == "closed":
                return session.report_id
            session.status = "closed"
            report = build_report(session.state)
            report_id = f"{session.session_id}-report"
            path = os.path.join(self.config.data_dir, "reports", f"{report_id}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(report_to_json(report))
            session.report_id = report_id
            return report_id

    def get_report(self, report_id: str) -> str:
        path = os.path.join(self.config.data_dir, "reports", f"{report_id}.json")
        if not os.path.exists(path):
            raise EngineError("NO_REPORT", f"unknown report {report_id!r}")
        with open(path, encoding="utf-8") as fh:
            return fh.read()
