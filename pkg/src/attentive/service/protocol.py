"""Wire message schemas.

Every message is a JSON object with an integer ``v`` (protocol version)
and a ``type`` discriminator.  Client messages are validated here before
touching the engine; server messages are built here so their byte-level
shape stays centralized (golden fixtures in the test suite pin it).
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass

import numpy as np

WIRE_VERSION = 1
MAX_FRAME_BYTES = 256 * 1024

CLIENT_TYPES = (
    "join_learner",
    "frame_upload",
    "probs_upload",
    "instructor_subscribe",
    "update_config",
    "close_session",
)


class ProtocolError(ValueError):
    def __init__(self, code: str, text: str):
        super().__init__(f"{code}: {text}")
        self.code = code
        self.text = text


@dataclass(frozen=True)
class JoinLearner:
    name: str


@dataclass(frozen=True)
class FrameUpload:
    timestamp_ms: int
    encoding: str  # png | pgm | raw
    payload: bytes
    width: int | None = None
    height: int | None = None


@dataclass(frozen=True)
class ProbsUpload:
    timestamp_ms: int
    probs: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class InstructorSubscribe:
    pass


@dataclass(frozen=True)
class UpdateConfig:
    changes: dict


@dataclass(frozen=True)
class CloseSession:
    pass


def validate_probs(raw, tolerance: float = 1e-4) -> tuple[tuple[float, ...], ...]:
    """4x4, finite, non-negative, rows summing to 1 within tolerance."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.shape != (4, 4):
        raise ProtocolError("BAD_PROBS", f"probs must be 4x4, got {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ProtocolError("BAD_PROBS", "probs must be finite and non-negative")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > tolerance):
        raise ProtocolError("BAD_PROBS", f"rows must sum to 1 (got {sums.tolist()})")
    return tuple(tuple(float(v) for v in row) for row in arr)


def parse_client_message(data: dict):
    """Validated dataclass from a decoded client JSON object."""
    if not isinstance(data, dict):
        raise ProtocolError("BAD_MESSAGE", "message must be a JSON object")
    if data.get("v") != WIRE_VERSION:
        raise ProtocolError("BAD_MESSAGE", f"unsupported protocol version {data.get('v')!r}")
    mtype = data.get("type")
    if mtype == "join_learner":
        name = data.get("name")
        if not isinstance(name, str) or not name.strip():
            raise ProtocolError("BAD_MESSAGE", "join_learner needs a non-empty name")
        return JoinLearner(name=name.strip())
    if mtype == "frame_upload":
        encoding = data.get("encoding")
        if encoding not in ("png", "pgm", "raw"):
            raise ProtocolError("BAD_FRAME", f"unknown encoding {encoding!r}")
        try:
            payload = base64.b64decode(data.get("payload", ""), validate=True)
        except (binascii.Error, TypeError) as exc:
            raise ProtocolError("BAD_FRAME", "payload is not valid base64") from exc
        if not payload:
            raise ProtocolError("BAD_FRAME", "empty payload")
        if len(payload) > MAX_FRAME_BYTES:
            raise ProtocolError("BAD_FRAME", f"frame exceeds {MAX_FRAME_BYTES} bytes")
        return FrameUpload(
            timestamp_ms=_timestamp(data),
            encoding=encoding,
            payload=payload,
            width=data.get("width"),
            height=data.get("height"),
        )
    if mtype == "probs_upload":
        return ProbsUpload(timestamp_ms=_timestamp(data), probs=validate_probs(data.get("probs")))
    if mtype == "instructor_subscribe":
        return InstructorSubscribe()
    if mtype == "update_config":
        changes = data.get("changes")
        if not isinstance(changes, dict) or not changes:
            raise ProtocolError("BAD_MESSAGE", "update_config needs a changes object")
        allowed = {"disengageThreshold", "hysteresis", "cooldownMs", "stateElevatedThreshold"}
        unknown = set(changes) - allowed
        if unknown:
            raise ProtocolError("BAD_MESSAGE", f"unknown config keys {sorted(unknown)}")
        for key in ("disengageThreshold", "hysteresis", "stateElevatedThreshold"):
            if key in changes and not 0.0 <= float(changes[key]) <= 1.0:
                raise ProtocolError("BAD_MESSAGE", f"{key} must lie in [0, 1]")
        return UpdateConfig(changes=changes)
    if mtype == "close_session":
        return CloseSession()
    raise ProtocolError("BAD_MESSAGE", f"unknown message type {mtype!r}")


def _timestamp(data: dict) -> int:
    ts = data.get("timestampMs")
    if not isinstance(ts, (int, float)) or ts < 0:
        raise ProtocolError("BAD_MESSAGE", "timestampMs must be a non-negative number")
    return int(ts)


# -- server message builders -------------------------------------------------

def ack_message(learner_id: str, timestamp_ms: int, invalid: bool = False) -> dict:
    return {
        "v": WIRE_VERSION,
        "type": "ack",
        "learnerId": learner_id,
        "timestampMs": timestamp_ms,
        "invalid": invalid,
    }


def join_ack_message(learner_id: str, session_elapsed_ms: int) -> dict:
    return {
        "v": WIRE_VERSION,
        "type": "join_ack",
        "learnerId": learner_id,
        "sessionElapsedMs": session_elapsed_ms,
    }


def analytics_update_message(
    stats: dict, config: dict, learners: list, status: str, server_time_ms: int
) -> dict:
    return {
        "v": WIRE_VERSION,
        "type": "analytics_update",
        "serverTimeMs": server_time_ms,
        "status": status,
        "stats": stats,
        "config": config,
        "learners": learners,
    }


def alert_message(alert: dict) -> dict:
    return {"v": WIRE_VERSION, "type": "alert", "alert": alert}


def report_ready_message(report_id: str) -> dict:
    return {"v": WIRE_VERSION, "type": "report_ready", "reportId": report_id}


def error_message(code: str, text: str) -> dict:
    return {"v": WIRE_VERSION, "type": "error", "code": code, "text": text}
