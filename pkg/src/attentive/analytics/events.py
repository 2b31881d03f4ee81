"""Prediction events and their newline-delimited JSON form.

Floats survive the JSON round trip exactly (shortest-repr encoding), so
replaying a log reproduces identical arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from attentive.affectmodel import AFFECTIVE_STATES

WIRE_VERSION = 1


def canonical_json(obj) -> str:
    """Stable-key compact JSON; the byte-reproducible serialization."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class PredictionEvent:
    session_id: str
    learner_id: str
    timestamp_ms: int
    probs: tuple[tuple[float, ...], ...]  # 4 states x 4 levels, row-stochastic
    intensities: tuple[float, float, float, float]
    raw_index: float
    norm_index: float

    def __post_init__(self):
        if len(self.probs) != 4 or any(len(row) != 4 for row in self.probs):
            raise ValueError("probs must be 4x4")
        if not 0.0 <= self.norm_index <= 1.0:
            raise ValueError(f"norm_index {self.norm_index} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "v": WIRE_VERSION,
            "sessionId": self.session_id,
            "learnerId": self.learner_id,
            "timestampMs": self.timestamp_ms,
            "probs": [list(row) for row in self.probs],
            "intensities": dict(zip(AFFECTIVE_STATES, self.intensities)),
            "rawIndex": self.raw_index,
            "normIndex": self.norm_index,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PredictionEvent":
        return cls(
            session_id=data["sessionId"],
            learner_id=data["learnerId"],
            timestamp_ms=int(data["timestampMs"]),
            probs=tuple(tuple(float(v) for v in row) for row in data["probs"]),
            intensities=tuple(data["intensities"][s] for s in AFFECTIVE_STATES),
            raw_index=float(data["rawIndex"]),
            norm_index=float(data["normIndex"]),
        )


def event_to_json(ev: PredictionEvent) -> str:
    return canonical_json(ev.to_dict())


def event_from_json(line: str) -> PredictionEvent:
    return PredictionEvent.from_dict(json.loads(line))


def write_event_log(path: str, events: list[PredictionEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(event_to_json(ev) + "\n")


def read_event_log(path: str) -> list[PredictionEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(event_from_json(line))
    return events
