"""Per-session streaming state: learner buffers, window stats, alerts.

Time is event time (milliseconds since session start); the session clock
is the latest timestamp seen, which keeps every derived quantity
replayable from the event log.  Alerts re-arm only after the monitored
value recovers past the threshold by the hysteresis margin, and never
re-fire inside the cooldown window.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from attentive.affectmodel import AFFECTIVE_STATES
from attentive.analytics.events import PredictionEvent


class Presence(str, Enum):
    ACTIVE = "active"
    STALE = "stale"
    ABSENT = "absent"


@dataclass(frozen=True)
class AnalyticsConfig:
    disengage_threshold: float = 0.40  # class mean norm index, trailing window
    hysteresis: float = 0.05
    cooldown_ms: int = 60_000
    trailing_window_ms: int = 30_000
    state_elevated_threshold: float = 0.66  # on intensity/3
    stale_after_ms: int = 10_000
    absent_after_ms: int = 30_000
    bucket_ms: int = 10_000

    def to_dict(self) -> dict:
        return {
            "disengageThreshold": self.disengage_threshold,
            "hysteresis": self.hysteresis,
            "cooldownMs": self.cooldown_ms,
            "trailingWindowMs": self.trailing_window_ms,
            "stateElevatedThreshold": self.state_elevated_threshold,
            "staleAfterMs": self.stale_after_ms,
            "absentAfterMs": self.absent_after_ms,
            "bucketMs": self.bucket_ms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalyticsConfig":
        return cls(
            disengage_threshold=data.get("disengageThreshold", 0.40),
            hysteresis=data.get("hysteresis", 0.05),
            cooldown_ms=data.get("cooldownMs", 60_000),
            trailing_window_ms=data.get("trailingWindowMs", 30_000),
            state_elevated_threshold=data.get("stateElevatedThreshold", 0.66),
            stale_after_ms=data.get("staleAfterMs", 10_000),
            absent_after_ms=data.get("absentAfterMs", 30_000),
            bucket_ms=data.get("bucketMs", 10_000),
        )


@dataclass
class LearnerState:
    learner_id: str
    window: deque = field(default_factory=deque)  # events inside the trailing window
    last_seen_ms: int = -1
    total_events: int = 0
    dropped_out_of_order: int = 0
    invalid_frames: int = 0

    def presence(self, now_ms: int, cfg: AnalyticsConfig) -> Presence:
        if self.last_seen_ms < 0:
            return Presence.ABSENT
        age = now_ms - self.last_seen_ms
        if age >= cfg.absent_after_ms:
            return Presence.ABSENT
        if age >= cfg.stale_after_ms:
            return Presence.STALE
        return Presence.ACTIVE


@dataclass(frozen=True)
class Alert:
    kind: str  # class_disengaged | state_elevated | learner_absent
    timestamp_ms: int
    message: str
    severity: str
    context: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "timestampMs": self.timestamp_ms,
            "message": self.message,
            "severity": self.severity,
            "context": self.context,
        }


@dataclass(frozen=True)
class WindowStats:
    window_start_ms: int
    window_end_ms: int
    mean_intensity: tuple[float, ...] | None  # per state; None when no events
    mean_norm_index: float | None
    level_histogram: tuple[tuple[int, ...], ...]  # per state, counts of levels 0..3
    active_learner_count: int
    event_count: int

    def to_dict(self) -> dict:
        return {
            "windowStartMs": self.window_start_ms,
            "windowEndMs": self.window_end_ms,
            "meanIntensity": None
            if self.mean_intensity is None
            else dict(zip(AFFECTIVE_STATES, self.mean_intensity)),
            "meanNormIndex": self.mean_norm_index,
            "levelHistogram": {
                state: list(hist) for state, hist in zip(AFFECTIVE_STATES, self.level_histogram)
            },
            "activeLearnerCount": self.active_learner_count,
            "eventCount": self.event_count,
        }


class _AlertGate:
    """Hysteresis + cooldown bookkeeping for one alert stream."""

    __slots__ = ("armed", "last_fired_ms")

    def __init__(self):
        self.armed = True
        self.last_fired_ms = None

    def update(self, breached: bool, recovered: bool, now_ms: int, cooldown_ms: int) -> bool:
        """True when the alert should fire now."""
        if self.armed and breached:
            if self.last_fired_ms is None or now_ms - self.last_fired_ms >= cooldown_ms:
                self.armed = False
                self.last_fired_ms = now_ms
                return True
            return False
        if not self.armed and recovered:
            self.armed = True
        return False


class SessionState:
    """Single-writer streaming state for one lecture session."""

    def __init__(self, session_id: str, config: AnalyticsConfig = AnalyticsConfig()):
        self.session_id = session_id
        self.config = config
        self.learners: dict[str, LearnerState] = {}
        self.events: list[PredictionEvent] = []
        self.alerts: list[Alert] = []
        self.clock_ms = 0
        self._class_gate = _AlertGate()
        self._state_gates = {state: _AlertGate() for state in AFFECTIVE_STATES}
        self._absent_fired: set[str] = set()

    # -- ingestion ---------------------------------------------------------

    def ingest(self, ev: PredictionEvent) -> list[Alert]:
        """Apply one event; returns the alerts it triggered (possibly none)."""
        learner = self.learners.get(ev.learner_id)
        if learner is None:
            learner = LearnerState(learner_id=ev.learner_id)
            self.learners[ev.learner_id] = learner
        if ev.timestamp_ms < learner.last_seen_ms:
            learner.dropped_out_of_order += 1
            return []

        learner.window.append(ev)
        learner.last_seen_ms = ev.timestamp_ms
        learner.total_events += 1
        self.events.append(ev)
        self.clock_ms = max(self.clock_ms, ev.timestamp_ms)

        cutoff = self.clock_ms - self.config.trailing_window_ms
        for state in self.learners.values():
            while state.window and state.window[0].timestamp_ms < cutoff:
                state.window.popleft()

        return self._evaluate_alerts()

    def note_invalid_frame(self, learner_id: str, timestamp_ms: int) -> None:
        """Invalid (gated-out) frames update presence only."""
        learner = self.learners.get(learner_id)
        if learner is None:
            learner = LearnerState(learner_id=learner_id)
            self.learners[learner_id] = learner
        learner.invalid_frames += 1
        learner.last_seen_ms = max(learner.last_seen_ms, timestamp_ms)
        self.clock_ms = max(self.clock_ms, timestamp_ms)

    def trailing_stats(self) -> WindowStats:
        """Stats over the trailing window ending at the session clock."""
        return self.window_stats(
            max(0, self.clock_ms - self.config.trailing_window_ms) if self.clock_ms else 0,
            self.clock_ms + 1,
        )

    def _evaluate_alerts(self) -> list[Alert]:
        cfg = self.config
        now = self.clock_ms
        fired: list[Alert] = []
        stats = self.trailing_stats()

        if stats.mean_norm_index is not None:
            mean = stats.mean_norm_index
            if self._class_gate.update(
                mean < cfg.disengage_threshold,
                mean > cfg.disengage_threshold + cfg.hysteresis,
                now,
                cfg.cooldown_ms,
            ):
                fired.append(
                    Alert(
                        kind="class_disengaged",
                        timestamp_ms=now,
                        message="class is currently disengaged!",
                        severity="warning",
                        context={
                            "value": mean,
                            "threshold": cfg.disengage_threshold,
                            "windowMs": cfg.trailing_window_ms,
                        },
                    )
                )

        if stats.mean_intensity is not None:
            for si, state in enumerate(AFFECTIVE_STATES):
                level = stats.mean_intensity[si] / 3.0
                if self._state_gates[state].update(
                    level > cfg.state_elevated_threshold,
                    level < cfg.state_elevated_threshold - cfg.hysteresis,
                    now,
                    cfg.cooldown_ms,
                ):
                    fired.append(
                        Alert(
                            kind="state_elevated",
                            timestamp_ms=now,
                            message=f"{state} is elevated ({round(level * 100)}%)",
                            severity="info",
                            context={
                                "state": state,
                                "value": level,
                                "threshold": cfg.state_elevated_threshold,
                            },
                        )
                    )

        for learner in self.learners.values():
            presence = learner.presence(now, cfg)
            if presence is Presence.ABSENT and learner.learner_id not in self._absent_fired:
                self._absent_fired.add(learner.learner_id)
                fired.append(
                    Alert(
                        kind="learner_absent",
                        timestamp_ms=now,
                        message=f"learner {learner.learner_id} appears absent",
                        severity="info",
                        context={
                            "learnerId": learner.learner_id,
                            "lastSeenMs": learner.last_seen_ms,
                        },
                    )
                )
            elif presence is Presence.ACTIVE:
                self._absent_fired.discard(learner.learner_id)

        self.alerts.extend(fired)
        return fired

    # -- windows -----------------------------------------------------------

    def window_stats(self, window_start_ms: int, window_end_ms: int) -> WindowStats:
        """Aggregate events in the half-open window; Absent learners excluded."""
        if window_start_ms >= window_end_ms:
            raise ValueError("windowStart must precede windowEnd")
        cfg = self.config
        absent = {
            lid
            for lid, learner in self.learners.items()
            if learner.presence(window_end_ms - 1, cfg) is Presence.ABSENT
        }
        contributors: set[str] = set()
        intensity_sum = np.zeros(4)
        norm_sum = 0.0
        histogram = np.zeros((4, 4), dtype=int)
        count = 0
        for ev in self.events:
            if not window_start_ms <= ev.timestamp_ms < window_end_ms:
                continue
            if ev.learner_id in absent:
                continue
            contributors.add(ev.learner_id)
            intensity_sum += ev.intensities
            norm_sum += ev.norm_index
            for si in range(4):
                histogram[si, int(np.argmax(ev.probs[si]))] += 1
            count += 1
        if count == 0:
            return WindowStats(
                window_start_ms=window_start_ms,
                window_end_ms=window_end_ms,
                mean_intensity=None,
                mean_norm_index=None,
                level_histogram=tuple((0, 0, 0, 0) for _ in range(4)),
                active_learner_count=0,
                event_count=0,
            )
        return WindowStats(
            window_start_ms=window_start_ms,
            window_end_ms=window_end_ms,
            mean_intensity=tuple(intensity_sum / count),
            mean_norm_index=norm_sum / count,
            level_histogram=tuple(tuple(int(v) for v in row) for row in histogram),
            active_learner_count=len(contributors),
            event_count=count,
        )


def replay(
    events: list[PredictionEvent],
    session_id: str,
    config: AnalyticsConfig = AnalyticsConfig(),
) -> SessionState:
    """Rebuild a session from its event log; alerts re-fire identically."""
    state = SessionState(session_id, config)
    for ev in events:
        state.ingest(ev)
    return state
