"""Streaming per-session engagement analytics.

The NDJSON event log is the source of truth: ingesting a recorded log
through a fresh :class:`SessionState` reproduces every alert, window
statistic and report byte for byte.
"""

from attentive.analytics.events import (
    PredictionEvent,
    canonical_json,
    event_from_json,
    event_to_json,
    read_event_log,
    write_event_log,
)
from attentive.analytics.session import (
    Alert,
    AnalyticsConfig,
    LearnerState,
    Presence,
    SessionState,
    WindowStats,
    replay,
)
from attentive.analytics.report import (
    LectureReport,
    Recommendation,
    Segment,
    build_report,
    recommend,
    report_to_json,
)

__all__ = [
    "Alert",
    "AnalyticsConfig",
    "LearnerState",
    "LectureReport",
    "PredictionEvent",
    "Presence",
    "Recommendation",
    "Segment",
    "SessionState",
    "WindowStats",
    "build_report",
    "canonical_json",
    "event_from_json",
    "event_to_json",
    "read_event_log",
    "recommend",
    "replay",
    "report_to_json",
    "write_event_log",
]
