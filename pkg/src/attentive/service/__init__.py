"""Multi-session analytics service.

A small REST surface handles session lifecycle and report retrieval;
persistent websocket channels carry learner ingestion upstream and
instructor analytics/alerts downstream.  Every message is versioned
JSON; per-session analytics mutation is serialized behind one lock, and
the per-session NDJSON event log allows full offline replay.
"""

from attentive.service.config import ServiceConfig, load_config
from attentive.service.engine import EngineError, ServiceEngine, Session
from attentive.service.protocol import (
    WIRE_VERSION,
    ProtocolError,
    parse_client_message,
    validate_probs,
)

__all__ = [
    "EngineError",
    "ProtocolError",
    "ServiceConfig",
    "ServiceEngine",
    "Session",
    "WIRE_VERSION",
    "load_config",
    "parse_client_message",
    "validate_probs",
]
