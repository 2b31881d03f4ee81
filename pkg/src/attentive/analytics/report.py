"""Post-session lecture reports and cross-lecture recommendations.

Reports bucket the event log into fixed 10-second windows (the clip
granularity of the source corpus), mark maximal low-attentiveness runs
and per-state elevation peaks, and serialize to canonical JSON so that a
replayed log yields byte-identical bytes.  Percentages follow the
display convention: attentiveness is normIndex*100, state levels are
intensity/3*100.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from attentive.affectmodel import AFFECTIVE_STATES
from attentive.analytics.events import canonical_json
from attentive.analytics.session import SessionState, WindowStats

PHASES = ("opening", "middle", "closing")


@dataclass(frozen=True)
class Segment:
    start_ms: int
    end_ms: int
    value: float  # normalized 0..1 (attentiveness or intensity/3)
    state: str | None = None
    session_id: str | None = None

    @property
    def percent(self) -> float:
        return round(self.value * 100, 1)

    def to_dict(self) -> dict:
        out = {
            "startMs": self.start_ms,
            "endMs": self.end_ms,
            "value": self.value,
            "percent": self.percent,
        }
        if self.state is not None:
            out["state"] = self.state
        if self.session_id is not None:
            out["sessionId"] = self.session_id
        return out


@dataclass(frozen=True)
class LectureReport:
    session_id: str
    duration_ms: int
    event_count: int
    config: dict
    buckets: tuple[WindowStats, ...]
    low_segments: tuple[Segment, ...]
    peak_segments: tuple[Segment, ...]  # per-state elevation runs
    learners: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "sessionId": self.session_id,
            "durationMs": self.duration_ms,
            "eventCount": self.event_count,
            "config": self.config,
            "buckets": [b.to_dict() for b in self.buckets],
            "lowSegments": [s.to_dict() for s in self.low_segments],
            "peakSegments": [s.to_dict() for s in self.peak_segments],
            "learners": list(self.learners),
        }


@dataclass(frozen=True)
class Recommendation:
    text: str
    evidence: tuple[Segment, ...]
    score: float

    def __post_init__(self):
        if not self.evidence:
            raise ValueError("a recommendation must cite at least one evidence segment")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "evidence": [s.to_dict() for s in self.evidence],
            "score": self.score,
        }


def _runs(flags: list[bool]) -> list[tuple[int, int]]:
    """Maximal [start, end) index runs of True."""
    runs = []
    start = None
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(flags)))
    return runs


def build_report(state: SessionState) -> LectureReport:
    """Assemble the post-hoc report from a (closed) session's state."""
    cfg = state.config
    bucket_ms = cfg.bucket_ms
    if state.events:
        n_buckets = state.clock_ms // bucket_ms + 1
    else:
        n_buckets = 0
    buckets = tuple(
        state.window_stats(i * bucket_ms, (i + 1) * bucket_ms) for i in range(n_buckets)
    )

    low_flags = [
        b.mean_norm_index is not None and b.mean_norm_index < cfg.disengage_threshold
        for b in buckets
    ]
    low_segments = []
    for i0, i1 in _runs(low_flags):
        start, end = i0 * bucket_ms, i1 * bucket_ms
        seg_stats = state.window_stats(start, end)
        low_segments.append(
            Segment(start_ms=start, end_ms=end, value=seg_stats.mean_norm_index)
        )

    peak_segments = []
    for si, state_name in enumerate(AFFECTIVE_STATES):
        flags = [
            b.mean_intensity is not None
            and b.mean_intensity[si] / 3.0 > cfg.state_elevated_threshold
            for b in buckets
        ]
        for i0, i1 in _runs(flags):
            start, end = i0 * bucket_ms, i1 * bucket_ms
            seg_stats = state.window_stats(start, end)
            peak_segments.append(
                Segment(
                    start_ms=start,
                    end_ms=end,
                    value=seg_stats.mean_intensity[si] / 3.0,
                    state=state_name,
                )
            )

    learners = []
    for lid in sorted(state.learners):
        learner = state.learners[lid]
        own = [ev for ev in state.events if ev.learner_id == lid]
        if own:
            mean_norm = sum(ev.norm_index for ev in own) / len(own)
            mean_int = [
                sum(ev.intensities[si] for ev in own) / len(own) for si in range(4)
            ]
        else:
            mean_norm = None
            mean_int = None
        learners.append(
            {
                "learnerId": lid,
                "events": learner.total_events,
                "droppedOutOfOrder": learner.dropped_out_of_order,
                "invalidFrames": learner.invalid_frames,
                "meanNormIndex": mean_norm,
                "meanIntensity": None
                if mean_int is None
                else dict(zip(AFFECTIVE_STATES, mean_int)),
                "lastSeenMs": learner.last_seen_ms,
                "finalPresence": learner.presence(state.clock_ms, cfg).value,
            }
        )

    return LectureReport(
        session_id=state.session_id,
        duration_ms=n_buckets * bucket_ms,
        event_count=len(state.events),
        config=cfg.to_dict(),
        buckets=buckets,
        low_segments=tuple(low_segments),
        peak_segments=tuple(peak_segments),
        learners=tuple(learners),
    )


def report_to_json(report: LectureReport) -> str:
    return canonical_json(report.to_dict())


def _phase_of(start_ms: int, end_ms: int, duration_ms: int) -> int:
    mid = (start_ms + end_ms) / 2
    return min(2, int(3 * mid / duration_ms)) if duration_ms > 0 else 0


def recommend(reports: list[LectureReport]) -> list[Recommendation]:
    """Cross-lecture heuristics over opening/middle/closing thirds."""
    if not reports:
        raise ValueError("need at least one report")

    phase_means: list[list[float]] = [[], [], []]
    phase_evidence: list[list[Segment]] = [[], [], []]
    for report in reports:
        if not report.buckets or report.duration_ms == 0:
            continue
        per_phase: list[list[float]] = [[], [], []]
        for bucket in report.buckets:
            if bucket.mean_norm_index is None:
                continue
            phase = _phase_of(bucket.window_start_ms, bucket.window_end_ms, report.duration_ms)
            per_phase[phase].append(bucket.mean_norm_index)
        for phase in range(3):
            if per_phase[phase]:
                mean = sum(per_phase[phase]) / len(per_phase[phase])
                phase_means[phase].append(mean)
                third = report.duration_ms / 3
                phase_evidence[phase].append(
                    Segment(
                        start_ms=int(phase * third),
                        end_ms=int((phase + 1) * third),
                        value=mean,
                        session_id=report.session_id,
                    )
                )

    recommendations: list[Recommendation] = []
    defined = [i for i in range(3) if phase_means[i]]
    if defined:
        scores = {i: sum(phase_means[i]) / len(phase_means[i]) for i in defined}
        worst = min(defined, key=lambda i: scores[i])
        best = max(defined, key=lambda i: scores[i])
        gap = scores[best] - scores[worst]
        if gap > 1e-9:
            recommendations.append(
                Recommendation(
                    text=(
                        f"Attentiveness is lowest during the {PHASES[worst]} phase "
                        f"(mean {round(scores[worst] * 100, 1)}%); consider restructuring "
                        "that part of the lecture."
                    ),
                    evidence=tuple(phase_evidence[worst]),
                    score=round(gap, 6),
                )
            )

    for state_name in AFFECTIVE_STATES:
        by_phase: dict[int, list[Segment]] = {0: [], 1: [], 2: []}
        for report in reports:
            if report.duration_ms == 0:
                continue
            seen_phases = set()
            for seg in report.peak_segments:
                if seg.state != state_name:
                    continue
                phase = _phase_of(seg.start_ms, seg.end_ms, report.duration_ms)
                if phase in seen_phases:
                    continue
                seen_phases.add(phase)
                by_phase[phase].append(
                    Segment(
                        start_ms=seg.start_ms,
                        end_ms=seg.end_ms,
                        value=seg.value,
                        state=state_name,
                        session_id=report.session_id,
                    )
                )
        for phase, segments in by_phase.items():
            if len(segments) >= 2:
                recommendations.append(
                    Recommendation(
                        text=(
                            f"{state_name} is repeatedly elevated during the "
                            f"{PHASES[phase]} phase across {len(segments)} lectures; "
                            "consider revisiting how that material is presented."
                        ),
                        evidence=tuple(segments),
                        score=float(len(segments)),
                    )
                )

    recommendations.sort(key=lambda r: -r.score)
    return recommendations
