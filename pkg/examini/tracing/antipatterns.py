"""
Barrier-bounded small-message antipattern detection
"""

from typing import Dict, List, Tuple

from .models import POINT_TO_POINT, AntipatternFinding, State, TraceEvent, TraceTimeline

DEFAULT_MIN_RUN = 5
DEFAULT_MAX_BYTES = 1024
DEFAULT_MAX_GAP_NS = 1000


def _segments(events: List[TraceEvent]) -> List[List[TraceEvent]]:
    """Event lists strictly between consecutive barriers; leading/trailing parts are dropped"""
    segments: List[List[TraceEvent]] = []
    current = None
    for event in events:
        if event.state == State.BARRIER:
            if current is not None:
                segments.append(current)
            current = []
        elif current is not None:
            current.append(event)
    return segments


def _runs(segment: List[TraceEvent], max_bytes: int, max_gap: int) -> List[List[TraceEvent]]:
    runs: List[List[TraceEvent]] = []
    run: List[TraceEvent] = []
    gap = 0
    for event in segment:
        if event.state in POINT_TO_POINT and (event.bytes or 0) <= max_bytes:
            run.append(event)
            gap = 0
        elif event.state == State.USEFUL and run and gap + event.duration <= max_gap:
            gap += event.duration
        else:
            if run:
                runs.append(run)
            run, gap = [], 0
    if run:
        runs.append(run)
    return runs


def detect_latency_antipattern(trace: TraceTimeline, min_run: int = DEFAULT_MIN_RUN,
                               max_bytes: int = DEFAULT_MAX_BYTES,
                               max_gap: int = DEFAULT_MAX_GAP_NS) -> List[AntipatternFinding]:
    """Maximal runs of small point-to-point events between barriers, merged across ranks"""
    merged: Dict[Tuple[int, int, int], AntipatternFinding] = {}
    for key in trace.stream_keys():
        for seg_idx, segment in enumerate(_segments(trace.streams[key])):
            ordinal = 0
            for run in _runs(segment, max_bytes, max_gap):
                if len(run) < min_run:
                    continue
                ident = (seg_idx, ordinal, len(run))
                ordinal += 1
                latency = sum(e.duration for e in run)
                nbytes = sum(e.bytes or 0 for e in run)
                finding = merged.get(ident)
                if finding is None:
                    merged[ident] = AntipatternFinding(
                        segment=seg_idx, ordinal=ident[1], run_length=len(run), ranks=[key[0]],
                        latency_ns=latency, bytes_total=nbytes, t_start=run[0].t_start, t_end=run[-1].t_end,
                    )
                    continue
                if key[0] not in finding.ranks:
                    finding.ranks.append(key[0])
                finding.latency_ns += latency
                finding.bytes_total += nbytes
                finding.t_start = min(finding.t_start, run[0].t_start)
                finding.t_end = max(finding.t_end, run[-1].t_end)
    return [merged[k] for k in sorted(merged)]
