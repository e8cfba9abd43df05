"""
JSON-lines trace files: one header line, then one event per line
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from loguru import logger

from ..core.errors import EmptyTrace, MalformedEvent, OverlapViolation
from .models import SCHEMA_NAME, SCHEMA_VERSION, State, TraceEvent, TraceTimeline
from .recorder import RecorderSet

_REQUIRED = ("rank", "state", "t_start", "t_end")


def write_trace(timeline: TraceTimeline, path: Union[str, Path]) -> Path:
    """Write a timeline as JSON lines (header first)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "schema": SCHEMA_NAME,
        "version": SCHEMA_VERSION,
        "ranks": timeline.ranks,
        "threads": timeline.threads,
        "roi": list(timeline.roi),
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for event in timeline.events():
            fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
    return path


def _parse_event(data: Dict, line_no: int) -> TraceEvent:
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise MalformedEvent(line_no, f"missing field(s) {', '.join(missing)}")
    try:
        event = TraceEvent.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise MalformedEvent(line_no, str(exc)) from exc
    if event.t_end < event.t_start:
        raise MalformedEvent(line_no, "t_end precedes t_start")
    if event.rank < 0 or event.thread < 0:
        raise MalformedEvent(line_no, "negative rank or thread")
    return event


def clip_to_roi(events: List[TraceEvent], roi: Tuple[int, int]) -> List[TraceEvent]:
    t0, t1 = roi
    clipped = []
    for event in events:
        if event.t_end < t0 or event.t_start > t1:
            continue
        if event.t_start < t0 or event.t_end > t1:
            event = event.shifted(max(event.t_start, t0), min(event.t_end, t1))
        clipped.append(event)
    return clipped


def validate_streams(timeline: TraceTimeline) -> TraceTimeline:
    """Sort every stream and reject overlapping intervals"""
    for key, events in timeline.streams.items():
        events.sort(key=lambda e: (e.t_start, e.t_end))
        for previous, current in zip(events, events[1:]):
            if current.t_start < previous.t_end:
                raise OverlapViolation(key[0], key[1], current.t_start, previous.t_end)
    return timeline


def load_trace(source: Union[str, Path, RecorderSet], roi: Optional[Tuple[int, int]] = None) -> TraceTimeline:
    """Load and validate a trace file (or finalize a live recorder set)"""
    if isinstance(source, RecorderSet):
        timeline = source.finalize()
        if roi is not None:
            timeline = TraceTimeline.from_events(clip_to_roi(list(timeline.events()), roi),
                                                 ranks=timeline.ranks, threads=timeline.threads, roi=roi)
        if timeline.ranks < 1:
            raise EmptyTrace("recorder set holds no ranks")
        return validate_streams(timeline)

    path = Path(source)
    header: Optional[Dict] = None
    events: List[TraceEvent] = []
    with path.open("rb") as fh:
        for line_no, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedEvent(line_no, f"invalid UTF-8 at byte {exc.start}") from exc
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedEvent(line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(data, dict):
                raise MalformedEvent(line_no, "expected a JSON object")
            if header is None and data.get("schema") == SCHEMA_NAME:
                header = data
                continue
            events.append(_parse_event(data, line_no))

    ranks = int(header["ranks"]) if header else None
    threads = int(header.get("threads", 1)) if header else None
    file_roi = tuple(header["roi"]) if header and header.get("roi") is not None else None
    window = roi or file_roi
    if window is not None:
        events = clip_to_roi(events, window)

    timeline = TraceTimeline.from_events(events, ranks=ranks, threads=threads, roi=window)
    if timeline.ranks < 1:
        raise EmptyTrace(f"trace {path} contains no ranks")
    logger.debug(f"Loaded trace {path}: {timeline.event_count()} events, {timeline.ranks} ranks")
    return validate_streams(timeline)


__all__ = ["load_trace", "write_trace", "clip_to_roi", "validate_streams", "State"]
