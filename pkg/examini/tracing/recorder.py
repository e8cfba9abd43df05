"""
Live trace recorder: region markers and state spans, one recorder per (rank, thread)
"""

import threading
import time
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional

from ..core.errors import TraceError
from .models import State, StreamKey, TraceEvent, TraceTimeline


class TraceRecorder:
    """Single-owner event log of one (rank, thread) stream"""

    def __init__(self, rank: int, thread: int = 0, epoch_ns: Optional[int] = None):
        self.rank = rank
        self.thread = thread
        self.epoch_ns = time.perf_counter_ns() if epoch_ns is None else epoch_ns
        self.events: List[TraceEvent] = []
        self._regions: List[str] = []
        self._open_span = False

    def now(self) -> int:
        return time.perf_counter_ns() - self.epoch_ns

    @property
    def current_region(self) -> Optional[str]:
        return self._regions[-1] if self._regions else None

    @contextmanager
    def region(self, label: str) -> Iterator[None]:
        """Mark a region of interest; spans opened inside inherit the label"""
        self._regions.append(label)
        try:
            yield
        finally:
            self._regions.pop()

    def record(self, state: State, t_start: int, t_end: int, peer: Optional[int] = None,
               nbytes: Optional[int] = None, tag: Optional[int] = None,
               instructions: Optional[int] = None, region: Optional[str] = None) -> TraceEvent:
        if self.events and t_start < self.events[-1].t_end:
            t_start = self.events[-1].t_end
        t_end = max(t_end, t_start)
        event = TraceEvent(
            rank=self.rank, thread=self.thread, state=state, t_start=t_start, t_end=t_end, peer=peer,
            bytes=nbytes, region=region if region is not None else self.current_region,
            instructions=instructions, tag=tag,
        )
        self.events.append(event)
        return event

    @contextmanager
    def span(self, state: State, peer: Optional[int] = None, nbytes: Optional[int] = None,
             tag: Optional[int] = None, instructions: Optional[int] = None) -> Iterator[None]:
        if self._open_span:
            raise TraceError("state spans cannot nest", rank=self.rank, thread=self.thread, state=state.value)
        self._open_span = True
        start = self.now()
        try:
            yield
        finally:
            self._open_span = False
            self.record(state, start, self.now(), peer=peer, nbytes=nbytes, tag=tag, instructions=instructions)


class RecorderSet:
    """Recorders of every rank sharing one epoch; merged into a timeline on finalize"""

    def __init__(self, ranks: int, threads: int = 1):
        self.ranks = ranks
        self.threads = threads
        self.epoch_ns = time.perf_counter_ns()
        self._lock = threading.Lock()
        self._recorders: Dict[StreamKey, TraceRecorder] = {}

    def recorder(self, rank: int, thread: int = 0) -> TraceRecorder:
        with self._lock:
            key = (rank, thread)
            if key not in self._recorders:
                self._recorders[key] = TraceRecorder(rank, thread, self.epoch_ns)
            return self._recorders[key]

    def finalize(self) -> TraceTimeline:
        events = [e for key in sorted(self._recorders) for e in self._recorders[key].events]
        t1 = max((e.t_end for e in events), default=0)
        t0 = min((e.t_start for e in events), default=0)
        return TraceTimeline.from_events(events, ranks=self.ranks, threads=self.threads, roi=(t0, t1))
