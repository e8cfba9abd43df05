"""
Trace data model: state intervals per (rank, thread) and the metric report
"""

from dataclasses import dataclass, field, asdict, replace
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

SCHEMA_NAME = "examini-trace"
SCHEMA_VERSION = 1

StreamKey = Tuple[int, int]


class State(str, Enum):
    USEFUL = "USEFUL"
    SEND = "SEND"
    RECV = "RECV"
    WAIT = "WAIT"
    COLLECTIVE = "COLLECTIVE"
    BARRIER = "BARRIER"
    OMP_RUNTIME = "OMP_RUNTIME"
    IDLE = "IDLE"


POINT_TO_POINT = (State.SEND, State.RECV)
RECEIVING = (State.RECV, State.WAIT)
SYNCHRONIZING = (State.COLLECTIVE, State.BARRIER)
COMMUNICATION = (State.SEND, State.RECV, State.WAIT, State.COLLECTIVE, State.BARRIER)


@dataclass(frozen=True)
class TraceEvent:
    """One state interval; times are integer nanoseconds"""
    rank: int
    thread: int
    state: State
    t_start: int
    t_end: int
    peer: Optional[int] = None
    bytes: Optional[int] = None
    region: Optional[str] = None
    instructions: Optional[int] = None
    tag: Optional[int] = None

    @property
    def duration(self) -> int:
        return self.t_end - self.t_start

    @property
    def stream(self) -> StreamKey:
        return (self.rank, self.thread)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["state"] = self.state.value
        return {k: v for k, v in data.items() if v is not None}

    @classmethod
    def from_dict(cls, data: Dict) -> "TraceEvent":
        return cls(
            rank=int(data["rank"]),
            thread=int(data.get("thread", 0)),
            state=State(data["state"]),
            t_start=int(data["t_start"]),
            t_end=int(data["t_end"]),
            peer=None if data.get("peer") is None else int(data["peer"]),
            bytes=None if data.get("bytes") is None else int(data["bytes"]),
            region=data.get("region"),
            instructions=None if data.get("instructions") is None else int(data["instructions"]),
            tag=None if data.get("tag") is None else int(data["tag"]),
        )

    def shifted(self, t_start: int, t_end: int) -> "TraceEvent":
        return replace(self, t_start=t_start, t_end=t_end)


@dataclass
class TraceTimeline:
    """Ordered events per (rank, thread) inside one RoI window"""
    ranks: int
    threads: int = 1
    roi: Tuple[int, int] = (0, 0)
    streams: Dict[StreamKey, List[TraceEvent]] = field(default_factory=dict)

    @property
    def window(self) -> int:
        return self.roi[1] - self.roi[0]

    def stream_keys(self) -> List[StreamKey]:
        return sorted(self.streams)

    def events(self) -> Iterator[TraceEvent]:
        for key in self.stream_keys():
            yield from self.streams[key]

    def event_count(self) -> int:
        return sum(len(v) for v in self.streams.values())

    def regions(self) -> List[str]:
        return sorted({e.region for e in self.events() if e.region is not None})

    def add(self, event: TraceEvent) -> None:
        self.streams.setdefault(event.stream, []).append(event)

    @classmethod
    def from_events(cls, events: Iterable[TraceEvent], ranks: Optional[int] = None,
                    threads: Optional[int] = None, roi: Optional[Tuple[int, int]] = None) -> "TraceTimeline":
        events = sorted(events, key=lambda e: (e.rank, e.thread, e.t_start, e.t_end))
        timeline = cls(ranks=0, threads=1)
        for event in events:
            timeline.add(event)
        if events:
            inferred_ranks = max(e.rank for e in events) + 1
            inferred_threads = max(e.thread for e in events) + 1
            inferred_roi = (min(e.t_start for e in events), max(e.t_end for e in events))
        else:
            inferred_ranks, inferred_threads, inferred_roi = 0, 1, (0, 0)
        timeline.ranks = ranks if ranks is not None else inferred_ranks
        timeline.threads = threads if threads is not None else inferred_threads
        timeline.roi = roi if roi is not None else inferred_roi
        return timeline

    def filter_region(self, region: str) -> "TraceTimeline":
        return TraceTimeline.from_events((e for e in self.events() if e.region == region),
                                         ranks=self.ranks, threads=self.threads, roi=self.roi)


@dataclass
class EfficiencyReport:
    """POP multiplicative metric set for one region (None = whole RoI)"""
    region: Optional[str]
    runtime: float
    ideal_runtime: Optional[float]
    load_balance: float
    communication_efficiency: float
    parallel_efficiency: float
    serialization_efficiency: Optional[float] = None
    transfer_efficiency: Optional[float] = None
    omp_communication_efficiency: Optional[float] = None
    computation_scalability: Optional[float] = None
    instruction_scalability: Optional[float] = None
    global_efficiency: Optional[float] = None

    METRIC_NAMES = (
        "load_balance", "communication_efficiency", "serialization_efficiency", "transfer_efficiency",
        "parallel_efficiency", "omp_communication_efficiency", "computation_scalability",
        "instruction_scalability", "global_efficiency",
    )

    def metrics(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in self.METRIC_NAMES if getattr(self, name) is not None}

    def to_dict(self) -> Dict:
        data = {"region": self.region, "runtime": self.runtime, "ideal_runtime": self.ideal_runtime}
        data.update(self.metrics())
        return data


@dataclass
class Scalability:
    computation: float
    instruction: Optional[float] = None
    mode: str = "strong"


@dataclass
class AntipatternFinding:
    """Barrier-bounded run of small point-to-point messages"""
    segment: int
    ordinal: int
    run_length: int
    ranks: List[int]
    latency_ns: int
    bytes_total: int
    t_start: int
    t_end: int
