"""
In-process logical ranks: shared-nothing workers talking through tagged messages
"""

import copy
import queue
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..tracing.models import State
from ..tracing.recorder import RecorderSet, TraceRecorder
from .config import settings
from .errors import NeighborTimeout, RankError

_POLL_INTERVAL = 0.05


def payload_bytes(payload: Any) -> int:
    if isinstance(payload, np.ndarray):
        return int(payload.nbytes)
    if isinstance(payload, (list, tuple)):
        return sum(payload_bytes(p) for p in payload)
    if isinstance(payload, dict):
        return sum(payload_bytes(p) for p in payload.values())
    return 8


def _snapshot(payload: Any) -> Any:
    if isinstance(payload, np.ndarray):
        return payload.copy()
    return copy.deepcopy(payload)


def tree_reduce(values: Sequence[Any], op: Callable[[Any, Any], Any]) -> Any:
    """Pairwise combination by rank index; the order never depends on timing"""
    level = list(values)
    if not level:
        raise RankError("reduction over zero ranks")
    while len(level) > 1:
        level = [op(level[i], level[i + 1]) if i + 1 < len(level) else level[i] for i in range(0, len(level), 2)]
    return level[0]


class RankWorld:
    """Message board, collective slots and compute slots shared by all ranks of one run"""

    def __init__(self, size: int, workers: Optional[int] = None, timeout: Optional[float] = None,
                 recorders: Optional[RecorderSet] = None):
        if size < 1:
            raise RankError("rank count must be positive", size=size)
        self.size = size
        self.timeout = settings.NEIGHBOR_TIMEOUT if timeout is None else timeout
        self.recorders = recorders if recorders is not None else RecorderSet(size)
        self.slots = threading.BoundedSemaphore(settings.worker_cap(workers))
        self.aborted = threading.Event()
        self._board: Dict[Tuple[int, int, Any], "queue.Queue[Any]"] = {}
        self._board_lock = threading.Lock()
        self._barrier = threading.Barrier(size)
        self._exchange: List[Any] = [None] * size

    def channel(self, src: int, dst: int, tag: Any) -> "queue.Queue[Any]":
        key = (src, dst, tag)
        with self._board_lock:
            if key not in self._board:
                self._board[key] = queue.Queue()
            return self._board[key]

    def abort(self) -> None:
        self.aborted.set()
        self._barrier.abort()

    def wait_barrier(self, rank: int) -> None:
        try:
            self._barrier.wait(timeout=self.timeout)
        except threading.BrokenBarrierError as exc:
            if self.aborted.is_set():
                raise RankError("run aborted by another rank", rank=rank) from exc
            raise NeighborTimeout(rank, -1, "barrier", self.timeout) from exc

    def context(self, rank: int) -> "RankContext":
        return RankContext(self, rank)


class RankContext:
    """Handle of one logical rank; all state reached through it is single-owner"""

    def __init__(self, world: RankWorld, rank: int):
        self.world = world
        self.rank = rank
        self.size = world.size
        self.recorder: TraceRecorder = world.recorders.recorder(rank)

    @contextmanager
    def region(self, label: str) -> Iterator[None]:
        with self.recorder.region(label):
            yield

    @contextmanager
    def compute(self) -> Iterator[None]:
        """USEFUL span holding one of the worker slots"""
        with self.world.slots:
            with self.recorder.span(State.USEFUL):
                yield

    def send(self, dst: int, tag: Any, payload: Any) -> None:
        """Non-blocking send of a private copy"""
        nbytes = payload_bytes(payload)
        with self.recorder.span(State.SEND, peer=dst, nbytes=nbytes, tag=_int_tag(tag)):
            self.world.channel(self.rank, dst, tag).put(_snapshot(payload))

    def recv(self, src: int, tag: Any) -> Any:
        channel = self.world.channel(src, self.rank, tag)
        deadline = time.monotonic() + self.world.timeout
        start = self.recorder.now()
        while True:
            if self.world.aborted.is_set():
                raise RankError("run aborted by another rank", rank=self.rank)
            try:
                payload = channel.get(timeout=_POLL_INTERVAL)
                break
            except queue.Empty:
                if time.monotonic() > deadline:
                    raise NeighborTimeout(self.rank, src, tag, self.world.timeout)
        self.recorder.record(State.RECV, start, self.recorder.now(), peer=src,
                             nbytes=payload_bytes(payload), tag=_int_tag(tag))
        return payload

    def barrier(self) -> None:
        with self.recorder.span(State.BARRIER):
            self.world.wait_barrier(self.rank)

    def allgather(self, value: Any) -> List[Any]:
        with self.recorder.span(State.COLLECTIVE, nbytes=payload_bytes(value)):
            self.world._exchange[self.rank] = _snapshot(value)
            self.world.wait_barrier(self.rank)
            values = list(self.world._exchange)
            self.world.wait_barrier(self.rank)
        return values

    def allreduce(self, value: Any, op: Callable[[Any, Any], Any]) -> Any:
        return tree_reduce(self.allgather(value), op)

    def bcast(self, value: Any, root: int = 0) -> Any:
        return self.allgather(value if self.rank == root else None)[root]

    def gather(self, value: Any, root: int = 0) -> Optional[List[Any]]:
        values = self.allgather(value)
        return values if self.rank == root else None


def _int_tag(tag: Any) -> Optional[int]:
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    return abs(hash(tag)) % (1 << 31)


def run_ranks(size: int, body: Callable[[RankContext], Any], workers: Optional[int] = None,
              timeout: Optional[float] = None, recorders: Optional[RecorderSet] = None) -> Tuple[List[Any], RankWorld]:
    """Run `body` once per logical rank and return the per-rank results in rank order"""
    world = RankWorld(size, workers=workers, timeout=timeout, recorders=recorders)
    results: List[Any] = [None] * size
    errors: List[Tuple[int, BaseException]] = []

    def _run(rank: int) -> None:
        try:
            results[rank] = body(world.context(rank))
        except BaseException as exc:
            errors.append((rank, exc))
            world.abort()

    logger.debug(f"Starting {size} logical ranks, {settings.worker_cap(workers)} compute slots")
    with ThreadPoolExecutor(max_workers=size, thread_name_prefix="rank") as pool:
        list(pool.map(_run, range(size)))

    if errors:
        primary = [e for e in errors if not (type(e[1]) is RankError and world.aborted.is_set()
                                             and "aborted" in str(e[1]))]
        rank, exc = sorted(primary or errors, key=lambda e: e[0])[0]
        if hasattr(exc, "add_context"):
            exc.add_context(rank=rank)
        raise exc
    return results, world
