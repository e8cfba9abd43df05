"""
Timed mini-app workloads and problem sizing for campaigns
"""

import math
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.errors import BenchError
from ..core.ranks import RankContext, run_ranks
from ..gravity.models import GravityConfig
from ..gravity.services import run_gravity
from ..mhd.models import GridSpec, MhdConfig
from ..mhd.services import run_mhd
from ..pic.models import PicConfig
from ..pic.services import run_pic
from ..tracing.models import TraceTimeline
from ..tracing.recorder import RecorderSet
from .models import Resolution

PIC_SPACING = 0.1
SYNTHETIC_SWEEPS = 40
SYNTHETIC_POINTS = 1 << 15


@dataclass
class WorkloadRun:
    walltime: float
    breakdown: Dict[str, float]
    timeline: TraceTimeline


def _breakdown(timeline: TraceTimeline) -> Dict[str, float]:
    """Seconds per region on the rank-0 stream; never exceeds the traced window"""
    totals: Dict[str, float] = {}
    for event in timeline.streams.get((0, 0), []):
        if event.region is not None:
            totals[event.region] = totals.get(event.region, 0.0) + event.duration / 1e9
    return totals


def double_smallest(resolution: Sequence[int]) -> Resolution:
    """Double the smallest axis; ties go to the lowest axis index"""
    axis = min(range(len(resolution)), key=lambda i: (resolution[i], i))
    return tuple(n * 2 if i == axis else n for i, n in enumerate(resolution))


def grouped_resolutions(base: Sequence[int], groups: int) -> List[Resolution]:
    """Resolution of every strong-scaling group, growing by one axis doubling per group"""
    out = [tuple(int(n) for n in base)]
    while len(out) < groups:
        out.append(double_smallest(out[-1]))
    return out[:groups]


def weak_resolution(per_rank: Sequence[int], ranks: int) -> Resolution:
    """Global size holding `per_rank` cells per rank

    Power-of-two rank counts double axes in grouped order; other counts stretch
    the first axis.
    """
    resolution = tuple(int(n) for n in per_rank)
    if ranks & (ranks - 1) == 0:
        for _ in range(int(math.log2(ranks))):
            resolution = double_smallest(resolution)
        return resolution
    return (resolution[0] * ranks,) + resolution[1:]


def _mhd(ranks: int, resolution: Resolution, seed: int, steps: int, options: Dict[str, Any],
         workers: Optional[int]) -> WorkloadRun:
    cells = tuple(resolution) + (resolution[-1],) * (3 - len(resolution))
    config = MhdConfig(max_steps=steps, t_end=1e9, seed=seed, problem=options.get("problem", "orszag_tang"),
                       divb_mode=options.get("divb_mode", "CT"))
    start = time.perf_counter()
    result = run_mhd(config, GridSpec(global_cells=cells), ranks=ranks, workers=workers)
    return WorkloadRun(time.perf_counter() - start, _breakdown(result.timeline), result.timeline)


def _pic(ranks: int, resolution: Resolution, seed: int, steps: int, options: Dict[str, Any],
         workers: Optional[int]) -> WorkloadRun:
    cells = (resolution[0], resolution[1] if len(resolution) > 1 else resolution[0])
    config = PicConfig(cells=cells, extent=(cells[0] * PIC_SPACING, cells[1] * PIC_SPACING),
                       ppc=int(options.get("ppc", 16)), cycles=steps, seed=seed)
    start = time.perf_counter()
    result = run_pic(config, ranks=ranks, workers=workers)
    return WorkloadRun(time.perf_counter() - start, _breakdown(result.timeline), result.timeline)


def _gravity(ranks: int, resolution: Resolution, seed: int, steps: int, options: Dict[str, Any],
             workers: Optional[int]) -> WorkloadRun:
    config = GravityConfig(n_bodies=int(resolution[0]), walk=options.get("walk", "grouped"), seed=seed)
    start = time.perf_counter()
    result = run_gravity(config, ranks=ranks, workers=workers, reference=False)
    return WorkloadRun(time.perf_counter() - start, _breakdown(result.timeline), result.timeline)


def _synthetic(ranks: int, resolution: Resolution, seed: int, steps: int, options: Dict[str, Any],
               workers: Optional[int]) -> WorkloadRun:
    """Communication-free units of fixed numpy work split evenly over the ranks

    A unit is `sweeps` passes of large-array ufuncs, which drop the GIL, so
    thread ranks scale with the worker slots.
    """
    sweeps = int(options.get("sweeps", SYNTHETIC_SWEEPS))
    points = int(options.get("points", SYNTHETIC_POINTS))
    units = int(resolution[0]) * steps
    recorders = RecorderSet(ranks)

    def body(ctx: RankContext) -> None:
        mine = units // ctx.size + (1 if ctx.rank < units % ctx.size else 0)
        with ctx.region("synthetic"), ctx.compute():
            work = np.linspace(0.0, 1.0, points)
            scratch = np.empty_like(work)
            for _ in range(mine * sweeps):
                np.sin(work, out=scratch)
                np.add(scratch, 1.0, out=work)

    start = time.perf_counter()
    run_ranks(ranks, body, workers=workers, recorders=recorders)
    walltime = time.perf_counter() - start
    timeline = recorders.finalize()
    return WorkloadRun(walltime, _breakdown(timeline), timeline)


WORKLOADS = {"mhd": _mhd, "pic": _pic, "gravity": _gravity, "synthetic": _synthetic}


def run_workload(app: str, ranks: int, resolution: Resolution, seed: int = 0, steps: int = 1,
                 options: Optional[Dict[str, Any]] = None, workers: Optional[int] = None) -> WorkloadRun:
    """One timed execution of an app at a global resolution"""
    try:
        runner = WORKLOADS[app]
    except KeyError:
        raise BenchError(f"unknown workload {app!r}") from None
    return runner(ranks, tuple(resolution), seed, steps, options or {}, workers)
