"""
POP hierarchical multiplicative efficiency model
"""

from collections import defaultdict
from typing import Dict, List, Optional

import pandas as pd
from loguru import logger

from ..core.errors import EmptyTrace, MissingCounters, MissingDependency, TraceError, UnmatchedMessage
from .models import EfficiencyReport, Scalability, State, StreamKey, TraceTimeline
from .replay import ideal_network_replay

WEAK_SCALING_THRESHOLD = 0.9


def _stream_set(trace: TraceTimeline) -> List[StreamKey]:
    keys = set(trace.streams)
    keys.update((rank, 0) for rank in range(trace.ranks))
    return sorted(keys)


def _state_time(trace: TraceTimeline, state: State, region: Optional[str]) -> Dict[StreamKey, int]:
    totals: Dict[StreamKey, int] = {key: 0 for key in _stream_set(trace)}
    for event in trace.events():
        if event.state == state and (region is None or event.region == region):
            totals[event.stream] += event.duration
    return totals


def _elapsed(trace: TraceTimeline, region: Optional[str]) -> int:
    if region is None:
        return trace.window
    per_stream: Dict[StreamKey, int] = defaultdict(int)
    for event in trace.events():
        if event.region == region:
            per_stream[event.stream] += event.duration
    return max(per_stream.values(), default=0)


def region_times(trace: TraceTimeline) -> Dict[str, float]:
    """Seconds per region: max over streams of the summed labelled durations"""
    return {region: _elapsed(trace, region) / 1e9 for region in trace.regions()}


def useful_times(trace: TraceTimeline, region: Optional[str] = None) -> Dict[StreamKey, int]:
    return _state_time(trace, State.USEFUL, region)


def omp_communication_efficiency(trace: TraceTimeline, region: Optional[str] = None) -> float:
    """Per-rank useful/(useful + OMP runtime) over its threads, averaged over ranks"""
    useful = useful_times(trace, region)
    runtime = _state_time(trace, State.OMP_RUNTIME, region)
    per_rank_num: Dict[int, int] = defaultdict(int)
    per_rank_den: Dict[int, int] = defaultdict(int)
    for key in useful:
        per_rank_num[key[0]] += useful[key]
        per_rank_den[key[0]] += useful[key] + runtime[key]
    ratios = [per_rank_num[r] / per_rank_den[r] if per_rank_den[r] else 1.0 for r in sorted(per_rank_num)]
    return sum(ratios) / len(ratios) if ratios else 1.0


def compute_pop_metrics(trace: TraceTimeline, region: Optional[str] = None, ideal_replay: bool = True,
                        base: Optional[TraceTimeline] = None) -> EfficiencyReport:
    """LB, CommE, PE (+ SerE, TE via ideal replay, OCE, scalabilities when a base run is given)"""
    if trace.ranks < 1 or trace.event_count() == 0:
        raise EmptyTrace("cannot compute metrics of an empty trace")

    useful = useful_times(trace, region)
    runtime = _elapsed(trace, region)
    if runtime <= 0:
        raise TraceError("region has no elapsed time in the RoI", region=region)

    values = list(useful.values())
    useful_max = max(values)
    useful_mean = sum(values) / len(values)

    report = EfficiencyReport(
        region=region,
        runtime=float(runtime),
        ideal_runtime=None,
        load_balance=useful_mean / useful_max if useful_max else 0.0,
        communication_efficiency=useful_max / runtime,
        parallel_efficiency=useful_mean / runtime,
        omp_communication_efficiency=omp_communication_efficiency(trace, region),
    )

    if ideal_replay:
        try:
            t_ideal, ideal = ideal_network_replay(trace)
        except UnmatchedMessage as exc:
            raise MissingDependency(f"ideal replay impossible: {exc}", region=region) from exc
        ideal_runtime = t_ideal if region is None else _elapsed(ideal, region)
        report.ideal_runtime = float(ideal_runtime)
        if ideal_runtime > 0:
            report.serialization_efficiency = useful_max / ideal_runtime
            report.transfer_efficiency = ideal_runtime / runtime
        else:
            report.serialization_efficiency = 1.0
            report.transfer_efficiency = 0.0

    if base is not None:
        scal = compute_scalability(base, trace)
        report.computation_scalability = scal.computation
        report.instruction_scalability = scal.instruction
        report.global_efficiency = report.parallel_efficiency * scal.computation
    return report


def _instruction_total(trace: TraceTimeline) -> Optional[int]:
    counters = [e.instructions for e in trace.events() if e.instructions is not None]
    return sum(counters) if counters else None


def detect_scaling_mode(base: TraceTimeline, scaled: TraceTimeline) -> str:
    """Guess weak/strong from the work ratio normalized by the rank ratio"""
    base_work = _instruction_total(base)
    scaled_work = _instruction_total(scaled)
    if base_work is None or scaled_work is None:
        base_work = sum(useful_times(base).values())
        scaled_work = sum(useful_times(scaled).values())
    if not base_work or base.ranks == scaled.ranks:
        return "strong"
    normalized = (scaled_work / base_work) / (scaled.ranks / base.ranks)
    return "weak" if normalized > WEAK_SCALING_THRESHOLD else "strong"


def compute_scalability(base: TraceTimeline, scaled: TraceTimeline, mode: str = "strong",
                        require_instructions: bool = False) -> Scalability:
    """Computation and instruction scalability of `scaled` relative to `base`"""
    if mode not in ("strong", "weak"):
        raise TraceError(f"unknown scaling mode {mode!r}")
    resource_ratio = scaled.ranks / base.ranks if mode == "weak" else 1.0

    base_useful = sum(useful_times(base).values())
    scaled_useful = sum(useful_times(scaled).values())
    if scaled_useful == 0:
        raise TraceError("scaled trace has no useful time")
    computation = base_useful / scaled_useful * resource_ratio

    base_instr = _instruction_total(base)
    scaled_instr = _instruction_total(scaled)
    instruction = None
    if base_instr is None or scaled_instr is None or scaled_instr == 0:
        if require_instructions:
            raise MissingCounters("instruction counters absent; instruction scalability unavailable")
        logger.warning("Instruction counters absent; instruction scalability omitted")
    else:
        instruction = base_instr / scaled_instr * resource_ratio
    return Scalability(computation=computation, instruction=instruction, mode=mode)


def region_speedup(base: TraceTimeline, scaled: TraceTimeline, region: str) -> float:
    """Elapsed-time ratio of one region between two runs"""
    scaled_time = _elapsed(scaled, region)
    if scaled_time <= 0:
        raise TraceError("region absent from scaled trace", region=region)
    return _elapsed(base, region) / scaled_time


def report_tree(trace: TraceTimeline, ideal_replay: bool = True,
                base: Optional[TraceTimeline] = None) -> Dict[str, Dict]:
    """Global metrics plus one entry per region label"""
    tree = {"global": compute_pop_metrics(trace, None, ideal_replay, base).to_dict(), "regions": {}}
    for region in trace.regions():
        try:
            tree["regions"][region] = compute_pop_metrics(trace, region, ideal_replay).to_dict()
        except TraceError as exc:
            logger.warning(f"Skipping region {region}: {exc}")
    return tree


def metrics_table(tree: Dict[str, Dict]) -> pd.DataFrame:
    """Flat (region, metric, value) table of a report tree"""
    rows = []
    entries = [("ALL", tree["global"])] + sorted(tree.get("regions", {}).items())
    for region, metrics in entries:
        for name in EfficiencyReport.METRIC_NAMES:
            if metrics.get(name) is not None:
                rows.append({"region": region, "metric": name, "value": metrics[name]})
    return pd.DataFrame(rows, columns=["region", "metric", "value"])
