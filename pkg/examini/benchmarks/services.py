"""
Scaling campaign runner and benchmark service
"""

import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from loguru import logger

from ..core.config import settings
from ..core.errors import BenchError, ExaminiError
from ..core.utils import format_percentage, format_seconds
from ..tracing.io import write_trace
from .arithmetic import median_time, scaling_rows
from .baselines import BaselineStore, regression_check
from .models import CampaignResult, CampaignSpec, MachineProfile, TimingRecord
from .reports import emit_report
from .workloads import grouped_resolutions, run_workload, weak_resolution


def result_from_records(records: Sequence[TimingRecord], mode: str,
                        spec: Optional[CampaignSpec] = None) -> CampaignResult:
    """Speedups and efficiencies of recorded timings, each group against its smallest rank count"""
    if not records:
        raise BenchError("no timing records")
    ordered = sorted(records, key=lambda r: (r.group, r.rank_count))
    speedups: List[Fraction] = []
    efficiencies: List[Fraction] = []
    ideal: List[Fraction] = []
    for group in sorted({r.group for r in ordered}):
        members = [r for r in ordered if r.group == group]
        for speedup, efficiency, ratio in scaling_rows([r.rank_count for r in members],
                                                       [r.walltime for r in members], mode):
            speedups.append(speedup)
            efficiencies.append(efficiency)
            ideal.append(ratio)
    if spec is None:
        first = ordered[0]
        bases = sorted({min(r.rank_count for r in ordered if r.group == g) for g in {r.group for r in ordered}})
        counts = bases if mode == "grouped_strong" else sorted({r.rank_count for r in ordered})
        spec = CampaignSpec(app=first.app, mode=mode, rank_counts=counts, resolution=first.resolution,
                            repetitions=max(1, len(first.samples)))
    return CampaignResult(spec=spec, records=ordered, speedups=speedups, efficiencies=efficiencies, ideal=ideal)


def _resolution(spec: CampaignSpec, group_index: int, ranks: int) -> tuple:
    if spec.mode == "weak":
        resolution = weak_resolution(spec.resolution, ranks)
        if math.prod(resolution) != math.prod(spec.resolution) * ranks:
            raise BenchError("weak sizing changed the per-rank size", ranks=ranks, resolution=resolution)
        return resolution
    if spec.mode == "grouped_strong":
        return grouped_resolutions(spec.resolution, group_index + 1)[group_index]
    return tuple(spec.resolution)


def run_campaign(spec: CampaignSpec, machine: Optional[MachineProfile] = None, workers: Optional[int] = None,
                 trace_dir: Optional[Union[str, Path]] = None) -> CampaignResult:
    """Run every configuration `repetitions` times, one configuration at a time, keeping the median"""
    spec.validate()
    records: List[TimingRecord] = []
    for group_index, rank_counts in enumerate(spec.groups()):
        for ranks in rank_counts:
            resolution = _resolution(spec, group_index, ranks)
            samples: List[float] = []
            run = None
            for _ in range(spec.repetitions):
                try:
                    run = run_workload(spec.app, ranks, resolution, seed=spec.seed, steps=spec.steps,
                                       options=spec.options, workers=workers)
                except ExaminiError as exc:
                    exc.add_context(app=spec.app, mode=spec.mode, ranks=ranks, resolution=resolution)
                    raise
                samples.append(run.walltime)
            trace_path = None
            if trace_dir is not None:
                trace_path = str(write_trace(run.timeline, Path(trace_dir) /
                                             f"{spec.app}_{spec.mode}_g{group_index + 1}_r{ranks}.jsonl"))
            record = TimingRecord(app=spec.app, mode=spec.mode, rank_count=ranks, resolution=resolution,
                                  walltime=median_time(samples), breakdown=run.breakdown, trace_path=trace_path,
                                  group=group_index + 1, samples=samples)
            logger.info(f"{spec.app} {spec.mode} group {record.group}: {ranks} ranks at "
                        f"{'x'.join(map(str, resolution))} -> {format_seconds(float(record.walltime))}")
            records.append(record)

    result = result_from_records(records, spec.mode, spec=spec)
    result.machine = machine
    return result


class BenchmarkService:
    """Service class for scaling campaigns, baselines and reports"""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None,
                 baseline_dir: Optional[Union[str, Path]] = None):
        self.output_dir = Path(output_dir or settings.OUTPUT_DIR)
        self.store = BaselineStore(baseline_dir)

    def run(self, spec: CampaignSpec, machine: Optional[MachineProfile] = None, workers: Optional[int] = None,
            tolerance_pct: float = 10.0, update_baselines: bool = False, stem: str = "campaign",
            formats: Sequence[str] = ("csv", "json")) -> Dict[str, Any]:
        machine = machine or MachineProfile.detect(workers)
        result = run_campaign(spec, machine=machine, workers=workers, trace_dir=self.output_dir / "traces")
        result.checks = regression_check(result, self.store, tolerance_pct, machine, update=update_baselines)
        paths = emit_report(result, self.output_dir, stem, formats)
        for record, efficiency in zip(result.records, result.efficiencies):
            logger.debug(f"group {record.group} ranks {record.rank_count}: efficiency "
                         f"{format_percentage(float(efficiency))}")
        return {
            "status": result.checks["status"],
            "configurations": len(result.records),
            "min_efficiency": float(min(result.efficiencies)),
            "regressions": [r["key"] for r in result.checks["regressions"]],
            "missing_baselines": result.checks["missing"],
            "paths": {k: str(v) for k, v in paths.items()},
            "result": result,
        }

    def report(self, result: CampaignResult, stem: str = "campaign",
               formats: Sequence[str] = ("csv", "json")) -> Dict[str, Any]:
        paths = emit_report(result, self.output_dir, stem, formats)
        return {"status": "completed", "configurations": len(result.records),
                "paths": {k: str(v) for k, v in paths.items()}}


def get_benchmark_service(output_dir: Optional[Union[str, Path]] = None,
                          baseline_dir: Optional[Union[str, Path]] = None) -> BenchmarkService:
    """Dependency injection for benchmark service"""
    return BenchmarkService(output_dir, baseline_dir)
