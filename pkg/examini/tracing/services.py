"""
Trace analysis services
"""

import json
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Optional, Union

from loguru import logger

from ..core.errors import TraceError
from .antipatterns import DEFAULT_MAX_BYTES, DEFAULT_MAX_GAP_NS, DEFAULT_MIN_RUN, detect_latency_antipattern
from .io import load_trace
from .metrics import compute_pop_metrics, compute_scalability, detect_scaling_mode, metrics_table, report_tree
from .models import TraceTimeline

PathLike = Union[str, Path]


class TraceService:
    """Service class for POP analysis of recorded traces"""

    def __init__(self, output_dir: Optional[PathLike] = None):
        self.output_dir = Path(output_dir) if output_dir is not None else None

    def _load(self, source: Union[PathLike, TraceTimeline]) -> TraceTimeline:
        if isinstance(source, TraceTimeline):
            return source
        return load_trace(source)

    def analyze(self, source: Union[PathLike, TraceTimeline], region: Optional[str] = None,
                ideal_replay: bool = True, base: Optional[Union[PathLike, TraceTimeline]] = None,
                mode: Optional[str] = None) -> Dict[str, Any]:
        """Efficiency report tree; a base trace adds the scalability sub-metrics"""
        trace = self._load(source)
        base_trace = self._load(base) if base is not None else None

        if region is not None:
            tree = {"global": compute_pop_metrics(trace, region, ideal_replay).to_dict(), "regions": {}}
        else:
            tree = report_tree(trace, ideal_replay)

        if base_trace is not None:
            mode = mode or detect_scaling_mode(base_trace, trace)
            scal = compute_scalability(base_trace, trace, mode=mode)
            glob = tree["global"]
            glob["computation_scalability"] = scal.computation
            if scal.instruction is not None:
                glob["instruction_scalability"] = scal.instruction
            glob["global_efficiency"] = glob["parallel_efficiency"] * scal.computation
            tree["scaling_mode"] = mode

        logger.info(f"Analyzed trace: {trace.ranks} ranks, {trace.event_count()} events, "
                    f"{len(tree['regions'])} regions")
        return tree

    def antipatterns(self, source: Union[PathLike, TraceTimeline], min_run: int = DEFAULT_MIN_RUN,
                     max_bytes: int = DEFAULT_MAX_BYTES, max_gap: int = DEFAULT_MAX_GAP_NS) -> Dict[str, Any]:
        trace = self._load(source)
        findings = detect_latency_antipattern(trace, min_run=min_run, max_bytes=max_bytes, max_gap=max_gap)
        if findings:
            logger.warning(f"{len(findings)} barrier-bounded small-message run(s) detected")
        return {
            "status": "found" if findings else "clean",
            "parameters": {"min_run": min_run, "max_bytes": max_bytes, "max_gap": max_gap},
            "findings": [asdict(f) for f in findings],
        }

    def save_report(self, tree: Dict[str, Any], stem: str = "efficiency") -> Dict[str, Path]:
        """Write the JSON tree and the flat CSV table"""
        if self.output_dir is None:
            raise TraceError("no output directory configured")
        self.output_dir.mkdir(parents=True, exist_ok=True)
        json_path = self.output_dir / f"{stem}.json"
        csv_path = self.output_dir / f"{stem}.csv"
        json_path.write_text(json.dumps(tree, indent=2, sort_keys=True), encoding="utf-8")
        metrics_table(tree).to_csv(csv_path, index=False)
        return {"json": json_path, "csv": csv_path}


def get_trace_service(output_dir: Optional[PathLike] = None) -> TraceService:
    """Factory for the trace service"""
    return TraceService(output_dir)
