"""
Trace model, recorder and POP efficiency analysis
"""

from .antipatterns import detect_latency_antipattern
from .io import load_trace, write_trace
from .metrics import compute_pop_metrics, compute_scalability, detect_scaling_mode, region_speedup, region_times
from .models import EfficiencyReport, State, TraceEvent, TraceTimeline
from .recorder import RecorderSet, TraceRecorder
from .replay import ideal_network_replay

__all__ = [
    "State", "TraceEvent", "TraceTimeline", "EfficiencyReport", "TraceRecorder", "RecorderSet",
    "load_trace", "write_trace", "compute_pop_metrics", "compute_scalability", "detect_scaling_mode",
    "region_speedup", "region_times", "ideal_network_replay", "detect_latency_antipattern",
]
