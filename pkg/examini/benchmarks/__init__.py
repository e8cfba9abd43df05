"""
Weak / strong scaling campaigns, speedup arithmetic and regression baselines
"""

from .arithmetic import compute_speedup, kernel_speedups, median_time, rounded, strong_efficiency, weak_efficiency
from .baselines import BaselineStore, regression_check
from .machine import load_machine_profile, save_machine_profile
from .models import CampaignResult, CampaignSpec, MachineProfile, TimingRecord
from .reports import emit_report, load_report
from .services import BenchmarkService, get_benchmark_service, result_from_records, run_campaign
from .workloads import grouped_resolutions, run_workload, weak_resolution

__all__ = [
    "CampaignSpec", "MachineProfile", "TimingRecord", "CampaignResult", "compute_speedup", "weak_efficiency",
    "strong_efficiency", "median_time", "rounded", "kernel_speedups", "BaselineStore", "regression_check",
    "emit_report", "load_report", "load_machine_profile", "save_machine_profile", "grouped_resolutions",
    "weak_resolution", "run_workload", "run_campaign", "result_from_records", "BenchmarkService",
    "get_benchmark_service",
]
