"""
Campaign data model: specs, machine profiles, timing records and results
"""

import hashlib
import platform
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
import psutil

from ..core.config import settings
from ..core.errors import ConfigError, ValidationError

APPS = ("mhd", "pic", "gravity", "synthetic")
MODES = ("weak", "strong", "grouped_strong")
GROUP_DOUBLINGS = 3

Resolution = Tuple[int, ...]


@dataclass
class CampaignSpec:
    """What to run; host facts live in MachineProfile

    For weak campaigns `resolution` is the per-rank size, otherwise the global
    size. grouped_strong reads `rank_counts` as the group base counts; each
    group doubles its base GROUP_DOUBLINGS times at a fixed resolution.
    """
    app: str = "synthetic"
    mode: str = "strong"
    rank_counts: List[int] = field(default_factory=lambda: [1, 2, 4, 8])
    resolution: Resolution = (64,)
    repetitions: int = 3
    seed: int = 0
    steps: int = 2
    baseline_ref: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.rank_counts = [int(n) for n in self.rank_counts]
        self.resolution = tuple(int(n) for n in self.resolution)

    def validate(self) -> "CampaignSpec":
        violations: List[Tuple[str, str]] = []
        if self.app not in APPS:
            violations.append(("app", f"must be one of {', '.join(APPS)}"))
        if self.mode not in MODES:
            violations.append(("mode", f"must be one of {', '.join(MODES)}"))
        if not self.rank_counts or any(n < 1 for n in self.rank_counts):
            violations.append(("rank_counts", "must be a non-empty list of positive integers"))
        elif any(b <= a for a, b in zip(self.rank_counts, self.rank_counts[1:])):
            violations.append(("rank_counts", "must be strictly increasing"))
        if not self.resolution or any(n < 1 for n in self.resolution):
            violations.append(("resolution", "must hold positive integers"))
        if self.repetitions < 1:
            violations.append(("repetitions", "must be at least 1"))
        if self.steps < 1:
            violations.append(("steps", "must be at least 1"))
        if violations:
            raise ValidationError(violations)
        return self

    def groups(self) -> List[List[int]]:
        """Rank counts per group; a single group unless grouped_strong"""
        if self.mode != "grouped_strong":
            return [list(self.rank_counts)]
        return [[base << k for k in range(GROUP_DOUBLINGS + 1)] for base in self.rank_counts]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["resolution"] = list(self.resolution)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CampaignSpec":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown campaign fields: {', '.join(unknown)}")
        return cls(**known)


@dataclass
class MachineProfile:
    """Host facts that scope baselines"""
    cpu_model: str
    logical_cpus: int
    physical_cpus: int
    workers: int
    frequency_mhz: float = 0.0
    artifact_version: str = settings.ARTIFACT_VERSION

    @property
    def fingerprint(self) -> str:
        """CPU model + worker count + artifact version, hashed for file names"""
        text = f"{self.cpu_model}|{self.workers}|{self.artifact_version}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "fingerprint": self.fingerprint}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MachineProfile":
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    @classmethod
    def detect(cls, workers: Optional[int] = None) -> "MachineProfile":
        frequency = psutil.cpu_freq()
        return cls(
            cpu_model=platform.processor() or platform.machine() or "unknown",
            logical_cpus=psutil.cpu_count(logical=True) or 1,
            physical_cpus=psutil.cpu_count(logical=False) or 1,
            workers=settings.worker_cap(workers),
            frequency_mhz=float(frequency.current) if frequency else 0.0,
        )


@dataclass
class TimingRecord:
    app: str
    mode: str
    rank_count: int
    resolution: Resolution
    walltime: Fraction
    breakdown: Dict[str, float] = field(default_factory=dict)
    trace_path: Optional[str] = None
    group: int = 1
    samples: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.resolution = tuple(int(n) for n in self.resolution)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "app": self.app, "mode": self.mode, "rank_count": self.rank_count,
            "resolution": list(self.resolution), "walltime": str(self.walltime), "breakdown": dict(self.breakdown),
            "trace_path": self.trace_path, "group": self.group, "samples": list(self.samples),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TimingRecord":
        return cls(
            app=data["app"], mode=data["mode"], rank_count=int(data["rank_count"]),
            resolution=tuple(data["resolution"]), walltime=Fraction(data["walltime"]),
            breakdown=dict(data.get("breakdown", {})), trace_path=data.get("trace_path"),
            group=int(data.get("group", 1)), samples=list(data.get("samples", [])),
        )


@dataclass
class CampaignResult:
    """Records plus derived speedups and efficiencies, one row per configuration"""
    spec: CampaignSpec
    records: List[TimingRecord]
    speedups: List[Fraction]
    efficiencies: List[Fraction]
    ideal: List[Fraction]
    checks: Optional[Dict[str, Any]] = None
    machine: Optional[MachineProfile] = None

    def table(self) -> pd.DataFrame:
        rows = []
        for record, speedup, efficiency, ideal in zip(self.records, self.speedups, self.efficiencies, self.ideal):
            rows.append({
                "group": record.group,
                "base_resolution": "x".join(str(n) for n in record.resolution),
                "ranks": record.rank_count,
                "walltime": float(record.walltime),
                "speedup": float(speedup),
                "efficiency": float(efficiency),
                "ideal": float(ideal),
            })
        return pd.DataFrame(rows, columns=["group", "base_resolution", "ranks", "walltime", "speedup",
                                           "efficiency", "ideal"])

    def group_minimum(self) -> Dict[int, Fraction]:
        """Lowest efficiency reached inside every group"""
        lowest: Dict[int, Fraction] = {}
        for record, efficiency in zip(self.records, self.efficiencies):
            lowest[record.group] = min(lowest.get(record.group, efficiency), efficiency)
        return lowest

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "records": [r.to_dict() for r in self.records],
            "speedups": [str(s) for s in self.speedups],
            "efficiencies": [str(e) for e in self.efficiencies],
            "ideal": [str(i) for i in self.ideal],
            "checks": self.checks,
            "machine": self.machine.to_dict() if self.machine else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CampaignResult":
        machine = data.get("machine")
        return cls(
            spec=CampaignSpec.from_dict(data["spec"]),
            records=[TimingRecord.from_dict(r) for r in data["records"]],
            speedups=[Fraction(s) for s in data["speedups"]],
            efficiencies=[Fraction(e) for e in data["efficiencies"]],
            ideal=[Fraction(i) for i in data["ideal"]],
            checks=data.get("checks"),
            machine=MachineProfile.from_dict(machine) if machine else None,
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CampaignResult) and self.to_dict() == other.to_dict()
