"""
Baseline store: one JSON record per (app, mode, ranks, resolution, host fingerprint)
"""

import json
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from loguru import logger

from ..core.config import settings
from ..core.errors import IoFailure, MissingBaseline
from ..core.utils import sanitize_filename
from .models import CampaignResult, MachineProfile, TimingRecord


class BaselineStore:
    """Directory of baseline walltimes scoped by machine fingerprint"""

    def __init__(self, root: Optional[Union[str, Path]] = None):
        self.root = Path(root or settings.BASELINE_DIR)

    def key(self, record: TimingRecord, fingerprint: str) -> str:
        resolution = "x".join(str(n) for n in record.resolution)
        return sanitize_filename(f"{record.app}_{record.mode}_r{record.rank_count}_{resolution}_{fingerprint}")

    def path(self, record: TimingRecord, fingerprint: str) -> Path:
        return self.root / f"{self.key(record, fingerprint)}.json"

    def get(self, record: TimingRecord, fingerprint: str) -> Fraction:
        path = self.path(record, fingerprint)
        if not path.exists():
            raise MissingBaseline(f"no baseline for {self.key(record, fingerprint)}", path=str(path))
        try:
            with open(path, "r", encoding="utf-8") as f:
                return Fraction(json.load(f)["walltime"])
        except (OSError, KeyError, ValueError) as e:
            raise IoFailure(f"unreadable baseline {path}: {e}") from e

    def put(self, record: TimingRecord, fingerprint: str, candidate: bool = False) -> Path:
        """Store the record as baseline (or as a candidate next to the store)"""
        folder = self.root / "candidates" if candidate else self.root
        path = folder / f"{self.key(record, fingerprint)}.json"
        data = {**record.to_dict(), "fingerprint": fingerprint, "recorded_at": datetime.now().isoformat()}
        try:
            folder.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2)
        except OSError as e:
            logger.error(f"Error writing baseline {path}: {e}")
            raise IoFailure(f"cannot write baseline {path}: {e}") from e
        return path


def regression_check(result: CampaignResult, store: BaselineStore, tolerance_pct: float = 10.0,
                     machine: Optional[MachineProfile] = None, update: bool = False) -> Dict[str, Any]:
    """Compare every median walltime with its baseline

    A configuration fails when it is slower than its baseline by more than
    tolerance_pct. Missing baselines are recorded as candidates and do not fail
    the check. Baselines are only overwritten with update=True.
    """
    machine = machine or result.machine or MachineProfile.detect()
    fingerprint = machine.fingerprint
    checked: List[Dict[str, Any]] = []
    regressions: List[Dict[str, Any]] = []
    missing: List[str] = []
    updated: List[str] = []

    for record in result.records:
        entry: Dict[str, Any] = {"key": store.key(record, fingerprint), "ranks": record.rank_count,
                                 "resolution": list(record.resolution), "walltime": float(record.walltime)}
        try:
            baseline = store.get(record, fingerprint)
        except MissingBaseline:
            logger.warning(f"Missing baseline {entry['key']}; recording candidate")
            store.put(record, fingerprint, candidate=True)
            missing.append(entry["key"])
        else:
            delta = (record.walltime - baseline) / baseline * 100
            entry.update({"baseline": float(baseline), "delta_pct": float(delta),
                          "passed": delta <= Fraction(str(tolerance_pct))})
            checked.append(entry)
            if not entry["passed"]:
                logger.warning(f"Regression in {entry['key']}: {float(delta):+.1f}% (tolerance {tolerance_pct}%)")
                regressions.append(entry)
        if update:
            store.put(record, fingerprint)
            updated.append(entry["key"])

    return {
        "status": "failed" if regressions else "passed",
        "tolerance_pct": tolerance_pct,
        "fingerprint": fingerprint,
        "checked": checked,
        "regressions": regressions,
        "missing": missing,
        "updated": updated,
    }
