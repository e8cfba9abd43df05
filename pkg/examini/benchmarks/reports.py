"""
Campaign report files (plot-ready CSV and round-trippable JSON)
"""

import json
from pathlib import Path
from typing import Dict, Iterable, Union

from loguru import logger

from ..core.errors import BenchError, IoFailure
from .models import CampaignResult

FORMATS = ("csv", "json")


def emit_report(result: CampaignResult, output_dir: Union[str, Path], stem: str = "campaign",
                formats: Iterable[str] = FORMATS) -> Dict[str, Path]:
    """One CSV row per configuration (tagged by group and resolution) and a JSON dump of the result"""
    if not result.records:
        raise BenchError("cannot report an empty campaign")
    output_dir = Path(output_dir)
    paths: Dict[str, Path] = {}
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        for fmt in formats:
            if fmt == "csv":
                paths["csv"] = output_dir / f"{stem}.csv"
                result.table().to_csv(paths["csv"], index=False)
            elif fmt == "json":
                paths["json"] = output_dir / f"{stem}.json"
                with open(paths["json"], "w", encoding="utf-8") as f:
                    json.dump(result.to_dict(), f, indent=2)
            else:
                raise BenchError(f"unknown report format {fmt!r}")
    except OSError as e:
        logger.error(f"Error writing campaign report: {e}")
        raise IoFailure(f"cannot write report under {output_dir}: {e}") from e
    return paths


def load_report(path: Union[str, Path]) -> CampaignResult:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return CampaignResult.from_dict(json.load(f))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise IoFailure(f"cannot load campaign result {path}: {e}") from e
