"""
Machine profile files
"""

import json
from pathlib import Path
from typing import Optional, Union

from loguru import logger

from ..core.errors import ConfigError
from .models import MachineProfile


def load_machine_profile(path: Optional[Union[str, Path]] = None, workers: Optional[int] = None) -> MachineProfile:
    """Profile from a JSON file, or detected from the running host"""
    if path is None:
        profile = MachineProfile.detect(workers)
        logger.debug(f"Detected machine {profile.cpu_model!r}, {profile.workers} workers")
        return profile
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read machine profile {path}: {e}") from e
    missing = [k for k in ("cpu_model", "logical_cpus", "physical_cpus", "workers") if k not in data]
    if missing:
        raise ConfigError(f"machine profile {path} lacks {', '.join(missing)}")
    return MachineProfile.from_dict(data)


def save_machine_profile(profile: MachineProfile, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(profile.to_dict(), f, indent=2)
    return path
