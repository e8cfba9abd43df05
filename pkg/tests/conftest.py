"""
Shared fixtures
"""

from pathlib import Path

import pandas as pd
import pytest
from loguru import logger

from examini.core.config import settings

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def _quiet_logger():
    logger.remove()
    yield
    logger.remove()


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    out = tmp_path / "out"
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(out))
    monkeypatch.setattr(settings, "BASELINE_DIR", str(tmp_path / "baselines"))
    return out


@pytest.fixture
def table_data():
    def load(name: str) -> pd.DataFrame:
        return pd.read_csv(DATA_DIR / name)
    return load
