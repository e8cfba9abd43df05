"""
Binary snapshots with a JSON header (shapes, metadata, sha256 checksum)
"""

import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np
from loguru import logger

from .config import settings
from .errors import ExaminiError
from .utils import get_file_size_string


class DumpError(ExaminiError):
    """Unreadable or corrupted snapshot"""


def _checksum(path: Path) -> str:
    sha256 = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            sha256.update(block)
    return sha256.hexdigest()


def write_dump(stem: Union[str, Path], arrays: Dict[str, np.ndarray], meta: Dict[str, Any]) -> Dict[str, Path]:
    """Write `<stem>.bin` (little-endian arrays, in insertion order) and `<stem>.json`"""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    bin_path = stem.with_suffix(".bin")
    header_path = stem.with_suffix(".json")

    variables = []
    offset = 0
    with bin_path.open("wb") as fh:
        for name, array in arrays.items():
            data = np.ascontiguousarray(array)
            data = data.astype(data.dtype.newbyteorder("<"), copy=False)
            fh.write(data.tobytes())
            variables.append({"name": name, "dtype": data.dtype.str, "shape": list(data.shape), "offset": offset})
            offset += data.nbytes

    header = {
        "created_at": datetime.now().isoformat(),
        "version": settings.ARTIFACT_VERSION,
        "variables": variables,
        "size_bytes": offset,
        "sha256": _checksum(bin_path),
        "meta": meta,
    }
    header_path.write_text(json.dumps(header, indent=2, default=_json_default), encoding="utf-8")
    logger.debug(f"Wrote snapshot {bin_path} ({get_file_size_string(offset)})")
    return {"data": bin_path, "header": header_path}


def read_dump(stem: Union[str, Path], verify: bool = True) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """Read a snapshot back; the checksum is verified unless disabled"""
    stem = Path(stem)
    bin_path = stem.with_suffix(".bin")
    header_path = stem.with_suffix(".json")
    try:
        header = json.loads(header_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DumpError(f"cannot read snapshot header {header_path}") from exc
    if verify and _checksum(bin_path) != header["sha256"]:
        raise DumpError(f"checksum mismatch for {bin_path}")

    raw = bin_path.read_bytes()
    arrays = {}
    for var in header["variables"]:
        dtype = np.dtype(var["dtype"])
        count = int(np.prod(var["shape"], dtype=np.int64))
        arrays[var["name"]] = np.frombuffer(raw, dtype=dtype, count=count, offset=var["offset"]).reshape(var["shape"]).copy()
    return arrays, header


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")
