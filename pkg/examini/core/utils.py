"""
Core utility functions for the examini suite
"""

import math
import re
from typing import Optional, Union


def format_seconds(seconds: Optional[Union[int, float]]) -> str:
    """Human readable walltime (ms below one second)"""
    if seconds is None:
        return "-"
    try:
        seconds = float(seconds)
    except (ValueError, TypeError):
        return "-"
    if seconds < 1.0:
        return f"{seconds * 1000:.1f} ms"
    if seconds < 120.0:
        return f"{seconds:.2f} s"
    minutes, rest = divmod(seconds, 60.0)
    return f"{int(minutes)} min {rest:.0f} s"


def format_percentage(value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    return f"{100.0 * value:.1f}%"


def sanitize_filename(filename: str) -> str:
    """Sanitize a filename by removing/replacing invalid characters"""
    filename = re.sub(r'[<>:"/\\|?*]', '_', filename)
    filename = re.sub(r'\s+', '_', filename)
    return filename.strip('. ')


def get_file_size_string(size_bytes: int) -> str:
    if size_bytes <= 0:
        return "0 B"
    size_names = ["B", "KB", "MB", "GB", "TB"]
    i = min(int(math.floor(math.log(size_bytes, 1024))), len(size_names) - 1)
    return f"{round(size_bytes / math.pow(1024, i), 2)} {size_names[i]}"
