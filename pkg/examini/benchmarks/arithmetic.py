"""
Exact speedup and efficiency arithmetic on recorded walltimes
"""

import numbers
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from ..core.errors import BenchError, NonPositiveTime

Number = Union[int, float, str, Decimal, Fraction]


def exact(value: Number) -> Fraction:
    """Rational value of a recorded time; floats go through their shortest decimal repr"""
    if isinstance(value, Fraction):
        result = value
    elif isinstance(value, numbers.Integral):
        result = Fraction(int(value))
    elif isinstance(value, float):
        result = Fraction(Decimal(repr(float(value))))
    else:
        result = Fraction(Decimal(str(value)))
    if result <= 0:
        raise NonPositiveTime(float(result))
    return result


def rounded(value: Fraction, places: int = 2) -> Decimal:
    """Half-up rounding as printed in tables"""
    quantum = Decimal(1).scaleb(-places)
    return (Decimal(value.numerator) / Decimal(value.denominator)).quantize(quantum, rounding=ROUND_HALF_UP)


def compute_speedup(t_ref: Number, t_new: Number) -> Fraction:
    return exact(t_ref) / exact(t_new)


def weak_efficiency(t_base: Number, t_n: Number) -> Fraction:
    return exact(t_base) / exact(t_n)


def strong_efficiency(t_base: Number, n_base: int, t_n: Number, n: int) -> Fraction:
    if n < n_base or n_base < 1:
        raise BenchError("strong efficiency needs n >= n_base >= 1", n_base=n_base, n=n)
    return exact(t_base) * n_base / (exact(t_n) * n)


def median_time(samples: Iterable[Number]) -> Fraction:
    """Exact median; the mean of the middle pair for even counts"""
    values = sorted(exact(s) for s in samples)
    if not values:
        raise BenchError("no timing samples")
    mid = len(values) // 2
    if len(values) % 2:
        return values[mid]
    return (values[mid - 1] + values[mid]) / 2


def scaling_rows(rank_counts: Sequence[int], walltimes: Sequence[Number],
                 mode: str) -> List[Tuple[Fraction, Fraction, Fraction]]:
    """(speedup, efficiency, ideal speedup) per configuration against the first one

    Weak speedups are scaled speedups, so efficiency = speedup / resource ratio
    holds in both modes.
    """
    if len(rank_counts) != len(walltimes) or not rank_counts:
        raise BenchError("rank counts and walltimes must be non-empty and aligned")
    n_base, t_base = rank_counts[0], exact(walltimes[0])
    rows = []
    for n, t in zip(rank_counts, walltimes):
        ratio = Fraction(n, n_base)
        if mode == "weak":
            efficiency = weak_efficiency(t_base, t)
        else:
            efficiency = strong_efficiency(t_base, n_base, t, n)
        rows.append((efficiency * ratio, efficiency, ratio))
    return rows


def kernel_speedups(cpu_times: Mapping[str, Number], gpu_times: Mapping[str, Number],
                    totals: Optional[Tuple[Number, Number]] = None) -> pd.DataFrame:
    """Per-kernel speedup table with a Total row

    `totals` overrides the summed (cpu, gpu) walltimes when the measured totals
    include time outside the listed kernels.
    """
    missing = set(cpu_times) ^ set(gpu_times)
    if missing:
        raise BenchError(f"kernels timed on one side only: {', '.join(sorted(missing))}")
    rows: List[Dict] = []
    for kernel in cpu_times:
        cpu, gpu = exact(cpu_times[kernel]), exact(gpu_times[kernel])
        rows.append({"kernel": kernel, "cpu_seconds": float(cpu), "gpu_seconds": float(gpu),
                     "speedup": float(cpu / gpu)})
    if totals is None:
        cpu_total = sum((exact(v) for v in cpu_times.values()), Fraction(0))
        gpu_total = sum((exact(v) for v in gpu_times.values()), Fraction(0))
    else:
        cpu_total, gpu_total = exact(totals[0]), exact(totals[1])
    rows.append({"kernel": "Total", "cpu_seconds": float(cpu_total), "gpu_seconds": float(gpu_total),
                 "speedup": float(cpu_total / gpu_total)})
    return pd.DataFrame(rows, columns=["kernel", "cpu_seconds", "gpu_seconds", "speedup"])
