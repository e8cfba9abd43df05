from decimal import Decimal
from fractions import Fraction

import pandas as pd
import psutil
import pytest

from examini.core.config import settings
from examini.core.errors import BenchError, IoFailure, NonPositiveTime, ValidationError
from examini.benchmarks.arithmetic import (
    compute_speedup, exact, kernel_speedups, median_time, rounded, scaling_rows, strong_efficiency,
)
from examini.benchmarks.baselines import BaselineStore, regression_check
from examini.benchmarks.machine import load_machine_profile, save_machine_profile
from examini.benchmarks.models import CampaignSpec, MachineProfile, TimingRecord
from examini.benchmarks.reports import emit_report, load_report
from examini.benchmarks.services import get_benchmark_service, result_from_records, run_campaign
from examini.benchmarks.workloads import grouped_resolutions, run_workload, weak_resolution

MACHINE = MachineProfile(cpu_model="test-cpu", logical_cpus=8, physical_cpus=4, workers=8)


def _record(ranks, walltime, group=1, mode="strong", resolution=(64,)):
    return TimingRecord(app="synthetic", mode=mode, rank_count=ranks, resolution=resolution,
                        walltime=Fraction(walltime), group=group)


def _table2_records(table: pd.DataFrame, column: str):
    records = []
    for group, rows in table.groupby("group"):
        n_base = int(rows["nodes"].min())
        t_base = Fraction(1000)
        resolution = tuple(int(n) for n in rows["base_resolution"].iloc[0].split("x"))
        for _, row in rows.iterrows():
            n = int(row["nodes"])
            walltime = t_base * Fraction(n_base, n) / Fraction(str(row[column]))
            records.append(TimingRecord(app="mhd", mode="grouped_strong", rank_count=n, resolution=resolution,
                                        walltime=walltime, group=int(group)))
    return records


def test_exact_values():
    assert exact(0.1) == Fraction(1, 10)
    assert exact("2.50") == Fraction(5, 2)
    with pytest.raises(NonPositiveTime):
        exact(0)


def test_half_up_rounding():
    assert rounded(compute_speedup(2982, 312)) == Decimal("9.56")
    assert rounded(Fraction(1, 8)) == Decimal("0.13")


def test_cpu_gpu_walltimes_reproduce_speedups(table_data):
    table = table_data("table1_walltimes.csv")
    for _, row in table.iterrows():
        speedup = rounded(compute_speedup(row["cpu_seconds"], row["gpu_seconds"]))
        assert abs(float(speedup) - row["speedup"]) <= 0.01 + 1e-9
    assert rounded(compute_speedup(3300, 318)) == Decimal("10.38")


def test_kernel_split_reproduces_speedups(table_data):
    table = table_data("table3_kernels.csv")
    kernels = table[table["kernel"] != "Total"]
    total = table[table["kernel"] == "Total"].iloc[0]
    out = kernel_speedups(dict(zip(kernels["kernel"], kernels["cpu_seconds"])),
                          dict(zip(kernels["kernel"], kernels["gpu_seconds"])),
                          totals=(total["cpu_seconds"], total["gpu_seconds"]))
    assert list(out["kernel"]) == list(table["kernel"])
    for got, expected in zip(out["speedup"], table["speedup"]):
        assert abs(got - expected) <= 0.1
    assert rounded(compute_speedup("35.007", "0.870"), 1) == Decimal("40.2")


def test_kernel_speedups_sum_totals_by_default():
    out = kernel_speedups({"a": 2, "b": 6}, {"a": 1, "b": 1})
    assert out.iloc[-1]["speedup"] == pytest.approx(4.0)
    with pytest.raises(BenchError):
        kernel_speedups({"a": 1}, {"b": 1})


def test_median_time():
    assert median_time([3, 1, 2]) == 2
    assert median_time([1, 2, 3, 4]) == Fraction(5, 2)
    with pytest.raises(BenchError):
        median_time([])


def test_strong_efficiency_of_a_large_group():
    t_base = Fraction(100)
    t_n = t_base * Fraction(32, 256) / Fraction("0.88")
    assert strong_efficiency(t_base, 32, t_n, 256) == Fraction("0.88")
    with pytest.raises(BenchError):
        strong_efficiency(t_base, 8, t_n, 4)


def test_scaling_rows_weak_and_strong():
    weak = scaling_rows([1, 2, 4], [10, 10, 12.5], "weak")
    assert [row[1] for row in weak] == [1, 1, Fraction(4, 5)]
    assert weak[2][0] == Fraction(16, 5)
    strong = scaling_rows([1, 2], [10, 5], "strong")
    assert strong[1] == (2, 1, 2)
    with pytest.raises(BenchError):
        scaling_rows([1, 2], [10], "strong")


def test_grouped_strong_minimum_efficiencies(table_data):
    table = table_data("table2_efficiencies.csv")
    for column in ("ot", "cpa"):
        result = result_from_records(_table2_records(table, column), "grouped_strong")
        lowest = result.group_minimum()
        expected = table.groupby("group")[column].min()
        assert sorted(lowest) == list(expected.index)
        for group, value in expected.items():
            assert abs(float(lowest[group]) - value) <= 0.005
    assert result.spec.rank_counts == [1, 2, 4, 8, 16, 32]


def test_grouped_report_tags_groups(tmp_path, table_data):
    result = result_from_records(_table2_records(table_data("table2_efficiencies.csv"), "ot"), "grouped_strong")
    paths = emit_report(result, tmp_path, stem="groups")
    csv = pd.read_csv(paths["csv"])
    assert sorted(csv["group"].unique()) == [1, 2, 3, 4, 5, 6]
    assert csv.groupby("group")["base_resolution"].nunique().max() == 1
    assert "3328x1664x1664" in set(csv["base_resolution"])
    assert load_report(paths["json"]) == result


def test_report_errors(tmp_path):
    result = result_from_records([_record(1, 4), _record(2, 2)], "strong")
    with pytest.raises(BenchError):
        emit_report(result, tmp_path, formats=("xml",))
    with pytest.raises(IoFailure):
        load_report(tmp_path / "missing.json")


def test_campaign_spec_validation():
    with pytest.raises(ValidationError) as info:
        CampaignSpec(app="lattice", rank_counts=[2, 1], repetitions=0).validate()
    assert set(info.value.fields) == {"app", "rank_counts", "repetitions"}
    spec = CampaignSpec(mode="grouped_strong", rank_counts=[1, 2])
    assert spec.groups() == [[1, 2, 4, 8], [2, 4, 8, 16]]


def test_problem_sizing():
    assert weak_resolution((4, 4), 1) == (4, 4)
    assert weak_resolution((4, 4), 4) == (8, 8)
    assert weak_resolution((4, 4), 3) == (12, 4)
    assert grouped_resolutions((8, 8, 4), 3) == [(8, 8, 4), (8, 8, 8), (16, 8, 8)]


def test_unknown_workload():
    with pytest.raises(BenchError):
        run_workload("lattice", 1, (4,))


def test_synthetic_strong_campaign(monkeypatch):
    monkeypatch.setattr(settings, "WORKERS", 8)
    spec = CampaignSpec(app="synthetic", mode="strong", rank_counts=[1, 2], resolution=(8,), repetitions=3,
                        steps=1, options={"sweeps": 8})
    result = run_campaign(spec, machine=MACHINE)
    assert [r.rank_count for r in result.records] == [1, 2]
    assert all(len(r.samples) == 3 for r in result.records)
    assert result.records[0].breakdown["synthetic"] > 0
    assert result.efficiencies[0] == 1
    assert 0.5 < float(result.efficiencies[1]) <= 1.2


def test_synthetic_weak_campaign_scales_the_problem(monkeypatch):
    monkeypatch.setattr(settings, "WORKERS", 8)
    spec = CampaignSpec(app="synthetic", mode="weak", rank_counts=[1, 2], resolution=(2,), repetitions=1,
                        steps=1, options={"sweeps": 2})
    result = run_campaign(spec)
    assert [r.resolution for r in result.records] == [(2,), (4,)]
    assert result.ideal == [1, 2]


@pytest.mark.slow
@pytest.mark.skipif((psutil.cpu_count(logical=False) or 1) < 8, reason="needs eight physical cores")
def test_synthetic_kernel_scales_to_eight_ranks(monkeypatch):
    monkeypatch.setattr(settings, "WORKERS", 8)
    spec = CampaignSpec(app="synthetic", mode="strong", rank_counts=[1, 2, 4, 8], resolution=(64,),
                        repetitions=3, steps=1)
    result = run_campaign(spec, machine=MACHINE)
    assert [r.rank_count for r in result.records] == [1, 2, 4, 8]
    assert float(result.efficiencies[-1]) >= 0.9


def test_regression_check_and_baselines(tmp_path):
    store = BaselineStore(tmp_path / "baselines")
    result = result_from_records([_record(1, "1.0"), _record(2, "0.5")], "strong")

    first = regression_check(result, store, tolerance_pct=10, machine=MACHINE)
    assert first["status"] == "passed"
    assert len(first["missing"]) == 2
    assert (tmp_path / "baselines" / "candidates").is_dir()

    regression_check(result, store, machine=MACHINE, update=True)
    assert store.get(result.records[0], MACHINE.fingerprint) == 1

    slower = result_from_records([_record(1, "1.05"), _record(2, "0.6")], "strong")
    check = regression_check(slower, store, tolerance_pct=10, machine=MACHINE)
    assert check["status"] == "failed"
    assert [r["ranks"] for r in check["regressions"]] == [2]
    assert check["checked"][0]["delta_pct"] == pytest.approx(5.0)


def test_fingerprint_scopes_baselines():
    other = MachineProfile(cpu_model="test-cpu", logical_cpus=8, physical_cpus=4, workers=4)
    assert other.fingerprint != MACHINE.fingerprint
    store = BaselineStore("unused")
    assert store.key(_record(1, 1), MACHINE.fingerprint) != store.key(_record(1, 1), other.fingerprint)


def test_machine_profile_file(tmp_path):
    path = save_machine_profile(MACHINE, tmp_path / "machine.json")
    loaded = load_machine_profile(path)
    assert loaded == MACHINE
    assert load_machine_profile(workers=2).workers <= 2


def test_benchmark_service_run_and_report(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "WORKERS", 8)
    spec = CampaignSpec(app="synthetic", mode="strong", rank_counts=[1, 2], resolution=(2,), repetitions=1,
                        steps=1, options={"sweeps": 1})
    service = get_benchmark_service(tmp_path / "out", tmp_path / "baselines")
    summary = service.run(spec, machine=MACHINE)
    assert summary["status"] == "passed"
    assert summary["configurations"] == 2
    assert len(summary["missing_baselines"]) == 2
    assert set(summary["paths"]) == {"csv", "json"}
    assert (tmp_path / "out" / "traces").is_dir()

    again = service.report(summary["result"], stem="again", formats=("csv",))
    assert again["status"] == "completed"
    assert set(again["paths"]) == {"csv"}
