import numpy as np
import pytest

from examini.core.config import settings
from examini.core.dumps import DumpError, read_dump, write_dump
from examini.core.errors import ExaminiError, NeighborTimeout, RankError, ValidationError
from examini.core.ranks import payload_bytes, run_ranks, tree_reduce
from examini.core.utils import format_percentage, format_seconds, get_file_size_string
from examini.tracing.models import State
from examini.tracing.recorder import RecorderSet


def test_error_context_is_rendered():
    err = ExaminiError("boom", step=3)
    err.add_context(rank=1)
    assert err.context == {"step": 3, "rank": 1}
    assert err.rank == 1
    assert str(err) == "boom (step=3, rank=1)"


def test_validation_error_lists_fields():
    err = ValidationError([("cfl", "must be < 1"), ("species[1].qom", "must be a number")])
    assert err.fields == ["cfl", "species[1].qom"]
    assert "2 config violation(s)" in str(err)


def test_worker_cap(monkeypatch):
    monkeypatch.setattr(settings, "WORKERS", 4)
    assert settings.worker_cap() == 4
    assert settings.worker_cap(2) == 2
    assert settings.worker_cap(16) == 4
    assert settings.worker_cap(0) == 1


def test_settings_knobs():
    knobs = {name for name in vars(type(settings)) if name.isupper()}
    assert knobs == {"WORKERS", "NEIGHBOR_TIMEOUT", "OUTPUT_DIR", "BASELINE_DIR", "LOG_LEVEL", "LOG_FILE",
                     "ARTIFACT_VERSION"}


def test_tree_reduce_pairs_by_rank_index():
    assert tree_reduce([1, 2, 3, 4, 5], lambda a, b: a + b) == 15
    assert tree_reduce(["a", "b", "c"], lambda a, b: f"({a}{b})") == "((ab)c)"
    with pytest.raises(RankError):
        tree_reduce([], lambda a, b: a)


def test_payload_bytes():
    assert payload_bytes(np.zeros(10)) == 80
    assert payload_bytes([np.zeros(2), np.zeros(3)]) == 40
    assert payload_bytes(1.5) == 8


def test_collectives_across_ranks():
    def body(ctx):
        total = ctx.allreduce(ctx.rank + 1, lambda a, b: a + b)
        root_value = ctx.bcast("hello" if ctx.rank == 0 else None)
        gathered = ctx.gather(ctx.rank * 10)
        ctx.barrier()
        return total, root_value, gathered

    results, world = run_ranks(4, body, timeout=10)
    assert [r[0] for r in results] == [10] * 4
    assert [r[1] for r in results] == ["hello"] * 4
    assert results[0][2] == [0, 10, 20, 30]
    assert all(r[2] is None for r in results[1:])
    assert world.size == 4


def test_ring_exchange_is_recorded():
    recorders = RecorderSet(3)

    def body(ctx):
        right = (ctx.rank + 1) % ctx.size
        left = (ctx.rank - 1) % ctx.size
        with ctx.region("ring"):
            ctx.send(right, 7, np.full(4, ctx.rank, dtype=float))
            received = ctx.recv(left, 7)
        return float(received[0])

    results, _ = run_ranks(3, body, timeout=10, recorders=recorders)
    assert results == [2.0, 0.0, 1.0]

    timeline = recorders.finalize()
    sends = [e for e in timeline.events() if e.state == State.SEND]
    receives = [e for e in timeline.events() if e.state == State.RECV]
    assert len(sends) == 3 and len(receives) == 3
    assert all(e.bytes == 32 and e.tag == 7 and e.region == "ring" for e in sends)


def test_payloads_are_private_copies():
    def body(ctx):
        if ctx.rank == 0:
            data = np.zeros(3)
            ctx.send(1, 0, data)
            data[:] = 5.0
            return None
        return ctx.recv(0, 0)

    results, _ = run_ranks(2, body, timeout=10)
    assert np.array_equal(results[1], np.zeros(3))


def test_missing_neighbor_times_out():
    def body(ctx):
        if ctx.rank == 0:
            ctx.recv(1, "never")
        return ctx.rank

    with pytest.raises(NeighborTimeout) as info:
        run_ranks(2, body, timeout=0.2)
    assert info.value.context["rank"] == 0


def test_first_failing_rank_is_reported():
    def body(ctx):
        if ctx.rank == 1:
            raise ExaminiError("rank one failed")
        ctx.barrier()

    with pytest.raises(ExaminiError, match="rank one failed"):
        run_ranks(3, body, timeout=5)


def test_dump_round_trip(tmp_path):
    arrays = {"rho": np.arange(6.0).reshape(2, 3), "ids": np.arange(4, dtype=np.int64)}
    paths = write_dump(tmp_path / "snap", arrays, {"time": 0.5})
    loaded, header = read_dump(tmp_path / "snap")
    assert paths["data"].exists()
    assert header["meta"]["time"] == 0.5
    assert np.array_equal(loaded["rho"], arrays["rho"])
    assert loaded["ids"].dtype == np.int64


def test_corrupted_dump_is_rejected(tmp_path):
    paths = write_dump(tmp_path / "snap", {"x": np.ones(8)}, {})
    raw = bytearray(paths["data"].read_bytes())
    raw[0] ^= 0xFF
    paths["data"].write_bytes(bytes(raw))
    with pytest.raises(DumpError):
        read_dump(tmp_path / "snap")


def test_formatting_helpers():
    assert format_seconds(None) == "-"
    assert format_seconds(0.25) == "250.0 ms"
    assert format_seconds(3.5) == "3.50 s"
    assert format_seconds(125) == "2 min 5 s"
    assert format_percentage(0.875) == "87.5%"
    assert get_file_size_string(0) == "0 B"
    assert get_file_size_string(2048) == "2.0 KB"
