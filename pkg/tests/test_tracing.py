import json

import numpy as np
import pytest

from examini.core.errors import EmptyTrace, MalformedEvent, MissingCounters, MissingDependency, OverlapViolation
from examini.tracing.antipatterns import detect_latency_antipattern
from examini.tracing.io import load_trace, write_trace
from examini.tracing.metrics import (
    compute_pop_metrics, compute_scalability, detect_scaling_mode, metrics_table, region_speedup, region_times,
)
from examini.tracing.models import State
from examini.tracing.recorder import RecorderSet, TraceRecorder
from examini.tracing.replay import ideal_network_replay
from examini.tracing.services import get_trace_service

from .helpers import make_event, make_timeline


@pytest.fixture
def unbalanced():
    """2 ranks, T=10: rank 0 works 8, rank 1 works 6, both finish in a barrier"""
    return make_timeline([
        make_event(0, "USEFUL", 0, 8, region="solve"),
        make_event(0, "BARRIER", 8, 10, region="solve"),
        make_event(1, "USEFUL", 0, 6, region="solve"),
        make_event(1, "BARRIER", 6, 10, region="solve"),
    ], roi=(0, 10))


@pytest.fixture
def send_wait():
    """rank 0 computes then sends; rank 1 waits for the message then computes"""
    return make_timeline([
        make_event(0, "USEFUL", 0, 4),
        make_event(0, "SEND", 4, 5, peer=1, bytes=64),
        make_event(1, "WAIT", 0, 5, peer=0),
        make_event(1, "USEFUL", 5, 9),
    ], roi=(0, 9))


def test_balanced_trace_is_fully_efficient():
    trace = make_timeline([make_event(r, "USEFUL", 0, 100) for r in range(4)])
    report = compute_pop_metrics(trace)
    for value in (report.load_balance, report.communication_efficiency, report.parallel_efficiency,
                  report.serialization_efficiency, report.transfer_efficiency):
        assert value == pytest.approx(1.0)


def test_mean_max_formulas(unbalanced):
    report = compute_pop_metrics(unbalanced, ideal_replay=False)
    assert report.load_balance == pytest.approx(0.875)
    assert report.communication_efficiency == pytest.approx(0.8)
    assert report.parallel_efficiency == pytest.approx(0.7)
    assert report.parallel_efficiency == pytest.approx(report.load_balance * report.communication_efficiency,
                                                       abs=1e-12)


def test_replay_of_send_wait_pair(send_wait):
    t_ideal, replayed = ideal_network_replay(send_wait)
    assert t_ideal == 8
    useful = {k: sum(e.duration for e in v if e.state == State.USEFUL) for k, v in replayed.streams.items()}
    assert useful == {(0, 0): 4, (1, 0): 4}

    report = compute_pop_metrics(send_wait)
    assert report.ideal_runtime == 8
    assert report.serialization_efficiency == pytest.approx(0.5)
    assert report.transfer_efficiency == pytest.approx(8 / 9)
    assert report.communication_efficiency == pytest.approx(4 / 9)
    assert report.communication_efficiency == pytest.approx(
        report.serialization_efficiency * report.transfer_efficiency, abs=1e-12)


def test_replay_without_communication_keeps_runtime():
    trace = make_timeline([make_event(0, "USEFUL", 0, 7), make_event(1, "USEFUL", 0, 5)], roi=(0, 7))
    assert ideal_network_replay(trace)[0] == 7


def test_balanced_barrier_chain_keeps_runtime():
    events = []
    for r in range(3):
        events += [make_event(r, "USEFUL", 0, 5), make_event(r, "BARRIER", 5, 5),
                   make_event(r, "USEFUL", 5, 10), make_event(r, "BARRIER", 10, 10)]
    assert ideal_network_replay(make_timeline(events, roi=(0, 10)))[0] == 10


def test_replay_is_idempotent(send_wait):
    t_ideal, replayed = ideal_network_replay(send_wait)
    t_again, again = ideal_network_replay(replayed)
    assert t_again == t_ideal
    assert list(again.events()) == list(replayed.events())


def test_unmatched_receive_blocks_serialization_metrics():
    trace = make_timeline([make_event(0, "USEFUL", 0, 4), make_event(1, "RECV", 0, 4, peer=0)])
    with pytest.raises(MissingDependency):
        compute_pop_metrics(trace)
    assert compute_pop_metrics(trace, ideal_replay=False).load_balance == pytest.approx(0.5)


def _random_trace(rng):
    """Bursts of work, matched SEND/WAIT pairs and global barriers on 2-6 ranks"""
    ranks = int(rng.integers(2, 7))
    clock = [0] * ranks
    events = []

    def useful(rank):
        start = clock[rank] + int(rng.integers(0, 3))
        clock[rank] = start + int(rng.integers(1, 50))
        events.append(make_event(rank, "USEFUL", start, clock[rank]))

    for rank in range(ranks):
        useful(rank)
    for _ in range(int(rng.integers(1, 12))):
        kind = rng.integers(3)
        if kind == 0:
            useful(int(rng.integers(ranks)))
        elif kind == 1:
            sender, receiver = (int(r) for r in rng.choice(ranks, size=2, replace=False))
            send_end = clock[sender] + int(rng.integers(1, 4))
            events.append(make_event(sender, "SEND", clock[sender], send_end, peer=receiver, bytes=64))
            clock[sender] = send_end
            wait_end = max(clock[receiver] + 1, send_end + int(rng.integers(0, 20)))
            events.append(make_event(receiver, "WAIT", clock[receiver], wait_end, peer=sender))
            clock[receiver] = wait_end
        else:
            release = max(clock) + int(rng.integers(0, 5))
            for rank in range(ranks):
                events.append(make_event(rank, "BARRIER", clock[rank], release))
                clock[rank] = release
    for rank in range(ranks):
        useful(rank)
    return make_timeline(events, ranks=ranks)


def test_efficiency_identities_hold_on_random_traces():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        report = compute_pop_metrics(_random_trace(rng))
        assert abs(report.parallel_efficiency - report.load_balance * report.communication_efficiency) <= 1e-12
        assert abs(report.communication_efficiency
                   - report.serialization_efficiency * report.transfer_efficiency) <= 1e-12
        assert report.serialization_efficiency <= 1.0 + 1e-12
        assert report.transfer_efficiency <= 1.0 + 1e-12


def test_region_metrics_use_labelled_events(unbalanced):
    report = compute_pop_metrics(unbalanced, region="solve", ideal_replay=False)
    assert report.runtime == 10
    assert report.load_balance == pytest.approx(0.875)
    assert region_times(unbalanced) == {"solve": pytest.approx(1e-8)}


def test_omp_communication_efficiency():
    trace = make_timeline([
        make_event(0, "USEFUL", 0, 6, thread=0), make_event(0, "OMP_RUNTIME", 6, 8, thread=0),
        make_event(0, "USEFUL", 0, 8, thread=1),
        make_event(1, "USEFUL", 0, 8, thread=0),
    ], roi=(0, 8))
    report = compute_pop_metrics(trace, ideal_replay=False)
    # rank 0: 14 / 16, rank 1: 1
    assert report.omp_communication_efficiency == pytest.approx((14 / 16 + 1.0) / 2)


def test_scalability_ratios():
    base = make_timeline([make_event(0, "USEFUL", 0, 10, instructions=100)])
    doubled = make_timeline([make_event(0, "USEFUL", 0, 10, instructions=500),
                             make_event(1, "USEFUL", 0, 10, instructions=0)])
    assert compute_scalability(base, base).computation == pytest.approx(1.0)
    scal = compute_scalability(base, doubled)
    assert scal.computation == pytest.approx(0.5)
    assert scal.instruction == pytest.approx(0.2)


def test_missing_instruction_counters():
    base = make_timeline([make_event(0, "USEFUL", 0, 10)])
    assert compute_scalability(base, base).instruction is None
    with pytest.raises(MissingCounters):
        compute_scalability(base, base, require_instructions=True)


def test_scaling_mode_detection():
    base = make_timeline([make_event(0, "USEFUL", 0, 10)])
    weak = make_timeline([make_event(r, "USEFUL", 0, 10) for r in range(4)])
    strong = make_timeline([make_event(r, "USEFUL", 0, 3) for r in range(4)])
    assert detect_scaling_mode(base, weak) == "weak"
    assert detect_scaling_mode(base, strong) == "strong"


def test_region_speedup(unbalanced):
    faster = make_timeline([make_event(0, "USEFUL", 0, 4, region="solve")])
    assert region_speedup(unbalanced, faster, "solve") == pytest.approx(2.5)


def test_trace_round_trip(tmp_path, send_wait):
    path = write_trace(send_wait, tmp_path / "trace.jsonl")
    loaded = load_trace(path)
    assert list(loaded.events()) == list(send_wait.events())
    assert loaded.roi == (0, 9)
    assert loaded.ranks == 2


def test_empty_trace_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(EmptyTrace):
        load_trace(path)


def test_malformed_event_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    lines = [{"rank": 0, "state": "USEFUL", "t_start": 0, "t_end": 5},
             {"rank": 0, "state": "USEFUL", "t_start": 9, "t_end": 6}]
    path.write_text("\n".join(json.dumps(line) for line in lines), encoding="utf-8")
    with pytest.raises(MalformedEvent) as info:
        load_trace(path)
    assert info.value.line == 2


def test_undecodable_bytes_report_line(tmp_path):
    path = tmp_path / "binary.jsonl"
    good = json.dumps({"rank": 0, "state": "USEFUL", "t_start": 0, "t_end": 5}).encode("utf-8")
    path.write_bytes(good + b"\n" + b'{"rank": 0, "state": "\xff\xfe"}\n')
    with pytest.raises(MalformedEvent) as info:
        load_trace(path)
    assert info.value.line == 2


def test_overlapping_events_are_rejected(tmp_path):
    path = tmp_path / "overlap.jsonl"
    lines = [{"rank": 0, "state": "USEFUL", "t_start": 0, "t_end": 5},
             {"rank": 0, "state": "SEND", "t_start": 3, "t_end": 6, "peer": 1}]
    path.write_text("\n".join(json.dumps(line) for line in lines), encoding="utf-8")
    with pytest.raises(OverlapViolation):
        load_trace(path)


def test_roi_clipping(tmp_path, unbalanced):
    path = write_trace(unbalanced, tmp_path / "trace.jsonl")
    clipped = load_trace(path, roi=(2, 7))
    assert clipped.window == 5
    assert all(2 <= e.t_start and e.t_end <= 7 for e in clipped.events())


def test_recorder_regions_and_nesting():
    recorder = TraceRecorder(rank=0)
    with recorder.region("outer"):
        with recorder.span(State.USEFUL):
            pass
        with pytest.raises(Exception):
            with recorder.span(State.USEFUL):
                with recorder.span(State.SEND):
                    pass
    assert recorder.events[0].region == "outer"
    assert recorder.current_region is None


def test_recorder_set_merges_ranks():
    recorders = RecorderSet(2)
    for rank in range(2):
        with recorders.recorder(rank).span(State.USEFUL):
            pass
    timeline = load_trace(recorders)
    assert timeline.ranks == 2
    assert timeline.stream_keys() == [(0, 0), (1, 0)]


def _antipattern_trace(sizes):
    events = [make_event(0, "BARRIER", 0, 1)]
    t = 1
    for nbytes in sizes:
        events.append(make_event(0, "SEND", t, t + 1, peer=1, bytes=nbytes))
        t += 1
    events.append(make_event(0, "BARRIER", t, t + 1))
    return make_timeline(events)


def test_antipattern_without_barriers():
    trace = make_timeline([make_event(0, "SEND", i, i + 1, peer=1, bytes=8) for i in range(10)])
    assert detect_latency_antipattern(trace) == []


def test_antipattern_run_between_barriers():
    findings = detect_latency_antipattern(_antipattern_trace([8] * 10))
    assert len(findings) == 1
    assert findings[0].run_length == 10
    assert findings[0].bytes_total == 80
    assert findings[0].ranks == [0]


def test_large_message_splits_the_run():
    sizes = [8] * 10
    sizes[5] = 1 << 20
    findings = detect_latency_antipattern(_antipattern_trace(sizes))
    assert findings
    assert max(f.run_length for f in findings) <= 9


def test_trace_service_reports(tmp_path, send_wait, unbalanced):
    service = get_trace_service(tmp_path)
    tree = service.analyze(unbalanced, ideal_replay=False)
    assert "solve" in tree["regions"]
    paths = service.save_report(tree)
    table = metrics_table(tree)
    assert set(table["region"]) == {"ALL", "solve"}
    assert paths["csv"].exists() and paths["json"].exists()

    scaled = service.analyze(send_wait, base=unbalanced, mode="strong")
    assert scaled["scaling_mode"] == "strong"
    assert scaled["global"]["global_efficiency"] == pytest.approx(
        scaled["global"]["parallel_efficiency"] * scaled["global"]["computation_scalability"])

    assert service.antipatterns(send_wait)["status"] == "clean"
