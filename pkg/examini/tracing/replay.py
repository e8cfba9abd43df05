"""
Ideal-network replay: infinite bandwidth, zero latency, dependencies preserved
"""

from collections import defaultdict
from typing import Dict, List, Tuple

from ..core.errors import UnmatchedMessage
from .models import RECEIVING, SYNCHRONIZING, State, StreamKey, TraceEvent, TraceTimeline

EventId = Tuple[StreamKey, int]


def _rank_ordered(timeline: TraceTimeline) -> Dict[int, List[EventId]]:
    """Event ids of each rank across its threads, in time order"""
    per_rank: Dict[int, List[Tuple[int, int, EventId]]] = defaultdict(list)
    for key, events in timeline.streams.items():
        for idx, event in enumerate(events):
            per_rank[key[0]].append((event.t_start, key[1], (key, idx)))
    return {rank: [eid for _, _, eid in sorted(items)] for rank, items in per_rank.items()}


def match_messages(timeline: TraceTimeline) -> Dict[EventId, EventId]:
    """Map each receiving event with a peer to its SEND, matched by (peer, tag) in order"""
    sends: Dict[Tuple[int, int, int], List[EventId]] = defaultdict(list)
    receives: Dict[Tuple[int, int, int], List[EventId]] = defaultdict(list)
    for rank, ids in _rank_ordered(timeline).items():
        for eid in ids:
            event = timeline.streams[eid[0]][eid[1]]
            if event.peer is None:
                continue
            tag = event.tag or 0
            if event.state == State.SEND:
                sends[(rank, event.peer, tag)].append(eid)
            elif event.state in RECEIVING:
                receives[(event.peer, rank, tag)].append(eid)

    matches: Dict[EventId, EventId] = {}
    for channel, recv_ids in receives.items():
        send_ids = sends.get(channel, [])
        for seq, rid in enumerate(recv_ids):
            if seq >= len(send_ids):
                raise UnmatchedMessage(channel[1], seq, f"receive from rank {channel[0]} tag {channel[2]} has no send")
            matches[rid] = send_ids[seq]
    return matches


def match_collectives(timeline: TraceTimeline) -> Dict[EventId, Tuple[str, str, int]]:
    """Group collective/barrier events by (state, region, per-rank sequence)"""
    groups: Dict[EventId, Tuple[str, str, int]] = {}
    for rank, ids in _rank_ordered(timeline).items():
        counters: Dict[Tuple[str, str], int] = defaultdict(int)
        for eid in ids:
            event = timeline.streams[eid[0]][eid[1]]
            if event.state in SYNCHRONIZING:
                label = (event.state.value, event.region or "")
                groups[eid] = (label[0], label[1], counters[label])
                counters[label] += 1
    return groups


def ideal_network_replay(trace: TraceTimeline) -> Tuple[int, TraceTimeline]:
    """Reschedule the trace on an ideal network; returns (T_ideal, rescheduled timeline)"""
    t0, t1 = trace.roi
    matches = match_messages(trace)
    groups = match_collectives(trace)
    group_size: Dict[Tuple[str, str, int], int] = defaultdict(int)
    for gid in groups.values():
        group_size[gid] += 1

    keys = trace.stream_keys()
    clock = {key: t0 for key in keys}
    cursor = {key: 0 for key in keys}
    previous_end = {key: t0 for key in keys}
    available: Dict[EventId, int] = {}
    arrivals: Dict[Tuple[str, str, int], Dict[EventId, int]] = defaultdict(dict)
    replayed: Dict[StreamKey, List[TraceEvent]] = {key: [] for key in keys}

    remaining = sum(len(trace.streams[k]) for k in keys)
    while remaining:
        progressed = False
        for key in keys:
            events = trace.streams[key]
            while cursor[key] < len(events):
                idx = cursor[key]
                event = events[idx]
                eid = (key, idx)
                start = clock[key] + (event.t_start - previous_end[key])

                if event.state == State.SEND:
                    end = start
                    available[eid] = start
                elif eid in matches:
                    sent_at = available.get(matches[eid])
                    if sent_at is None:
                        break
                    end = max(start, sent_at)
                elif event.state in RECEIVING:
                    end = start
                elif eid in groups:
                    gid = groups[eid]
                    arrivals[gid].setdefault(eid, start)
                    if len(arrivals[gid]) < group_size[gid]:
                        break
                    end = max(start, max(arrivals[gid].values()))
                else:
                    end = start + event.duration

                replayed[key].append(event.shifted(start, end))
                previous_end[key] = event.t_end
                clock[key] = end
                cursor[key] += 1
                remaining -= 1
                progressed = True
        if not progressed:
            blocked = [k for k in keys if cursor[k] < len(trace.streams[k])]
            rank = blocked[0][0] if blocked else -1
            raise UnmatchedMessage(rank, cursor[blocked[0]] if blocked else -1, "replay deadlock")

    finish = [clock[key] + max(0, t1 - previous_end[key]) for key in keys] or [t1]
    t_ideal_end = max(finish)
    timeline = TraceTimeline(ranks=trace.ranks, threads=trace.threads, roi=(t0, t_ideal_end), streams=replayed)
    return t_ideal_end - t0, timeline
