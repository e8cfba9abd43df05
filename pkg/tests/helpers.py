from examini.tracing.models import State, TraceEvent, TraceTimeline


def make_event(rank, state, t0, t1, thread=0, **extra) -> TraceEvent:
    return TraceEvent(rank=rank, thread=thread, state=State(state), t_start=t0, t_end=t1, **extra)


def make_timeline(events, ranks=None, roi=None) -> TraceTimeline:
    return TraceTimeline.from_events(events, ranks=ranks, roi=roi)
