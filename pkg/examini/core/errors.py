"""
Exception hierarchy shared by all examini packages
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple


class ExaminiError(Exception):
    """Base class for every error raised by examini"""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context: Dict[str, Any] = dict(context)

    def add_context(self, **context: Any) -> "ExaminiError":
        """Attach driver-level context (step, cycle, configuration) and return self"""
        self.context.update(context)
        for key, value in context.items():
            setattr(self, key, value)
        return self

    def __str__(self) -> str:
        base = super().__str__()
        if not self.context:
            return base
        details = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{base} ({details})"


# --- configuration -----------------------------------------------------------

class ConfigError(ExaminiError):
    """Invalid or unreadable configuration"""


class ValidationError(ConfigError):
    """Config document violates its schema; carries every violation"""

    def __init__(self, violations: Sequence[Tuple[str, str]]):
        self.violations: List[Tuple[str, str]] = list(violations)
        lines = "; ".join(f"{path}: {reason}" for path, reason in self.violations)
        super().__init__(f"{len(self.violations)} config violation(s): {lines}")

    @property
    def fields(self) -> List[str]:
        return [path for path, _ in self.violations]


# --- logical ranks ------------------------------------------------------------

class RankError(ExaminiError):
    """Failure inside the logical rank runtime"""


class NeighborTimeout(RankError):
    """A peer rank did not deliver a message before the watchdog expired"""

    def __init__(self, rank: int, peer: int, tag: Any, timeout: float):
        super().__init__(f"rank {rank} timed out waiting for rank {peer}", rank=rank, peer=peer, tag=tag,
                         timeout=timeout)
        self.rank = rank
        self.peer = peer
        self.tag = tag


# --- mhd ---------------------------------------------------------------------------

class MhdError(ExaminiError):
    """Errors raised by the MHD solver"""


class UnphysicalState(MhdError):
    """Base for non-positive density or pressure"""

    def __init__(self, message: str, cell: Optional[Tuple[int, ...]] = None, value: float = float("nan")):
        super().__init__(message, cell=cell, value=value)
        self.cell = cell
        self.value = value
        self.stage: Optional[int] = None
        self.step: Optional[int] = None


class NegativeDensity(UnphysicalState):
    pass


class NegativePressure(UnphysicalState):
    pass


class GridError(MhdError):
    """Inconsistent grid / rank layout"""


# --- pic --------------------------------------------------------------------------------

class PicError(ExaminiError):
    """Errors raised by the particle-in-cell app"""


class NonFiniteParticle(PicError):
    def __init__(self, index: int, species: Optional[int] = None):
        super().__init__(f"particle {index} has non-finite phase-space coordinates", index=index, species=species)
        self.index = index
        self.species = species


class GmresNoConvergence(PicError):
    def __init__(self, residual: float, iterations: int):
        super().__init__("GMRes did not reach the requested tolerance", residual=residual, iterations=iterations)
        self.residual = residual
        self.iterations = iterations


# --- gravity ---------------------------------------------------------------------------

class GravityError(ExaminiError):
    """Errors raised by the tree gravity / SPH app"""


class OutOfDomain(GravityError):
    def __init__(self, index: int, position: Any):
        super().__init__(f"position of body {index} lies outside the key domain", index=index,
                         position=tuple(position))
        self.index = index


class DegenerateDomain(GravityError):
    pass


class HsmlNoConvergence(GravityError):
    def __init__(self, body_id: int, iterations: int):
        super().__init__(f"smoothing length of body {body_id} did not converge", body_id=body_id,
                         iterations=iterations)
        self.body_id = body_id


# --- tracing ----------------------------------------------------------------------------

class TraceError(ExaminiError):
    """Errors raised by trace loading and analysis"""


class EmptyTrace(TraceError):
    pass


class MalformedEvent(TraceError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"malformed trace event on line {line}: {reason}", line=line)
        self.line = line


class OverlapViolation(TraceError):
    def __init__(self, rank: int, thread: int, t_start: int, previous_end: int):
        super().__init__("events overlap within one stream", rank=rank, thread=thread, t_start=t_start,
                         previous_end=previous_end)
        self.rank = rank
        self.thread = thread


class UnmatchedMessage(TraceError):
    def __init__(self, rank: int, sequence: int, reason: str = "no matching send"):
        super().__init__(f"unmatched message on rank {rank} (#{sequence}): {reason}", rank=rank,
                         sequence=sequence)
        self.rank = rank
        self.sequence = sequence


class MissingDependency(TraceError):
    """Serialization efficiency requested but the ideal replay is impossible"""


class MissingCounters(TraceError):
    """Instruction counters absent from one of the traces"""


# --- benchmarks ------------------------------------------------------------------------

class BenchError(ExaminiError):
    """Errors raised by the campaign harness"""


class NonPositiveTime(BenchError):
    def __init__(self, value: float):
        super().__init__(f"timings must be positive, got {value}", value=value)


class MissingBaseline(BenchError):
    pass


class IoFailure(BenchError):
    pass
