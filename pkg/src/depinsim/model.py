"""Value types and schedule arithmetic shared by every other module.

All times are integer milliseconds on a simulated clock starting at 0 and all
token amounts are integers in the smallest denomination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, List, Optional, Union


@dataclass(frozen=True)
class Schedule:
    start_ms: int
    end_ms: int
    interval_ms: int
    duration_ms: int
    max_start_delay_ms: int = 0

    @classmethod
    def single_shot(cls, start_ms: int, duration_ms: int, max_start_delay_ms: int = 0) -> "Schedule":
        """An on-demand job: exactly one execution window."""
        return cls(start_ms, start_ms + duration_ms, 1, duration_ms, max_start_delay_ms)

    def shifted(self, offset_ms: int) -> "Schedule":
        return Schedule(
            self.start_ms + offset_ms,
            self.end_ms + offset_ms,
            self.interval_ms,
            self.duration_ms,
            self.max_start_delay_ms,
        )


@dataclass(frozen=True)
class ResourceRequirements:
    memory_bytes: int = 0
    network_requests: int = 0
    storage_bytes: int = 0


@dataclass(frozen=True)
class Personal:
    """Run only on processors owned by the consumer."""

    name = "personal"


@dataclass(frozen=True)
class Selected:
    """Run only on an explicit set of known processors."""

    processor_ids: FrozenSet[str]
    name = "selected"

    def __init__(self, processor_ids):
        object.__setattr__(self, "processor_ids", frozenset(processor_ids))


@dataclass(frozen=True)
class Public:
    """Let the matcher pick any public processor above the reputation bar."""

    name = "public"


AssignmentMode = Union[Personal, Selected, Public]


@dataclass(frozen=True)
class WorkloadRef:
    name: str
    param: int = 0


@dataclass(frozen=True)
class DestinationRef:
    sink_id: str
    gas_fee: int = 0


@dataclass(frozen=True)
class JobSpec:
    consumer_id: str
    workload: WorkloadRef
    schedule: Schedule
    destination: DestinationRef
    mode: AssignmentMode = field(default_factory=Public)
    resources: ResourceRequirements = field(default_factory=ResourceRequirements)
    reward: int = 0
    gas_budget: int = 0
    min_reputation: float = 0.0


class JobState(str, Enum):
    OPEN = "Open"
    MATCHED = "Matched"
    ASSIGNED = "Assigned"
    COMPLETED = "Completed"
    FAILED = "Failed"

    @property
    def terminal(self) -> bool:
        return self in (JobState.COMPLETED, JobState.FAILED)


LEGAL_TRANSITIONS = frozenset(
    {
        (JobState.OPEN, JobState.MATCHED),
        (JobState.MATCHED, JobState.ASSIGNED),
        (JobState.MATCHED, JobState.OPEN),
        (JobState.ASSIGNED, JobState.COMPLETED),
        (JobState.ASSIGNED, JobState.FAILED),
    }
)


@dataclass(frozen=True)
class ExecutionTimeModel:
    """Execution time distribution of a processor: ``constant`` or truncated ``normal``."""

    kind: str
    mean_ms: float
    std_ms: float = 0.0

    @classmethod
    def constant(cls, value_ms: float) -> "ExecutionTimeModel":
        return cls("constant", value_ms, 0.0)

    @classmethod
    def normal(cls, mean_ms: float, std_ms: float) -> "ExecutionTimeModel":
        return cls("normal", mean_ms, std_ms)

    def __post_init__(self):
        if self.kind not in ("constant", "normal"):
            raise ValueError(f"unknown execution time model {self.kind!r}")
        if not self.mean_ms > 0:
            raise ValueError("mean_ms must be > 0")
        if self.std_ms < 0:
            raise ValueError("std_ms must be >= 0")


@dataclass(frozen=True)
class ProcessorProfile:
    processor_id: str
    owner_id: str
    exec_model: ExecutionTimeModel
    device_model: str = "unknown"
    android_version: int = 0
    country: str = "ZZZ"
    power_watts: float = 0.3
    price_floor: int = 0
    capacity: int = 1
    reliability: float = 1.0
    refusal_probability: float = 0.0
    platform: Optional[str] = None

    def __post_init__(self):
        if not self.power_watts > 0:
            raise ValueError("power_watts must be > 0")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not 0.0 <= self.reliability <= 1.0:
            raise ValueError("reliability must lie in [0, 1]")
        if not 0.0 <= self.refusal_probability <= 1.0:
            raise ValueError("refusal_probability must lie in [0, 1]")

    @property
    def platform_name(self) -> str:
        return self.platform or self.device_model


def slot_count(schedule: Schedule) -> int:
    """Number of executions whose window fits entirely inside the schedule."""
    span = schedule.end_ms - schedule.start_ms - schedule.duration_ms
    return span // schedule.interval_ms + 1


def slot_times(schedule: Schedule) -> List[int]:
    return [schedule.start_ms + k * schedule.interval_ms for k in range(slot_count(schedule))]


def schedule_violations(schedule: Schedule) -> List[str]:
    out = []
    if schedule.start_ms >= schedule.end_ms:
        out.append("empty schedule window")
    if schedule.interval_ms < 1:
        out.append("interval must be >= 1 ms")
    if schedule.duration_ms < 1:
        out.append("duration must be >= 1 ms")
    if schedule.max_start_delay_ms < 0:
        out.append("max start delay must be >= 0 ms")
    if schedule.duration_ms > schedule.end_ms - schedule.start_ms:
        out.append("duration exceeds schedule window")
    return out


def validate_spec(spec: JobSpec) -> List[str]:
    """Return every violated constraint of ``spec``; an empty list means valid."""
    violations = schedule_violations(spec.schedule)
    if not isinstance(spec.reward, int) or not isinstance(spec.gas_budget, int):
        violations.append("token amounts must be integers")
    res = spec.resources
    for name in ("memory_bytes", "network_requests", "storage_bytes"):
        if getattr(res, name) < 0:
            violations.append(f"negative resource requirement: {name}")
    if spec.reward < 0:
        violations.append("negative reward")
    if spec.gas_budget < 0:
        violations.append("negative gas budget")
    if spec.destination.gas_fee < 0:
        violations.append("negative gas fee")
    if not 0.0 <= spec.min_reputation <= 1.0:
        violations.append("min_reputation outside [0, 1]")
    if isinstance(spec.mode, Selected):
        if not spec.mode.processor_ids:
            violations.append("selected mode requires at least one processor")
    elif not isinstance(spec.mode, (Personal, Public)):
        violations.append(f"unknown assignment mode {spec.mode!r}")
    # slot_count is only meaningful for a well-formed schedule
    if not schedule_violations(spec.schedule):
        if spec.gas_budget < slot_count(spec.schedule) * spec.destination.gas_fee:
            violations.append("insufficient gas budget")
    return violations
