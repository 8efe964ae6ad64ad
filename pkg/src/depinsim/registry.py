"""Job registry: owns job records and enforces the lifecycle state machine.

    Open -> Matched -> Assigned -> Completed | Failed
             |
             +-> Open   (processor refused the slot confirmation)

Fulfillment reports settle the ledger and feed the reputation book.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set

from . import errors
from .ledger import Ledger
from .model import LEGAL_TRANSITIONS, JobSpec, JobState, slot_count, slot_times, validate_spec
from .reputation import ReputationBook


@dataclass(frozen=True)
class ExecutionRecord:
    slot_index: int
    scheduled_start_ms: int
    actual_start_ms: int
    duration_ms: int
    failure_reason: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.failure_reason is None

    def to_dict(self) -> dict:
        return {
            "slot": self.slot_index,
            "scheduled_start_ms": self.scheduled_start_ms,
            "actual_start_ms": self.actual_start_ms,
            "duration_ms": self.duration_ms,
            "outcome": "success" if self.succeeded else "failure",
            "reason": self.failure_reason,
        }


@dataclass
class JobRecord:
    job_id: int
    spec: JobSpec
    state: JobState = JobState.OPEN
    matched_processor: Optional[str] = None
    executions: List[ExecutionRecord] = field(default_factory=list)
    history: List[JobState] = field(default_factory=lambda: [JobState.OPEN])
    slots: int = 0

    def reported(self) -> Set[int]:
        return {r.slot_index for r in self.executions}


def reward_share(reward: int, slots: int, slot_index: int) -> int:
    """Even split of ``reward``; the final slot also carries the division remainder."""
    base = reward // slots
    if slot_index == slots - 1:
        return base + reward - base * slots
    return base


class Registry:
    def __init__(self):
        self._jobs: Dict[int, JobRecord] = {}
        self._proposed: Dict[int, Set[str]] = {}
        self.refusals: Dict[int, Set[str]] = {}
        self._next_id = 1

    def __iter__(self):
        return iter(self._jobs.values())

    def __len__(self):
        return len(self._jobs)

    def get(self, job_id: int) -> JobRecord:
        try:
            return self._jobs[job_id]
        except KeyError:
            raise errors.UnknownJob(f"unknown job {job_id}") from None

    def job_state(self, job_id: int) -> JobState:
        return self.get(job_id).state

    def open_jobs(self) -> List[JobRecord]:
        return [r for r in self._jobs.values() if r.state is JobState.OPEN]

    def _move(self, rec: JobRecord, new: JobState) -> None:
        if (rec.state, new) not in LEGAL_TRANSITIONS:
            raise errors.InvariantViolation(f"job {rec.job_id}: illegal {rec.state.value} -> {new.value}")
        rec.state = new
        rec.history.append(new)

    def register_job(self, spec: JobSpec, ledger: Ledger) -> int:
        violations = validate_spec(spec)
        if violations:
            raise errors.InvalidSpec(violations)
        job_id = self._next_id
        # lock first so a funding failure leaves no record behind
        ledger.lock(spec.consumer_id, job_id, spec.reward, spec.gas_budget)
        self._next_id += 1
        self._jobs[job_id] = JobRecord(job_id, spec, slots=slot_count(spec.schedule))
        return job_id

    def propose(self, job_id: int, processor_ids: Iterable[str]) -> None:
        """Record matcher proposals; only proposed processors may acknowledge."""
        rec = self.get(job_id)
        if rec.state is not JobState.OPEN:
            raise errors.WrongState(f"job {job_id} is {rec.state.value}, proposals need Open")
        self._proposed.setdefault(job_id, set()).update(processor_ids)

    def acknowledge(self, job_id: int, processor_id: str) -> JobState:
        rec = self.get(job_id)
        if rec.state is JobState.MATCHED:
            raise errors.AlreadyMatched(f"job {job_id} already matched to {rec.matched_processor}")
        if rec.state is not JobState.OPEN:
            raise errors.WrongState(f"job {job_id} is {rec.state.value}")
        if processor_id not in self._proposed.get(job_id, ()):
            raise errors.NotProposed(f"{processor_id} was not proposed for job {job_id}")
        self._move(rec, JobState.MATCHED)
        rec.matched_processor = processor_id
        self._proposed.pop(job_id, None)
        return rec.state

    def confirm_slots(self, job_id: int, processor_id: str, accepted: bool) -> JobState:
        rec = self.get(job_id)
        if rec.state is not JobState.MATCHED:
            raise errors.WrongState(f"job {job_id} is {rec.state.value}")
        if processor_id != rec.matched_processor:
            raise errors.WrongProcessor(f"job {job_id} is matched to {rec.matched_processor}")
        if accepted:
            self._move(rec, JobState.ASSIGNED)
        else:
            self._move(rec, JobState.OPEN)
            rec.matched_processor = None
            self.refusals.setdefault(job_id, set()).add(processor_id)
        return rec.state

    def report_fulfillment(
        self,
        job_id: int,
        slot_index: int,
        record: ExecutionRecord,
        ledger: Ledger,
        reputation: ReputationBook,
    ) -> JobState:
        rec = self.get(job_id)
        if rec.state is not JobState.ASSIGNED:
            raise errors.WrongState(f"job {job_id} is {rec.state.value}")
        if not 0 <= slot_index < rec.slots:
            raise errors.SlotOutOfRange(f"slot {slot_index} outside 0..{rec.slots - 1}")
        if slot_index in rec.reported():
            raise errors.DuplicateSlot(f"slot {slot_index} of job {job_id} already reported")
        if record.slot_index != slot_index:
            raise ValueError("record.slot_index does not match slot_index")
        expected_start = rec.spec.schedule.start_ms + slot_index * rec.spec.schedule.interval_ms
        if record.scheduled_start_ms != expected_start:
            raise ValueError(f"slot {slot_index} is scheduled at {expected_start} ms")
        if record.succeeded:
            lag = record.actual_start_ms - record.scheduled_start_ms
            if not 0 <= lag <= rec.spec.schedule.max_start_delay_ms:
                raise ValueError(f"start lag {lag} ms outside the allowed delay")

        rec.executions.append(record)
        processor = rec.matched_processor
        if record.succeeded:
            share = reward_share(rec.spec.reward, rec.slots, slot_index)
            ledger.pay_slot(job_id, processor, share, rec.spec.destination.gas_fee)
        reputation.report(processor, record.succeeded)

        if len(rec.executions) == rec.slots:
            ok = all(r.succeeded for r in rec.executions)
            self._move(rec, JobState.COMPLETED if ok else JobState.FAILED)
            ledger.refund(job_id, rec.spec.consumer_id)
        return rec.state

    def slot_schedule(self, job_id: int) -> List[int]:
        return slot_times(self.get(job_id).spec.schedule)
