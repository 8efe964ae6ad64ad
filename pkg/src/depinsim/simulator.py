"""Discrete-event engine driving the end-to-end job flow on a simulated clock.

Events are processed in ``(time_ms, sequence)`` order, where ``sequence`` is
the insertion counter, so every run is a total order and replays exactly for a
given seed. Randomness comes from four independent numpy streams spawned from
the scenario seed: start delays, execution times, outcomes, and refusals.
"""

from __future__ import annotations

import heapq
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import errors
from .ledger import Ledger
from .matching import Candidate, match
from .model import ExecutionTimeModel, JobSpec, ProcessorProfile, validate_spec
from .registry import ExecutionRecord, Registry
from .reputation import ReputationBook

log = logging.getLogger(__name__)

MISSED = "start window missed"
BUSY = "processor at capacity"
EXEC_FAILED = "execution failed"


@dataclass(frozen=True)
class JobEntry:
    at_ms: int
    spec: JobSpec
    dispatch_latency_ms: int = 0


@dataclass(frozen=True)
class Scenario:
    seed: int
    processors: Tuple[ProcessorProfile, ...]
    jobs: Tuple[JobEntry, ...]
    match_tick_ms: int = 1000
    initial_balances: Mapping[str, int] = field(default_factory=dict)
    horizon_ms: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "processors", tuple(self.processors))
        object.__setattr__(
            self,
            "jobs",
            tuple(j if isinstance(j, JobEntry) else JobEntry(*j) for j in self.jobs),
        )


@dataclass
class SimReport:
    seed: int
    jobs: List[dict]
    processors: Dict[str, dict]
    success_rate: Optional[float]
    samples: Dict[str, List[int]]
    events: List[list]
    ledger: dict
    end_time_ms: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "end_time_ms": self.end_time_ms,
            "success_rate": self.success_rate,
            "jobs": self.jobs,
            "processors": self.processors,
            "samples": self.samples,
            "ledger": self.ledger,
            "events": self.events,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def samples_csv(self) -> str:
        lines = ["platform,iteration,duration_ms"]
        for platform, values in sorted(self.samples.items()):
            lines.extend(f"{platform},{i},{v}" for i, v in enumerate(values))
        return "\n".join(lines) + "\n"

    def job_states(self) -> Dict[int, str]:
        return {j["job_id"]: j["state"] for j in self.jobs}


def sample_exec_time(model: ExecutionTimeModel, rng: np.random.Generator) -> int:
    """Draw one execution time in whole ms; normal draws below 1 ms are redrawn."""
    if model.kind == "constant":
        return max(1, int(round(model.mean_ms)))
    while True:
        value = int(round(rng.normal(model.mean_ms, model.std_ms)))
        if value >= 1:
            return value


def validate_scenario(scenario: Scenario) -> List[str]:
    problems = []
    if scenario.match_tick_ms < 1:
        problems.append("match_tick_ms must be >= 1")
    ids = [p.processor_id for p in scenario.processors]
    if len(set(ids)) != len(ids):
        problems.append("duplicate processor ids")
    for i, entry in enumerate(scenario.jobs):
        if entry.at_ms < 0:
            problems.append(f"jobs[{i}]: registration time must be >= 0")
        if entry.dispatch_latency_ms < 0:
            problems.append(f"jobs[{i}]: dispatch latency must be >= 0")
        problems.extend(f"jobs[{i}]: {v}" for v in validate_spec(entry.spec))
    return problems


class _Engine:
    def __init__(self, scenario: Scenario):
        self.sc = scenario
        streams = np.random.SeedSequence(scenario.seed).spawn(4)
        self.rng_delay, self.rng_exec, self.rng_outcome, self.rng_refuse = (
            np.random.default_rng(s) for s in streams
        )
        self.registry = Registry()
        self.ledger = Ledger(scenario.initial_balances)
        self.reputation = ReputationBook(p.processor_id for p in scenario.processors)
        self.profiles = {p.processor_id: p for p in scenario.processors}
        self.held: Dict[str, int] = defaultdict(int)  # matched or assigned jobs per processor
        self.running: Dict[str, int] = defaultdict(int)
        self.entry_of: Dict[int, JobEntry] = {}
        self.queue: List[tuple] = []
        self.seq = 0
        self.now = 0
        self.events: List[list] = []
        self.samples: Dict[str, List[int]] = defaultdict(list)
        self.armed: Optional[int] = None
        self.last_tick: Optional[int] = None
        if scenario.horizon_ms is not None:
            self.horizon = scenario.horizon_ms
        else:
            ends = [e.spec.schedule.end_ms for e in scenario.jobs] or [0]
            last = max(max(ends), max((e.at_ms for e in scenario.jobs), default=0))
            self.horizon = last + scenario.match_tick_ms

    def push(self, time_ms: int, kind: str, *args) -> None:
        heapq.heappush(self.queue, (time_ms, self.seq, kind, args))
        self.seq += 1

    def emit(self, kind: str, job=None, processor=None, slot=None, detail=None) -> None:
        self.events.append([self.now, len(self.events), kind, job, processor, slot, detail])

    def run(self) -> SimReport:
        for i, entry in enumerate(self.sc.jobs):
            self.push(entry.at_ms, "register", i)
        while self.queue:
            time_ms, _, kind, args = heapq.heappop(self.queue)
            if time_ms < self.now:
                raise errors.InvariantViolation("event queue went backwards in time")
            self.now = time_ms
            getattr(self, "_on_" + kind)(*args)
            problem = self.ledger.audit()
            if problem:
                raise errors.InvariantViolation(f"ledger audit failed at {self.now} ms: {problem}")
        return self._report()

    def _on_register(self, index: int) -> None:
        entry = self.sc.jobs[index]
        try:
            job_id = self.registry.register_job(entry.spec, self.ledger)
        except errors.InsufficientBalance as exc:
            self.emit("register_rejected", detail=str(exc))
            return
        self.entry_of[job_id] = entry
        self.emit("registered", job=job_id)
        self._arm_tick()

    def _arm_tick(self) -> None:
        """Schedule the next matching tick on the ``match_tick_ms`` grid, once.

        Idle ticks (nothing open, or nothing changed since the last one) are
        never scheduled; they could not produce a proposal.
        """
        step = self.sc.match_tick_ms
        t = -(-self.now // step) * step
        if t == self.last_tick:
            t += step
        if self.armed is not None and self.armed >= t:
            return
        if t > self.horizon:
            return
        self.armed = t
        self.push(t, "tick")

    def _on_tick(self) -> None:
        self.armed = None
        self.last_tick = self.now
        open_jobs = self.registry.open_jobs()
        if not open_jobs:
            return
        candidates = [
            Candidate(p, self.reputation.score(pid), self.held[pid])
            for pid, p in sorted(self.profiles.items())
        ]
        proposals = match(open_jobs, candidates, self.registry.refusals)
        for prop in proposals:
            self.registry.propose(prop.job_id, [prop.processor_id])
            self.registry.acknowledge(prop.job_id, prop.processor_id)
            self.held[prop.processor_id] += 1
            self.emit("matched", job=prop.job_id, processor=prop.processor_id)
            latency = self.entry_of[prop.job_id].dispatch_latency_ms
            self.push(self.now + latency, "confirm", prop.job_id, prop.processor_id)
        if proposals and len(proposals) < len(open_jobs):
            self._arm_tick()

    def _on_confirm(self, job_id: int, pid: str) -> None:
        profile = self.profiles[pid]
        refuse = profile.refusal_probability > 0 and self.rng_refuse.random() < profile.refusal_probability
        self.registry.confirm_slots(job_id, pid, accepted=not refuse)
        if refuse:
            self.held[pid] -= 1
            self.emit("refused", job=job_id, processor=pid)
            self._arm_tick()
            return
        self.emit("assigned", job=job_id, processor=pid)
        sched = self.registry.get(job_id).spec.schedule
        for k, scheduled in enumerate(self.registry.slot_schedule(job_id)):
            delay = int(self.rng_delay.integers(0, sched.max_start_delay_ms, endpoint=True))
            start = scheduled + delay
            if start < self.now:
                self.push(self.now, "missed", job_id, k, scheduled)
            else:
                self.push(start, "slot_start", job_id, k, scheduled)

    def _report_slot(self, job_id: int, record: ExecutionRecord) -> None:
        rec = self.registry.get(job_id)
        pid = rec.matched_processor
        state = self.registry.report_fulfillment(job_id, record.slot_index, record, self.ledger, self.reputation)
        self.emit(
            "fulfilled" if record.succeeded else "slot_failed",
            job=job_id,
            processor=pid,
            slot=record.slot_index,
            detail=record.failure_reason,
        )
        if state.terminal:
            self.held[pid] -= 1
            self.emit(state.value.lower(), job=job_id, processor=pid)
            if self.registry.open_jobs():
                self._arm_tick()

    def _on_missed(self, job_id: int, k: int, scheduled: int) -> None:
        self._report_slot(job_id, ExecutionRecord(k, scheduled, self.now, 0, MISSED))

    def _on_slot_start(self, job_id: int, k: int, scheduled: int) -> None:
        pid = self.registry.get(job_id).matched_processor
        profile = self.profiles[pid]
        if self.running[pid] >= profile.capacity:
            self._report_slot(job_id, ExecutionRecord(k, scheduled, self.now, 0, BUSY))
            return
        self.running[pid] += 1
        duration = sample_exec_time(profile.exec_model, self.rng_exec)
        ok = self.rng_outcome.random() < profile.reliability
        self.emit("slot_started", job=job_id, processor=pid, slot=k)
        self.push(self.now + duration, "slot_end", job_id, k, scheduled, self.now, duration, ok)

    def _on_slot_end(self, job_id, k, scheduled, started, duration, ok) -> None:
        pid = self.registry.get(job_id).matched_processor
        self.running[pid] -= 1
        self.samples[self.profiles[pid].platform_name].append(duration)
        reason = None if ok else EXEC_FAILED
        self._report_slot(job_id, ExecutionRecord(k, scheduled, started, duration, reason))

    def _report(self) -> SimReport:
        jobs = []
        per_proc = {
            pid: {"fulfilled": 0, "failed": 0, "earnings": 0, "platform": p.platform_name}
            for pid, p in sorted(self.profiles.items())
        }
        ok_slots = total_slots = 0
        for rec in self.registry:
            jobs.append(
                {
                    "job_id": rec.job_id,
                    "state": rec.state.value,
                    "processor": rec.matched_processor,
                    "slots": rec.slots,
                    "history": [s.value for s in rec.history],
                    "executions": [e.to_dict() for e in sorted(rec.executions, key=lambda e: e.slot_index)],
                }
            )
            for e in rec.executions:
                total_slots += 1
                ok_slots += e.succeeded
                per_proc[rec.matched_processor]["fulfilled" if e.succeeded else "failed"] += 1
        for pid in per_proc:
            per_proc[pid]["earnings"] = self.ledger.balance(pid) - self.sc.initial_balances.get(pid, 0)
            rep = self.reputation.record(pid)
            per_proc[pid]["reputation"] = [rep.successes, rep.failures]
        return SimReport(
            seed=self.sc.seed,
            jobs=jobs,
            processors=per_proc,
            success_rate=(ok_slots / total_slots) if total_slots else None,
            samples={k: list(v) for k, v in sorted(self.samples.items())},
            events=self.events,
            ledger=self.ledger.to_dict(),
            end_time_ms=self.now,
        )


def run(scenario: Scenario) -> SimReport:
    problems = validate_scenario(scenario)
    if problems:
        raise errors.InvalidScenario("; ".join(problems))
    engine = _Engine(scenario)
    report = engine.run()
    log.info(
        "simulated %d jobs on %d processors, success rate %s",
        len(report.jobs),
        len(scenario.processors),
        report.success_rate,
    )
    return report


def run_with_state(scenario: Scenario):
    """Like :func:`run` but also hand back the engine's registry and ledger for inspection."""
    problems = validate_scenario(scenario)
    if problems:
        raise errors.InvalidScenario("; ".join(problems))
    engine = _Engine(scenario)
    report = engine.run()
    return report, engine.registry, engine.ledger
