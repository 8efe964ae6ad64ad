"""Deterministic greedy matcher pairing open jobs with processors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Dict, List, Mapping, Optional, Sequence, Tuple

from .model import JobSpec, Personal, ProcessorProfile, Public, Selected, slot_count
from .registry import JobRecord


@dataclass(frozen=True)
class MatchProposal:
    job_id: int
    processor_id: str


@dataclass(frozen=True)
class Candidate:
    profile: ProcessorProfile
    reputation: float
    load: int = 0


def eligible(spec: JobSpec, profile: ProcessorProfile, rep: float, load: int) -> bool:
    if load >= profile.capacity:
        return False
    mode = spec.mode
    if isinstance(mode, Personal):
        return profile.owner_id == spec.consumer_id
    if isinstance(mode, Selected):
        return profile.processor_id in mode.processor_ids
    if isinstance(mode, Public):
        return rep >= spec.min_reputation and spec.reward >= profile.price_floor * slot_count(spec.schedule)
    return False


def _rank_key(c: Candidate):
    # highest reputation, then cheapest floor, then smallest id
    return (-c.reputation, c.profile.price_floor, c.profile.processor_id)


def match(
    open_jobs: Sequence[JobRecord],
    processors: Sequence[Candidate],
    refused: Optional[Mapping[int, AbstractSet[str]]] = None,
) -> List[MatchProposal]:
    """Propose at most one processor per open job, in ascending job id order.

    Loads are provisional within a call: each proposal occupies one unit of the
    chosen processor's capacity for the rest of the pass. Jobs without an
    eligible processor are skipped. ``refused`` maps a job id to processors
    that already declined its slots; they are not proposed for it again.
    """
    refused = refused or {}
    load: Dict[str, int] = {c.profile.processor_id: c.load for c in processors}
    ranked: List[Candidate] = sorted(processors, key=_rank_key)
    proposals = []
    for job in sorted(open_jobs, key=lambda j: j.job_id):
        declined = refused.get(job.job_id, ())
        for cand in ranked:
            pid = cand.profile.processor_id
            if pid in declined:
                continue
            if eligible(job.spec, cand.profile, cand.reputation, load[pid]):
                proposals.append(MatchProposal(job.job_id, pid))
                load[pid] += 1
                break
    return proposals


def as_candidates(entries: Sequence[Tuple[ProcessorProfile, float, int]]) -> List[Candidate]:
    return [Candidate(p, r, l) for p, r, l in entries]
