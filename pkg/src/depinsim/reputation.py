"""Per-processor reliability scores fed by fulfillment outcomes.

The score is the posterior mean of a Beta(1, 1) prior over the success
probability, i.e. a Laplace-smoothed success rate. There is no time decay, so
a record depends only on how many successes and failures it has seen.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterable


@dataclass(frozen=True)
class ReputationRecord:
    processor_id: str = ""
    successes: int = 0
    failures: int = 0

    def __post_init__(self):
        if self.successes < 0 or self.failures < 0:
            raise ValueError("reputation counters must be non-negative")


def initial(processor_id: str = "") -> ReputationRecord:
    return ReputationRecord(processor_id)


def update(rec: ReputationRecord, success: bool) -> ReputationRecord:
    if success:
        return replace(rec, successes=rec.successes + 1)
    return replace(rec, failures=rec.failures + 1)


def score(rec: ReputationRecord) -> float:
    return (rec.successes + 1) / (rec.successes + rec.failures + 2)


def exact_score(rec: ReputationRecord) -> Fraction:
    """Same as :func:`score` without float rounding; used for ordering checks."""
    return Fraction(rec.successes + 1, rec.successes + rec.failures + 2)


class ReputationBook:
    """Global score table, one record per processor."""

    def __init__(self, processor_ids: Iterable[str] = ()):
        self._records: Dict[str, ReputationRecord] = {}
        for pid in processor_ids:
            self._records[pid] = initial(pid)

    def record(self, processor_id: str) -> ReputationRecord:
        return self._records.get(processor_id) or initial(processor_id)

    def score(self, processor_id: str) -> float:
        return score(self.record(processor_id))

    def report(self, processor_id: str, success: bool) -> ReputationRecord:
        rec = update(self.record(processor_id), success)
        self._records[processor_id] = rec
        return rec

    def snapshot(self) -> Dict[str, ReputationRecord]:
        return dict(sorted(self._records.items()))
