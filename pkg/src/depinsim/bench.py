"""CPU benchmark harness: the prime sieve workload, timing, statistics, power model."""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import EmptySampleSet, TooFewPlatforms

log = logging.getLogger(__name__)

DEFAULT_MAX = 50_000_000
DEFAULT_WARMUP = 3
MS_PER_HOUR = 3_600_000


def sieve_primes(max_value: int) -> List[int]:
    """Return every prime ``<= max_value`` in ascending order.

    Straight Sieve of Eratosthenes: walk ``i`` from 2 to ``max_value``; an
    unmarked ``i`` is prime and all its multiples from ``2*i`` upward get
    marked. The marking loop is a slice assignment, which performs the same
    writes as stepping ``j = 2i, 3i, ...`` one at a time.
    """
    if max_value < 2:
        return []
    sieve = bytearray(max_value + 1)
    primes = []
    for i in range(2, max_value + 1):
        if not sieve[i]:
            primes.append(i)
            start = 2 * i
            if start <= max_value:
                sieve[start::i] = b"\x01" * ((max_value - start) // i + 1)
    return primes


@dataclass
class SampleSet:
    platform: str
    samples: List[float]
    workload_param: int
    prime_count: int = 0

    def __post_init__(self):
        if any(not s > 0 for s in self.samples):
            raise ValueError("samples must be positive durations")


@dataclass(frozen=True)
class PlatformStats:
    platform: str
    n: int
    mean_ms: float
    std_ms: float
    min_ms: float
    max_ms: float
    p50: float
    p95: float

    def to_dict(self) -> dict:
        return asdict(self)


def _nearest_rank(ordered: Sequence[float], pct: float) -> float:
    rank = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return ordered[rank - 1]


def stats(sample_set: SampleSet) -> PlatformStats:
    values = list(sample_set.samples)
    if not values:
        raise EmptySampleSet(f"no samples for {sample_set.platform}")
    ordered = sorted(values)
    return PlatformStats(
        platform=sample_set.platform,
        n=len(values),
        mean_ms=statistics.fmean(values),
        std_ms=statistics.pstdev(values),
        min_ms=ordered[0],
        max_ms=ordered[-1],
        p50=_nearest_rank(ordered, 50),
        p95=_nearest_rank(ordered, 95),
    )


def run_benchmark(
    workload_param: int,
    iterations: int,
    warmup: int = DEFAULT_WARMUP,
    platform: str = "local",
    clock=time.perf_counter_ns,
) -> SampleSet:
    """Time ``iterations`` sequential sieve runs after ``warmup`` discarded ones."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if warmup < 0:
        raise ValueError("warmup must be >= 0")
    for _ in range(warmup):
        sieve_primes(workload_param)
    samples = []
    count = None
    for it in range(iterations):
        t0 = clock()
        primes = sieve_primes(workload_param)
        elapsed_ms = (clock() - t0) / 1e6
        if count is None:
            count = len(primes)
        elif len(primes) != count:
            raise RuntimeError(f"iteration {it} found {len(primes)} primes, expected {count}")
        # a sub-resolution run would record 0; clamp to the timer's granularity
        samples.append(max(elapsed_ms, 1e-6))
        log.debug("iteration %d: %.3f ms", it, elapsed_ms)
    return SampleSet(platform, samples, workload_param, count or 0)


@dataclass
class Ranking:
    order: List[PlatformStats]
    deltas: Dict[Tuple[str, str], float] = field(default_factory=dict)

    @property
    def names(self) -> List[str]:
        return [s.platform for s in self.order]

    def delta(self, base: str, other: str) -> float:
        """Percentage change of ``other``'s mean relative to ``base``'s."""
        return self.deltas[(base, other)]

    def to_dict(self) -> dict:
        return {
            "order": self.names,
            "stats": [s.to_dict() for s in self.order],
            "deltas_pct": {f"{b}->{o}": v for (b, o), v in self.deltas.items()},
        }


def compare(stats_list: Sequence[PlatformStats]) -> Ranking:
    if len(stats_list) < 2:
        raise TooFewPlatforms("need at least two platforms to compare")
    order = sorted(stats_list, key=lambda s: s.mean_ms)
    deltas = {}
    for base in order:
        for other in order:
            if base is not other:
                deltas[(base.platform, other.platform)] = (other.mean_ms - base.mean_ms) / base.mean_ms * 100.0
    return Ranking(order, deltas)


def per_core_watts(tdp_watts: float, cores: int) -> float:
    if cores < 1:
        raise ValueError("cores must be >= 1")
    return tdp_watts / cores


def energy_wh(power_watts: float, duration_ms: float) -> float:
    if not (power_watts > 0 and duration_ms > 0):
        raise ValueError("power and duration must be positive")
    return power_watts * duration_ms / MS_PER_HOUR


def executions_per_wh(energy: float) -> int:
    """Whole workload runs that fit in one watt-hour."""
    if not energy > 0:
        raise ValueError("energy must be positive")
    runs = 1.0 / energy
    nearest = round(runs)
    # 1/x can land a hair below an exact integer
    if math.isclose(runs, nearest, rel_tol=1e-12):
        return int(nearest)
    return math.floor(runs)


@dataclass(frozen=True)
class PowerModel:
    label: str
    power_watts: float
    duration_ms: float

    def __post_init__(self):
        if not (self.power_watts > 0 and self.duration_ms > 0):
            raise ValueError("power and duration must be positive")

    @property
    def energy_wh(self) -> float:
        return energy_wh(self.power_watts, self.duration_ms)

    @property
    def executions_per_wh(self) -> int:
        return executions_per_wh(self.energy_wh)


def samples_csv(sets: Iterable[SampleSet]) -> str:
    lines = ["platform,iteration,duration_ms"]
    for s in sets:
        lines.extend(f"{s.platform},{i},{v!r}" for i, v in enumerate(s.samples))
    return "\n".join(lines) + "\n"


def read_samples_csv(text: str) -> Dict[str, List[float]]:
    out: Dict[str, List[float]] = {}
    for row in csv.DictReader(io.StringIO(text)):
        out.setdefault(row["platform"], []).append(float(row["duration_ms"]))
    return out
