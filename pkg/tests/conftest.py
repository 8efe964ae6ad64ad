import pytest

from depinsim.cli import data_path
from depinsim.model import (
    DestinationRef,
    ExecutionTimeModel,
    JobSpec,
    ProcessorProfile,
    Public,
    Schedule,
    WorkloadRef,
)


def make_spec(
    consumer="alice",
    reward=10,
    gas_fee=1,
    slots=1,
    mode=None,
    min_reputation=0.0,
    start=1000,
    interval=1000,
    duration=500,
    delay=0,
    gas_budget=None,
):
    end = start + (slots - 1) * interval + duration
    sched = Schedule(start, end, interval, duration, delay)
    return JobSpec(
        consumer_id=consumer,
        workload=WorkloadRef("sieve", 1000),
        schedule=sched,
        destination=DestinationRef("sink", gas_fee),
        mode=mode or Public(),
        reward=reward,
        gas_budget=slots * gas_fee if gas_budget is None else gas_budget,
        min_reputation=min_reputation,
    )


def make_processor(pid="p1", owner="op", mean=2790.0, std=0.0, capacity=1, reliability=1.0, floor=0, **kw):
    model = ExecutionTimeModel.normal(mean, std) if std else ExecutionTimeModel.constant(mean)
    return ProcessorProfile(
        processor_id=pid,
        owner_id=owner,
        exec_model=model,
        capacity=capacity,
        reliability=reliability,
        price_floor=floor,
        **kw,
    )


@pytest.fixture
def fixture_path():
    return data_path


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, elapsed, budget, detail in sorted(results):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({elapsed:.2f} s, budget {budget} s)"
        terminalreporter.write_line(line + (f" {detail}" if detail else ""))
