from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from depinsim.model import (
    DestinationRef,
    JobSpec,
    Personal,
    Public,
    ResourceRequirements,
    Schedule,
    Selected,
    WorkloadRef,
    slot_count,
    slot_times,
    validate_spec,
)

from conftest import make_spec
from oracles import enumerate_slots


@pytest.mark.parametrize(
    "start,end,interval,duration,expected",
    [
        (0, 10000, 1000, 500, 10),
        (0, 1000, 1, 1000, 1),
        (0, 10000, 20000, 500, 1),
    ],
)
def test_slot_count_examples(start, end, interval, duration, expected):
    sched = Schedule(start, end, interval, duration)
    assert slot_count(sched) == expected
    assert slot_count(sched) == len(enumerate_slots(start, end, interval, duration))


@pytest.mark.parametrize(
    "sched,expected",
    [
        (Schedule(0, 3000, 1000, 500), [0, 1000, 2000]),
        (Schedule.single_shot(42, 700), [42]),
        (Schedule(5, 10005, 2500, 100), [5, 2505, 5005, 7505]),
    ],
)
def test_slot_times_examples(sched, expected):
    assert slot_times(sched) == expected


@st.composite
def schedules(draw):
    start = draw(st.integers(0, 10**6))
    length = draw(st.integers(1, 10**5))
    duration = draw(st.integers(1, length))
    interval = draw(st.integers(1, 10**5))
    return Schedule(start, start + length, interval, duration, draw(st.integers(0, 1000)))


@given(schedules())
def test_slot_times_match_enumeration(sched):
    times = slot_times(sched)
    assert times == enumerate_slots(sched.start_ms, sched.end_ms, sched.interval_ms, sched.duration_ms)
    assert len(times) == slot_count(sched) >= 1
    assert times[-1] + sched.duration_ms <= sched.end_ms
    assert all(a < b for a, b in zip(times, times[1:]))


class TestValidateSpec:
    def test_valid_public_spec(self):
        assert validate_spec(make_spec()) == []

    def test_insufficient_gas(self):
        spec = make_spec(slots=3, gas_fee=1, gas_budget=0)
        assert "insufficient gas budget" in validate_spec(spec)

    def test_empty_window(self):
        spec = replace(make_spec(), schedule=Schedule(5000, 5000, 1000, 1))
        assert "empty schedule window" in validate_spec(spec)

    def test_personal_mode_allows_zero_reward(self):
        assert validate_spec(make_spec(reward=0, mode=Personal())) == []

    def test_selected_needs_members(self):
        assert validate_spec(make_spec(mode=Selected([]))) == [
            "selected mode requires at least one processor"
        ]

    def test_reports_every_violation(self):
        spec = JobSpec(
            consumer_id="c",
            workload=WorkloadRef("x"),
            schedule=Schedule(10, 5, 0, 0, -1),
            destination=DestinationRef("d", -1),
            resources=ResourceRequirements(-1, 0, 0),
            reward=-1,
            gas_budget=-1,
            min_reputation=2.0,
        )
        problems = validate_spec(spec)
        assert len(problems) >= 8
        assert "insufficient gas budget" not in problems


@given(
    start=st.integers(-10**6, 10**6),
    end=st.integers(-10**6, 10**6),
    interval=st.integers(-5, 10**4),
    duration=st.integers(-5, 10**4),
    delay=st.integers(-5, 10**4),
    reward=st.integers(-5, 10**4),
    gas=st.integers(-5, 10**4),
    fee=st.integers(-5, 100),
    rep=st.floats(-1, 2, allow_nan=False),
    mode=st.sampled_from([Public(), Personal(), Selected(["a"]), Selected([])]),
)
def test_validate_spec_is_total(start, end, interval, duration, delay, reward, gas, fee, rep, mode):
    spec = JobSpec(
        consumer_id="c",
        workload=WorkloadRef("w"),
        schedule=Schedule(start, end, interval, duration, delay),
        destination=DestinationRef("d", fee),
        mode=mode,
        reward=reward,
        gas_budget=gas,
        min_reputation=rep,
    )
    assert isinstance(validate_spec(spec), list)
