import textwrap

import pytest

from depinsim.cli import data_path
from depinsim.config import ConfigError, load_scenario, parse_scenario
from depinsim.model import Personal, Public, Selected

BASE = """\
seed: 3
match_tick_ms: 250
balances: {alice: 1000}
processors:
  - id: phone
    count: 3
    exec: {model: normal, mean_ms: 2790, std_ms: 134}
jobs:
  - consumer: alice
    repeat: 2
    every_ms: 5000
    at_ms: 100
    reward: 10
    gas_budget: 1
    schedule: {start_ms: 1000, duration_ms: 4000, max_start_delay_ms: 200}
    destination: {sink: api, gas_fee: 1}
"""


def parse(text, **kw):
    return parse_scenario(textwrap.dedent(text), "scn.yaml", **kw)


def test_shipped_replay_scenario():
    s = load_scenario(data_path("replay.yaml"))
    assert len(s.processors) == 62 and len(s.jobs) == 121
    assert s.processors[0].processor_id == "phone-01"


def test_shipped_platform_scenario():
    s = load_scenario(data_path("platforms.yaml"))
    platforms = {p.platform_name for p in s.processors}
    assert platforms == {"Acurast", "AWS", "GCP", "Azure"}
    assert all(isinstance(j.spec.mode, Selected) for j in s.jobs)


def test_count_and_repeat_expand():
    s = parse(BASE)
    assert [p.processor_id for p in s.processors] == ["phone-01", "phone-02", "phone-03"]
    assert [j.at_ms for j in s.jobs] == [100, 5100]
    assert [j.spec.schedule.start_ms for j in s.jobs] == [1000, 6000]
    assert s.jobs[0].spec.schedule.end_ms == 5000
    assert s.match_tick_ms == 250 and s.initial_balances == {"alice": 1000}


def test_seed_override():
    assert parse(BASE, seed=99).seed == 99


@pytest.mark.parametrize(
    "value, kind",
    [("public", Public), ("personal", Personal), ("{selected: [phone-01]}", Selected)],
)
def test_modes(value, kind):
    s = parse(BASE + f"    mode: {value}\n")
    assert isinstance(s.jobs[0].spec.mode, kind)


@pytest.mark.parametrize(
    "mutation, path, line",
    [
        (("    count: 3\n", "    count: 3\n    colour: red\n"), "processors[0].colour", 7),
        (("mean_ms: 2790", "mean_ms: -1"), "processors[0].exec.mean_ms", 7),
        (("reward: 10", "reward: ten"), "jobs[0].reward", 13),
        (("seed: 3\n", ""), "seed", None),
        (("duration_ms: 4000", "duration_ms: 0"), "jobs[0]", 9),
        (("gas_budget: 1", "gas_budget: 0"), "jobs[0]", 9),
        (("    mode: public\n", "    mode: sometimes\n"), "jobs[0].mode", 17),
    ],
)
def test_errors_name_path_and_line(mutation, path, line):
    text = (BASE + "    mode: public\n").replace(*mutation)
    with pytest.raises(ConfigError) as err:
        parse(text)
    assert err.value.path == path
    if line is not None:
        assert err.value.line == line
        assert f"scn.yaml:{line}: {path}:" in str(err.value)


def test_syntax_error_has_line():
    with pytest.raises(ConfigError) as err:
        parse("seed: 1\nprocessors: [\n")
    assert "YAML syntax error" in str(err.value)
    assert err.value.line is not None


def test_unknown_top_level_key():
    with pytest.raises(ConfigError, match="unknown key"):
        parse(BASE + "extras: 1\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read scenario"):
        load_scenario(tmp_path / "nope.yaml")
