"""YAML scenario files.

Schema (all times in ms, all token amounts integers)::

    seed: 7                     # required
    match_tick_ms: 500          # default 1000
    horizon_ms: 600000          # optional; last instant a matching tick may run
    balances: {alice: 10000}    # initial token balances
    processors:
      - id: phone               # with count: N, ids become phone-01 .. phone-NN
        owner: op               # default: the id
        count: 1
        platform: Acurast       # label for duration samples; default device_model
        device_model: Pixel 7
        android_version: 13
        country: CHE
        exec: {model: normal, mean_ms: 2790, std_ms: 134}   # or {model: constant, mean_ms: ...}
        power_watts: 0.3
        price_floor: 1
        capacity: 1
        reliability: 1.0
        refusal_probability: 0.0
    jobs:
      - at_ms: 0                # registration time
        repeat: 1               # with every_ms, registers copies shifted in time
        every_ms: 0
        dispatch_latency_ms: 0  # delay between match and slot confirmation
        consumer: alice
        workload: {name: sieve, param: 50000000}
        schedule: {start_ms: 1000, end_ms: 11000, interval_ms: 1000,
                   duration_ms: 500, max_start_delay_ms: 100}
                                # omit end_ms/interval_ms for a single-shot job
        resources: {memory_bytes: 0, network_requests: 1, storage_bytes: 0}
        reward: 10
        gas_budget: 1
        min_reputation: 0.0
        mode: public            # public | personal | {selected: [id, ...]}
        destination: {sink: rest-api, gas_fee: 1}

Errors carry the dotted field path and the source line.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import yaml

from .model import (
    DestinationRef,
    ExecutionTimeModel,
    JobSpec,
    Personal,
    ProcessorProfile,
    Public,
    ResourceRequirements,
    Schedule,
    Selected,
    WorkloadRef,
    validate_spec,
)
from .simulator import JobEntry, Scenario


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = "", line: Optional[int] = None, source: str = ""):
        self.path, self.line, self.source = path, line, source
        where = source or "<config>"
        if line is not None:
            where += f":{line}"
        if path:
            where += f": {path}"
        super().__init__(f"{where}: {message}")


def _line_index(node, path=(), out=None) -> Dict[Tuple, int]:
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out[path + (k.value,)] = k.start_mark.line + 1
            _line_index(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_index(v, path + (i,), out)
    return out


class _Reader:
    def __init__(self, lines: Dict[Tuple, int], source: str):
        self.lines, self.source = lines, source

    def fail(self, path: Tuple, message: str):
        probe = path
        while probe and probe not in self.lines:
            probe = probe[:-1]
        dotted = ".".join(f"[{p}]" if isinstance(p, int) else str(p) for p in path).replace(".[", "[")
        raise ConfigError(message, dotted, self.lines.get(probe), self.source)

    def mapping(self, value, path, allowed):
        if value is None:
            value = {}
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping")
        for key in value:
            if key not in allowed:
                self.fail(path + (key,), f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return value

    def get(self, obj, key, path, kind, default=..., minimum=None, maximum=None):
        if key not in obj or obj[key] is None:
            if default is ...:
                self.fail(path + (key,), "required field missing")
            return default
        value = obj[key]
        p = path + (key,)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                self.fail(p, f"expected an integer, got {value!r}")
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.fail(p, f"expected a number, got {value!r}")
            value = float(value)
        elif kind is str:
            if not isinstance(value, (str, int)) or isinstance(value, bool):
                self.fail(p, f"expected text, got {value!r}")
            value = str(value)
        if minimum is not None and value < minimum:
            self.fail(p, f"must be >= {minimum}")
        if maximum is not None and value > maximum:
            self.fail(p, f"must be <= {maximum}")
        return value


_PROC_KEYS = {
    "id", "owner", "count", "platform", "device_model", "android_version", "country", "exec",
    "power_watts", "price_floor", "capacity", "reliability", "refusal_probability",
}
_JOB_KEYS = {
    "at_ms", "repeat", "every_ms", "dispatch_latency_ms", "consumer", "workload", "schedule",
    "resources", "reward", "gas_budget", "min_reputation", "mode", "destination",
}


def _processors(r: _Reader, items, path) -> List[ProcessorProfile]:
    if not isinstance(items, list):
        r.fail(path, "expected a list")
    out = []
    for i, raw in enumerate(items):
        p = path + (i,)
        obj = r.mapping(raw, p, _PROC_KEYS)
        ex = r.mapping(obj.get("exec"), p + ("exec",), {"model", "mean_ms", "std_ms"})
        kind = r.get(ex, "model", p + ("exec",), str, "constant")
        if kind not in ("constant", "normal"):
            r.fail(p + ("exec", "model"), "must be 'constant' or 'normal'")
        mean = r.get(ex, "mean_ms", p + ("exec",), float)
        if not mean > 0:
            r.fail(p + ("exec", "mean_ms"), "must be > 0")
        std = r.get(ex, "std_ms", p + ("exec",), float, 0.0, minimum=0.0)
        model = ExecutionTimeModel(kind, mean, std)
        base = r.get(obj, "id", p, str)
        count = r.get(obj, "count", p, int, None, minimum=1)
        ids = [base] if count is None else [f"{base}-{k:02d}" for k in range(1, count + 1)]
        power = r.get(obj, "power_watts", p, float, 0.3)
        if not power > 0:
            r.fail(p + ("power_watts",), "must be > 0")
        for pid in ids:
            out.append(
                ProcessorProfile(
                    processor_id=pid,
                    owner_id=r.get(obj, "owner", p, str, pid),
                    exec_model=model,
                    device_model=r.get(obj, "device_model", p, str, "unknown"),
                    android_version=r.get(obj, "android_version", p, int, 0, minimum=0),
                    country=r.get(obj, "country", p, str, "ZZZ"),
                    power_watts=power,
                    price_floor=r.get(obj, "price_floor", p, int, 0, minimum=0),
                    capacity=r.get(obj, "capacity", p, int, 1, minimum=1),
                    reliability=r.get(obj, "reliability", p, float, 1.0, minimum=0.0, maximum=1.0),
                    refusal_probability=r.get(obj, "refusal_probability", p, float, 0.0, minimum=0.0, maximum=1.0),
                    platform=r.get(obj, "platform", p, str, None),
                )
            )
    return out


def _mode(r: _Reader, value, path):
    if value is None or value == "public":
        return Public()
    if value == "personal":
        return Personal()
    if isinstance(value, dict) and set(value) == {"selected"}:
        ids = value["selected"]
        if not isinstance(ids, list) or not ids:
            r.fail(path + ("selected",), "expected a non-empty list of processor ids")
        return Selected(str(x) for x in ids)
    r.fail(path, "expected 'public', 'personal' or {selected: [...]}")


def _schedule(r: _Reader, raw, path) -> Schedule:
    obj = r.mapping(raw, path, {"start_ms", "end_ms", "interval_ms", "duration_ms", "max_start_delay_ms"})
    start = r.get(obj, "start_ms", path, int, minimum=0)
    duration = r.get(obj, "duration_ms", path, int)
    delay = r.get(obj, "max_start_delay_ms", path, int, 0)
    end = r.get(obj, "end_ms", path, int, None)
    if end is None:
        return Schedule.single_shot(start, duration, delay)
    return Schedule(start, end, r.get(obj, "interval_ms", path, int, 1), duration, delay)


def _jobs(r: _Reader, items, path) -> List[JobEntry]:
    if not isinstance(items, list):
        r.fail(path, "expected a list")
    out = []
    for i, raw in enumerate(items):
        p = path + (i,)
        obj = r.mapping(raw, p, _JOB_KEYS)
        wl = r.mapping(obj.get("workload"), p + ("workload",), {"name", "param"})
        res = r.mapping(obj.get("resources"), p + ("resources",), {"memory_bytes", "network_requests", "storage_bytes"})
        dst = r.mapping(obj.get("destination"), p + ("destination",), {"sink", "gas_fee"})
        spec = JobSpec(
            consumer_id=r.get(obj, "consumer", p, str),
            workload=WorkloadRef(
                r.get(wl, "name", p + ("workload",), str, "sieve"),
                r.get(wl, "param", p + ("workload",), int, 0),
            ),
            schedule=_schedule(r, obj.get("schedule"), p + ("schedule",)),
            destination=DestinationRef(
                r.get(dst, "sink", p + ("destination",), str, "sink"),
                r.get(dst, "gas_fee", p + ("destination",), int, 0, minimum=0),
            ),
            mode=_mode(r, obj.get("mode"), p + ("mode",)),
            resources=ResourceRequirements(
                *(r.get(res, k, p + ("resources",), int, 0, minimum=0)
                  for k in ("memory_bytes", "network_requests", "storage_bytes"))
            ),
            reward=r.get(obj, "reward", p, int, 0, minimum=0),
            gas_budget=r.get(obj, "gas_budget", p, int, 0, minimum=0),
            min_reputation=r.get(obj, "min_reputation", p, float, 0.0, minimum=0.0, maximum=1.0),
        )
        at = r.get(obj, "at_ms", p, int, 0, minimum=0)
        repeat = r.get(obj, "repeat", p, int, 1, minimum=1)
        every = r.get(obj, "every_ms", p, int, 0, minimum=0)
        latency = r.get(obj, "dispatch_latency_ms", p, int, 0, minimum=0)
        problems = validate_spec(spec)
        if problems:
            r.fail(p, "; ".join(problems))
        for k in range(repeat):
            shifted = spec if k == 0 else _shift(spec, k * every)
            out.append(JobEntry(at + k * every, shifted, latency))
    return out


def _shift(spec: JobSpec, offset: int) -> JobSpec:
    return replace(spec, schedule=spec.schedule.shifted(offset))


def parse_scenario(text: str, source: str = "", seed: Optional[int] = None) -> Scenario:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", line=line, source=source) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}", source=source) from None
    r = _Reader(_line_index(root) if root is not None else {}, source)
    top = r.mapping(data, (), {"seed", "match_tick_ms", "horizon_ms", "balances", "processors", "jobs"})
    balances_raw = r.mapping(top.get("balances"), ("balances",), set(top.get("balances") or {}))
    balances = {str(k): r.get(balances_raw, k, ("balances",), int, minimum=0) for k in balances_raw}
    return Scenario(
        seed=seed if seed is not None else r.get(top, "seed", (), int, minimum=0),
        processors=tuple(_processors(r, top.get("processors") or [], ("processors",))),
        jobs=tuple(_jobs(r, top.get("jobs") or [], ("jobs",))),
        match_tick_ms=r.get(top, "match_tick_ms", (), int, 1000, minimum=1),
        initial_balances=balances,
        horizon_ms=r.get(top, "horizon_ms", (), int, None, minimum=0),
    )


def load_scenario(path, seed: Optional[int] = None) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc.strerror or exc}", source=str(path)) from None
    return parse_scenario(text, str(path), seed)
