"""Offline node-discovery analytics over endpoint access logs.

Input is a JSON Lines access log written by the probe endpoint. Source
addresses are collapsed onto the announced prefix they fall in (longest
prefix match over a static table), which gives one node per uplink. Prefixes
owned by a deny-listed organization (VPN or cloud ranges) are dropped.
User agents are parsed for the Android runtime, OS version, and device model.
"""

from __future__ import annotations

import csv
import io
import ipaddress
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

IPAddress = Union[ipaddress.IPv4Address, ipaddress.IPv6Address]
IPNetwork = Union[ipaddress.IPv4Network, ipaddress.IPv6Network]


@dataclass(frozen=True)
class LogRecord:
    timestamp: str
    source_ip: IPAddress
    user_agent: str
    status: int

    @property
    def ok(self) -> bool:
        return 200 <= self.status < 300


@dataclass(frozen=True)
class Reject:
    line_no: int
    reason: str
    raw: str


def _parse_timestamp(text: str) -> None:
    # fromisoformat on 3.10 does not take a trailing "Z"
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    datetime.fromisoformat(text)


def parse_log(lines: Iterable[str]) -> Tuple[List[LogRecord], List[Reject]]:
    """Parse JSONL access-log lines. Bad lines are returned as rejects, never raised."""
    records, rejects = [], []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            missing = [k for k in ("timestamp", "ip", "user_agent", "status") if k not in obj]
            if missing:
                raise ValueError(f"missing key(s): {', '.join(missing)}")
            ts = obj["timestamp"]
            if not isinstance(ts, str):
                raise ValueError("timestamp must be a string")
            _parse_timestamp(ts)
            ip = ipaddress.ip_address(obj["ip"])
            status = obj["status"]
            if isinstance(status, bool) or not isinstance(status, int) or not 100 <= status <= 599:
                raise ValueError(f"invalid HTTP status {status!r}")
            ua = obj["user_agent"]
            if not isinstance(ua, str):
                raise ValueError("user_agent must be a string")
        except (ValueError, TypeError) as exc:
            rejects.append(Reject(line_no, str(exc), line))
            continue
        records.append(LogRecord(ts, ip, ua, status))
    return records, rejects


@dataclass(frozen=True)
class PrefixEntry:
    network: IPNetwork
    country: str
    organization: str


class PrefixTable:
    """Static announced-prefix table with longest-prefix-match lookup.

    Entries are bucketed by (IP version, prefix length); a lookup masks the
    address at each length present, longest first, and stops at the first hit.
    """

    def __init__(self, entries: Iterable[PrefixEntry] = ()):
        self.entries: List[PrefixEntry] = []
        self._buckets: Dict[Tuple[int, int], Dict[int, PrefixEntry]] = {}
        self._lengths: Dict[int, List[int]] = {4: [], 6: []}
        for e in entries:
            self.add(e)

    def __len__(self):
        return len(self.entries)

    def add(self, entry: PrefixEntry) -> None:
        net = entry.network
        key = (net.version, net.prefixlen)
        bucket = self._buckets.setdefault(key, {})
        bucket[int(net.network_address)] = entry
        if net.prefixlen not in self._lengths[net.version]:
            self._lengths[net.version].append(net.prefixlen)
            self._lengths[net.version].sort(reverse=True)
        self.entries.append(entry)

    def lookup(self, ip: IPAddress) -> Optional[PrefixEntry]:
        value = int(ip)
        bits = ip.max_prefixlen
        for length in self._lengths[ip.version]:
            mask = ((1 << length) - 1) << (bits - length) if length else 0
            hit = self._buckets[(ip.version, length)].get(value & mask)
            if hit is not None:
                return hit
        return None

    @classmethod
    def from_csv(cls, text: str) -> "PrefixTable":
        table = cls()
        for n, row in enumerate(csv.DictReader(io.StringIO(text)), start=2):
            try:
                net = ipaddress.ip_network(row["prefix"].strip(), strict=True)
            except (KeyError, ValueError, AttributeError) as exc:
                raise ValueError(f"prefix table line {n}: {exc}") from None
            table.add(PrefixEntry(net, row["country"].strip(), (row.get("organization") or "").strip()))
        return table


@dataclass
class NodeSet:
    nodes: Set[Tuple[str, str]]
    ip_to_prefix: Dict[str, str]
    unresolved: List[str]
    eliminated: List[str]

    @property
    def distinct_ips(self) -> int:
        """Resolved, non-eliminated source addresses."""
        return len(self.ip_to_prefix)


def nodes_by_prefix(
    records: Iterable[LogRecord],
    table: PrefixTable,
    deny_organizations: Iterable[str] = (),
) -> NodeSet:
    if len(table) == 0:
        raise ValueError("prefix table is empty")
    deny = {o.casefold() for o in deny_organizations}
    ips = sorted({r.source_ip for r in records}, key=lambda a: (a.version, int(a)))
    nodes, mapping, unresolved, eliminated = set(), {}, [], []
    for ip in ips:
        entry = table.lookup(ip)
        if entry is None:
            unresolved.append(str(ip))
        elif entry.organization.casefold() in deny:
            eliminated.append(str(ip))
        else:
            prefix = str(entry.network)
            mapping[str(ip)] = prefix
            nodes.add((prefix, entry.country))
    return NodeSet(nodes, mapping, unresolved, eliminated)


def country_histogram(nodes: Iterable[Tuple[str, str]]) -> Dict[str, int]:
    counts = Counter(country for _, country in nodes)
    return dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))


@dataclass(frozen=True)
class DeviceInfo:
    runtime: str
    runtime_version: str
    android_version: int
    device_model: str
    build_id: str


class ParseFailure(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


_VERSION = re.compile(r"[0-9][0-9.]*")
_ANDROID = re.compile(r"([0-9]+)(?:\.[0-9]+)*")
_MODEL = re.compile(r"[^;()]+?(?= Build/)")
_BUILD = re.compile(r"[^)\s]+")


def parse_user_agent(ua: str) -> DeviceInfo:
    """Parse ``Dalvik/<ver> (Linux; U; Android <N>; <model> Build/<id>)``.

    Raises :class:`ParseFailure` carrying the offset of the first character
    that does not fit the grammar.
    """
    pos = 0

    def literal(text: str) -> None:
        nonlocal pos
        if not ua.startswith(text, pos):
            bad = pos
            while bad < len(ua) and bad - pos < len(text) and ua[bad] == text[bad - pos]:
                bad += 1
            raise ParseFailure(f"expected {text!r}", bad)
        pos += len(text)

    def token(pattern: re.Pattern, what: str) -> re.Match:
        nonlocal pos
        m = pattern.match(ua, pos)
        if m is None or not m.group(0):
            raise ParseFailure(f"expected {what}", pos)
        pos = m.end()
        return m

    literal("Dalvik/")
    rver = token(_VERSION, "runtime version").group(0)
    literal(" (Linux; U; Android ")
    android_at = pos
    android = int(token(_ANDROID, "Android version").group(1))
    literal("; ")
    model = token(_MODEL, "device model").group(0).strip()
    literal(" Build/")
    build = token(_BUILD, "build id").group(0)
    literal(")")
    if pos != len(ua):
        raise ParseFailure("trailing characters", pos)
    if android < 1:
        raise ParseFailure("Android version must be >= 1", android_at)
    if not model:
        raise ParseFailure("empty device model", android_at)
    return DeviceInfo("Dalvik", rver, android, model, build)


def format_user_agent(info: DeviceInfo) -> str:
    return (
        f"{info.runtime}/{info.runtime_version} (Linux; U; Android {info.android_version}; "
        f"{info.device_model} Build/{info.build_id})"
    )


class VendorMap:
    """Maps a device model to its vendor by longest matching model prefix."""

    def __init__(self, pairs: Iterable[Tuple[str, str]] = ()):
        self._pairs = sorted(pairs, key=lambda p: (-len(p[0]), p[0]))

    def vendor(self, model: str) -> str:
        for prefix, vendor in self._pairs:
            if model.startswith(prefix):
                return vendor
        return "unknown"

    @property
    def vendors(self) -> List[str]:
        return sorted({v for _, v in self._pairs})

    @classmethod
    def from_csv(cls, text: str) -> "VendorMap":
        pairs = []
        for n, row in enumerate(csv.DictReader(io.StringIO(text)), start=2):
            prefix, vendor = (row.get("model_prefix") or "").strip(), (row.get("vendor") or "").strip()
            if not prefix or not vendor:
                raise ValueError(f"vendor map line {n}: need model_prefix and vendor")
            pairs.append((prefix, vendor))
        return cls(pairs)


def percent_shares(counts: Mapping, total: int) -> Dict:
    """Integer percentages, rounded to nearest with ties away from zero."""
    if total <= 0:
        return {k: 0 for k in counts}
    return {
        k: int((Decimal(100 * v) / Decimal(total)).quantize(Decimal(1), rounding=ROUND_HALF_UP))
        for k, v in counts.items()
    }


@dataclass
class DeviceReport:
    distinct_devices: int
    distinct_models: int
    devices_per_node: Optional[float]
    vendor_devices: Dict[str, int]
    vendor_models: Dict[str, int]
    android_counts: Dict[int, int]
    android_shares: Dict[int, int]
    runtimes: Dict[str, int]
    unparsed_user_agents: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "distinct_devices": self.distinct_devices,
            "distinct_models": self.distinct_models,
            "devices_per_node": self.devices_per_node,
            "vendor_devices": self.vendor_devices,
            "vendor_models": self.vendor_models,
            "android_counts": {str(k): v for k, v in self.android_counts.items()},
            "android_shares_pct": {str(k): v for k, v in self.android_shares.items()},
            "runtimes": self.runtimes,
            "unparsed_user_agents": self.unparsed_user_agents,
        }


def device_report(
    records: Iterable[LogRecord],
    node_count: int,
    vendor_map: VendorMap,
) -> DeviceReport:
    """Summarize devices seen in the log.

    A device is one distinct user-agent string; a model is the parsed model
    token, so several devices may share a model. ``devices_per_node`` divides
    by ``node_count`` as given.
    """
    devices: Dict[str, DeviceInfo] = {}
    unparsed: Set[str] = set()
    for r in records:
        if r.user_agent in devices or r.user_agent in unparsed:
            continue
        try:
            devices[r.user_agent] = parse_user_agent(r.user_agent)
        except ParseFailure:
            unparsed.add(r.user_agent)

    models = {d.device_model for d in devices.values()}
    vendor_devices = Counter(vendor_map.vendor(d.device_model) for d in devices.values())
    vendor_models = Counter(vendor_map.vendor(m) for m in models)
    android = Counter(d.android_version for d in devices.values())
    android = dict(sorted(android.items()))
    return DeviceReport(
        distinct_devices=len(devices),
        distinct_models=len(models),
        devices_per_node=(len(devices) / node_count) if node_count else None,
        vendor_devices=dict(sorted(vendor_devices.items(), key=lambda kv: (-kv[1], kv[0]))),
        vendor_models=dict(sorted(vendor_models.items(), key=lambda kv: (-kv[1], kv[0]))),
        android_counts=android,
        android_shares=percent_shares(android, len(devices)),
        runtimes=dict(Counter(d.runtime for d in devices.values())),
        unparsed_user_agents=sorted(unparsed),
    )


def analyze(
    lines: Iterable[str],
    table: PrefixTable,
    vendor_map: VendorMap,
    deny_organizations: Sequence[str] = (),
) -> dict:
    """Full offline pass: parse, aggregate nodes, geolocate, summarize devices."""
    records, rejects = parse_log(lines)
    nodes = nodes_by_prefix(records, table, deny_organizations) if len(table) else NodeSet(set(), {}, [], [])
    devices = device_report(records, nodes.distinct_ips, vendor_map)
    ok = sum(r.ok for r in records)
    return {
        "records": len(records),
        "success_rate": (ok / len(records)) if records else None,
        "distinct_ips": nodes.distinct_ips,
        "nodes": len(nodes.nodes),
        "countries": len({c for _, c in nodes.nodes}),
        "country_histogram": country_histogram(nodes.nodes),
        "devices": devices.to_dict(),
        "devices_per_prefix_node": (devices.distinct_devices / len(nodes.nodes)) if nodes.nodes else None,
        "unresolved_ips": nodes.unresolved,
        "eliminated_ips": nodes.eliminated,
        "rejected_lines": [{"line": r.line_no, "reason": r.reason} for r in rejects],
    }
