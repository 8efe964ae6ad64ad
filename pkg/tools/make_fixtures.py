#!/usr/bin/env python3
"""Regenerate the shipped replay fixtures under src/depinsim/data/.

The access log reproduces the published discovery snapshot: 121 requests from
62 devices behind 30 source addresses, which collapse onto 28 announced
prefixes in 13 countries. Device models and vendors follow the published
device chart (44 models across 9 vendors). Addresses come from the
documentation/benchmarking ranges (198.18.0.0/15, 2001:db8::/32).

Run from the repository root:  python tools/make_fixtures.py
"""

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "depinsim" / "data"

COUNTRIES = [
    ("CHE", 5), ("GBR", 5), ("THA", 3), ("USA", 3), ("FRA", 2), ("NLD", 2), ("KOR", 2),
    ("CZE", 1), ("DEU", 1), ("IND", 1), ("ITA", 1), ("MLT", 1), ("POL", 1),
]

# vendor -> (models, device count)
VENDORS = {
    "Pixel": (["Pixel 4a", "Pixel 5", "Pixel 5a", "Pixel 6", "Pixel 6 Pro", "Pixel 6a",
               "Pixel 7", "Pixel 7 Pro", "Pixel 7a", "Pixel 8"], 27),
    "Samsung": (["SM-S918B", "SM-S911B", "SM-A536B", "SM-A546B", "SM-G991B", "SM-G996B",
                 "SM-G998B", "SM-A525F", "SM-A325F", "SM-A135F", "SM-M336B", "SM-F936B",
                 "SM-F721B", "SM-S901B", "SM-S906B", "SM-A146P", "SM-A235F", "SM-G781B",
                 "SM-N986B", "SM-T505"], 21),
    "Moto": (["moto g52", "moto g62 5G", "moto g72", "moto e22", "moto edge 30"], 5),
    "TCL": (["TCL 30 5G", "TCL 40 SE"], 2),
    "Xiaomi": (["Xiaomi 13T"], 1),
    "Redmi": (["Redmi Note 12", "Redmi Note 11", "Redmi 10C"], 3),
    "Oneplus": (["ONEPLUS A6013"], 1),
    "Lenovo": (["Lenovo TB-X606F"], 1),
    "Oppo": (["CPH2211"], 1),
}
VENDOR_PREFIXES = [
    ("Pixel", "Pixel"), ("SM-", "Samsung"), ("moto", "Moto"), ("TCL", "TCL"),
    ("Xiaomi", "Xiaomi"), ("Redmi", "Redmi"), ("ONEPLUS", "Oneplus"), ("Lenovo", "Lenovo"),
    ("CPH", "Oppo"),
]
ANDROID = [11] * 10 + [12] * 13 + [13] * 27 + [14] * 12
DENY = ["ExampleVPN", "ExampleCloud"]


def prefixes():
    """28 node prefixes plus covering and deny-listed decoys."""
    rows, nodes = [], []
    i = 0
    for country, n in COUNTRIES:
        for _ in range(n):
            if i % 3 == 2:
                net = f"2001:db8:{0x100 + i:x}::/48"
            else:
                net = f"198.18.{10 + i}.0/24"
            rows.append((net, country, f"Access ISP {country} {i:02d}"))
            nodes.append(net)
            i += 1
    # shorter covering prefixes: a wrong longest-prefix match lands here
    rows.append(("198.18.0.0/16", "USA", "Transit Backbone"))
    rows.append(("198.18.0.0/15", "DEU", "Benchmark Aggregate"))
    rows.append(("2001:db8::/32", "NLD", "Documentation Transit"))
    rows.append(("198.19.200.0/24", "SWE", "ExampleVPN"))
    rows.append(("198.19.100.0/22", "IRL", "ExampleCloud"))
    return rows, nodes


def host(net, k):
    if ":" in net:
        return net.split("::")[0] + f"::{0xa + k:x}"
    base = net.split(".0/")[0]
    return f"{base}.{17 + 40 * k}"


def main():
    rng = random.Random(20240314)
    rows, nodes = prefixes()
    # 30 source addresses: two uplinks carry a second address
    ips = [host(n, 0) for n in nodes]
    ips.append(host(nodes[0], 1))    # CHE, IPv4
    ips.append(host(nodes[11], 1))   # GBR, IPv6

    devices = []
    for vendor, (models, count) in VENDORS.items():
        for j in range(count):
            devices.append(models[j % len(models)])
    android = ANDROID[:]
    rng.shuffle(android)
    rng.shuffle(devices)
    uas = []
    for j, (model, ver) in enumerate(zip(devices, android)):
        build = f"{'RSTU'[ver - 11]}Q{j % 4 + 1}A.2401{j % 28 + 1:02d}.{j:03d}"
        uas.append(f"Dalvik/2.1.0 (Linux; U; Android {ver}; {model} Build/{build})")
    device_ip = {j: ips[j % len(ips)] for j in range(len(uas))}

    order = list(range(len(uas))) + [(7 * j + 3) % len(uas) for j in range(121 - len(uas))]
    t0 = datetime(2024, 3, 14, 9, 0, tzinfo=timezone.utc)
    lines = []
    for n, j in enumerate(order):
        ts = (t0 + timedelta(milliseconds=1550 * n)).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"
        lines.append(json.dumps(
            {"timestamp": ts, "ip": device_ip[j], "user_agent": uas[j], "status": 200},
            sort_keys=True,
        ))

    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "discovery_log.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (OUT / "prefixes.csv").write_text(
        "prefix,country,organization\n" + "".join(f"{a},{b},{c}\n" for a, b, c in rows), encoding="utf-8"
    )
    (OUT / "vendors.csv").write_text(
        "model_prefix,vendor\n" + "".join(f"{a},{b}\n" for a, b in VENDOR_PREFIXES), encoding="utf-8"
    )
    (OUT / "deny_organizations.txt").write_text("\n".join(DENY) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} log lines, {len(rows)} prefixes to {OUT}")


if __name__ == "__main__":
    main()
