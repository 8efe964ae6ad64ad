"""Command line entry point: ``depinsim {simulate,bench,discover,power,fixtures}``.

Exit codes: 0 success, 1 internal invariant violation, 2 usage or config error.
Data goes to files and stdout; logging goes to stderr. Report payloads never
contain timestamps, run metadata is written to a ``run.meta.json`` sidecar.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
import time
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import List, Optional

from . import __version__, bench, discovery, plotting, simulator
from .config import ConfigError, load_scenario
from .errors import DepinError, InvariantViolation

log = logging.getLogger("depinsim")

FIXTURES = (
    "replay.yaml",
    "platforms.yaml",
    "discovery_log.jsonl",
    "prefixes.csv",
    "vendors.csv",
    "deny_organizations.txt",
)


class UsageError(Exception):
    pass


def data_path(name: str) -> Path:
    """Filesystem path of a shipped fixture."""
    return Path(str(resources.files("depinsim") / "data" / name))


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    log.info("wrote %s", path)
    return path


def _sidecar(out: Path, command: str, argv: List[str], started: float, **extra) -> None:
    meta = {
        "command": command,
        "argv": argv,
        "version": __version__,
        "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_seconds": round(time.monotonic() - started, 3),
        **extra,
    }
    _write(out / "run.meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args, argv) -> int:
    started = time.monotonic()
    scenario = load_scenario(args.scenario, seed=args.seed)
    report = simulator.run(scenario)
    out = Path(args.out)
    _write(out / "report.json", report.to_json())
    _write(out / "samples.csv", report.samples_csv())
    if not args.no_figures and report.samples:
        plotting.duration_violins(report.samples, out / "durations.png", title="Simulated execution times")
    states = {}
    for s in report.job_states().values():
        states[s] = states.get(s, 0) + 1
    print(f"seed {report.seed}: {len(report.jobs)} jobs {states}, success rate {report.success_rate}")
    for platform, values in report.samples.items():
        st = bench.stats(bench.SampleSet(platform, values, 0))
        print(f"  {platform:<12} n={st.n:<5} mean={st.mean_ms:10.1f} ms  std={st.std_ms:8.1f} ms")
    _sidecar(out, "simulate", argv, started, seed=report.seed, scenario=str(args.scenario))
    return 0


def _stats_table(rows: List[bench.PlatformStats]) -> str:
    head = f"{'platform':<12} {'n':>6} {'mean':>10} {'std':>9} {'min':>10} {'p50':>10} {'p95':>10} {'max':>10}"
    lines = [head]
    for s in rows:
        lines.append(
            f"{s.platform:<12} {s.n:>6} {s.mean_ms:>10.2f} {s.std_ms:>9.2f} {s.min_ms:>10.2f} "
            f"{s.p50:>10.2f} {s.p95:>10.2f} {s.max_ms:>10.2f}"
        )
    return "\n".join(lines)


def cmd_bench(args, argv) -> int:
    if args.iterations < 1:
        raise UsageError("--iterations must be >= 1")
    if args.max < 0:
        raise UsageError("--max must be >= 0")
    if args.warmup < 0:
        raise UsageError("--warmup must be >= 0")
    started = time.monotonic()
    out = Path(args.out)
    log.info("running sieve(max=%d) x %d after %d warm-up run(s)", args.max, args.iterations, args.warmup)
    local = bench.run_benchmark(args.max, args.iterations, warmup=args.warmup, platform=args.platform)
    log.info("prime count %d", local.prime_count)
    sets = [local]
    for extra in args.compare or []:
        try:
            recorded = bench.read_samples_csv(Path(extra).read_text(encoding="utf-8"))
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"cannot read samples from {extra}: {exc}") from None
        sets.extend(bench.SampleSet(name, values, args.max) for name, values in recorded.items())
    _write(out / "samples.csv", bench.samples_csv(sets))
    rows = [bench.stats(s) for s in sets]
    payload = {
        "workload_param": args.max,
        "prime_count": local.prime_count,
        "stats": [r.to_dict() for r in rows],
    }
    if len(rows) >= 2:
        payload["ranking"] = bench.compare(rows).to_dict()
    _write(out / "stats.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if not args.no_figures:
        plotting.duration_violins({s.platform: s.samples for s in sets}, out / "durations.png")
    print(f"max={args.max} primes={local.prime_count}")
    print(_stats_table(rows))
    _sidecar(out, "bench", argv, started)
    return 0


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {what} {path}: {exc}") from None


def cmd_discover(args, argv) -> int:
    started = time.monotonic()
    log_text = _read_text(args.log, "log")
    try:
        table = discovery.PrefixTable.from_csv(_read_text(args.prefixes, "prefix table"))
        vendors = discovery.VendorMap.from_csv(_read_text(args.vendors, "vendor map"))
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    deny = list(args.deny or [])
    if args.deny_file:
        deny += [ln.strip() for ln in _read_text(args.deny_file, "deny list").splitlines() if ln.strip()]
    result = discovery.analyze(log_text.splitlines(), table, vendors, deny)
    out = Path(args.out)
    _write(out / "discovery.json", json.dumps(result, indent=2, sort_keys=True) + "\n")
    if not args.no_figures:
        plotting.country_bars(result["country_histogram"], out / "countries.png")
        dev = result["devices"]
        plotting.vendor_bars(dev["vendor_models"], dev["vendor_devices"], out / "devices.png")
        plotting.android_shares(dev["android_shares_pct"], out / "android.png")
    dev = result["devices"]
    print(
        f"{result['records']} records ({len(result['rejected_lines'])} rejected), "
        f"{result['distinct_ips']} addresses -> {result['nodes']} nodes in {result['countries']} countries"
    )
    print(f"countries: {result['country_histogram']}")
    print(
        f"{dev['distinct_devices']} devices, {dev['distinct_models']} models, "
        f"devices/node {dev['devices_per_node']}, android {dev['android_shares_pct']}"
    )
    _sidecar(out, "discover", argv, started)
    return 0


def cmd_power(args, argv) -> int:
    if args.watts is not None and args.tdp is not None:
        raise UsageError("give either --watts or --tdp/--cores, not both")
    if args.tdp is not None:
        if args.cores is None or args.cores < 1:
            raise UsageError("--tdp needs --cores >= 1")
        if not args.tdp > 0:
            raise UsageError("--tdp must be positive")
        watts = bench.per_core_watts(args.tdp, args.cores)
        print(f"per-core power: {watts:.6g} W")
    elif args.watts is not None:
        watts = args.watts
    else:
        raise UsageError("one of --watts or --tdp/--cores is required")
    if not watts > 0:
        raise UsageError("power must be positive")
    if not args.duration > 0:
        raise UsageError("--duration must be positive")
    energy = bench.energy_wh(watts, args.duration)
    print(f"energy per run: {energy:.6e} Wh")
    print(f"runs per Wh: {bench.executions_per_wh(energy)}")
    return 0


def cmd_fixtures(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in FIXTURES:
        shutil.copyfile(data_path(name), out / name)
        print(out / name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="depinsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario through the job-orchestration simulator")
    s.add_argument("scenario", help="YAML scenario file")
    s.add_argument("--seed", type=int, help="override the scenario seed")
    s.add_argument("--out", default="out/simulate", help="output directory")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="time the prime sieve locally")
    b.add_argument("--max", type=int, default=bench.DEFAULT_MAX, help="sieve upper bound")
    b.add_argument("--iterations", type=int, default=10)
    b.add_argument("--warmup", type=int, default=bench.DEFAULT_WARMUP)
    b.add_argument("--platform", default="Local", help="label for the local samples")
    b.add_argument("--compare", action="append", metavar="CSV",
                   help="recorded samples (platform,iteration,duration_ms) to rank against")
    b.add_argument("--out", default="out/bench")
    b.add_argument("--no-figures", action="store_true")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("discover", help="node and device analytics over an access log")
    d.add_argument("log", help="JSON Lines access log")
    d.add_argument("prefixes", help="CSV prefix,country,organization")
    d.add_argument("vendors", help="CSV model_prefix,vendor")
    d.add_argument("--deny", action="append", metavar="ORG", help="organization to eliminate")
    d.add_argument("--deny-file", help="file with one organization per line")
    d.add_argument("--out", default="out/discover")
    d.add_argument("--no-figures", action="store_true")
    d.set_defaults(func=cmd_discover)

    w = sub.add_parser("power", help="energy per run and runs per watt-hour")
    w.add_argument("--watts", type=float, help="power draw of the executing core")
    w.add_argument("--tdp", type=float, help="package power, split evenly over --cores")
    w.add_argument("--cores", type=int)
    w.add_argument("--duration", type=float, required=True, help="run duration in ms")
    w.set_defaults(func=cmd_power)

    f = sub.add_parser("fixtures", help="copy the shipped replay fixtures into a directory")
    f.add_argument("out")
    f.set_defaults(func=cmd_fixtures)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args, argv)
    except (UsageError, ConfigError) as exc:
        print(f"depinsim: error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"depinsim: internal invariant violated: {exc}", file=sys.stderr)
        return 1
    except DepinError as exc:
        print(f"depinsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
