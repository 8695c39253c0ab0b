"""Operator command line: enroll, scan, simulate, serve, bench.

Exit codes are a scriptable contract: 0 clean, 1 operational error,
2 at least one evil twin in the scan.  Flags override config-file values,
which override built-in defaults.
"""

import argparse
import json
import logging
import signal
import sys
import threading
import time
from pathlib import Path

from . import simulator
from .detector import (
    VerdictKind,
    aggregate_observations,
    classify,
    classify_capture,
    enroll_capture,
    verdict_rows,
)
from .frames import dedup_stream
from .pcap import CaptureError, merge_reads, read_capture
from .server import ScanServer, ServerConfig, ServerError
from .store import FingerprintStore, StoreFormatError

log = logging.getLogger("twinsentry.cli")

EXIT_CLEAN = 0
EXIT_ERROR = 1
EXIT_TWIN_FOUND = 2

TABLE_COLUMNS = (
    ("verdict", 12),
    ("ssid", 18),
    ("bssid", 18),
    ("ssi_dbm", 8),
    ("reason", 30),
    ("matched_label", 16),
)


class CliError(Exception):
    """Operational failure; message goes to stderr, exit code 1."""


def load_cli_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc


def _setting(args, config: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _load_store(path: str | None) -> FingerprintStore:
    if path and Path(path).exists():
        try:
            return FingerprintStore.load(path)
        except StoreFormatError as exc:
            raise CliError(f"store {path}: {exc}") from exc
    return FingerprintStore()


def _read_captures(paths):
    reads = []
    for path in paths:
        try:
            reads.append(read_capture(path))
        except (OSError, CaptureError) as exc:
            raise CliError(f"capture {path}: {exc}") from exc
    return reads


def _print_table(rows, out):
    header = "".join(name.upper().ljust(width) for name, width in TABLE_COLUMNS)
    print(header.rstrip(), file=out)
    for row in rows:
        line = ""
        for name, width in TABLE_COLUMNS:
            value = row.get(name)
            text = "-" if value is None else str(value)
            line += text.ljust(width)
        print(line.rstrip(), file=out)


def cmd_enroll(args, config) -> int:
    store_path = _setting(args, config, "store", "fingerprints.tsv")
    store = _load_store(store_path)
    reads = _read_captures([args.capture])
    label = args.label or Path(args.capture).stem
    records = enroll_capture(store, reads[0], label)
    store.persist(store_path)
    for record in records:
        print(
            f"enrolled {record.label}: "
            f"{':'.join(f'{b:02x}' for b in record.bssid)} "
            f"max {record.max_ssi_dbm} dBm"
        )
    print(f"store {store_path}: {len(store)} record(s)")
    return EXIT_CLEAN


def run_scan(store: FingerprintStore, paths, ssi_margin_db: int = 0):
    """Shared scan pipeline: read, merge, classify. Returns (rows, diags)."""
    diagnostics = []
    reads = _read_captures(paths)
    for path, read in zip(paths, reads):
        diagnostics.extend(f"{path}: {skip}" for skip in read.skipped)
    frames, timestamps = merge_reads(reads)
    results = classify_capture(
        frames,
        store.snapshot(),
        ssi_margin_db=ssi_margin_db,
        timestamps_us=timestamps,
        diagnostics=diagnostics,
    )
    return verdict_rows(results), diagnostics


def cmd_scan(args, config) -> int:
    store_path = _setting(args, config, "store", "fingerprints.tsv")
    margin = int(_setting(args, config, "ssi_margin_db", 0))
    fmt = _setting(args, config, "format", "table")
    store = _load_store(store_path)
    rows, diagnostics = run_scan(store, args.captures, margin)
    if fmt == "json":
        print(json.dumps({"status": "ok", "aps": rows, "diagnostics": diagnostics}))
    else:
        _print_table(rows, sys.stdout)
        for diag in diagnostics:
            print(f"warning: {diag}", file=sys.stderr)
    twins = sum(row["verdict"] == VerdictKind.EVIL_TWIN.value for row in rows)
    return EXIT_TWIN_FOUND if twins else EXIT_CLEAN


def cmd_simulate(args, config) -> int:
    names = simulator.scenarios_by_name()
    if args.scenario in names:
        scenario = names[args.scenario]
    elif Path(args.scenario).exists():
        try:
            scenario = simulator.load_scenario(args.scenario)
        except (simulator.InvalidScenario, json.JSONDecodeError, ValueError) as exc:
            raise CliError(f"scenario config {args.scenario}: {exc}") from exc
    else:
        raise CliError(
            f"unknown scenario {args.scenario!r}; built-ins: "
            + ", ".join(sorted(names))
        )
    seed = args.seed if args.seed is not None else 0
    result = simulator.generate(scenario, seed)
    out = Path(args.out)
    out.write_bytes(result.capture)
    labels_path = Path(args.labels) if args.labels else out.with_suffix(out.suffix + ".labels")
    labels_path.write_text(
        simulator.labels_to_text(result.labels, f"scenario: {scenario.name} seed={seed}"),
        encoding="utf-8",
    )
    if args.enrollment_out:
        Path(args.enrollment_out).write_bytes(
            simulator.generate_enrollment(scenario, seed)
        )
    print(f"wrote {result.frame_count} frames to {out}, labels to {labels_path}")
    return EXIT_CLEAN


def cmd_serve(args, config) -> int:
    server_config = ServerConfig(
        host=_setting(args, config, "host", "127.0.0.1"),
        port=int(_setting(args, config, "port", 8640)),
        store_path=_setting(args, config, "store", "fingerprints.tsv"),
        queue_capacity=int(_setting(args, config, "queue_capacity", 64)),
        workers=int(_setting(args, config, "workers", 4)),
        admin_token=_setting(args, config, "admin_token", None),
        ssi_margin_db=int(_setting(args, config, "ssi_margin_db", 0)),
        ui_dir=_setting(args, config, "ui_dir", _default_ui_dir()),
        deauth_pcap_dir=_setting(args, config, "deauth_pcap_dir", None),
    )
    try:
        server = ScanServer(server_config).start()
    except (ServerError, StoreFormatError) as exc:
        raise CliError(str(exc)) from exc
    print(f"listening on {server.address} (admin token {server.admin_token})")
    stop = threading.Event()

    def _graceful(signum, _frame):
        log.info("signal %d, draining", signum)
        stop.set()

    signal.signal(signal.SIGINT, _graceful)
    signal.signal(signal.SIGTERM, _graceful)
    while not stop.wait(0.2):
        pass
    server.stop()
    print("drained and stopped")
    return EXIT_CLEAN


def cmd_bench(args, config) -> int:
    store_path = _setting(args, config, "store", "fingerprints.tsv")
    margin = int(_setting(args, config, "ssi_margin_db", 0))
    store = _load_store(store_path)
    snapshot = store.snapshot()

    t0 = time.perf_counter()
    reads = _read_captures(args.captures)
    frames, timestamps = merge_reads(reads)
    t1 = time.perf_counter()
    survivors = list(dedup_stream(frames))
    t2 = time.perf_counter()
    observations = aggregate_observations(frames, timestamps)
    t3 = time.perf_counter()
    results = [(obs, classify(obs, snapshot, margin)) for obs in observations]
    t4 = time.perf_counter()

    stages = {
        "read_ms": (t1 - t0) * 1000,
        "dedup_ms": (t2 - t1) * 1000,
        "extract_ms": (t3 - t2) * 1000,
        "classify_ms": (t4 - t3) * 1000,
        "total_ms": (t4 - t0) * 1000,
    }
    summary = {
        "frames": len(frames),
        "after_dedup": len(survivors),
        "identities": len(observations),
        "twins": sum(
            v.kind is VerdictKind.EVIL_TWIN for _obs, v in results
        ),
    }
    fmt = _setting(args, config, "format", "table")
    if fmt == "json":
        print(json.dumps({"stages_ms": stages, "summary": summary}))
    else:
        for name, value in stages.items():
            print(f"{name:>12}: {value:9.2f}")
        for name, value in summary.items():
            print(f"{name:>12}: {value}")
    return EXIT_CLEAN


def _default_ui_dir() -> str | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinsentry",
        description="Detect rogue Wi-Fi twins by beacon-frame fingerprinting.",
    )
    parser.add_argument("--config", help="JSON config file (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enroll", help="enroll APs from a trusted capture")
    p.add_argument("capture", help="pcap of the trusted scan window")
    p.add_argument("--label", help="record label (default: capture file stem)")
    p.add_argument("--store", help="store file (default fingerprints.tsv)")
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("scan", help="classify every AP seen in captures")
    p.add_argument("captures", nargs="+", help="pcap files, merged by timestamp")
    p.add_argument("--store", help="store file")
    p.add_argument("--format", choices=("table", "json"))
    p.add_argument("--ssi-margin-db", dest="ssi_margin_db", type=int)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="emit a scenario capture plus labels")
    p.add_argument("scenario", help="built-in scenario name or JSON config path")
    p.add_argument("--out", required=True, help="output pcap path")
    p.add_argument("--labels", help="labels sidecar (default <out>.labels)")
    p.add_argument("--seed", type=int, help="generation seed (default 0)")
    p.add_argument(
        "--enrollment-out",
        help="also write a genuine-only trusted capture for enrollment",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="start the scan service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--store")
    p.add_argument("--queue-capacity", dest="queue_capacity", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--admin-token", dest="admin_token")
    p.add_argument("--ssi-margin-db", dest="ssi_margin_db", type=int)
    p.add_argument("--ui-dir", dest="ui_dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="report pipeline stage timings")
    p.add_argument("captures", nargs="+")
    p.add_argument("--store")
    p.add_argument("--format", choices=("table", "json"))
    p.add_argument("--ssi-margin-db", dest="ssi_margin_db", type=int)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_cli_config(args.config)
        return args.func(args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
