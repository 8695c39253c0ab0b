"""HTTP scan service: request intake, pipeline orchestration, countermeasures.

Scan requests enter a bounded FIFO ring; when the ring is full the request
is refused immediately with a busy response instead of queueing without
limit, which is the denial-of-service guard.  A small worker pool drains
the ring in admission order, each worker classifying against a consistent
store snapshot.  Store writes (enrollment, signal updates) funnel through
the store's own writer lock.

Endpoints (JSON bodies, dBm values are integers):

  POST /scan                  {request_id?, sources: [...], options?:
                               {ssi_margin_db?, auto_deauth?,
                                capture_window_ms?}}
  GET  /healthz
  GET  /deauth                campaign listing
  POST /deauth/{bssid}/stop   requires the admin token
  POST /admin/enroll          {label, capture_b64 | path, dry_run?}
  GET  /admin/fingerprints
  POST /admin/ssi-reset       {bssid, max_ssi_dbm}
  GET  /ui/...                static dashboard assets, when built

Admin endpoints authenticate with the X-Admin-Token header.  Scan sources
are pcap paths or "live:<name>" in-process queues; a live source collects
frames arriving within options.capture_window_ms (a beacon period is
102.4 ms, so meaningful windows are longer).
"""

import base64
import json
import logging
import secrets
import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .deauth import DeauthScheduler, MemorySink, PcapSink
from .detector import (
    VerdictKind,
    classify_capture,
    enroll_capture as enroll_capture_records,
    verdict_rows,
)
from .frames import FrameError, mac_from_str, mac_to_str
from .pcap import CaptureError, merge_reads, read_capture
from .store import FingerprintStore, UnknownBssid

log = logging.getLogger("twinsentry.server")

DEFAULT_QUEUE_CAPACITY = 64
DEFAULT_WORKERS = 4


class ServerError(RuntimeError):
    pass


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8640
    store_path: str | None = None
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY
    workers: int = DEFAULT_WORKERS
    admin_token: str | None = None  # generated and logged when unset
    ssi_margin_db: int = 0
    ssi_update_enabled: bool = True
    deauth_interval_ms: int = 100
    deauth_reason_code: int = 1
    deauth_pcap_dir: str | None = None  # default sink is in-memory
    ui_dir: str | None = None
    live_queues: tuple = ()  # names to pre-register


class LiveQueue:
    """In-process beacon source a scan can read instead of a pcap file."""

    def __init__(self, name: str):
        self.name = name
        self._lock = threading.Lock()
        self._frames: list = []

    def push(self, frame, timestamp_us: int | None = None):
        with self._lock:
            self._frames.append(
                (timestamp_us if timestamp_us is not None else frame.timestamp, frame)
            )

    def drain(self) -> list:
        with self._lock:
            frames, self._frames = self._frames, []
            return frames


@dataclass
class _ScanTask:
    request: dict
    done: threading.Event = field(default_factory=threading.Event)
    response: dict | None = None


class _ScanQueue:
    """Bounded FIFO ring; capacity counts admitted-but-unfinished requests.

    Admission fails fast when the ring is full; finishing a task frees its
    slot.  Counting in-flight work (not just waiting work) is what makes
    "capacity 2" actually mean at most two scans in the building.
    """

    def __init__(self, capacity: int):
        self._capacity = capacity
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self._queue: deque[_ScanTask] = deque()
        self._outstanding = 0
        self._closed = False

    def try_admit(self, task: _ScanTask) -> bool:
        with self._lock:
            if self._closed or self._outstanding >= self._capacity:
                return False
            self._outstanding += 1
            self._queue.append(task)
            self._ready.notify()
            return True

    def next_task(self) -> _ScanTask | None:
        with self._lock:
            while not self._queue and not self._closed:
                self._ready.wait(timeout=0.2)
            if self._queue:
                return self._queue.popleft()
            return None

    def task_finished(self):
        with self._lock:
            self._outstanding -= 1

    def outstanding(self) -> int:
        with self._lock:
            return self._outstanding

    def close(self):
        with self._lock:
            self._closed = True
            self._ready.notify_all()


class ScanServer:
    """Owns the HTTP listener, the scan workers, the store and deauth."""

    def __init__(self, config: ServerConfig, store: FingerprintStore | None = None):
        self.config = config
        if store is not None:
            self.store = store
        elif config.store_path and Path(config.store_path).exists():
            self.store = FingerprintStore.load(config.store_path)
        else:
            self.store = FingerprintStore()
        self.deauth = DeauthScheduler()
        self.live_queues: dict[str, LiveQueue] = {
            name: LiveQueue(name) for name in config.live_queues
        }
        self.admin_token = config.admin_token or secrets.token_hex(16)
        if config.admin_token is None:
            log.info("generated admin token %s", self.admin_token)
        self._queue = _ScanQueue(config.queue_capacity)
        self._workers: list[threading.Thread] = []
        self._httpd: ThreadingHTTPServer | None = None
        self._http_thread: threading.Thread | None = None
        self._store_write_lock = threading.Lock()

    # -- lifecycle ---------------------------------------------------------

    def start(self):
        handler = _make_handler(self)
        try:
            self._httpd = _QuietThreadingHTTPServer(
                (self.config.host, self.config.port), handler
            )
        except OSError as exc:
            raise ServerError(
                f"cannot bind {self.config.host}:{self.config.port}: {exc}"
            ) from exc
        for i in range(self.config.workers):
            worker = threading.Thread(
                target=self._worker_loop, name=f"scan-worker-{i}", daemon=True
            )
            worker.start()
            self._workers.append(worker)
        self._http_thread = threading.Thread(
            target=self._httpd.serve_forever, name="http-listener", daemon=True
        )
        self._http_thread.start()
        log.info("listening on %s:%d", *self._httpd.server_address[:2])
        return self

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def address(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def stop(self, drain_timeout: float = 5.0):
        """Stop accepting, let queued scans finish, then shut down."""
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        deadline = time.monotonic() + drain_timeout
        while time.monotonic() < deadline and self._queue.outstanding():
            time.sleep(0.02)
        self._queue.close()
        for worker in self._workers:
            worker.join(timeout=1)
        self.deauth.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()

    # -- scan pipeline -----------------------------------------------------

    def submit_scan(self, request: dict) -> dict:
        """Admit, wait for the worker's response; busy when the ring is full."""
        request_id = request.get("request_id") or uuid.uuid4().hex
        request["request_id"] = request_id
        task = _ScanTask(request=request)
        if not self._queue.try_admit(task):
            return {"request_id": request_id, "status": "busy"}
        task.done.wait()
        return task.response

    def _worker_loop(self):
        while True:
            task = self._queue.next_task()
            if task is None:
                return
            try:
                task.response = self.handle_scan(task.request)
            except Exception as exc:  # defensive: a worker must never die
                log.exception("scan %s failed", task.request.get("request_id"))
                task.response = {
                    "request_id": task.request.get("request_id"),
                    "status": "error",
                    "error": str(exc),
                }
            finally:
                self._queue.task_finished()
                task.done.set()

    def handle_scan(self, request: dict) -> dict:
        started = time.monotonic()
        options = request.get("options") or {}
        margin = int(options.get("ssi_margin_db", self.config.ssi_margin_db))
        auto_deauth = bool(options.get("auto_deauth", False))
        window_ms = int(options.get("capture_window_ms", 0))
        sources = request.get("sources") or []

        diagnostics: list[str] = []
        reads = []
        failures = 0
        for source in sources:
            if isinstance(source, str) and source.startswith("live:"):
                reads.append(self._read_live(source[5:], window_ms, diagnostics))
                continue
            try:
                read = read_capture(source)
            except (OSError, CaptureError) as exc:
                diagnostics.append(f"{source}: {exc}")
                failures += 1
                continue
            diagnostics.extend(f"{source}: {skip}" for skip in read.skipped)
            reads.append(read)
        if sources and failures == len(sources):
            return {
                "request_id": request["request_id"],
                "status": "error",
                "error": "all sources failed",
                "diagnostics": diagnostics,
            }

        frames, timestamps = merge_reads(reads)
        snapshot = self.store.snapshot()
        results = classify_capture(
            frames,
            snapshot,
            ssi_margin_db=margin,
            timestamps_us=timestamps,
            diagnostics=diagnostics,
        )

        if self.config.ssi_update_enabled:
            with self._store_write_lock:
                for obs, verdict in results:
                    if verdict.kind is VerdictKind.LEGITIMATE and obs.ssi_dbm is not None:
                        try:
                            self.store.update_observation(obs.bssid, obs.ssi_dbm)
                        except UnknownBssid:
                            pass
        if auto_deauth:
            for obs, verdict in results:
                if verdict.kind is VerdictKind.EVIL_TWIN:
                    self._start_deauth(obs.bssid)

        return {
            "request_id": request["request_id"],
            "status": "ok",
            "aps": verdict_rows(results),
            "diagnostics": diagnostics,
            "elapsed_ms": round((time.monotonic() - started) * 1000, 3),
        }

    def _read_live(self, name: str, window_ms: int, diagnostics: list):
        queue = self.live_queues.get(name)
        if queue is None:
            diagnostics.append(f"live:{name}: unknown live queue")
            return _EmptyRead()
        if window_ms > 0:
            time.sleep(window_ms / 1000.0)
        items = queue.drain()
        read = _EmptyRead()
        for ts, frame in items:
            read.frames.append(frame)
            read.timestamps_us.append(ts)
        return read

    def _start_deauth(self, bssid: bytes):
        if bssid in self.deauth.active_bssids():
            return
        if self.config.deauth_pcap_dir:
            path = Path(self.config.deauth_pcap_dir) / (
                "deauth-" + mac_to_str(bssid).replace(":", "") + ".pcap"
            )
            sink = PcapSink(path)
        else:
            sink = MemorySink()
        self.deauth.start_campaign(
            bssid,
            reason_code=self.config.deauth_reason_code,
            interval_ms=self.config.deauth_interval_ms,
            sink=sink,
        )
        log.info("deauth campaign started for %s", mac_to_str(bssid))

    # -- admin operations ----------------------------------------------------

    def enroll_capture(
        self, capture_bytes_or_path, label: str, dry_run: bool = False
    ) -> list[dict]:
        """Enroll every distinct BSSID of a trusted capture; returns rows.

        A dry run previews the records (including which BSSIDs would be
        replaced) without touching the store; clients use it to confirm
        overwrites.
        """
        read = read_capture(capture_bytes_or_path)
        if dry_run:
            records = enroll_capture_records(self.store.snapshot(), read, label)
        else:
            with self._store_write_lock:
                records = enroll_capture_records(self.store, read, label)
                self._persist()
            log.info("enrolled %d record(s) under label %r", len(records), label)
        return [
            {
                "label": r.label,
                "bssid": mac_to_str(r.bssid),
                "max_ssi_dbm": r.max_ssi_dbm,
            }
            for r in records
        ]

    def reset_ssi(self, bssid: bytes, max_ssi_dbm: int) -> dict:
        with self._store_write_lock:
            record = self.store.reset_ssi(bssid, max_ssi_dbm)
            self._persist()
        log.info("ssi reset for %s to %d dBm", mac_to_str(bssid), max_ssi_dbm)
        return {"bssid": mac_to_str(bssid), "max_ssi_dbm": record.max_ssi_dbm}

    def _persist(self):
        if self.config.store_path:
            self.store.persist(self.config.store_path)


class _EmptyRead:
    def __init__(self):
        self.frames = []
        self.timestamps_us = []
        self.skipped = []


class _QuietThreadingHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True


def campaign_row(campaign) -> dict:
    return {
        "bssid": mac_to_str(campaign.target_bssid),
        "reason_code": campaign.reason_code,
        "interval_ms": campaign.interval_ms,
        "started_at": campaign.started_at,
        "stopped_at": campaign.stopped_at,
        "emitted_count": campaign.emitted_count,
        "active": campaign.active,
    }


def _make_handler(server: ScanServer):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        server_version = "twinsentry"

        def log_message(self, fmt, *args):
            log.debug("%s " + fmt, self.address_string(), *args)

        # -- plumbing ------------------------------------------------------

        def _send_json(self, payload: dict, status: int = 200):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _read_json(self) -> dict | None:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                parsed = json.loads(raw)
            except json.JSONDecodeError:
                self._send_json({"status": "error", "error": "invalid JSON body"}, 400)
                return None
            if not isinstance(parsed, dict):
                self._send_json({"status": "error", "error": "body must be an object"}, 400)
                return None
            return parsed

        def _authorized(self) -> bool:
            token = self.headers.get("X-Admin-Token")
            if token == server.admin_token:
                return True
            self._send_json({"status": "error", "error": "missing or bad admin token"}, 401)
            return False

        # -- routes ----------------------------------------------------------

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/healthz":
                self._send_json({"status": "ok", "store_records": len(server.store)})
            elif path == "/deauth":
                self._send_json(
                    {
                        "campaigns": [
                            campaign_row(c) for c in server.deauth.list_campaigns()
                        ]
                    }
                )
            elif path == "/admin/fingerprints":
                if self._authorized():
                    self._send_json({"records": server.store.describe()})
            elif path == "/" and server.config.ui_dir:
                self.send_response(302)
                self.send_header("Location", "/ui/")
                self.send_header("Content-Length", "0")
                self.end_headers()
            elif path.startswith("/ui"):
                self._serve_ui(path)
            else:
                self._send_json({"status": "error", "error": "not found"}, 404)

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            if path == "/scan":
                body = self._read_json()
                if body is None:
                    return
                response = server.submit_scan(body)
                status = 503 if response.get("status") == "busy" else 200
                if response.get("status") == "error":
                    status = 400
                self._send_json(response, status)
            elif path == "/admin/enroll":
                self._handle_enroll()
            elif path == "/admin/ssi-reset":
                self._handle_ssi_reset()
            elif path.startswith("/deauth/") and path.endswith("/stop"):
                self._handle_deauth_stop(path)
            else:
                self._send_json({"status": "error", "error": "not found"}, 404)

        def _handle_enroll(self):
            if not self._authorized():
                return
            body = self._read_json()
            if body is None:
                return
            label = body.get("label")
            if not label:
                self._send_json({"status": "error", "error": "label is required"}, 400)
                return
            try:
                if "capture_b64" in body:
                    capture = base64.b64decode(body["capture_b64"])
                elif "path" in body:
                    capture = body["path"]
                else:
                    self._send_json(
                        {"status": "error", "error": "need capture_b64 or path"}, 400
                    )
                    return
                records = server.enroll_capture(
                    capture, label, dry_run=bool(body.get("dry_run", False))
                )
            except (OSError, CaptureError, FrameError, ValueError) as exc:
                self._send_json({"status": "error", "error": str(exc)}, 400)
                return
            self._send_json({"status": "ok", "records": records})

        def _handle_ssi_reset(self):
            if not self._authorized():
                return
            body = self._read_json()
            if body is None:
                return
            try:
                bssid = mac_from_str(body["bssid"])
                result = server.reset_ssi(bssid, int(body["max_ssi_dbm"]))
            except UnknownBssid:
                self._send_json({"status": "error", "error": "unknown BSSID"}, 404)
                return
            except (KeyError, ValueError, FrameError) as exc:
                self._send_json({"status": "error", "error": str(exc)}, 400)
                return
            self._send_json({"status": "ok", **result})

        def _handle_deauth_stop(self, path: str):
            if not self._authorized():
                return
            mac_text = path[len("/deauth/") : -len("/stop")]
            try:
                bssid = mac_from_str(mac_text)
            except FrameError as exc:
                self._send_json({"status": "error", "error": str(exc)}, 400)
                return
            campaign = server.deauth.stop_campaign(bssid)
            log.info("deauth stop requested for %s", mac_text)
            self._send_json(
                {
                    "status": "ok",
                    "campaign": campaign_row(campaign) if campaign else None,
                }
            )

        def _serve_ui(self, path: str):
            if not server.config.ui_dir:
                self._send_json(
                    {"status": "error", "error": "dashboard not built"}, 404
                )
                return
            root = Path(server.config.ui_dir).resolve()
            rel = path[len("/ui") :].lstrip("/") or "index.html"
            target = (root / rel).resolve()
            if root not in target.parents and target != root:
                self._send_json({"status": "error", "error": "not found"}, 404)
                return
            if target.is_dir():
                target = target / "index.html"
            if not target.is_file():
                self._send_json({"status": "error", "error": "not found"}, 404)
                return
            content_types = {
                ".html": "text/html; charset=utf-8",
                ".js": "text/javascript",
                ".mjs": "text/javascript",
                ".css": "text/css",
                ".json": "application/json",
                ".map": "application/json",
                ".svg": "image/svg+xml",
            }
            body = target.read_bytes()
            self.send_response(200)
            self.send_header(
                "Content-Type",
                content_types.get(target.suffix, "application/octet-stream"),
            )
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def serve(config: ServerConfig, store: FingerprintStore | None = None) -> ScanServer:
    """Build and start a ScanServer; caller stops it."""
    return ScanServer(config, store=store).start()
