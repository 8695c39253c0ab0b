"""Continuous broadcast deauthentication against confirmed impostor APs.

Campaigns run on one shared timer thread; each emits a broadcast
deauthentication frame spoofed from its target BSSID at a fixed period
until stopped.  Frames go to a sink (in-memory queue or pcap file), never
to a radio: emission here means producing the exact bytes a transmitter
would send.
"""

import threading
import time
from collections import deque
from dataclasses import dataclass

from .frames import SEQ_MODULO, encode_deauth, make_deauth
from .pcap import PcapWriter

DEFAULT_REASON_CODE = 1  # unspecified reason
DEFAULT_INTERVAL_MS = 100

# Minimal radiotap preamble (empty present mask) so pcap sinks stay valid
# link-type-127 captures.
_EMPTY_RADIOTAP = bytes((0, 0, 8, 0, 0, 0, 0, 0))


class DuplicateCampaign(ValueError):
    """A campaign for this BSSID is already active."""


@dataclass
class DeauthCampaign:
    target_bssid: bytes
    reason_code: int
    interval_ms: int
    started_at: float
    emitted_count: int = 0
    active: bool = True
    stopped_at: float | None = None


class MemorySink:
    """Bounded frame buffer for tests and embedded use."""

    def __init__(self, capacity: int = 4096):
        self._frames = deque(maxlen=capacity)
        self._lock = threading.Lock()

    def emit(self, frame_bytes: bytes, timestamp_us: int):
        with self._lock:
            self._frames.append((timestamp_us, frame_bytes))

    def frames(self) -> list[tuple[int, bytes]]:
        with self._lock:
            return list(self._frames)

    def close(self):
        pass


class PcapSink:
    """Appends emitted frames to a radiotap pcap file."""

    def __init__(self, path):
        self._writer = PcapWriter(path)
        self._lock = threading.Lock()

    def emit(self, frame_bytes: bytes, timestamp_us: int):
        with self._lock:
            self._writer.write_packet(_EMPTY_RADIOTAP + frame_bytes, timestamp_us)

    def close(self):
        self._writer.close()


@dataclass
class _CampaignState:
    campaign: DeauthCampaign
    sink: object
    next_due: float
    sequence: int = 0


class DeauthScheduler:
    """Owns all campaigns and the single emission thread."""

    def __init__(self, clock=time.monotonic):
        self._clock = clock
        self._lock = threading.Lock()
        self._wakeup = threading.Condition(self._lock)
        self._states: dict[bytes, _CampaignState] = {}
        self._shutdown = False
        self._thread: threading.Thread | None = None

    def _ensure_thread(self):
        if self._thread is None or not self._thread.is_alive():
            self._thread = threading.Thread(
                target=self._run, name="deauth-timer", daemon=True
            )
            self._thread.start()

    def start_campaign(
        self,
        bssid: bytes,
        reason_code: int = DEFAULT_REASON_CODE,
        interval_ms: int = DEFAULT_INTERVAL_MS,
        sink=None,
    ) -> DeauthCampaign:
        """Begin periodic emission; first frame goes out immediately.

        Callers are expected to hold an evil-twin verdict for the BSSID.
        """
        if interval_ms <= 0:
            raise ValueError("interval_ms must be positive")
        sink = sink if sink is not None else MemorySink()
        with self._lock:
            existing = self._states.get(bssid)
            if existing is not None and existing.campaign.active:
                raise DuplicateCampaign(
                    f"campaign already active for {_mac(bssid)}"
                )
            campaign = DeauthCampaign(
                target_bssid=bssid,
                reason_code=reason_code,
                interval_ms=interval_ms,
                started_at=time.time(),
            )
            self._states[bssid] = _CampaignState(
                campaign=campaign,
                sink=sink,
                next_due=self._clock(),
            )
            self._ensure_thread()
            self._wakeup.notify()
            return campaign

    def stop_campaign(self, bssid: bytes) -> DeauthCampaign | None:
        """Idempotent; returns the final campaign, or None if never started."""
        with self._lock:
            state = self._states.get(bssid)
            if state is None:
                return None
            if state.campaign.active:
                state.campaign.active = False
                state.campaign.stopped_at = time.time()
                state.sink.close()
                self._wakeup.notify()
            return state.campaign

    def get(self, bssid: bytes) -> DeauthCampaign | None:
        with self._lock:
            state = self._states.get(bssid)
            return state.campaign if state else None

    def list_campaigns(self) -> list[DeauthCampaign]:
        with self._lock:
            return sorted(
                (s.campaign for s in self._states.values()),
                key=lambda c: c.target_bssid,
            )

    def active_bssids(self) -> set[bytes]:
        with self._lock:
            return {b for b, s in self._states.items() if s.campaign.active}

    def shutdown(self):
        with self._lock:
            for state in self._states.values():
                if state.campaign.active:
                    state.campaign.active = False
                    state.campaign.stopped_at = time.time()
                    state.sink.close()
            self._shutdown = True
            self._wakeup.notify()
        if self._thread is not None:
            self._thread.join(timeout=2)

    # Timer loop: wait for the earliest due campaign, emit, reschedule.
    def _run(self):
        with self._lock:
            while not self._shutdown:
                due_state = None
                soonest = None
                for state in self._states.values():
                    if not state.campaign.active:
                        continue
                    if soonest is None or state.next_due < soonest:
                        soonest = state.next_due
                        due_state = state
                if due_state is None:
                    self._wakeup.wait(timeout=0.5)
                    continue
                now = self._clock()
                if soonest > now:
                    self._wakeup.wait(timeout=soonest - now)
                    continue
                self._emit_locked(due_state)

    def _emit_locked(self, state: _CampaignState):
        # Emission stays under the scheduler lock: sinks are cheap (memory
        # append or a small file write) and stop/close can then never
        # interleave with an in-flight emit.
        campaign = state.campaign
        frame = make_deauth(
            campaign.target_bssid, campaign.reason_code, state.sequence
        )
        state.sequence = (state.sequence + 1) % SEQ_MODULO
        state.sink.emit(encode_deauth(frame), int(time.time() * 1_000_000))
        campaign.emitted_count += 1
        state.next_due += campaign.interval_ms / 1000.0


def _mac(addr: bytes) -> str:
    return ":".join(f"{b:02x}" for b in addr)
