"""Classification of observed APs against the genuine-identity store.

An observation is one distinct (BSSID, identity) seen in a capture,
carrying the strongest signal over its frames.  Classification:

  1. identity matches a stored record on all 11 fields -> legitimate,
     unless the observed signal exceeds the record's stored maximum (plus
     an optional margin), which marks a same-hardware impostor;
  2. otherwise, any stored record sharing the SSID -> evil twin of the
     closest such record (most matching fields, lowest BSSID on ties);
  3. otherwise the AP is simply not registered on this network.

The signal margin defaults to 0 dB (strict "stronger than ever seen");
deployments may widen it to absorb signal oscillation.
"""

from dataclasses import dataclass
from enum import Enum

from . import fingerprint as fp_mod
from .fingerprint import Fingerprint, build_fingerprint, fingerprint_hash, ssid_text
from .frames import SequenceDeduper, mac_to_str
from .store import FingerprintRecord, FingerprintStore


class VerdictKind(Enum):
    LEGITIMATE = "legitimate"
    EVIL_TWIN = "evil_twin"
    UNREGISTERED = "unregistered"


class VerdictReason(Enum):
    EXACT_MATCH = "exact_match"
    SSI_EXCEEDED = "ssi_exceeded"
    FINGERPRINT_MISMATCH_SAME_SSID = "fingerprint_mismatch_same_ssid"
    BSSID_FORGED = "bssid_forged"
    NO_SSID_MATCH = "no_ssid_match"


SEVERITY_ORDER = {
    VerdictKind.EVIL_TWIN: 0,
    VerdictKind.UNREGISTERED: 1,
    VerdictKind.LEGITIMATE: 2,
}


@dataclass(frozen=True)
class Observation:
    fingerprint: Fingerprint
    ssi_dbm: int | None
    first_seen_us: int
    last_seen_us: int
    frame_count: int

    @property
    def bssid(self):
        return self.fingerprint.bssid


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    reason: VerdictReason
    matched_record: FingerprintRecord | None = None


def classify(
    obs: Observation, snapshot: FingerprintStore, ssi_margin_db: int = 0
) -> Verdict:
    """Total classification of one observation against a store snapshot."""
    record = snapshot.lookup_exact(obs.fingerprint)
    if record is not None:
        if obs.ssi_dbm is not None and obs.ssi_dbm > record.max_ssi_dbm + ssi_margin_db:
            return Verdict(VerdictKind.EVIL_TWIN, VerdictReason.SSI_EXCEEDED, record)
        return Verdict(VerdictKind.LEGITIMATE, VerdictReason.EXACT_MATCH, record)

    sharers = snapshot.lookup_by_ssid(obs.fingerprint.ssid)
    if sharers:
        best = min(
            sharers,
            key=lambda r: (
                -fp_mod.matching_field_count(obs.fingerprint, r.fingerprint),
                r.bssid,
            ),
        )
        diff = fp_mod.differing_fields(obs.fingerprint, best.fingerprint)
        reason = (
            VerdictReason.BSSID_FORGED
            if diff == ("bssid",)
            else VerdictReason.FINGERPRINT_MISMATCH_SAME_SSID
        )
        return Verdict(VerdictKind.EVIL_TWIN, reason, best)

    return Verdict(VerdictKind.UNREGISTERED, VerdictReason.NO_SSID_MATCH, None)


def aggregate_observations(frames, timestamps_us=None, diagnostics=None):
    """Dedup, fingerprint and fold frames into per-identity observations.

    Aggregation key is the full 11-field identity (which contains the
    BSSID); the signal kept is the maximum over surviving frames, so the
    result is invariant under frame reordering.  Fingerprint extraction
    failures are appended to diagnostics and never abort.
    """
    frames = list(frames)
    if timestamps_us is None:
        timestamps_us = [f.timestamp for f in frames]
    buckets: dict[Fingerprint, dict] = {}
    deduper = SequenceDeduper()
    for frame, ts in zip(frames, timestamps_us):
        if not deduper.accept(frame):
            continue
        try:
            fp = build_fingerprint(frame)
        except ValueError as exc:
            if diagnostics is not None:
                diagnostics.append(
                    f"frame from {mac_to_str(frame.bssid)} dropped: {exc}"
                )
            continue
        signal = frame.radiotap.signal_dbm
        bucket = buckets.get(fp)
        if bucket is None:
            buckets[fp] = {
                "ssi": signal,
                "first": ts,
                "last": ts,
                "count": 1,
            }
        else:
            if signal is not None and (bucket["ssi"] is None or signal > bucket["ssi"]):
                bucket["ssi"] = signal
            bucket["first"] = min(bucket["first"], ts)
            bucket["last"] = max(bucket["last"], ts)
            bucket["count"] += 1
    observations = [
        Observation(
            fingerprint=fp,
            ssi_dbm=bucket["ssi"],
            first_seen_us=bucket["first"],
            last_seen_us=bucket["last"],
            frame_count=bucket["count"],
        )
        for fp, bucket in buckets.items()
    ]
    observations.sort(key=lambda o: (o.bssid, fp_mod.serialize(o.fingerprint)))
    return observations


def classify_capture(
    frames,
    snapshot: FingerprintStore,
    ssi_margin_db: int = 0,
    timestamps_us=None,
    diagnostics=None,
) -> list[tuple[Observation, Verdict]]:
    """One verdict per distinct observed AP identity in the frame stream."""
    observations = aggregate_observations(frames, timestamps_us, diagnostics)
    return [(obs, classify(obs, snapshot, ssi_margin_db)) for obs in observations]


def enroll_capture(store, read, label: str) -> list[FingerprintRecord]:
    """Enroll every distinct BSSID of a trusted capture.

    Per BSSID the latest-seen identity wins (re-enrollment replaces) and
    the stored maximum is the strongest signal over all its observations.
    Enrollment time comes from the capture itself, so enrolling the same
    file twice writes the same records.
    """
    observations = aggregate_observations(read.frames, read.timestamps_us)
    per_bssid: dict[bytes, dict] = {}
    for obs in observations:
        entry = per_bssid.setdefault(
            obs.bssid, {"obs": obs, "ssi": obs.ssi_dbm, "last": obs.last_seen_us}
        )
        if obs.last_seen_us >= entry["last"]:
            entry["obs"] = obs
            entry["last"] = obs.last_seen_us
        if obs.ssi_dbm is not None and (
            entry["ssi"] is None or obs.ssi_dbm > entry["ssi"]
        ):
            entry["ssi"] = obs.ssi_dbm
    records = []
    for bssid in sorted(per_bssid):
        entry = per_bssid[bssid]
        obs = entry["obs"]
        records.append(
            store.enroll_fingerprint(
                obs.fingerprint,
                entry["ssi"] if entry["ssi"] is not None else -128,
                label,
                now=entry["last"] / 1_000_000,
            )
        )
    return records


def verdict_rows(results) -> list[dict]:
    """JSON-ready rows, sorted by severity, then SSID, BSSID, identity."""
    rows = []
    for obs, verdict in results:
        fp = obs.fingerprint
        rows.append(
            {
                "ssid": ssid_text(fp.ssid),
                "bssid": mac_to_str(obs.bssid),
                "ssi_dbm": obs.ssi_dbm,
                "verdict": verdict.kind.value,
                "reason": verdict.reason.value,
                "matched_label": (
                    verdict.matched_record.label if verdict.matched_record else None
                ),
                "frame_count": obs.frame_count,
                "fingerprint": fingerprint_hash(fp),
            }
        )
    rows.sort(
        key=lambda r: (
            SEVERITY_ORDER[VerdictKind(r["verdict"])],
            r["ssid"] or "",
            r["bssid"],
            r["fingerprint"],
        )
    )
    return rows
