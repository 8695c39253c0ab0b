"""Registry of genuine-AP identities with their strongest observed signal.

One record per BSSID, replace-on-re-enroll, with a secondary SSID index.
Enrollment is an administrative action: nothing in the scan path ever adds
or rewrites an identity, which is what keeps the unregistered verdict
meaningful.  The stored signal maximum only rises under observation
updates; lowering it (e.g. after physically moving an AP) is an explicit
reset.

Persistence is a diff-friendly UTF-8 text file, one record per line.
"""

import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .fingerprint import (
    Fingerprint,
    build_fingerprint,
    fingerprint_hash,
    parse,
    serialize,
    ssid_text,
)
from .frames import BeaconFrame, mac_from_str, mac_to_str

STORE_FORMAT_HEADER = "# twinsentry fingerprint store v1"


class UnknownBssid(KeyError):
    """Observation update for a BSSID that was never enrolled."""


class StoreFormatError(ValueError):
    """Corrupt store file; message names the offending line."""


@dataclass(frozen=True)
class FingerprintRecord:
    fingerprint: Fingerprint
    max_ssi_dbm: int
    label: str
    enrolled_at: float
    updated_at: float

    @property
    def bssid(self):
        return self.fingerprint.bssid


class FingerprintStore:
    """Thread-safe record collection; reads during a scan use snapshot()."""

    def __init__(self):
        self._lock = threading.RLock()
        self._by_bssid: dict[bytes, FingerprintRecord] = {}
        self._by_ssid: dict[bytes | None, set[bytes]] = {}

    def __len__(self):
        with self._lock:
            return len(self._by_bssid)

    def records(self) -> list[FingerprintRecord]:
        with self._lock:
            return sorted(self._by_bssid.values(), key=lambda r: r.bssid)

    def _index_remove(self, record: FingerprintRecord):
        bssids = self._by_ssid.get(record.fingerprint.ssid)
        if bssids is not None:
            bssids.discard(record.bssid)
            if not bssids:
                del self._by_ssid[record.fingerprint.ssid]

    def _insert(self, record: FingerprintRecord):
        with self._lock:
            old = self._by_bssid.get(record.bssid)
            if old is not None:
                self._index_remove(old)
            self._by_bssid[record.bssid] = record
            self._by_ssid.setdefault(record.fingerprint.ssid, set()).add(record.bssid)

    def enroll(
        self,
        frame: BeaconFrame,
        observed_ssi: int,
        label: str,
        now: float | None = None,
    ) -> FingerprintRecord:
        """Insert or replace the record for the frame's BSSID.

        Administrative: call only on captures taken in a trusted window.
        """
        return self.enroll_fingerprint(build_fingerprint(frame), observed_ssi, label, now)

    def enroll_fingerprint(
        self,
        fp: Fingerprint,
        observed_ssi: int,
        label: str,
        now: float | None = None,
    ) -> FingerprintRecord:
        if "\t" in label or "\n" in label:
            raise ValueError("label must not contain tabs or newlines")
        now = time.time() if now is None else now
        record = FingerprintRecord(
            fingerprint=fp,
            max_ssi_dbm=observed_ssi,
            label=label,
            enrolled_at=now,
            updated_at=now,
        )
        self._insert(record)
        return record

    def update_observation(
        self, bssid: bytes, observed_ssi: int, now: float | None = None
    ) -> FingerprintRecord:
        """Raise the stored signal maximum; never lowers it.

        Callers gate this on a legitimate classification so a stronger
        impostor cannot teach the store its own signal level.
        """
        with self._lock:
            record = self._by_bssid.get(bssid)
            if record is None:
                raise UnknownBssid(mac_to_str(bssid))
            if observed_ssi <= record.max_ssi_dbm:
                return record
            updated = replace(
                record,
                max_ssi_dbm=observed_ssi,
                updated_at=time.time() if now is None else now,
            )
            self._by_bssid[bssid] = updated
            return updated

    def reset_ssi(
        self, bssid: bytes, max_ssi_dbm: int, now: float | None = None
    ) -> FingerprintRecord:
        """Administrative override, e.g. after an AP has been moved."""
        with self._lock:
            record = self._by_bssid.get(bssid)
            if record is None:
                raise UnknownBssid(mac_to_str(bssid))
            updated = replace(
                record,
                max_ssi_dbm=max_ssi_dbm,
                updated_at=time.time() if now is None else now,
            )
            self._by_bssid[bssid] = updated
            return updated

    def get(self, bssid: bytes) -> FingerprintRecord | None:
        with self._lock:
            return self._by_bssid.get(bssid)

    def lookup_exact(self, fp: Fingerprint) -> FingerprintRecord | None:
        """Record whose identity equals fp on all 11 fields, if any.

        The BSSID is one of the fields, so at most the record enrolled
        under fp.bssid can match.
        """
        with self._lock:
            record = self._by_bssid.get(fp.bssid)
        if record is not None and record.fingerprint == fp:
            return record
        return None

    def lookup_by_ssid(self, ssid: bytes | None) -> list[FingerprintRecord]:
        """All records with byte-identical SSID (case matters)."""
        with self._lock:
            bssids = sorted(self._by_ssid.get(ssid, ()))
            return [self._by_bssid[b] for b in bssids]

    def snapshot(self) -> "FingerprintStore":
        """Consistent copy for a scan; later writes do not bleed in."""
        clone = FingerprintStore()
        with self._lock:
            clone._by_bssid = dict(self._by_bssid)
            clone._by_ssid = {k: set(v) for k, v in self._by_ssid.items()}
        return clone

    def persist(self, target):
        """Write all records; one line each, '#' lines are comments.

        Columns (tab-separated): label, BSSID, max SSI dBm, enrolled-at,
        updated-at, hex of the canonical fingerprint serialization.
        """
        lines = [STORE_FORMAT_HEADER]
        for record in self.records():
            lines.append(
                "\t".join(
                    (
                        record.label,
                        mac_to_str(record.bssid),
                        str(record.max_ssi_dbm),
                        repr(record.enrolled_at),
                        repr(record.updated_at),
                        serialize(record.fingerprint).hex(),
                    )
                )
            )
        text = "\n".join(lines) + "\n"
        if isinstance(target, (str, Path)):
            Path(target).write_text(text, encoding="utf-8")
        else:
            target.write(text)

    @classmethod
    def load(cls, source) -> "FingerprintStore":
        """Inverse of persist; errors name the offending line number."""
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
        store = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise StoreFormatError(
                    f"line {lineno}: expected 6 tab-separated columns, got {len(parts)}"
                )
            label, bssid_s, ssi_s, enrolled_s, updated_s, fp_hex = parts
            try:
                bssid = mac_from_str(bssid_s)
                max_ssi = int(ssi_s)
                enrolled_at = float(enrolled_s)
                updated_at = float(updated_s)
                fp = parse(bytes.fromhex(fp_hex))
            except ValueError as exc:
                raise StoreFormatError(f"line {lineno}: {exc}") from exc
            if fp.bssid != bssid:
                raise StoreFormatError(
                    f"line {lineno}: BSSID column {bssid_s} does not match fingerprint"
                )
            store._insert(
                FingerprintRecord(
                    fingerprint=fp,
                    max_ssi_dbm=max_ssi,
                    label=label,
                    enrolled_at=enrolled_at,
                    updated_at=updated_at,
                )
            )
        return store

    def describe(self) -> list[dict]:
        """JSON-ready view of all records (admin listing)."""
        rows = []
        for record in self.records():
            fp = record.fingerprint
            rows.append(
                {
                    "label": record.label,
                    "bssid": mac_to_str(record.bssid),
                    "ssid": ssid_text(fp.ssid),
                    "max_ssi_dbm": record.max_ssi_dbm,
                    "enrolled_at": record.enrolled_at,
                    "updated_at": record.updated_at,
                    "fingerprint": fingerprint_hash(fp),
                }
            )
        return rows
