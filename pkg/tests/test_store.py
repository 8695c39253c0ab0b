"""Record registry: replace semantics, signal ceiling, persistence."""

import io

import pytest

from conftest import make_beacon
from twinsentry.detector import VerdictKind, VerdictReason, classify
from twinsentry.detector import Observation
from twinsentry.fingerprint import build_fingerprint
from twinsentry.frames import InformationElement
from twinsentry.store import (
    FingerprintStore,
    StoreFormatError,
    UnknownBssid,
)


def ap_beacon(n: int, ssid=b"CSE", capability=0x0421):
    return make_beacon(
        ssid=ssid, bssid=bytes([0xAA, 0, 0, 0, 0, n]), capability=capability
    )


def test_enroll_then_lookup_by_bssid():
    store = FingerprintStore()
    frame = ap_beacon(1)
    record = store.enroll(frame, -50, "lab")
    assert store.get(frame.bssid) == record
    assert store.lookup_exact(build_fingerprint(frame)) == record


def test_reenroll_replaces_and_updated_at_advances():
    store = FingerprintStore()
    first = store.enroll(ap_beacon(1, capability=0x0421), -50, "lab", now=100.0)
    second = store.enroll(ap_beacon(1, capability=0x0001), -48, "lab", now=200.0)
    assert len(store) == 1
    current = store.get(first.bssid)
    assert current.fingerprint == second.fingerprint
    assert current.fingerprint != first.fingerprint
    assert current.updated_at > first.updated_at


def test_fifty_aps_grow_incrementally():
    store = FingerprintStore()
    seen = []
    for n in range(50):
        before = {r.bssid: r for r in store.records()}
        record = store.enroll(ap_beacon(n, ssid=b"net%d" % n), -60, f"ap{n}")
        seen.append(record)
        after = {r.bssid: r for r in store.records()}
        for bssid, rec in before.items():
            assert after[bssid] == rec  # earlier records untouched
    assert len(store) == 50


def test_update_observation_is_running_max():
    store = FingerprintStore()
    record = store.enroll(ap_beacon(1), -50, "lab")
    store.update_observation(record.bssid, -60)
    assert store.get(record.bssid).max_ssi_dbm == -50
    store.update_observation(record.bssid, -45)
    assert store.get(record.bssid).max_ssi_dbm == -45


def test_update_unknown_bssid():
    store = FingerprintStore()
    with pytest.raises(UnknownBssid):
        store.update_observation(b"\x01" * 6, -40)


def test_monotonic_under_any_update_sequence(rng):
    store = FingerprintStore()
    record = store.enroll(ap_beacon(1), -70, "lab")
    high = -70
    for _ in range(300):
        ssi = rng.randint(-90, -30)
        store.update_observation(record.bssid, ssi)
        high = max(high, ssi)
        assert store.get(record.bssid).max_ssi_dbm == high


def test_stronger_exact_match_never_reaches_the_update_gate():
    # Stored max -50; an exact-identity observation at -45 classifies as an
    # impostor, so the legitimate-only update gate keeps the stored max.
    store = FingerprintStore()
    frame = ap_beacon(1)
    record = store.enroll(frame, -50, "lab")
    obs = Observation(
        fingerprint=build_fingerprint(frame),
        ssi_dbm=-45,
        first_seen_us=0,
        last_seen_us=0,
        frame_count=1,
    )
    verdict = classify(obs, store.snapshot())
    assert verdict.kind is VerdictKind.EVIL_TWIN
    assert verdict.reason is VerdictReason.SSI_EXCEEDED
    if verdict.kind is VerdictKind.LEGITIMATE:  # the gate
        store.update_observation(obs.bssid, obs.ssi_dbm)
    assert store.get(record.bssid).max_ssi_dbm == -50


def test_equal_ssi_is_legitimate_and_noop():
    store = FingerprintStore()
    frame = ap_beacon(1)
    record = store.enroll(frame, -50, "lab")
    obs = Observation(
        fingerprint=build_fingerprint(frame),
        ssi_dbm=-50,
        first_seen_us=0,
        last_seen_us=0,
        frame_count=1,
    )
    verdict = classify(obs, store.snapshot())
    assert verdict.kind is VerdictKind.LEGITIMATE
    store.update_observation(obs.bssid, obs.ssi_dbm)
    assert store.get(record.bssid).max_ssi_dbm == -50


def test_lookup_exact_rejects_one_byte_difference():
    store = FingerprintStore()
    vendor = InformationElement(221, b"\x00\x11\x22\x01")
    frame = make_beacon(elements=[InformationElement(0, b"CSE"), vendor])
    store.enroll(frame, -50, "lab")
    tweaked = make_beacon(
        elements=[
            InformationElement(0, b"CSE"),
            InformationElement(221, b"\x00\x11\x22\x02"),
        ]
    )
    assert store.lookup_exact(build_fingerprint(tweaked)) is None


def test_lookup_exact_rejects_last_bssid_digit():
    store = FingerprintStore()
    frame = make_beacon(bssid=b"\xaa\x00\x00\x00\x00\x01")
    store.enroll(frame, -50, "lab")
    forged = make_beacon(bssid=b"\xaa\x00\x00\x00\x00\x02")
    assert store.lookup_exact(build_fingerprint(forged)) is None


def test_lookup_by_ssid():
    store = FingerprintStore()
    assert store.lookup_by_ssid(b"nope") == []
    a = store.enroll(make_beacon(ssid=b"CSE", bssid=b"\x0a" * 6), -50, "a")
    b = store.enroll(make_beacon(ssid=b"CSE", bssid=b"\x0b" * 6), -55, "b")
    store.enroll(make_beacon(ssid=b"Guest", bssid=b"\x0c" * 6), -60, "c")
    assert store.lookup_by_ssid(b"CSE") == [a, b]
    assert store.lookup_by_ssid(b"cse") == []  # byte equality, case matters


def test_reset_ssi_can_lower():
    store = FingerprintStore()
    record = store.enroll(ap_beacon(1), -40, "lab")
    store.reset_ssi(record.bssid, -70)
    assert store.get(record.bssid).max_ssi_dbm == -70


def test_snapshot_isolated_from_later_writes():
    store = FingerprintStore()
    record = store.enroll(ap_beacon(1), -50, "lab")
    snap = store.snapshot()
    store.update_observation(record.bssid, -40)
    assert snap.get(record.bssid).max_ssi_dbm == -50
    assert store.get(record.bssid).max_ssi_dbm == -40


class TestPersistence:
    def test_empty_round_trip(self, tmp_path):
        path = tmp_path / "store.tsv"
        FingerprintStore().persist(path)
        assert len(FingerprintStore.load(path)) == 0

    def test_fifty_record_round_trip(self, tmp_path):
        store = FingerprintStore()
        for n in range(50):
            store.enroll(ap_beacon(n, ssid=b"net%d" % n), -50 - n % 7, f"ap{n}")
        path = tmp_path / "store.tsv"
        store.persist(path)
        loaded = FingerprintStore.load(path)
        assert loaded.records() == store.records()

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        store = FingerprintStore()
        store.enroll(ap_beacon(1), -50, "lab")
        buf = io.StringIO()
        store.persist(buf)
        text = "# extra comment\n\n" + buf.getvalue()
        loaded = FingerprintStore.load(io.StringIO(text))
        assert loaded.records() == store.records()

    def test_tampered_line_names_the_line(self, tmp_path):
        store = FingerprintStore()
        for n in range(3):
            store.enroll(ap_beacon(n), -50, f"ap{n}")
        path = tmp_path / "store.tsv"
        store.persist(path)
        lines = path.read_text().splitlines()
        lines[2] = lines[2][:-4] + "zzzz"  # corrupt second record's hex
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(StoreFormatError) as err:
            FingerprintStore.load(path)
        assert "line 3" in str(err.value)

    def test_wrong_column_count_names_the_line(self, tmp_path):
        path = tmp_path / "store.tsv"
        path.write_text("# header\nonly\tthree\tcolumns\n")
        with pytest.raises(StoreFormatError) as err:
            FingerprintStore.load(path)
        assert "line 2" in str(err.value)


def test_label_rejects_tabs():
    store = FingerprintStore()
    with pytest.raises(ValueError):
        store.enroll(ap_beacon(1), -50, "bad\tlabel")
