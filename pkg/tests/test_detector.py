"""Classification tests, including equivalence with a brute-force walker
that follows the per-record detection loop literally."""

import dataclasses
import random

from conftest import make_beacon
from twinsentry.detector import (
    Observation,
    VerdictKind,
    VerdictReason,
    aggregate_observations,
    classify,
    classify_capture,
    enroll_capture,
)
from twinsentry.fingerprint import Fingerprint
from twinsentry.pcap import read_capture
from twinsentry.simulator import generate, scenarios_by_name
from twinsentry.store import FingerprintStore

CSE_BSSID = b"\xdc\xa5\xf4\x3e\x10\x01"


def fp(**overrides) -> Fingerprint:
    values = dict(
        ssid=b"CSE",
        bssid=CSE_BSSID,
        beacon_interval=100,
        capability_info=0x0421,
        supported_rates=bytes([0x82, 0x84, 0x8B, 0x96]),
        dtim_period=1,
        tim_length=4,
        country=None,
        extended_rates=b"\x0c\x12",
        rsn=None,
        vendor_specific=b"\xdd\x04\x00\x11\x22\x01",
    )
    values.update(overrides)
    return Fingerprint(**values)


def obs(fingerprint, ssi=-55) -> Observation:
    return Observation(
        fingerprint=fingerprint,
        ssi_dbm=ssi,
        first_seen_us=0,
        last_seen_us=0,
        frame_count=1,
    )


def store_with(*entries) -> FingerprintStore:
    store = FingerprintStore()
    for i, (fingerprint, max_ssi) in enumerate(entries):
        store.enroll_fingerprint(fingerprint, max_ssi, f"rec{i}", now=float(i))
    return store


# ---------------------------------------------------------------------------
# Brute-force oracle: walk every stored record exactly as the detection loop
# is written, collect per-record outcomes, then apply the documented
# aggregation precedence (any exact match first, then any SSID match, else
# unregistered).  Field comparison and tie-breaking are recomputed here from
# the dataclass fields, not shared with the implementation.
# ---------------------------------------------------------------------------


def oracle_walk(observation, records, margin):
    exact, ssid_matching = [], []
    for record in records:
        if observation.fingerprint != record.fingerprint:
            if observation.fingerprint.ssid != record.fingerprint.ssid:
                pass  # this record alone would call the AP unregistered
            else:
                ssid_matching.append(record)
        else:
            exact.append(record)
    if exact:
        record = exact[0]
        ssi = observation.ssi_dbm
        if ssi is not None and ssi > record.max_ssi_dbm + margin:
            return ("evil_twin", "ssi_exceeded", record)
        return ("legitimate", "exact_match", record)
    if ssid_matching:
        def equal_fields(record):
            return sum(
                getattr(observation.fingerprint, f.name)
                == getattr(record.fingerprint, f.name)
                for f in dataclasses.fields(observation.fingerprint)
            )

        best = sorted(
            ssid_matching, key=lambda r: (-equal_fields(r), r.fingerprint.bssid)
        )[0]
        unequal = [
            f.name
            for f in dataclasses.fields(observation.fingerprint)
            if getattr(observation.fingerprint, f.name)
            != getattr(best.fingerprint, f.name)
        ]
        reason = "bssid_forged" if unequal == ["bssid"] else "fingerprint_mismatch_same_ssid"
        return ("evil_twin", reason, best)
    return ("unregistered", "no_ssid_match", None)


def random_fingerprint(rng) -> Fingerprint:
    return Fingerprint(
        ssid=rng.choice([b"CSE", b"CSE", b"Guest", b"lab-net", None]),
        bssid=rng.choice(
            [CSE_BSSID, b"\x0a" * 6, b"\x0b" * 6, b"\x0c" * 6, b"\x0d" * 6]
        ),
        beacon_interval=rng.choice([100, 100, 200]),
        capability_info=rng.choice([0x0421, 0x0001]),
        supported_rates=rng.choice([bytes([0x82, 0x84]), bytes([0x82]), None]),
        dtim_period=rng.choice([1, 2, None]),
        tim_length=rng.choice([4, 9, None]),
        country=rng.choice([None, None, b"IN"]),
        extended_rates=rng.choice([None, b"\x0c"]),
        rsn=rng.choice([None, None, bytes(4)]),
        vendor_specific=rng.choice([None, b"\xdd\x01\x00", b"\xdd\x01\x01"]),
    )


def fix_tim_pair(fingerprint: Fingerprint) -> Fingerprint:
    # keep TIM fields paired the way real beacons produce them
    if (fingerprint.tim_length is None) != (fingerprint.dtim_period is None):
        return dataclasses.replace(fingerprint, tim_length=None, dtim_period=None)
    return fingerprint


class TestClassify:
    def test_exact_match_within_ceiling(self):
        store = store_with((fp(), -50))
        verdict = classify(obs(fp(), ssi=-55), store.snapshot())
        assert verdict.kind is VerdictKind.LEGITIMATE
        assert verdict.reason is VerdictReason.EXACT_MATCH
        assert verdict.matched_record.label == "rec0"

    def test_exact_match_above_ceiling(self):
        store = store_with((fp(), -50))
        verdict = classify(obs(fp(), ssi=-40), store.snapshot())
        assert verdict.kind is VerdictKind.EVIL_TWIN
        assert verdict.reason is VerdictReason.SSI_EXCEEDED

    def test_margin_absorbs_small_excess(self):
        store = store_with((fp(), -50))
        verdict = classify(obs(fp(), ssi=-48), store.snapshot(), ssi_margin_db=3)
        assert verdict.kind is VerdictKind.LEGITIMATE

    def test_fingerprint_mismatch_same_ssid(self):
        store = store_with((fp(), -50))
        impostor = fp(capability_info=0x0001, extended_rates=None)
        verdict = classify(obs(impostor), store.snapshot())
        assert verdict.kind is VerdictKind.EVIL_TWIN
        assert verdict.reason is VerdictReason.FINGERPRINT_MISMATCH_SAME_SSID
        assert verdict.matched_record.fingerprint == fp()

    def test_only_bssid_differs(self):
        store = store_with((fp(), -50))
        forged = fp(bssid=CSE_BSSID[:5] + b"\x02")
        verdict = classify(obs(forged), store.snapshot())
        assert verdict.kind is VerdictKind.EVIL_TWIN
        assert verdict.reason is VerdictReason.BSSID_FORGED

    def test_unknown_ssid_is_unregistered(self):
        store = store_with((fp(), -50))
        verdict = classify(obs(fp(ssid=b"Guest", bssid=b"\x0a" * 6)), store.snapshot())
        assert verdict.kind is VerdictKind.UNREGISTERED
        assert verdict.reason is VerdictReason.NO_SSID_MATCH
        assert verdict.matched_record is None

    def test_empty_store_is_unregistered(self):
        verdict = classify(obs(fp()), FingerprintStore().snapshot())
        assert verdict.kind is VerdictKind.UNREGISTERED

    def test_missing_signal_on_exact_match_is_legitimate(self):
        store = store_with((fp(), -50))
        verdict = classify(obs(fp(), ssi=None), store.snapshot())
        assert verdict.kind is VerdictKind.LEGITIMATE

    def test_tiebreak_most_equal_fields_then_lowest_bssid(self):
        near = fp(bssid=b"\x0b" * 6)
        far = fp(bssid=b"\x0a" * 6, capability_info=0x0001, dtim_period=2)
        store = store_with((far, -50), (near, -50))
        impostor = fp(bssid=b"\x0c" * 6)
        verdict = classify(obs(impostor), store.snapshot())
        assert verdict.matched_record.fingerprint == near
        twins = fp(bssid=b"\x0b" * 6), fp(bssid=b"\x0a" * 6)
        store = store_with(*((t, -50) for t in twins))
        verdict = classify(obs(fp(bssid=b"\x0c" * 6)), store.snapshot())
        assert verdict.matched_record.fingerprint.bssid == b"\x0a" * 6

    def test_ssi_monotonicity(self):
        store = store_with((fp(), -50))
        snapshot = store.snapshot()
        legitimate_at = [
            s
            for s in range(-90, -29)
            if classify(obs(fp(), ssi=s), snapshot).kind is VerdictKind.LEGITIMATE
        ]
        assert legitimate_at == list(range(-90, -49))  # everything <= -50

    def test_oracle_equivalence_randomized(self):
        rng = random.Random(424242)
        agreements = 0
        for _ in range(1000):
            store = FingerprintStore()
            records = []
            for i in range(rng.randint(0, 5)):
                candidate = fix_tim_pair(random_fingerprint(rng))
                if store.get(candidate.bssid) is not None:
                    continue  # one record per BSSID, like enrollment
                records.append(
                    store.enroll_fingerprint(
                        candidate, rng.randint(-80, -40), f"r{i}", now=float(i)
                    )
                )
            observation = obs(
                fix_tim_pair(random_fingerprint(rng)),
                ssi=rng.choice([None, rng.randint(-90, -30)]),
            )
            margin = rng.choice([0, 0, 0, 3])
            verdict = classify(observation, store.snapshot(), ssi_margin_db=margin)
            kind, reason, record = oracle_walk(observation, records, margin)
            assert verdict.kind.value == kind
            assert verdict.reason.value == reason
            if record is None:
                assert verdict.matched_record is None
            else:
                assert verdict.matched_record.fingerprint == record.fingerprint
            agreements += 1
        assert agreements == 1000


class TestClassifyCapture:
    def test_genuine_plus_twin_capture(self):
        scenario = scenarios_by_name()["hostapd_colocation"]
        result = generate(scenario, seed=11)
        store = FingerprintStore()
        store.enroll_fingerprint(
            scenario.genuine.identity().fingerprint(), -50, "CSE", now=0.0
        )
        read = read_capture(result.capture)
        verdicts = classify_capture(
            read.frames, store.snapshot(), timestamps_us=read.timestamps_us
        )
        kinds = sorted(v.kind.value for _o, v in verdicts)
        assert kinds == ["evil_twin", "legitimate"]

    def test_hundred_consecutive_frames_one_observation(self):
        frames = [make_beacon(sequence=1000 + i, signal=-50) for i in range(100)]
        observations = aggregate_observations(frames)
        assert len(observations) == 1
        assert observations[0].frame_count == 1  # dedup ate the train

    def test_empty_capture(self):
        assert classify_capture([], FingerprintStore().snapshot()) == []

    def test_totality_one_verdict_per_identity(self):
        frames = [
            make_beacon(ssid=b"A", bssid=b"\x0a" * 6, sequence=5),
            make_beacon(ssid=b"B", bssid=b"\x0b" * 6, sequence=9),
        ]
        verdicts = classify_capture(frames, FingerprintStore().snapshot())
        assert len(verdicts) == 2

    def test_verdicts_invariant_under_reordering(self):
        scenario = scenarios_by_name()["same_oem_ssi"]
        result = generate(scenario, seed=5)
        store = FingerprintStore()
        store.enroll_fingerprint(
            scenario.genuine.identity().fingerprint(), -50, "CSE", now=0.0
        )
        read = read_capture(result.capture)
        snapshot = store.snapshot()

        def verdict_map(frames, stamps):
            return {
                (o.bssid, o.fingerprint): (v.kind, v.reason)
                for o, v in classify_capture(frames, snapshot, timestamps_us=stamps)
            }

        base = verdict_map(read.frames, read.timestamps_us)
        rng = random.Random(99)
        paired = list(zip(read.frames, read.timestamps_us))
        for _ in range(20):
            rng.shuffle(paired)
            frames, stamps = zip(*paired)
            assert verdict_map(list(frames), list(stamps)) == base

    def test_malformed_tim_frame_becomes_diagnostic(self):
        from twinsentry.frames import InformationElement

        bad = make_beacon(
            elements=[InformationElement(0, b"CSE"), InformationElement(5, b"\x00")]
        )
        diagnostics = []
        verdicts = classify_capture(
            [bad], FingerprintStore().snapshot(), diagnostics=diagnostics
        )
        assert verdicts == []
        assert len(diagnostics) == 1


class TestEnrollCapture:
    def test_distinct_bssids_enrolled_with_max_ssi(self):
        scenario = scenarios_by_name()["genuine_only"]
        result = generate(scenario, seed=2)
        store = FingerprintStore()
        read = read_capture(result.capture)
        records = enroll_capture(store, read, "CSE")
        assert len(records) == 1
        assert records[0].max_ssi_dbm == -50
        assert records[0].fingerprint == scenario.genuine.identity().fingerprint()

    def test_reenrolling_same_capture_is_stable(self):
        scenario = scenarios_by_name()["genuine_only"]
        result = generate(scenario, seed=2)
        store = FingerprintStore()
        read = read_capture(result.capture)
        first = enroll_capture(store, read, "CSE")
        second = enroll_capture(store, read, "CSE")
        assert first == second
