"""Shared builders for codec and pipeline tests."""

import random

import pytest

from twinsentry.frames import (
    BeaconFrame,
    InformationElement,
    MacHeader,
    RadiotapInfo,
    make_beacon_mac,
)


def make_beacon(
    ssid=b"CSE",
    bssid=b"\xdc\xa5\xf4\x3e\x10\x01",
    sequence=100,
    signal=-50,
    timestamp=1_000_000,
    interval=100,
    capability=0x0421,
    elements=None,
) -> BeaconFrame:
    """Small beacon with an SSID element unless elements are given."""
    if elements is None:
        elements = []
        if ssid is not None:
            elements.append(InformationElement(0, ssid))
    bits = {5} if signal is not None else set()
    return BeaconFrame(
        radiotap=RadiotapInfo.for_bits(bits, signal_dbm=signal),
        mac=make_beacon_mac(bssid, sequence),
        timestamp=timestamp,
        beacon_interval=interval,
        capability_info=capability,
        elements=tuple(elements),
    )


def random_beacon(rng: random.Random) -> BeaconFrame:
    """Arbitrary beacon within the type invariants, for round-trip tests."""
    bits = {b for b in range(5) if rng.random() < 0.4}
    signal = None
    if rng.random() < 0.7:
        bits.add(5)
        signal = rng.randint(-128, 0)
    elements = []
    for _ in range(rng.randint(0, 6)):
        eid = rng.choice([0, 1, 3, 5, 7, 48, 50, 221, rng.randint(0, 255)])
        max_len = 32 if eid == 0 else 40
        payload = bytes(rng.randrange(256) for _ in range(rng.randint(0, max_len)))
        elements.append(InformationElement(eid, payload))
    mac = MacHeader(
        frame_control=0x0080 | (rng.randint(0, 3) << 8),  # beacon, random flags
        duration=rng.randint(0, 0xFFFF),
        addr1=bytes(rng.randrange(256) for _ in range(6)),
        addr2=bytes(rng.randrange(256) for _ in range(6)),
        addr3=bytes(rng.randrange(256) for _ in range(6)),
        sequence_number=rng.randint(0, 4095),
        fragment_number=rng.randint(0, 15),
    )
    return BeaconFrame(
        radiotap=RadiotapInfo.for_bits(bits, signal_dbm=signal),
        mac=mac,
        timestamp=rng.randint(0, 2**64 - 1),
        beacon_interval=rng.randint(0, 0xFFFF),
        capability_info=rng.randint(0, 0xFFFF),
        elements=tuple(elements),
    )


@pytest.fixture
def rng():
    return random.Random(20240831)
