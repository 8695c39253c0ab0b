"""Synthetic beacon captures for a genuine AP and its impostors.

Thirteen built-in device profiles model one genuine hardware AP ("CSE")
and twelve impostor sources spanning consumer routers, Linux soft-AP
stacks and phone hotspots.  Each impostor profile encodes which beacon
fields that source can forge and what its non-forgeable defaults look
like; the per-field relationship between every impostor and the genuine
AP is transcribed in DEVICE_COMPARISON_TABLE and checked mechanically by
the test suite.

A scenario places the impostor relative to the genuine AP (colocated,
substituted, or remote), emits interleaved beacon trains with seeded
signal jitter, and returns a pcap capture plus ground-truth labels for
every emitted identity.
"""

import io
import json
import random
from dataclasses import dataclass, field, fields as dc_fields
from enum import Enum
from pathlib import Path

from .detector import VerdictKind, VerdictReason
from .fingerprint import FIELD_NAMES, Fingerprint, fingerprint_hash
from .frames import (
    BeaconFrame,
    InformationElement,
    RadiotapInfo,
    encode_beacon,
    mac_from_str,
    mac_to_str,
    make_beacon_mac,
)
from .pcap import FIXTURE_EPOCH_US, PcapWriter

TU_US = 1024  # one beacon-interval time unit in microseconds
SSI_JITTER_DB = 3
GENUINE_SEQ_START = 100
TWIN_SEQ_START = 2100

DEFAULT_GENUINE_SSI = -50
DEFAULT_TWIN_SSI = -40
DEFAULT_DURATION_S = 5.0

# WPA2-PSK/CCMP robust-security payload used whenever an emitter enables
# security: version 1, group CCMP, pairwise CCMP, AKM PSK, no extra caps.
RSN_WPA2_CCMP = bytes.fromhex("0100000fac040100000fac040100000fac020000")


class InvalidScenario(ValueError):
    """Scenario violates a placement constraint or names nothing to emit."""


class DeviceCategory(Enum):
    HARDWARE = "hardware"
    SOFTWARE = "software"
    MOBILE_HOTSPOT = "mobile_hotspot"


class Placement(Enum):
    COLOCATION = "colocation"
    SUBSTITUTION = "substitution"
    REMOTE_LOCATION = "remote_location"


@dataclass(frozen=True)
class BeaconIdentity:
    """Concrete emission values for the 11 fingerprinted fields."""

    ssid: bytes | None
    bssid: bytes
    beacon_interval: int
    capability_info: int
    supported_rates: bytes | None
    tim_length: int | None
    dtim_period: int | None
    country: bytes | None
    rsn: bytes | None
    extended_rates: bytes | None
    vendor_payloads: tuple = ()

    def __post_init__(self):
        if (self.tim_length is None) != (self.dtim_period is None):
            raise InvalidScenario("tim_length and dtim_period come as a pair")
        if self.tim_length is not None and self.tim_length < 3:
            raise InvalidScenario("tim_length below the 3-byte minimum")

    def fingerprint(self) -> Fingerprint:
        vendor = b"".join(
            InformationElement(221, p).encode() for p in self.vendor_payloads
        )
        return Fingerprint(
            ssid=self.ssid,
            bssid=self.bssid,
            beacon_interval=self.beacon_interval,
            capability_info=self.capability_info,
            supported_rates=self.supported_rates,
            dtim_period=self.dtim_period,
            tim_length=self.tim_length,
            country=self.country,
            extended_rates=self.extended_rates,
            rsn=self.rsn,
            vendor_specific=vendor or None,
        )


IDENTITY_FIELDS = tuple(f.name for f in dc_fields(BeaconIdentity))


@dataclass(frozen=True)
class DeviceProfile:
    """Emission defaults of one beacon source plus its forgeable surface."""

    name: str
    category: DeviceCategory
    defaults: BeaconIdentity
    forgeable: frozenset


def effective_identity(profile: DeviceProfile, forged: dict) -> BeaconIdentity:
    """Apply attacker settings; non-forgeable fields keep the default."""
    values = {name: getattr(profile.defaults, name) for name in IDENTITY_FIELDS}
    for name, value in forged.items():
        if name not in IDENTITY_FIELDS:
            raise InvalidScenario(f"unknown field {name!r} in forged settings")
        if name in profile.forgeable:
            values[name] = value
    return BeaconIdentity(**values)


def _mac(text):
    return mac_from_str(text)


def _rates(*vals):
    return bytes(vals)


CSE_PROFILE = DeviceProfile(
    name="cse",
    category=DeviceCategory.HARDWARE,
    defaults=BeaconIdentity(
        ssid=b"CSE",
        bssid=_mac("dc:a5:f4:3e:10:01"),
        beacon_interval=100,
        capability_info=0x0421,
        supported_rates=_rates(0x82, 0x84, 0x8B, 0x96, 0x24, 0x30, 0x48, 0x6C),
        tim_length=4,
        dtim_period=1,
        country=None,
        rsn=None,
        extended_rates=_rates(0x0C, 0x12, 0x18, 0x60),
        vendor_payloads=(bytes.fromhex("0011220101020304"),),
    ),
    # Same-hardware impostors can spoof addressing and security settings.
    forgeable=frozenset({"ssid", "bssid", "rsn"}),
)

_ET_PROFILES = (
    DeviceProfile(
        name="dlink_dir615",
        category=DeviceCategory.HARDWARE,
        defaults=BeaconIdentity(
            ssid=b"dlink",
            bssid=_mac("28:10:7b:a1:00:01"),
            beacon_interval=100,
            capability_info=0x0401,
            supported_rates=_rates(0x82, 0x84, 0x8B, 0x96, 0x0C, 0x12, 0x18),
            tim_length=4,
            dtim_period=1,
            country=None,
            rsn=None,
            extended_rates=_rates(0x24, 0x30, 0x48, 0x60, 0x6C),
            vendor_payloads=(bytes.fromhex("28107b01aabbcc"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="digisol_hr1400",
        category=DeviceCategory.HARDWARE,
        defaults=BeaconIdentity(
            ssid=b"digisol",
            bssid=_mac("c4:e9:84:b2:00:01"),
            beacon_interval=200,  # shipped default; forged down to 100
            capability_info=0x0001,
            supported_rates=_rates(0x82, 0x84, 0x8B, 0x96, 0x0C, 0x18),
            tim_length=4,
            dtim_period=1,
            country=None,
            rsn=None,
            extended_rates=_rates(0x12, 0x24, 0x60),
            vendor_payloads=(bytes.fromhex("c4e98402010203"),),
        ),
        forgeable=frozenset({"ssid", "bssid", "beacon_interval"}),
    ),
    DeviceProfile(
        name="tplink_wr841n",
        category=DeviceCategory.HARDWARE,
        defaults=BeaconIdentity(
            ssid=b"tplink",
            bssid=_mac("f4:f2:6d:c3:00:01"),
            beacon_interval=100,
            capability_info=0x0421,  # happens to match the genuine AP
            supported_rates=_rates(0x82, 0x84, 0x8B, 0x96, 0x30, 0x48, 0x60, 0x6C),
            tim_length=4,
            dtim_period=1,
            country=None,
            rsn=None,
            extended_rates=_rates(0x0C, 0x12, 0x18, 0x24, 0x60),
            vendor_payloads=(bytes.fromhex("f4f26d0300010203040506"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="mi_3c",
        category=DeviceCategory.HARDWARE,
        defaults=BeaconIdentity(
            ssid=b"mi-router",
            bssid=_mac("64:09:80:d4:00:01"),
            beacon_interval=100,
            capability_info=0x0411,
            supported_rates=_rates(0x82, 0x84, 0x8B, 0x96, 0x24, 0x48),
            tim_length=4,
            dtim_period=3,  # observed off the category default
            country=b"CN\x00\x01\x0d\x14",
            rsn=None,
            extended_rates=_rates(0x0C, 0x18, 0x30, 0x60),
            vendor_payloads=(bytes.fromhex("64098004ffee"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="hostapd",
        category=DeviceCategory.SOFTWARE,
        defaults=BeaconIdentity(
            ssid=b"hostap-net",
            bssid=_mac("02:00:5e:e5:00:01"),
            beacon_interval=110,
            capability_info=0x0401,
            supported_rates=_rates(0x82, 0x84, 0x8B, 0x96),
            tim_length=4,
            dtim_period=2,
            country=None,
            rsn=None,
            extended_rates=None,
            vendor_payloads=(),
        ),
        # hostapd.conf exposes nearly every beacon knob.
        forgeable=frozenset(
            {"ssid", "bssid", "beacon_interval", "supported_rates", "dtim_period", "rsn"}
        ),
    ),
    DeviceProfile(
        name="unity_network_manager",
        category=DeviceCategory.SOFTWARE,
        defaults=BeaconIdentity(
            ssid=b"ubuntu-hotspot",
            bssid=_mac("02:00:5e:e6:00:01"),
            beacon_interval=100,
            capability_info=0x0001,
            supported_rates=_rates(0x82, 0x84, 0x8B, 0x96),
            tim_length=4,
            dtim_period=2,
            country=None,
            rsn=None,
            extended_rates=_rates(0x0C, 0x12, 0x18, 0x24, 0x30, 0x48, 0x60, 0x6C),
            vendor_payloads=(bytes.fromhex("0050f202010100"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="ap_hotspot",
        category=DeviceCategory.SOFTWARE,
        defaults=BeaconIdentity(
            ssid=b"ap-hotspot",
            bssid=_mac("02:00:5e:e7:00:01"),
            beacon_interval=110,
            capability_info=0x0021,
            supported_rates=_rates(0x82, 0x84, 0x8B),
            tim_length=4,
            dtim_period=2,
            country=None,
            rsn=None,
            extended_rates=_rates(0x0C, 0x12, 0x18, 0x24, 0x30),
            vendor_payloads=(bytes.fromhex("0050f2020001"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="aircrack_ng",
        category=DeviceCategory.SOFTWARE,
        defaults=BeaconIdentity(
            ssid=b"airbase",
            bssid=_mac("02:00:5e:e8:00:01"),
            beacon_interval=100,
            capability_info=0x0001,
            supported_rates=_rates(0x82, 0x84, 0x0B, 0x16),
            tim_length=None,  # airbase-ng beacons omit the TIM entirely
            dtim_period=None,
            country=b"US\x00\x01\x0b\x1e",
            rsn=None,
            extended_rates=None,
            vendor_payloads=(),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="sony_xperia_z",
        category=DeviceCategory.MOBILE_HOTSPOT,
        defaults=BeaconIdentity(
            ssid=b"XperiaZ",
            bssid=_mac("30:17:c8:e9:00:01"),
            beacon_interval=100,
            capability_info=0x0411,
            supported_rates=_rates(0x8C, 0x12, 0x98, 0x24),
            tim_length=9,
            dtim_period=2,
            country=None,
            rsn=None,
            extended_rates=_rates(0x30, 0x48, 0x60, 0x6C),
            vendor_payloads=(bytes.fromhex("3017c8010001"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="redmi_note4",
        category=DeviceCategory.MOBILE_HOTSPOT,
        defaults=BeaconIdentity(
            ssid=b"Redmi",
            bssid=_mac("50:64:2b:fa:00:01"),
            beacon_interval=100,
            capability_info=0x0421,  # happens to match the genuine AP
            supported_rates=_rates(0x8C, 0x12, 0x98, 0x24, 0xB0),
            tim_length=9,
            dtim_period=2,
            country=None,
            rsn=None,
            extended_rates=_rates(0x48, 0x60, 0x6C),
            vendor_payloads=(bytes.fromhex("50642b02aabb"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="moto_g5plus",
        category=DeviceCategory.MOBILE_HOTSPOT,
        defaults=BeaconIdentity(
            ssid=b"MotoG5",
            bssid=_mac("40:78:6a:0b:00:01"),
            beacon_interval=100,
            capability_info=0x0401,
            supported_rates=_rates(0x8C, 0x12, 0x98, 0x24, 0xB0, 0x48),
            tim_length=9,
            dtim_period=2,
            country=None,
            rsn=None,
            extended_rates=_rates(0x0C, 0x18, 0x30, 0x60),
            vendor_payloads=(bytes.fromhex("40786a03deadbeef"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
    DeviceProfile(
        name="lenovo_tab_a7",
        category=DeviceCategory.MOBILE_HOTSPOT,
        defaults=BeaconIdentity(
            ssid=b"TabA7",
            bssid=_mac("70:72:0d:1c:00:01"),
            beacon_interval=100,
            capability_info=0x0001,
            supported_rates=_rates(0x8C, 0x12, 0x98, 0x24),
            tim_length=9,
            dtim_period=2,
            country=None,
            rsn=None,
            extended_rates=_rates(0x0C, 0x18, 0x30, 0x48, 0x60),
            vendor_payloads=(bytes.fromhex("70720d04ca"),),
        ),
        forgeable=frozenset({"ssid", "bssid"}),
    ),
)


def builtin_profiles() -> list[DeviceProfile]:
    """The genuine AP followed by the twelve impostor sources."""
    return [CSE_PROFILE, *_ET_PROFILES]


def profiles_by_name() -> dict[str, DeviceProfile]:
    return {p.name: p for p in builtin_profiles()}


# Per-field relation between each impostor's emitted beacon and the genuine
# AP's, under the canonical forge plan.  This transcription is the authority
# the profile constants are tested against.
REL_EQUAL = "equal"  # same value by coincidence of defaults
REL_FORGED = "forged-equal"  # attacker set it to match
REL_DIFFERS = "differs"  # both present, different values
REL_TWIN_ONLY = "twin-only"  # impostor emits it, genuine does not
REL_GENUINE_ONLY = "genuine-only"  # genuine emits it, impostor cannot
REL_ABSENT = "absent-both"

TABLE_COLUMNS = (
    "frame_length",
    "ssid",
    "bssid",
    "beacon_interval",
    "capability_info",
    "supported_rates",
    "tim_length",
    "dtim_period",
    "country",
    "rsn",
    "extended_rates",
    "vendor_specific",
)


def _row(frame_length, ssid, bssid, bi, ci, spr, tim, dtim, country, rsn, esr, ven):
    return dict(
        zip(
            TABLE_COLUMNS,
            (frame_length, ssid, bssid, bi, ci, spr, tim, dtim, country, rsn, esr, ven),
        )
    )


DEVICE_COMPARISON_TABLE = {
    # hardware
    "dlink_dir615": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_DIFFERS, REL_DIFFERS,
        REL_EQUAL, REL_EQUAL, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "digisol_hr1400": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_FORGED, REL_DIFFERS, REL_DIFFERS,
        REL_EQUAL, REL_EQUAL, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "tplink_wr841n": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_EQUAL, REL_DIFFERS,
        REL_EQUAL, REL_EQUAL, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "mi_3c": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_DIFFERS, REL_DIFFERS,
        REL_EQUAL, REL_DIFFERS, REL_TWIN_ONLY, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    # software
    "hostapd": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_FORGED, REL_DIFFERS, REL_FORGED,
        REL_EQUAL, REL_FORGED, REL_ABSENT, REL_ABSENT, REL_GENUINE_ONLY,
        REL_GENUINE_ONLY,
    ),
    "unity_network_manager": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_DIFFERS, REL_DIFFERS,
        REL_EQUAL, REL_DIFFERS, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "ap_hotspot": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_DIFFERS, REL_DIFFERS, REL_DIFFERS,
        REL_EQUAL, REL_DIFFERS, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "aircrack_ng": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_DIFFERS, REL_DIFFERS,
        REL_GENUINE_ONLY, REL_GENUINE_ONLY, REL_TWIN_ONLY, REL_ABSENT,
        REL_GENUINE_ONLY, REL_GENUINE_ONLY,
    ),
    # mobile hotspots
    "sony_xperia_z": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_DIFFERS, REL_DIFFERS,
        REL_DIFFERS, REL_DIFFERS, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "redmi_note4": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_EQUAL, REL_DIFFERS,
        REL_DIFFERS, REL_DIFFERS, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "moto_g5plus": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_DIFFERS, REL_DIFFERS,
        REL_DIFFERS, REL_DIFFERS, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
    "lenovo_tab_a7": _row(
        REL_DIFFERS, REL_FORGED, REL_FORGED, REL_EQUAL, REL_DIFFERS, REL_DIFFERS,
        REL_DIFFERS, REL_DIFFERS, REL_ABSENT, REL_ABSENT, REL_DIFFERS, REL_DIFFERS,
    ),
}


def canonical_forge_plan(profile: DeviceProfile) -> dict:
    """What the attacker sets on this source to impersonate the genuine AP."""
    genuine = CSE_PROFILE.defaults
    plan = {"ssid": genuine.ssid, "bssid": genuine.bssid}
    if profile.name == "digisol_hr1400":
        plan["beacon_interval"] = genuine.beacon_interval
    elif profile.name == "hostapd":
        plan["beacon_interval"] = genuine.beacon_interval
        plan["supported_rates"] = genuine.supported_rates
        plan["dtim_period"] = genuine.dtim_period
    return plan


def compare_identities(
    genuine: BeaconIdentity, twin: BeaconIdentity, forged_keys=()
) -> dict:
    """Observed per-field relation of two emitters, plus frame length."""
    relations = {}
    gen_fp, twin_fp = genuine.fingerprint(), twin.fingerprint()
    for name in FIELD_NAMES:
        g, t = getattr(gen_fp, name), getattr(twin_fp, name)
        if g is None and t is None:
            rel = REL_ABSENT
        elif g is None:
            rel = REL_TWIN_ONLY
        elif t is None:
            rel = REL_GENUINE_ONLY
        elif g == t:
            rel = REL_FORGED if name in forged_keys else REL_EQUAL
        else:
            rel = REL_DIFFERS
        relations[name] = rel
    gen_len = len(build_beacon(genuine, 0, 0, DEFAULT_GENUINE_SSI, 0))
    twin_len = len(build_beacon(twin, 0, 0, DEFAULT_GENUINE_SSI, 0))
    relations["frame_length"] = REL_EQUAL if gen_len == twin_len else REL_DIFFERS
    return relations


def build_beacon(
    identity: BeaconIdentity,
    sequence: int,
    timestamp_us: int,
    ssi_dbm: int,
    dtim_count: int = 0,
) -> bytes:
    """Encode one beacon of this identity; returns the raw packet bytes."""
    elements = []
    if identity.ssid is not None:
        elements.append(InformationElement(0, identity.ssid))
    if identity.supported_rates is not None:
        elements.append(InformationElement(1, identity.supported_rates))
    if identity.tim_length is not None:
        body = bytes([dtim_count, identity.dtim_period, 0])
        body += bytes(identity.tim_length - len(body))
        elements.append(InformationElement(5, body))
    if identity.country is not None:
        elements.append(InformationElement(7, identity.country))
    if identity.rsn is not None:
        elements.append(InformationElement(48, identity.rsn))
    if identity.extended_rates is not None:
        elements.append(InformationElement(50, identity.extended_rates))
    for payload in identity.vendor_payloads:
        elements.append(InformationElement(221, payload))
    frame = BeaconFrame(
        radiotap=RadiotapInfo.for_bits({5}, signal_dbm=ssi_dbm),
        mac=make_beacon_mac(identity.bssid, sequence),
        timestamp=timestamp_us,
        beacon_interval=identity.beacon_interval,
        capability_info=identity.capability_info,
        elements=tuple(elements),
    )
    return encode_beacon(frame)


@dataclass(frozen=True)
class EmitterSpec:
    """One beacon source in a scenario: profile, attacker settings, signal."""

    profile: DeviceProfile
    max_ssi_dbm: int
    forged: dict = field(default_factory=dict)

    def identity(self) -> BeaconIdentity:
        return effective_identity(self.profile, self.forged)


@dataclass(frozen=True)
class GroundTruthLabel:
    bssid: str
    fingerprint: str
    expected: str  # verdict kind value
    reason: str | None
    role: str  # "genuine" | "twin"


@dataclass
class Scenario:
    name: str
    placement: Placement | None  # None: baseline with no impostor
    genuine: EmitterSpec
    twin: EmitterSpec | None = None
    duration_s: float = DEFAULT_DURATION_S
    twin_expected: VerdictKind = VerdictKind.EVIL_TWIN
    twin_expected_reason: VerdictReason | None = None

    @property
    def genuine_emits(self) -> bool:
        return self.placement in (None, Placement.COLOCATION)

    def validate(self):
        if self.placement is not None and self.twin is None:
            raise InvalidScenario(f"{self.name}: placement without a twin emitter")
        if self.placement is None and self.twin is not None:
            raise InvalidScenario(f"{self.name}: twin emitter without a placement")
        if (
            self.placement is Placement.COLOCATION
            and self.twin.max_ssi_dbm <= self.genuine.max_ssi_dbm
        ):
            raise InvalidScenario(
                f"{self.name}: colocated twin must out-shout the genuine AP "
                f"({self.twin.max_ssi_dbm} <= {self.genuine.max_ssi_dbm} dBm)"
            )
        if self.duration_s <= 0:
            raise InvalidScenario(f"{self.name}: duration must be positive")


@dataclass
class SimulationResult:
    capture: bytes
    labels: list
    frame_count: int


def _emit_train(spec: EmitterSpec, role: str, seed, duration_s: float):
    """Beacon train of one emitter: [(timestamp_us, packet bytes)].

    The first frame always carries the emitter's advertised maximum
    signal; later frames jitter downward within SSI_JITTER_DB, so the
    observed maximum equals the curve maximum for any seed.
    """
    rng = random.Random(f"{seed}/{role}")
    identity = spec.identity()
    interval_us = identity.beacon_interval * TU_US
    if interval_us <= 0:
        raise InvalidScenario(f"{role} emitter has a zero beacon interval")
    phase_us = 0 if role == "genuine" else rng.randrange(interval_us)
    seq_start = GENUINE_SEQ_START if role == "genuine" else TWIN_SEQ_START
    duration_us = int(duration_s * 1_000_000)
    packets = []
    k = 0
    while phase_us + k * interval_us < duration_us:
        ts = FIXTURE_EPOCH_US + phase_us + k * interval_us
        ssi = spec.max_ssi_dbm - (0 if k == 0 else rng.randint(0, SSI_JITTER_DB))
        period = identity.dtim_period or 1
        dtim_count = (period - (k % period)) % period
        packets.append(
            (ts, build_beacon(identity, seq_start + k, ts, ssi, dtim_count))
        )
        k += 1
    return packets


def generate(scenario: Scenario, seed=0) -> SimulationResult:
    """Deterministic capture plus ground-truth labels for the scenario."""
    scenario.validate()
    emitters = []
    if scenario.genuine_emits:
        emitters.append(("genuine", scenario.genuine))
    if scenario.twin is not None:
        emitters.append(("twin", scenario.twin))
    if not emitters:
        raise InvalidScenario(f"{scenario.name}: nothing to emit")

    tagged = []
    for order, (role, spec) in enumerate(emitters):
        for ts, packet in _emit_train(spec, role, seed, scenario.duration_s):
            tagged.append((ts, order, packet))
    tagged.sort(key=lambda item: item[:2])
    capture = _packets_to_pcap((ts, packet) for ts, _order, packet in tagged)

    labels_by_key = {}
    for role, spec in emitters:
        fp = spec.identity().fingerprint()
        key = (mac_to_str(fp.bssid), fingerprint_hash(fp))
        if role == "genuine":
            expected, reason = VerdictKind.LEGITIMATE, VerdictReason.EXACT_MATCH
        else:
            expected = scenario.twin_expected
            reason = scenario.twin_expected_reason
        # A twin indistinguishable except by signal collapses onto the
        # genuine identity; the twin's expectation describes the merged row.
        labels_by_key[key] = GroundTruthLabel(
            bssid=key[0],
            fingerprint=key[1],
            expected=expected.value,
            reason=reason.value if reason else None,
            role=role,
        )
    return SimulationResult(
        capture=capture,
        labels=list(labels_by_key.values()),
        frame_count=len(tagged),
    )


def _packets_to_pcap(packets) -> bytes:
    buf = io.BytesIO()
    with PcapWriter(buf) as writer:
        for ts, packet in packets:
            writer.write_packet(packet, ts)
    return buf.getvalue()


def generate_enrollment(scenario: Scenario, seed=0, duration_s: float = 2.0) -> bytes:
    """Trusted-window capture of just the scenario's genuine AP."""
    return _packets_to_pcap(_emit_train(scenario.genuine, "genuine", seed, duration_s))


def scenario_matrix() -> list[Scenario]:
    """Canned scenarios: 12 impostor sources colocated with the genuine AP,
    the three same-hardware cases, the documented substitution blind spot,
    a remote-placement case, and a clean baseline."""
    genuine_open = EmitterSpec(CSE_PROFILE, DEFAULT_GENUINE_SSI)
    genuine_secured = EmitterSpec(
        CSE_PROFILE, DEFAULT_GENUINE_SSI, forged={"rsn": RSN_WPA2_CCMP}
    )
    cse = CSE_PROFILE.defaults
    scenarios = []
    for profile in _ET_PROFILES:
        scenarios.append(
            Scenario(
                name=f"{profile.name}_colocation",
                placement=Placement.COLOCATION,
                genuine=genuine_open,
                twin=EmitterSpec(
                    profile, DEFAULT_TWIN_SSI, forged=canonical_forge_plan(profile)
                ),
                twin_expected=VerdictKind.EVIL_TWIN,
                twin_expected_reason=VerdictReason.FINGERPRINT_MISMATCH_SAME_SSID,
            )
        )
    same_oem_bssid = bytes(cse.bssid[:5]) + bytes([cse.bssid[5] ^ 0x01])
    scenarios += [
        # Same hardware, security left off while the genuine AP runs WPA2.
        Scenario(
            name="same_oem_no_rsn",
            placement=Placement.COLOCATION,
            genuine=genuine_secured,
            twin=EmitterSpec(
                CSE_PROFILE, DEFAULT_TWIN_SSI, forged={"bssid": cse.bssid}
            ),
            twin_expected=VerdictKind.EVIL_TWIN,
            twin_expected_reason=VerdictReason.FINGERPRINT_MISMATCH_SAME_SSID,
        ),
        # Same hardware and security; last BSSID digit nudged to coexist.
        Scenario(
            name="same_oem_bssid_digit",
            placement=Placement.COLOCATION,
            genuine=genuine_secured,
            twin=EmitterSpec(
                CSE_PROFILE,
                DEFAULT_TWIN_SSI,
                forged={"rsn": RSN_WPA2_CCMP, "bssid": same_oem_bssid},
            ),
            twin_expected=VerdictKind.EVIL_TWIN,
            twin_expected_reason=VerdictReason.BSSID_FORGED,
        ),
        # Indistinguishable beacons; only the stronger signal gives it away.
        Scenario(
            name="same_oem_ssi",
            placement=Placement.COLOCATION,
            genuine=genuine_secured,
            twin=EmitterSpec(
                CSE_PROFILE,
                DEFAULT_TWIN_SSI,
                forged={"rsn": RSN_WPA2_CCMP, "bssid": cse.bssid},
            ),
            twin_expected=VerdictKind.EVIL_TWIN,
            twin_expected_reason=VerdictReason.SSI_EXCEEDED,
        ),
        # The documented blind spot: substituted same-model impostor holding
        # the signal level of the AP it replaced passes as legitimate.
        Scenario(
            name="same_oem_substitution_fp",
            placement=Placement.SUBSTITUTION,
            genuine=genuine_secured,
            twin=EmitterSpec(
                CSE_PROFILE,
                DEFAULT_GENUINE_SSI,
                forged={"rsn": RSN_WPA2_CCMP, "bssid": cse.bssid},
            ),
            twin_expected=VerdictKind.LEGITIMATE,
            twin_expected_reason=VerdictReason.EXACT_MATCH,
        ),
        # Remembered-network bait: genuine AP gone, impostor anywhere.
        Scenario(
            name="hostapd_remote",
            placement=Placement.REMOTE_LOCATION,
            genuine=genuine_open,
            twin=EmitterSpec(
                profiles_by_name()["hostapd"],
                DEFAULT_GENUINE_SSI,
                forged=canonical_forge_plan(profiles_by_name()["hostapd"]),
            ),
            twin_expected=VerdictKind.EVIL_TWIN,
            twin_expected_reason=VerdictReason.FINGERPRINT_MISMATCH_SAME_SSID,
        ),
        Scenario(
            name="genuine_only",
            placement=None,
            genuine=genuine_open,
        ),
    ]
    return scenarios


def scenarios_by_name() -> dict[str, Scenario]:
    return {s.name: s for s in scenario_matrix()}


def labels_to_text(labels, header: str = "") -> str:
    """Sidecar format: bssid, fingerprint hash, expected verdict, reason, role."""
    lines = ["# bssid\tfingerprint\texpected\treason\trole"]
    if header:
        lines.insert(0, f"# {header}")
    for label in labels:
        lines.append(
            "\t".join(
                (
                    label.bssid,
                    label.fingerprint,
                    label.expected,
                    label.reason or "-",
                    label.role,
                )
            )
        )
    return "\n".join(lines) + "\n"


def labels_from_text(text: str) -> list[GroundTruthLabel]:
    labels = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        bssid, fp_hash, expected, reason, role = stripped.split("\t")
        labels.append(
            GroundTruthLabel(
                bssid=bssid,
                fingerprint=fp_hash,
                expected=expected,
                reason=None if reason == "-" else reason,
                role=role,
            )
        )
    return labels


def _scenario_from_config(data: dict) -> Scenario:
    """Build a scenario from its declarative JSON form (see README)."""
    profiles = profiles_by_name()

    def emitter(section) -> EmitterSpec:
        profile = profiles.get(section.get("profile"))
        if profile is None:
            raise InvalidScenario(
                f"unknown profile {section.get('profile')!r}; "
                f"valid: {', '.join(sorted(profiles))}"
            )
        forged = {
            key: _forged_value(key, raw)
            for key, raw in (section.get("forged") or {}).items()
        }
        return EmitterSpec(
            profile=profile,
            max_ssi_dbm=int(section.get("max_ssi_dbm", DEFAULT_GENUINE_SSI)),
            forged=forged,
        )

    placement_name = data.get("placement", "colocation")
    placement = None
    if placement_name not in (None, "genuine_only"):
        try:
            placement = Placement(placement_name)
        except ValueError:
            raise InvalidScenario(
                f"unknown placement {placement_name!r}; valid: "
                + ", ".join(p.value for p in Placement)
                + ", genuine_only"
            ) from None
    if "genuine" not in data:
        raise InvalidScenario("scenario config needs a 'genuine' section")
    twin = emitter(data["twin"]) if data.get("twin") else None
    expected = data.get("expected", {})
    scenario = Scenario(
        name=data.get("name", "custom"),
        placement=placement,
        genuine=emitter(data["genuine"]),
        twin=twin,
        duration_s=float(data.get("duration_s", DEFAULT_DURATION_S)),
        twin_expected=VerdictKind(expected.get("twin", "evil_twin")),
        twin_expected_reason=(
            VerdictReason(expected["twin_reason"]) if "twin_reason" in expected else None
        ),
    )
    scenario.validate()
    return scenario


def _forged_value(key: str, raw):
    if key == "ssid":
        return raw.encode() if isinstance(raw, str) else bytes(raw)
    if key == "bssid":
        return mac_from_str(raw)
    if key in ("beacon_interval", "capability_info", "dtim_period", "tim_length"):
        return int(raw)
    if key in ("supported_rates", "extended_rates", "country", "rsn"):
        return bytes.fromhex(raw) if raw is not None else None
    if key == "vendor_payloads":
        return tuple(bytes.fromhex(item) for item in raw)
    raise InvalidScenario(f"unknown forged field {key!r}")


def load_scenario(source) -> Scenario:
    """Load a scenario from a JSON file path or an already-parsed dict."""
    if isinstance(source, dict):
        return _scenario_from_config(source)
    return _scenario_from_config(json.loads(Path(source).read_text(encoding="utf-8")))
