"""Rogue-AP detection by beacon-frame fingerprinting.

Pipeline: decode radiotap beacons from pcap captures, collapse redundant
beacon trains, build 11-field AP identities, classify each observed AP
against a store of genuine identities (exact match, then SSID collision,
then signal ceiling), and counter confirmed impostors with broadcast
deauthentication frames.  A scenario simulator stands in for live radio.
"""

from .detector import (
    Observation,
    Verdict,
    VerdictKind,
    VerdictReason,
    classify,
    classify_capture,
    enroll_capture,
)
from .fingerprint import Fingerprint, build_fingerprint
from .frames import BeaconFrame, DeauthFrame, decode_beacon, encode_beacon, dedup_stream
from .pcap import read_capture, write_capture
from .server import ScanServer, ServerConfig, serve
from .simulator import Scenario, builtin_profiles, generate, scenario_matrix
from .store import FingerprintRecord, FingerprintStore

__version__ = "0.1.0"

__all__ = [
    "BeaconFrame",
    "DeauthFrame",
    "Fingerprint",
    "FingerprintRecord",
    "FingerprintStore",
    "Observation",
    "ScanServer",
    "Scenario",
    "ServerConfig",
    "Verdict",
    "VerdictKind",
    "VerdictReason",
    "build_fingerprint",
    "builtin_profiles",
    "classify",
    "classify_capture",
    "decode_beacon",
    "dedup_stream",
    "encode_beacon",
    "enroll_capture",
    "generate",
    "read_capture",
    "scenario_matrix",
    "serve",
    "write_capture",
]
