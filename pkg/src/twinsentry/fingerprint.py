"""Canonical 11-field AP identity derived from a beacon frame.

The identity concatenates, in fixed order: SSID, BSSID, beacon interval,
capability info, supported rates, DTIM period, TIM length, country,
extended supported rates, RSN, and vendor-specific data.  Load-dependent
bytes (timestamp, sequence number, the TIM's DTIM count and partial
bitmap) are deliberately excluded: they vary between beacons of one AP.

Absent optional fields are an explicit NULL, distinct from a present but
empty value; the serialization tags and length-prefixes every field so two
different identities can never collide.
"""

import hashlib
import struct
from dataclasses import dataclass, fields

from .frames import BeaconFrame, FrameError

IE_SSID = 0
IE_SUPPORTED_RATES = 1
IE_TIM = 5
IE_COUNTRY = 7
IE_RSN = 48
IE_EXTENDED_RATES = 50
IE_VENDOR = 221

TIM_MIN_LEN = 3  # DTIM count, DTIM period, bitmap control

NULL_TAG_FLAG = 0x80


class MalformedTIM(FrameError):
    """TIM element present but shorter than its mandatory three bytes."""


class MalformedRecord(ValueError):
    """Serialized fingerprint bytes do not follow the canonical layout."""


@dataclass(frozen=True)
class Fingerprint:
    """Field order is the canonical serialization order."""

    ssid: bytes | None
    bssid: bytes
    beacon_interval: int
    capability_info: int
    supported_rates: bytes | None
    dtim_period: int | None
    tim_length: int | None
    country: bytes | None
    extended_rates: bytes | None
    rsn: bytes | None
    vendor_specific: bytes | None


FIELD_NAMES = tuple(f.name for f in fields(Fingerprint))
_BYTE_WIDE_FIELDS = {"dtim_period", "tim_length"}
_U16_FIELDS = {"beacon_interval", "capability_info"}
_REQUIRED_FIELDS = {"bssid", "beacon_interval", "capability_info"}


def build_fingerprint(frame: BeaconFrame) -> Fingerprint:
    """Extract the identity fields of a decoded beacon.

    First occurrence wins for single-instance elements; every vendor
    element is kept, concatenated in wire order including its id and
    length bytes so element boundaries stay unambiguous.
    """
    ssid = rates = country = rsn = extended = None
    tim_length = dtim_period = None
    vendor_parts = []
    seen = set()
    for el in frame.elements:
        eid = el.element_id
        if eid == IE_VENDOR:
            vendor_parts.append(el.encode())
            continue
        if eid in seen:
            continue
        if eid == IE_SSID:
            ssid = el.payload
        elif eid == IE_SUPPORTED_RATES:
            rates = el.payload
        elif eid == IE_TIM:
            if len(el.payload) < TIM_MIN_LEN:
                raise MalformedTIM(
                    f"TIM payload of {len(el.payload)} bytes < {TIM_MIN_LEN}"
                )
            tim_length = len(el.payload)
            dtim_period = el.payload[1]
        elif eid == IE_COUNTRY:
            country = el.payload
        elif eid == IE_RSN:
            rsn = el.payload
        elif eid == IE_EXTENDED_RATES:
            extended = el.payload
        else:
            continue
        seen.add(eid)
    return Fingerprint(
        ssid=ssid,
        bssid=frame.bssid,
        beacon_interval=frame.beacon_interval,
        capability_info=frame.capability_info,
        supported_rates=rates,
        dtim_period=dtim_period,
        tim_length=tim_length,
        country=country,
        extended_rates=extended,
        rsn=rsn,
        vendor_specific=b"".join(vendor_parts) if vendor_parts else None,
    )


def _field_bytes(name: str, value) -> bytes | None:
    if value is None:
        return None
    if name in _U16_FIELDS:
        return struct.pack("<H", value)
    if name in _BYTE_WIDE_FIELDS:
        if not 0 <= value <= 255:
            raise MalformedRecord(f"{name} {value} does not fit one byte")
        return bytes([value])
    return bytes(value)


def serialize(fp: Fingerprint) -> bytes:
    """Tagged, length-prefixed canonical encoding; injective by design.

    Segment = tag byte (field index, NULL flag 0x80), big-endian 16-bit
    length, raw field bytes.  Exactly 11 segments, always in field order.
    """
    out = bytearray()
    for index, name in enumerate(FIELD_NAMES):
        value = _field_bytes(name, getattr(fp, name))
        if value is None:
            out += bytes([index | NULL_TAG_FLAG, 0, 0])
        else:
            if len(value) > 0xFFFF:
                raise MalformedRecord(f"{name} longer than 65535 bytes")
            out += bytes([index]) + struct.pack(">H", len(value)) + value
    return bytes(out)


def parse(data: bytes) -> Fingerprint:
    """Inverse of serialize; rejects any deviation from the layout."""
    values = {}
    offset = 0
    for index, name in enumerate(FIELD_NAMES):
        if offset + 3 > len(data):
            raise MalformedRecord(f"record ends inside segment {index} ({name})")
        tag = data[offset]
        length = struct.unpack_from(">H", data, offset + 1)[0]
        offset += 3
        if tag & ~NULL_TAG_FLAG != index:
            raise MalformedRecord(
                f"segment {index} tagged {tag & ~NULL_TAG_FLAG}, expected {name}"
            )
        if tag & NULL_TAG_FLAG:
            if length:
                raise MalformedRecord(f"NULL {name} with nonzero length")
            if name in _REQUIRED_FIELDS:
                raise MalformedRecord(f"{name} cannot be NULL")
            values[name] = None
            continue
        if offset + length > len(data):
            raise MalformedRecord(f"{name} overruns the record")
        raw = data[offset : offset + length]
        offset += length
        if name in _U16_FIELDS:
            if length != 2:
                raise MalformedRecord(f"{name} must be 2 bytes, got {length}")
            values[name] = struct.unpack("<H", raw)[0]
        elif name in _BYTE_WIDE_FIELDS:
            if length != 1:
                raise MalformedRecord(f"{name} must be 1 byte, got {length}")
            values[name] = raw[0]
        elif name == "bssid":
            if length != 6:
                raise MalformedRecord(f"bssid must be 6 bytes, got {length}")
            values[name] = raw
        else:
            values[name] = raw
    if offset != len(data):
        raise MalformedRecord(f"{len(data) - offset} trailing bytes")
    return Fingerprint(**values)


def fingerprint_hash(fp: Fingerprint) -> str:
    """Short stable digest used in reports and label files."""
    return hashlib.sha256(serialize(fp)).hexdigest()[:16]


def ssid_text(ssid: bytes | None) -> str | None:
    """Printable SSID: UTF-8 when it decodes, hex otherwise, None if hidden."""
    if ssid is None:
        return None
    try:
        return ssid.decode("utf-8")
    except UnicodeDecodeError:
        return "0x" + ssid.hex()


def matching_field_count(a: Fingerprint, b: Fingerprint) -> int:
    """How many of the 11 fields agree; NULL only matches NULL."""
    return sum(getattr(a, name) == getattr(b, name) for name in FIELD_NAMES)


def differing_fields(a: Fingerprint, b: Fingerprint) -> tuple[str, ...]:
    return tuple(
        name for name in FIELD_NAMES if getattr(a, name) != getattr(b, name)
    )
