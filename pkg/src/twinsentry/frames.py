"""Radiotap-encapsulated 802.11 beacon and deauthentication frame codec.

Decodes and encodes the small slice of IEEE 802.11 needed for beacon
fingerprinting: the radiotap capture header (antenna signal only), the
management-frame MAC header, beacon fixed fields and information elements,
and broadcast deauthentication frames.  Also provides the per-BSSID
sequence-number deduplicator used ahead of fingerprint extraction.
"""

import struct
from dataclasses import dataclass, field

BROADCAST_ADDR = b"\xff\xff\xff\xff\xff\xff"

TYPE_MGMT = 0
SUBTYPE_BEACON = 8
SUBTYPE_DEAUTH = 12

MAC_HEADER_LEN = 24
BEACON_FIXED_LEN = 12  # timestamp(8) + interval(2) + capability(2)
RADIOTAP_PREAMBLE_LEN = 8  # version, pad, length, first present word
SEQ_MODULO = 4096

# Radiotap fields we understand, in present-bit order: bit -> (align, size).
# Antenna signal (bit 5) is the only value we keep; earlier bits are walked
# only to find its offset.
RADIOTAP_BIT_TSFT = 0
RADIOTAP_BIT_FLAGS = 1
RADIOTAP_BIT_RATE = 2
RADIOTAP_BIT_CHANNEL = 3
RADIOTAP_BIT_FHSS = 4
RADIOTAP_BIT_DBM_ANTSIGNAL = 5
RADIOTAP_BIT_EXT = 31

RADIOTAP_FIELD_LAYOUT = {
    RADIOTAP_BIT_TSFT: (8, 8),
    RADIOTAP_BIT_FLAGS: (1, 1),
    RADIOTAP_BIT_RATE: (1, 1),
    RADIOTAP_BIT_CHANNEL: (2, 4),
    RADIOTAP_BIT_FHSS: (1, 2),
    RADIOTAP_BIT_DBM_ANTSIGNAL: (1, 1),
}
RADIOTAP_SUPPORTED_BITS = frozenset(RADIOTAP_FIELD_LAYOUT)


class FrameError(ValueError):
    """Base class for codec failures."""


class TruncatedHeader(FrameError):
    """Radiotap header shorter than its declared or minimum length."""


class TruncatedFrame(FrameError):
    """Frame body ends before the mandatory fixed fields."""


class NotABeacon(FrameError):
    """Management type/subtype bits do not encode a beacon."""


class NotADeauth(FrameError):
    """Management type/subtype bits do not encode a deauthentication."""


class MalformedIE(FrameError):
    """Declared information-element length overruns the frame."""


class FieldOverflow(FrameError):
    """A field value exceeds its on-wire width."""


class UnsupportedPresenceBit(FrameError):
    """Reserved: cannot trigger with the supported radiotap field subset."""


@dataclass(frozen=True)
class RadiotapInfo:
    header_length: int
    present_words: tuple
    signal_dbm: int | None = None

    @classmethod
    def for_bits(cls, bits, signal_dbm=None):
        """Canonical header covering exactly the given present bits.

        bits must be a subset of the supported set; header_length is the
        minimal length the encoder will emit for that subset.
        """
        bits = frozenset(bits)
        unsupported = bits - RADIOTAP_SUPPORTED_BITS
        if unsupported:
            raise FieldOverflow(f"unsupported radiotap bits {sorted(unsupported)}")
        if (signal_dbm is not None) != (RADIOTAP_BIT_DBM_ANTSIGNAL in bits):
            raise FieldOverflow("signal_dbm must be set iff bit 5 is present")
        word = 0
        for b in bits:
            word |= 1 << b
        length = _radiotap_data_end(bits, RADIOTAP_PREAMBLE_LEN)
        return cls(header_length=length, present_words=(word,), signal_dbm=signal_dbm)


@dataclass(frozen=True)
class MacHeader:
    frame_control: int
    duration: int
    addr1: bytes
    addr2: bytes
    addr3: bytes
    sequence_number: int
    fragment_number: int = 0

    @property
    def frame_type(self):
        return (self.frame_control >> 2) & 0x3

    @property
    def frame_subtype(self):
        return (self.frame_control >> 4) & 0xF


@dataclass(frozen=True)
class InformationElement:
    element_id: int
    payload: bytes

    def encode(self):
        if not 0 <= self.element_id <= 255:
            raise FieldOverflow(f"IE id {self.element_id} out of range")
        if len(self.payload) > 255:
            raise FieldOverflow(
                f"IE {self.element_id} payload {len(self.payload)} bytes > 255"
            )
        return bytes([self.element_id, len(self.payload)]) + self.payload


@dataclass(frozen=True)
class BeaconFrame:
    radiotap: RadiotapInfo
    mac: MacHeader
    timestamp: int  # TSF, microseconds
    beacon_interval: int  # time units of 1024 us
    capability_info: int
    elements: tuple = field(default_factory=tuple)

    @property
    def bssid(self):
        return self.mac.addr3

    def first_element(self, element_id):
        for el in self.elements:
            if el.element_id == element_id:
                return el
        return None


@dataclass(frozen=True)
class DeauthFrame:
    mac: MacHeader
    reason_code: int


def mac_to_str(addr: bytes) -> str:
    return ":".join(f"{b:02x}" for b in addr)


def mac_from_str(text: str) -> bytes:
    parts = text.strip().split(":")
    if len(parts) != 6:
        raise FrameError(f"bad MAC address {text!r}")
    try:
        addr = bytes(int(p, 16) for p in parts)
    except ValueError as exc:
        raise FrameError(f"bad MAC address {text!r}") from exc
    if any(int(p, 16) > 0xFF or len(p) > 2 for p in parts):
        raise FrameError(f"bad MAC address {text!r}")
    return addr


def _radiotap_data_end(bits, start):
    """Offset just past the last present field, walking bits in order."""
    cursor = start
    for bit in sorted(bits):
        align, size = RADIOTAP_FIELD_LAYOUT[bit]
        if cursor % align:
            cursor += align - cursor % align
        cursor += size
    return cursor


def decode_radiotap(data: bytes) -> tuple[RadiotapInfo, int]:
    """Parse the radiotap preamble; returns (info, payload offset).

    Only the antenna-signal field (present bit 5) is extracted.  Extra
    present words chained via bit 31 are skipped; unknown bits above 5 in
    the first word never affect bit 5's offset because fields are laid out
    in bit order.
    """
    if len(data) < RADIOTAP_PREAMBLE_LEN:
        raise TruncatedHeader(f"{len(data)} bytes < radiotap preamble")
    header_length = struct.unpack_from("<H", data, 2)[0]
    if header_length < RADIOTAP_PREAMBLE_LEN:
        raise TruncatedHeader(f"declared length {header_length} < preamble")
    if header_length > len(data):
        raise TruncatedHeader(
            f"declared length {header_length} > {len(data)} available bytes"
        )
    words = [struct.unpack_from("<I", data, 4)[0]]
    while words[-1] & (1 << RADIOTAP_BIT_EXT):
        offset = 4 + 4 * len(words)
        if offset + 4 > header_length:
            raise TruncatedHeader("present-word chain overruns header")
        words.append(struct.unpack_from("<I", data, offset)[0])

    signal = None
    first = words[0]
    cursor = 4 + 4 * len(words)
    for bit in range(RADIOTAP_BIT_DBM_ANTSIGNAL + 1):
        if not first & (1 << bit):
            continue
        align, size = RADIOTAP_FIELD_LAYOUT[bit]
        if cursor % align:
            cursor += align - cursor % align
        if cursor + size > header_length:
            break  # field overruns the header; signal stays absent
        if bit == RADIOTAP_BIT_DBM_ANTSIGNAL:
            signal = struct.unpack_from("<b", data, cursor)[0]
        cursor += size
    info = RadiotapInfo(
        header_length=header_length,
        present_words=tuple(words),
        signal_dbm=signal,
    )
    return info, header_length


def encode_radiotap(info: RadiotapInfo) -> bytes:
    """Emit a radiotap header restricted to the supported field subset.

    Fields other than antenna signal carry zero bytes; decode equality only
    inspects header length, present words and the signal.
    """
    if len(info.present_words) != 1:
        raise FieldOverflow("encoder supports a single present word")
    word = info.present_words[0]
    bits = {b for b in range(32) if word & (1 << b)}
    unsupported = bits - RADIOTAP_SUPPORTED_BITS
    if unsupported:
        raise FieldOverflow(f"unsupported radiotap bits {sorted(unsupported)}")
    has_signal = RADIOTAP_BIT_DBM_ANTSIGNAL in bits
    if has_signal != (info.signal_dbm is not None):
        raise FieldOverflow("signal_dbm must be set iff bit 5 is present")
    if info.signal_dbm is not None and not -128 <= info.signal_dbm <= 0:
        raise FieldOverflow(f"signal {info.signal_dbm} dBm outside [-128, 0]")
    minimal = _radiotap_data_end(bits, RADIOTAP_PREAMBLE_LEN)
    if info.header_length != minimal:
        raise FieldOverflow(
            f"header_length {info.header_length} != canonical {minimal}"
        )
    out = bytearray(info.header_length)
    struct.pack_into("<H", out, 2, info.header_length)
    struct.pack_into("<I", out, 4, word)
    cursor = RADIOTAP_PREAMBLE_LEN
    for bit in sorted(bits):
        align, size = RADIOTAP_FIELD_LAYOUT[bit]
        if cursor % align:
            cursor += align - cursor % align
        if bit == RADIOTAP_BIT_DBM_ANTSIGNAL:
            struct.pack_into("<b", out, cursor, info.signal_dbm)
        cursor += size
    return bytes(out)


def _decode_mac_header(data: bytes, offset: int) -> tuple[MacHeader, int]:
    if offset + MAC_HEADER_LEN > len(data):
        raise TruncatedFrame("frame ends inside the MAC header")
    frame_control, duration = struct.unpack_from("<HH", data, offset)
    addr1 = data[offset + 4 : offset + 10]
    addr2 = data[offset + 10 : offset + 16]
    addr3 = data[offset + 16 : offset + 22]
    seq_ctrl = struct.unpack_from("<H", data, offset + 22)[0]
    mac = MacHeader(
        frame_control=frame_control,
        duration=duration,
        addr1=addr1,
        addr2=addr2,
        addr3=addr3,
        sequence_number=seq_ctrl >> 4,
        fragment_number=seq_ctrl & 0xF,
    )
    return mac, offset + MAC_HEADER_LEN


def _encode_mac_header(mac: MacHeader) -> bytes:
    for name in ("addr1", "addr2", "addr3"):
        if len(getattr(mac, name)) != 6:
            raise FieldOverflow(f"{name} must be 6 bytes")
    if not 0 <= mac.sequence_number < SEQ_MODULO:
        raise FieldOverflow(f"sequence number {mac.sequence_number} out of range")
    if not 0 <= mac.fragment_number <= 0xF:
        raise FieldOverflow(f"fragment number {mac.fragment_number} out of range")
    if not 0 <= mac.frame_control <= 0xFFFF or not 0 <= mac.duration <= 0xFFFF:
        raise FieldOverflow("frame control / duration out of range")
    seq_ctrl = (mac.sequence_number << 4) | mac.fragment_number
    return (
        struct.pack("<HH", mac.frame_control, mac.duration)
        + mac.addr1
        + mac.addr2
        + mac.addr3
        + struct.pack("<H", seq_ctrl)
    )


def decode_beacon(data: bytes) -> BeaconFrame:
    """Decode radiotap + management beacon; all tagged IEs kept in order."""
    radiotap, offset = decode_radiotap(data)
    mac, offset = _decode_mac_header(data, offset)
    if mac.frame_type != TYPE_MGMT or mac.frame_subtype != SUBTYPE_BEACON:
        raise NotABeacon(
            f"type {mac.frame_type} subtype {mac.frame_subtype} is not a beacon"
        )
    if offset + BEACON_FIXED_LEN > len(data):
        raise TruncatedFrame("frame ends inside the beacon fixed fields")
    timestamp, interval, capability = struct.unpack_from("<QHH", data, offset)
    offset += BEACON_FIXED_LEN
    elements = []
    while offset < len(data):
        if offset + 2 > len(data):
            raise MalformedIE("dangling IE header byte at end of frame")
        element_id = data[offset]
        length = data[offset + 1]
        if offset + 2 + length > len(data):
            raise MalformedIE(
                f"IE {element_id} declares {length} bytes, frame has "
                f"{len(data) - offset - 2}"
            )
        elements.append(
            InformationElement(element_id, data[offset + 2 : offset + 2 + length])
        )
        offset += 2 + length
    return BeaconFrame(
        radiotap=radiotap,
        mac=mac,
        timestamp=timestamp,
        beacon_interval=interval,
        capability_info=capability,
        elements=tuple(elements),
    )


def encode_beacon(frame: BeaconFrame) -> bytes:
    """Inverse of decode_beacon for frames within the supported subset."""
    if frame.mac.frame_type != TYPE_MGMT or frame.mac.frame_subtype != SUBTYPE_BEACON:
        raise NotABeacon("frame control does not encode a beacon")
    if not 0 <= frame.timestamp < 1 << 64:
        raise FieldOverflow("timestamp exceeds 64 bits")
    if not 0 <= frame.beacon_interval <= 0xFFFF:
        raise FieldOverflow("beacon interval exceeds 16 bits")
    if not 0 <= frame.capability_info <= 0xFFFF:
        raise FieldOverflow("capability info exceeds 16 bits")
    body = bytearray()
    body += struct.pack(
        "<QHH", frame.timestamp, frame.beacon_interval, frame.capability_info
    )
    for el in frame.elements:
        if el.element_id == 0 and len(el.payload) > 32:
            raise FieldOverflow(f"SSID of {len(el.payload)} bytes > 32")
        body += el.encode()
    return encode_radiotap(frame.radiotap) + _encode_mac_header(frame.mac) + bytes(body)


def make_beacon_mac(bssid: bytes, sequence_number: int) -> MacHeader:
    """Broadcast beacon MAC header for an AP: addr2 = addr3 = BSSID."""
    return MacHeader(
        frame_control=0x0080,
        duration=0,
        addr1=BROADCAST_ADDR,
        addr2=bssid,
        addr3=bssid,
        sequence_number=sequence_number % SEQ_MODULO,
    )


def make_deauth(bssid: bytes, reason_code: int = 1, sequence_number: int = 0) -> DeauthFrame:
    """Broadcast deauthentication spoofed from the target BSSID."""
    mac = MacHeader(
        frame_control=0x00C0,
        duration=0,
        addr1=BROADCAST_ADDR,
        addr2=bssid,
        addr3=bssid,
        sequence_number=sequence_number % SEQ_MODULO,
    )
    return DeauthFrame(mac=mac, reason_code=reason_code)


def encode_deauth(frame: DeauthFrame) -> bytes:
    """26-byte deauthentication frame, no radiotap."""
    if frame.mac.frame_type != TYPE_MGMT or frame.mac.frame_subtype != SUBTYPE_DEAUTH:
        raise NotADeauth("frame control does not encode a deauthentication")
    if not 0 <= frame.reason_code <= 0xFFFF:
        raise FieldOverflow("reason code exceeds 16 bits")
    return _encode_mac_header(frame.mac) + struct.pack("<H", frame.reason_code)


def decode_deauth(data: bytes) -> DeauthFrame:
    """Inverse of encode_deauth (bare frame, no radiotap)."""
    mac, offset = _decode_mac_header(data, 0)
    if mac.frame_type != TYPE_MGMT or mac.frame_subtype != SUBTYPE_DEAUTH:
        raise NotADeauth(
            f"type {mac.frame_type} subtype {mac.frame_subtype} is not a deauth"
        )
    if offset + 2 > len(data):
        raise TruncatedFrame("frame ends before the reason code")
    reason = struct.unpack_from("<H", data, offset)[0]
    return DeauthFrame(mac=mac, reason_code=reason)


class SequenceDeduper:
    """Suppresses the redundant beacon train of an AP.

    Per BSSID: a frame whose sequence number is exactly one above the last
    seen (mod 4096) is dropped and the tracker advanced; anything else
    passes and resets the tracker.  The first frame of a BSSID always
    passes.
    """

    def __init__(self):
        self._last_seq = {}

    def accept(self, frame: BeaconFrame) -> bool:
        bssid = frame.bssid
        seq = frame.mac.sequence_number
        last = self._last_seq.get(bssid)
        self._last_seq[bssid] = seq
        if last is None:
            return True
        return seq != (last + 1) % SEQ_MODULO


def dedup_stream(frames):
    """Yield frames surviving per-BSSID consecutive-sequence suppression."""
    deduper = SequenceDeduper()
    for frame in frames:
        if deduper.accept(frame):
            yield frame
