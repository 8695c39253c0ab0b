"""Classic pcap ingestion and emission for radiotap link-type captures.

Reads are tolerant: non-beacon packets, corrupt packets and truncated tails
are skipped with a diagnostic, never aborting the stream.  Writes always
emit little-endian classic pcap, link type 127 (IEEE802_11_RADIOTAP).
"""

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

from .frames import BeaconFrame, FrameError, NotABeacon, decode_beacon, encode_beacon

PCAP_MAGIC = 0xA1B2C3D4
LINKTYPE_RADIOTAP = 127
GLOBAL_HEADER_LEN = 24
PACKET_HEADER_LEN = 16
SNAPLEN = 65535

# Capture timestamps for synthetic fixtures sit on a fixed epoch so that
# generated files are byte-stable.
FIXTURE_EPOCH_US = 1_700_000_000 * 1_000_000


class CaptureError(ValueError):
    """Base class for capture-file failures."""


class BadMagic(CaptureError):
    """File does not start with the classic pcap magic."""


class UnsupportedLinkType(CaptureError):
    """Capture link type is not radiotap (127)."""


@dataclass(frozen=True)
class SkipDiagnostic:
    packet_index: int
    reason: str

    def __str__(self):
        return f"packet {self.packet_index}: {self.reason}"


@dataclass
class CaptureRead:
    """Decoded beacons of one capture plus per-packet skip diagnostics."""

    frames: list = field(default_factory=list)
    timestamps_us: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    packet_count: int = 0

    def __iter__(self):
        return iter(self.frames)

    def __len__(self):
        return len(self.frames)


def read_capture(source) -> CaptureRead:
    """Decode every beacon in a classic pcap file, path or binary stream.

    Both byte orders of the magic are accepted.  Non-beacon packets are
    counted and skipped; per-packet decode errors become diagnostics.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as handle:
            return read_capture(handle)
    if isinstance(source, (bytes, bytearray)):
        return read_capture(io.BytesIO(source))

    header = source.read(GLOBAL_HEADER_LEN)
    if len(header) < GLOBAL_HEADER_LEN:
        raise BadMagic("file shorter than the pcap global header")
    magic = struct.unpack_from("<I", header, 0)[0]
    if magic == PCAP_MAGIC:
        order = "<"
    elif struct.unpack_from(">I", header, 0)[0] == PCAP_MAGIC:
        order = ">"
    else:
        raise BadMagic(f"magic 0x{magic:08x} is not classic pcap")
    link_type = struct.unpack_from(order + "I", header, 20)[0]
    if link_type != LINKTYPE_RADIOTAP:
        raise UnsupportedLinkType(f"link type {link_type}, need {LINKTYPE_RADIOTAP}")

    result = CaptureRead()
    index = 0
    while True:
        pkt_header = source.read(PACKET_HEADER_LEN)
        if not pkt_header:
            break
        if len(pkt_header) < PACKET_HEADER_LEN:
            result.skipped.append(SkipDiagnostic(index, "truncated packet header"))
            break
        ts_sec, ts_usec, incl_len, _orig_len = struct.unpack(
            order + "IIII", pkt_header
        )
        data = source.read(incl_len)
        result.packet_count += 1
        if len(data) < incl_len:
            result.skipped.append(SkipDiagnostic(index, "truncated packet body"))
            break
        try:
            frame = decode_beacon(data)
        except NotABeacon as exc:
            result.skipped.append(SkipDiagnostic(index, f"not a beacon: {exc}"))
        except FrameError as exc:
            result.skipped.append(
                SkipDiagnostic(index, f"{type(exc).__name__}: {exc}")
            )
        else:
            result.frames.append(frame)
            result.timestamps_us.append(ts_sec * 1_000_000 + ts_usec)
        index += 1
    return result


class PcapWriter:
    """Appends raw packets to a little-endian classic pcap stream."""

    def __init__(self, target, link_type: int = LINKTYPE_RADIOTAP):
        if isinstance(target, (str, Path)):
            self._handle = open(target, "wb")
            self._owns = True
        else:
            self._handle = target
            self._owns = False
        self._handle.write(
            struct.pack("<IHHiIII", PCAP_MAGIC, 2, 4, 0, 0, SNAPLEN, link_type)
        )

    def write_packet(self, data: bytes, timestamp_us: int):
        # The classic pcap clock is a 32-bit epoch; outsized TSF-derived
        # stamps wrap rather than refuse the write.
        self._handle.write(
            struct.pack(
                "<IIII",
                (timestamp_us // 1_000_000) & 0xFFFFFFFF,
                timestamp_us % 1_000_000,
                len(data),
                len(data),
            )
        )
        self._handle.write(data)

    def close(self):
        if self._owns:
            self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_capture(frames, target, timestamps_us=None):
    """Inverse of read_capture.

    Packet timestamps come from the optional parallel list, else from each
    frame's TSF value.
    """
    frames = list(frames)
    if timestamps_us is not None:
        timestamps_us = list(timestamps_us)
        if len(timestamps_us) != len(frames):
            raise CaptureError("timestamps_us length must match frames")
    with PcapWriter(target) as writer:
        for i, frame in enumerate(frames):
            ts = timestamps_us[i] if timestamps_us is not None else frame.timestamp
            writer.write_packet(encode_beacon(frame), ts)


def capture_to_bytes(frames, timestamps_us=None) -> bytes:
    buf = io.BytesIO()
    write_capture(frames, buf, timestamps_us)
    return buf.getvalue()


def read_packets(source) -> list[tuple[int, bytes]]:
    """Raw (timestamp_us, packet bytes) pairs of a capture, undecoded."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as handle:
            return read_packets(handle)
    if isinstance(source, (bytes, bytearray)):
        return read_packets(io.BytesIO(source))
    header = source.read(GLOBAL_HEADER_LEN)
    if len(header) < GLOBAL_HEADER_LEN:
        raise BadMagic("file shorter than the pcap global header")
    magic = struct.unpack_from("<I", header, 0)[0]
    if magic == PCAP_MAGIC:
        order = "<"
    elif struct.unpack_from(">I", header, 0)[0] == PCAP_MAGIC:
        order = ">"
    else:
        raise BadMagic(f"magic 0x{magic:08x} is not classic pcap")
    packets = []
    while True:
        pkt_header = source.read(PACKET_HEADER_LEN)
        if len(pkt_header) < PACKET_HEADER_LEN:
            break
        ts_sec, ts_usec, incl_len, _ = struct.unpack(order + "IIII", pkt_header)
        data = source.read(incl_len)
        if len(data) < incl_len:
            break
        packets.append((ts_sec * 1_000_000 + ts_usec, data))
    return packets


def merge_reads(reads) -> tuple[list[BeaconFrame], list[int]]:
    """Merge several captures into one frame stream ordered by timestamp.

    Ties keep source order, mirroring the per-channel capture merge of a
    multi-radio sensor.  Returns (frames, capture timestamps).
    """
    tagged = []
    for src_index, read in enumerate(reads):
        for frame_index, frame in enumerate(read.frames):
            ts = read.timestamps_us[frame_index]
            tagged.append((ts, src_index, frame_index, frame))
    tagged.sort(key=lambda item: item[:3])
    return [t[3] for t in tagged], [t[0] for t in tagged]
