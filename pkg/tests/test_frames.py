"""Codec tests: radiotap offsets against a byte-walk oracle, frame
round-trips, and the sequence-number deduplicator."""

import random
import struct

import pytest

from conftest import make_beacon, random_beacon
from twinsentry.frames import (
    BROADCAST_ADDR,
    FieldOverflow,
    InformationElement,
    MalformedIE,
    NotABeacon,
    RadiotapInfo,
    TruncatedFrame,
    TruncatedHeader,
    decode_beacon,
    decode_deauth,
    decode_radiotap,
    dedup_stream,
    encode_beacon,
    encode_deauth,
    encode_radiotap,
    mac_from_str,
    mac_to_str,
    make_beacon_mac,
    make_deauth,
)

# Independent transcription of the radiotap field layout for the oracle:
# bit -> (alignment, size), alignment relative to the header start.
ORACLE_LAYOUT = {0: (8, 8), 1: (1, 1), 2: (1, 1), 3: (2, 4), 4: (1, 2), 5: (1, 1)}


def oracle_build_header(bits, signal_byte=0xBA):
    """Byte-walk construction of a radiotap header for a present-bit set.

    Returns (header bytes, offset of the signal byte or None).  Fields
    other than the signal are filled with 0x11 so a wrong offset cannot
    accidentally read the right value.
    """
    data = bytearray(8)
    present = 0
    for bit in bits:
        present |= 1 << bit
    struct.pack_into("<I", data, 4, present)
    cursor = 8
    signal_offset = None
    for bit in sorted(bits):
        align, size = ORACLE_LAYOUT[bit]
        while cursor % align:
            data.append(0x00)
            cursor += 1
        if bit == 5:
            signal_offset = cursor
            data.append(signal_byte)
        else:
            data.extend([0x11] * size)
        cursor += size if bit != 5 else 1
    struct.pack_into("<H", data, 2, len(data))
    return bytes(data), signal_offset


class TestRadiotap:
    def test_empty_present_mask(self):
        header = bytes((0, 0, 8, 0, 0, 0, 0, 0))
        info, offset = decode_radiotap(header)
        assert info.signal_dbm is None
        assert offset == 8
        assert info.present_words == (0,)

    def test_signal_only(self):
        # length 9, just the antenna-signal bit, value 0xC5 = -59 dBm
        header = bytes((0, 0, 9, 0, 0x20, 0, 0, 0, 0xC5))
        info, offset = decode_radiotap(header)
        assert info.signal_dbm == -59
        assert offset == 9

    def test_rate_channel_signal_layout(self):
        # Golden bytes frozen from the byte-walk oracle: rate at 8, pad at
        # 9, channel at 10..13 (2-aligned), signal at 14, length 15.
        golden = bytes(
            (0, 0, 15, 0, 0x2C, 0, 0, 0, 0x02, 0x00, 0x6C, 0x09, 0xA0, 0x00, 0xBA)
        )
        oracle_bytes, signal_offset = oracle_build_header({2, 3, 5})
        assert len(oracle_bytes) == 15
        assert signal_offset == 14
        info, offset = decode_radiotap(golden)
        assert info.signal_dbm == -70
        assert offset == 15

    @pytest.mark.parametrize("mask", range(64))
    def test_offsets_match_byte_walk_oracle(self, mask):
        bits = {b for b in range(6) if mask & (1 << b)}
        header, signal_offset = oracle_build_header(bits, signal_byte=0x98)
        info, offset = decode_radiotap(header)
        assert offset == len(header)
        if 5 in bits:
            assert signal_offset is not None
            assert info.signal_dbm == struct.unpack("<b", b"\x98")[0]
        else:
            assert info.signal_dbm is None

    def test_encoder_agrees_with_oracle(self):
        for mask in range(64):
            bits = {b for b in range(6) if mask & (1 << b)}
            signal = -70 if 5 in bits else None
            encoded = encode_radiotap(RadiotapInfo.for_bits(bits, signal))
            oracle_bytes, _ = oracle_build_header(bits)
            assert len(encoded) == len(oracle_bytes)
            info, _ = decode_radiotap(encoded)
            assert info.signal_dbm == signal

    def test_extended_present_word_shifts_data(self):
        # bit 31 chains a second word; data starts at 12, signal bit in the
        # first word is still honored.
        first = (1 << 5) | (1 << 31)
        header = struct.pack("<BBHII", 0, 0, 13, first, 0) + b"\xc5"
        info, offset = decode_radiotap(header)
        assert info.present_words == (first, 0)
        assert info.signal_dbm == -59
        assert offset == 13

    def test_unknown_high_bits_do_not_block_signal(self):
        present = (1 << 5) | (1 << 14) | (1 << 20)
        header = struct.pack("<BBHI", 0, 0, 12, present) + b"\xc5\x00\x00\x00"
        info, _ = decode_radiotap(header)
        assert info.signal_dbm == -59

    def test_signal_overrunning_header_is_absent(self):
        # bit 5 set but the declared length stops before its byte
        header = struct.pack("<BBHI", 0, 0, 8, 1 << 5)
        info, _ = decode_radiotap(header)
        assert info.signal_dbm is None

    def test_truncated_errors(self):
        with pytest.raises(TruncatedHeader):
            decode_radiotap(b"\x00\x00\x08")
        with pytest.raises(TruncatedHeader):
            decode_radiotap(bytes((0, 0, 200, 0, 0, 0, 0, 0)))
        with pytest.raises(TruncatedHeader):
            decode_radiotap(bytes((0, 0, 4, 0, 0, 0, 0, 0)))

    def test_encode_rejects_unsupported_bits(self):
        info = RadiotapInfo(header_length=12, present_words=(1 << 7,), signal_dbm=None)
        with pytest.raises(FieldOverflow):
            encode_radiotap(info)


class TestBeaconCodec:
    def test_minimal_ssid_beacon(self):
        frame = make_beacon(ssid=b"CSE")
        decoded = decode_beacon(encode_beacon(frame))
        assert decoded.elements == (InformationElement(0, b"CSE"),)
        assert decoded == frame

    def test_seven_standard_elements_in_order(self):
        # identifiers: SSID 0, rates 1, TIM 5, country 7, RSN 48,
        # extended rates 50, vendor 221
        elements = [
            InformationElement(0, b"CSE"),
            InformationElement(1, bytes([0x82, 0x84])),
            InformationElement(5, bytes([0, 1, 0, 0])),
            InformationElement(7, b"IN\x00"),
            InformationElement(48, bytes(20)),
            InformationElement(50, bytes([0x0C])),
            InformationElement(221, b"\x00\x11\x22\x01"),
        ]
        frame = make_beacon(elements=elements)
        decoded = decode_beacon(encode_beacon(frame))
        assert [el.element_id for el in decoded.elements] == [0, 1, 5, 7, 48, 50, 221]
        assert decoded.elements == tuple(elements)

    def test_default_interval_is_102_4_ms(self):
        frame = make_beacon(interval=0x0064)
        decoded = decode_beacon(encode_beacon(frame))
        assert decoded.beacon_interval == 100
        assert decoded.beacon_interval * 1024 / 1000 == pytest.approx(102.4)

    def test_no_elements_body_is_twelve_bytes(self):
        frame = make_beacon(ssid=None, signal=None, elements=[])
        encoded = encode_beacon(frame)
        assert len(encoded) == frame.radiotap.header_length + 24 + 12

    def test_ssid_length_boundary(self):
        ok = make_beacon(ssid=b"x" * 32)
        assert decode_beacon(encode_beacon(ok)).elements[0].payload == b"x" * 32
        with pytest.raises(FieldOverflow):
            encode_beacon(make_beacon(ssid=b"x" * 33))

    def test_duplicate_elements_retained(self):
        elements = [
            InformationElement(221, b"\x00\x11\x22\x01"),
            InformationElement(221, b"\x00\x50\xf2\x02"),
        ]
        decoded = decode_beacon(encode_beacon(make_beacon(elements=elements)))
        assert decoded.elements == tuple(elements)

    def test_not_a_beacon(self):
        frame = make_beacon()
        encoded = bytearray(encode_beacon(frame))
        encoded[frame.radiotap.header_length] = 0x08  # data frame
        with pytest.raises(NotABeacon):
            decode_beacon(bytes(encoded))

    def test_malformed_ie_overrun(self):
        frame = make_beacon(ssid=b"CSE")
        encoded = bytearray(encode_beacon(frame))
        # SSID length byte is right after the fixed fields
        encoded[frame.radiotap.header_length + 24 + 12 + 1] = 200
        with pytest.raises(MalformedIE):
            decode_beacon(bytes(encoded))

    def test_dangling_ie_header(self):
        frame = make_beacon(ssid=None, elements=[])
        encoded = encode_beacon(frame) + b"\x00"
        with pytest.raises(MalformedIE):
            decode_beacon(encoded)

    def test_truncated_fixed_fields(self):
        frame = make_beacon(ssid=None, elements=[])
        encoded = encode_beacon(frame)
        with pytest.raises(TruncatedFrame):
            decode_beacon(encoded[:-4])

    def test_round_trip_randomized(self, rng):
        for _ in range(1000):
            frame = random_beacon(rng)
            assert decode_beacon(encode_beacon(frame)) == frame


class TestDeauthCodec:
    def test_field_placement(self):
        bssid = mac_from_str("aa:bb:cc:dd:ee:01")
        frame = make_deauth(bssid, reason_code=1)
        assert frame.mac.addr1 == BROADCAST_ADDR
        assert frame.mac.addr2 == bssid
        assert frame.mac.addr3 == bssid

    def test_reason_code_endianness(self):
        frame = make_deauth(mac_from_str("aa:bb:cc:dd:ee:01"), reason_code=0x0007)
        assert encode_deauth(frame)[-2:] == b"\x07\x00"

    def test_round_trip(self):
        frame = make_deauth(mac_from_str("aa:bb:cc:dd:ee:01"), 7, sequence_number=77)
        encoded = encode_deauth(frame)
        assert len(encoded) == 26
        assert decode_deauth(encoded) == frame

    def test_decode_rejects_beacon(self):
        from twinsentry.frames import _encode_mac_header

        data = _encode_mac_header(make_beacon_mac(b"\x01" * 6, 0)) + b"\x01\x00"
        with pytest.raises(Exception):
            decode_deauth(data)


class TestMacText:
    def test_round_trip(self):
        assert mac_to_str(mac_from_str("DC:A5:F4:3E:10:01")) == "dc:a5:f4:3e:10:01"

    @pytest.mark.parametrize("bad", ["", "aa:bb:cc", "aa:bb:cc:dd:ee:zz", "aabbccddeeff"])
    def test_bad_input(self, bad):
        with pytest.raises(Exception):
            mac_from_str(bad)


def beacons_with_sequences(pairs):
    """[(bssid byte, seq), ...] -> beacon list with distinct BSSIDs by byte."""
    return [
        make_beacon(bssid=bytes([b]) * 6, sequence=seq, ssid=b"CSE")
        for b, seq in pairs
    ]


class TestDedup:
    def test_consecutive_train_collapses(self):
        frames = beacons_with_sequences([(1, s) for s in (10, 11, 12, 13)])
        out = list(dedup_stream(frames))
        assert [f.mac.sequence_number for f in out] == [10]

    def test_gap_breaks_the_chain(self):
        frames = beacons_with_sequences([(1, 10), (1, 12)])
        assert len(list(dedup_stream(frames))) == 2

    def test_wraparound_is_consecutive(self):
        frames = beacons_with_sequences([(1, 4095), (1, 0)])
        assert len(list(dedup_stream(frames))) == 1

    def test_trackers_are_per_bssid(self):
        frames = beacons_with_sequences(
            [(1, 10), (2, 500), (1, 11), (2, 501), (1, 12), (2, 502)]
        )
        out = list(dedup_stream(frames))
        assert len(out) == 2
        assert {f.bssid[0] for f in out} == {1, 2}

    def test_first_frame_per_bssid_always_passes(self, rng):
        for _ in range(200):
            pairs = [
                (rng.randint(1, 3), rng.randint(0, 4095)) for _ in range(rng.randint(1, 30))
            ]
            frames = beacons_with_sequences(pairs)
            out = list(dedup_stream(frames))
            seen_in = {f.bssid for f in frames}
            seen_out = {f.bssid for f in out}
            assert seen_in == seen_out

    def test_idempotent_on_emitter_streams(self, rng):
        # Real emitters move their counter forward: consecutive runs with
        # occasional jumps, never repeating a number within the window.
        for _ in range(300):
            pairs = []
            counters = {b: rng.randint(0, 4095) for b in (1, 2)}
            for _ in range(rng.randint(1, 60)):
                b = rng.choice((1, 2))
                counters[b] = (counters[b] + rng.choice((1, 1, 1, 2, 7))) % 4096
                pairs.append((b, counters[b]))
            frames = beacons_with_sequences(pairs)
            once = list(dedup_stream(frames))
            twice = list(dedup_stream(once))
            assert twice == once
