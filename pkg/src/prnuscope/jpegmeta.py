"""Byte-level JPEG segment walking and metadata probes.

No pixel decoding happens here. The scanner walks marker segments up to the
start-of-scan and never reads past a declared length, so it is safe on
hostile input (every failure is a typed error, never a crash).

Two probes sit on top of it: detection of the multi-frame-processing tag
strings some Samsung pipelines write into the proprietary APP4 segment
(``MHDR``, ``LHDR``, ``MFP3``; each tag is written contiguously, so the
search deliberately does not span APP4 segment boundaries), and the EXIF
DigitalZoomRatio rational from the APP1 TIFF structure.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import (
    ExifMalformedError,
    JpegNoSoiError,
    JpegOverrunError,
    JpegReservedMarkerError,
    JpegTruncatedError,
)

MARKER_SOI = 0xD8
MARKER_EOI = 0xD9
MARKER_SOS = 0xDA
MARKER_APP1 = 0xE1
MARKER_APP4 = 0xE4

_STANDALONE = frozenset({0x01, MARKER_SOI} | set(range(0xD0, 0xD8)))

EXIF_PREAMBLE = b"Exif\x00\x00"
TAG_EXIF_IFD = 0x8769
TAG_DIGITAL_ZOOM = 0xA404
TYPE_RATIONAL = 5

MFP_STRINGS = (b"MHDR", b"LHDR", b"MFP3")


@dataclass(frozen=True)
class Segment:
    marker: int  # second marker byte (0xE4 for APP4, ...)
    offset: int  # position of the 0xFF marker byte
    length: int  # payload bytes (declared length minus the 2 length bytes)


@dataclass(frozen=True)
class SegmentList:
    segments: tuple

    def payload(self, data: bytes, segment: Segment) -> bytes:
        start = segment.offset + 4  # 0xFF, marker, 2 length bytes
        return data[start : start + segment.length]

    def with_marker(self, marker: int):
        return [s for s in self.segments if s.marker == marker]


@dataclass(frozen=True)
class MfpTags:
    mhdr: bool
    lhdr: bool
    mfp3: bool
    zoom_ratio: tuple | None = None  # (numerator, denominator)

    @property
    def is_mfp(self) -> bool:
        return self.mhdr or self.lhdr or self.mfp3


def scan_segments(data: bytes) -> SegmentList:
    """Walk marker segments from SOI to SOS/EOI.

    Fill bytes (0xFF padding before a marker code) are tolerated. Markers
    0x00 and 0x02..0xBF are rejected as reserved; a declared length that is
    too small or runs past the file is an overrun; running out of bytes in
    the middle of a marker or header is a truncation. A clean end of data at
    a segment boundary simply ends the walk.
    """
    n = len(data)
    if n < 2 or data[0] != 0xFF or data[1] != MARKER_SOI:
        raise JpegNoSoiError("data does not start with SOI")
    segments = []
    pos = 2
    while pos < n:
        if data[pos] != 0xFF:
            raise JpegReservedMarkerError(
                f"expected a marker at offset {pos}, found 0x{data[pos]:02X}"
            )
        marker_at = pos
        while pos < n and data[pos] == 0xFF:
            pos += 1  # fill bytes
        if pos >= n:
            raise JpegTruncatedError("data ends inside a marker")
        marker = data[pos]
        pos += 1
        if marker == 0x00 or 0x02 <= marker <= 0xBF:
            raise JpegReservedMarkerError(f"reserved marker 0x{marker:02X} at {marker_at}")
        if marker == MARKER_EOI or marker == MARKER_SOS:
            break
        if marker in _STANDALONE:
            segments.append(Segment(marker=marker, offset=marker_at, length=0))
            continue
        if pos + 2 > n:
            raise JpegTruncatedError(f"marker 0x{marker:02X} has no length field")
        declared = struct.unpack(">H", data[pos : pos + 2])[0]
        if declared < 2:
            raise JpegOverrunError(f"marker 0x{marker:02X} declares length {declared} < 2")
        if pos + declared > n:
            raise JpegOverrunError(
                f"marker 0x{marker:02X} length {declared} overruns the file"
            )
        segments.append(Segment(marker=marker, offset=marker_at, length=declared - 2))
        pos += declared
    return SegmentList(segments=tuple(segments))


def detect_mfp(data: bytes) -> MfpTags:
    """Case-sensitive search for the MFP tag strings in APP4 payloads.

    Scanner errors propagate; a present-but-malformed EXIF structure only
    degrades the zoom ratio to None.
    """
    segs = scan_segments(data)
    found = dict.fromkeys(MFP_STRINGS, False)
    for seg in segs.with_marker(MARKER_APP4):
        payload = segs.payload(data, seg)
        for needle in MFP_STRINGS:
            if not found[needle] and needle in payload:
                found[needle] = True
    try:
        zoom = parse_zoom(data, _segments=segs)
    except ExifMalformedError:
        zoom = None
    return MfpTags(
        mhdr=found[b"MHDR"],
        lhdr=found[b"LHDR"],
        mfp3=found[b"MFP3"],
        zoom_ratio=zoom,
    )


def _reader(blob: bytes, big_endian: bool):
    prefix = ">" if big_endian else "<"

    def read(fmt: str, at: int):
        size = struct.calcsize(prefix + fmt)
        if at < 0 or at + size > len(blob):
            raise ExifMalformedError(f"TIFF read of {size} bytes at {at} out of range")
        return struct.unpack(prefix + fmt, blob[at : at + size])

    return read


def parse_zoom(data: bytes, _segments: SegmentList | None = None) -> tuple | None:
    """DigitalZoomRatio from the EXIF APP1 segment, as (numerator, denominator).

    Returns None when no EXIF APP1 or no such tag is present; raises
    ExifMalformedError when the TIFF structure itself is broken.
    """
    segs = scan_segments(data) if _segments is None else _segments
    tiff = None
    for seg in segs.with_marker(MARKER_APP1):
        payload = segs.payload(data, seg)
        if payload.startswith(EXIF_PREAMBLE):
            tiff = payload[len(EXIF_PREAMBLE) :]
            break
    if tiff is None:
        return None
    if len(tiff) < 8:
        raise ExifMalformedError("TIFF header truncated")
    order = tiff[:2]
    if order == b"II":
        big_endian = False
    elif order == b"MM":
        big_endian = True
    else:
        raise ExifMalformedError(f"unknown TIFF byte order {order!r}")
    read = _reader(tiff, big_endian)
    (magic,) = read("H", 2)
    if magic != 42:
        raise ExifMalformedError(f"bad TIFF magic {magic}")
    (ifd0_at,) = read("I", 4)

    def find_tag(ifd_at: int, wanted: int):
        (count,) = read("H", ifd_at)
        for i in range(count):
            entry_at = ifd_at + 2 + 12 * i
            tag, etype, ecount = read("HHI", entry_at)
            if tag == wanted:
                return entry_at, etype, ecount
        return None

    exif_entry = find_tag(ifd0_at, TAG_EXIF_IFD)
    if exif_entry is None:
        return None
    (exif_ifd_at,) = read("I", exif_entry[0] + 8)
    zoom_entry = find_tag(exif_ifd_at, TAG_DIGITAL_ZOOM)
    if zoom_entry is None:
        return None
    entry_at, etype, ecount = zoom_entry
    if etype != TYPE_RATIONAL or ecount < 1:
        raise ExifMalformedError(
            f"DigitalZoomRatio has type {etype}, count {ecount}; expected RATIONAL"
        )
    (value_at,) = read("I", entry_at + 8)
    numerator, denominator = read("II", value_at)
    return int(numerator), int(denominator)
