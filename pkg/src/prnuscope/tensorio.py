"""Image/tensor ingestion, dataset manifests, and geometric primitives.

Supported containers:

* binary PNM (``P5`` grayscale / ``P6`` RGB, maxval 255 or 65535, 16-bit
  samples big-endian per PNM convention),
* FPT, a minimal lossless float tensor: magic ``FPT1``, three little-endian
  u32 (height, width, channels), then float32 little-endian samples in
  row-major, channel-interleaved order.

Manifests are UTF-8 lines ``path<TAB>role<TAB>label<TAB>tag1,tag2`` with
``#`` comments; the tag field may be empty.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadArgumentError,
    DuplicatePathError,
    MalformedHeaderError,
    TruncatedPayloadError,
    UnreadableFileError,
    UnsupportedFormatError,
    UnwritablePathError,
    VocabularyError,
)

# Luma weights pinned to ITU-R BT.601; recorded in every CLI report.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)
LUMA_CONVENTION = "bt601"

FPT_MAGIC = b"FPT1"

ROLES = frozenset({"reference", "test"})
LABELS = frozenset({"genuine", "impostor"})
TAGS = frozenset({"mfp", "zoom", "bokeh", "raw"})


@dataclass(frozen=True)
class Image:
    """Integer pixel grid with bit depth and a free-form provenance tag."""

    pixels: np.ndarray  # (H, W, C) uint8 or uint16
    depth: int  # 8 or 16
    source_tag: str = ""

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise BadArgumentError("pixels must be (H, W, C) with C in {1, 3}")
        if self.depth not in (8, 16):
            raise BadArgumentError("depth must be 8 or 16")
        expected = np.uint8 if self.depth == 8 else np.uint16
        if px.dtype != expected:
            raise BadArgumentError(
                f"dtype {px.dtype} does not match depth {self.depth}"
            )

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def max_value(self) -> int:
        return (1 << self.depth) - 1


def as_plane(values) -> np.ndarray:
    """Validate and return a 2-D float64 plane (finite values only)."""
    p = np.asarray(values, dtype=np.float64)
    if p.ndim != 2:
        raise BadArgumentError("plane must be 2-D")
    if not np.all(np.isfinite(p)):
        raise BadArgumentError("plane contains non-finite values")
    return np.ascontiguousarray(p)


# ---------------------------------------------------------------------------
# PNM
# ---------------------------------------------------------------------------


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}") from exc


def _pnm_header_tokens(data: bytes, count: int):
    """Return `count` whitespace-separated tokens after the magic, honouring
    '#' comments, plus the offset of the first payload byte."""
    tokens = []
    pos = 2  # past magic
    n = len(data)
    while len(tokens) < count:
        # skip whitespace and comments
        while pos < n:
            b = data[pos]
            if b in b" \t\r\n":
                pos += 1
            elif b == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < n and data[pos] not in b" \t\r\n":
            pos += 1
        if start == pos:
            raise MalformedHeaderError("PNM header ended prematurely")
        tokens.append(data[start:pos])
    if pos >= n:
        raise MalformedHeaderError("PNM header has no payload delimiter")
    pos += 1  # single whitespace byte between maxval and payload
    return tokens, pos


def _load_pnm(data: bytes, path, source_tag: str) -> Image:
    magic = data[:2]
    channels = 1 if magic == b"P5" else 3
    tokens, payload_at = _pnm_header_tokens(data, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHeaderError(f"non-numeric PNM header in {path}") from exc
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(f"bad PNM dimensions in {path}")
    if maxval == 255:
        depth, dtype, itemsize = 8, np.uint8, 1
    elif maxval == 65535:
        depth, dtype, itemsize = 16, np.dtype(">u2"), 2
    else:
        raise UnsupportedFormatError(f"unsupported PNM maxval {maxval} in {path}")
    need = height * width * channels * itemsize
    payload = data[payload_at : payload_at + need]
    if len(payload) < need:
        raise TruncatedPayloadError(
            f"{path}: expected {need} payload bytes, found {len(payload)}"
        )
    samples = np.frombuffer(payload, dtype=dtype).astype(
        np.uint8 if depth == 8 else np.uint16
    )
    pixels = samples.reshape(height, width, channels)
    return Image(pixels=pixels, depth=depth, source_tag=source_tag)


def _save_pnm(img: Image, path) -> None:
    magic = b"P5" if img.channels == 1 else b"P6"
    header = b"%s\n%d %d\n%d\n" % (magic, img.width, img.height, img.max_value)
    if img.depth == 8:
        payload = img.pixels.tobytes()
    else:
        payload = img.pixels.astype(">u2").tobytes()
    _write_bytes(path, header + payload)


def _write_bytes(path, blob: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise UnwritablePathError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# FPT float tensors
# ---------------------------------------------------------------------------


def save_fpt(values, path) -> None:
    """Write a float32 tensor; accepts (H, W) or (H, W, C)."""
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise BadArgumentError("FPT tensors must be 2-D or 3-D")
    h, w, c = arr.shape
    header = FPT_MAGIC + struct.pack("<III", h, w, c)
    _write_bytes(path, header + np.ascontiguousarray(arr).astype("<f4").tobytes())


def load_fpt(path) -> np.ndarray:
    """Read an FPT tensor; returns (H, W) when single-channel, else (H, W, C)."""
    data = _read_bytes(path)
    if data[:4] != FPT_MAGIC:
        raise UnsupportedFormatError(f"{path} is not an FPT tensor")
    if len(data) < 16:
        raise MalformedHeaderError(f"{path}: FPT header truncated")
    h, w, c = struct.unpack("<III", data[4:16])
    if h == 0 or w == 0 or c == 0:
        raise MalformedHeaderError(f"{path}: degenerate FPT dimensions")
    need = h * w * c * 4
    if len(data) < 16 + need:
        raise TruncatedPayloadError(f"{path}: FPT payload truncated")
    arr = np.frombuffer(data[16 : 16 + need], dtype="<f4").astype(np.float32)
    arr = arr.reshape(h, w, c)
    return arr[:, :, 0] if c == 1 else arr


def save_plane(plane, path) -> None:
    save_fpt(as_plane(plane).astype(np.float32), path)


def load_plane(path) -> np.ndarray:
    arr = load_fpt(path)
    if arr.ndim != 2:
        raise UnsupportedFormatError(f"{path} holds {arr.shape[2]} channels, not a plane")
    return as_plane(arr)


# ---------------------------------------------------------------------------
# Image entry points
# ---------------------------------------------------------------------------


def load_image(path, source_tag: str | None = None) -> Image:
    """Load a PNM (P5/P6) or FPT file as an Image.

    FPT inputs must hold integral samples in [0, 65535]; depth is inferred
    (8 when all samples fit a byte, else 16). PNM round-trips are bit-exact.
    """
    tag = os.fspath(path) if source_tag is None else source_tag
    data = _read_bytes(path)
    magic = data[:2]
    if magic in (b"P5", b"P6"):
        return _load_pnm(data, path, tag)
    if data[:4] == FPT_MAGIC:
        arr = load_fpt(path)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.shape[2] not in (1, 3):
            raise UnsupportedFormatError(f"{path}: FPT channel count unsupported as image")
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr) or arr.min() < 0 or arr.max() > 65535:
            raise UnsupportedFormatError(f"{path}: FPT samples are not image integers")
        depth = 8 if arr.max() <= 255 else 16
        pixels = rounded.astype(np.uint8 if depth == 8 else np.uint16)
        return Image(pixels=pixels, depth=depth, source_tag=tag)
    raise UnsupportedFormatError(f"{path}: unrecognized image container")


def save_image(img: Image, path) -> None:
    """Write PNM by default; paths ending in ``.fpt`` get the float container."""
    if os.fspath(path).endswith(".fpt"):
        save_fpt(img.pixels.astype(np.float32), path)
    else:
        _save_pnm(img, path)


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def to_luma(img: Image) -> np.ndarray:
    """Single plane from an image: identity cast for grayscale, BT.601 for RGB."""
    if img.channels == 1:
        return img.pixels[:, :, 0].astype(np.float64)
    if img.channels == 3:
        px = img.pixels.astype(np.float64)
        r, g, b = LUMA_WEIGHTS
        return r * px[:, :, 0] + g * px[:, :, 1] + b * px[:, :, 2]
    raise BadArgumentError("unsupported channel count")


def analysis_luma(img: Image) -> np.ndarray:
    """Luma on the 8-bit scale: 16-bit samples are divided by 257 so the
    denoiser's noise sigma keeps a single meaning."""
    luma = to_luma(img)
    if img.depth == 16:
        luma = luma / 257.0
    return luma


def crop_center(plane, height: int, width: int) -> np.ndarray:
    p = as_plane(plane)
    ph, pw = p.shape
    if height > ph or width > pw:
        raise BadArgumentError(
            f"crop {height}x{width} exceeds plane {ph}x{pw}"
        )
    r0 = (ph - height) // 2
    c0 = (pw - width) // 2
    return p[r0 : r0 + height, c0 : c0 + width].copy()


def _catmull_rom_weights(frac: np.ndarray) -> np.ndarray:
    """Weights for the four taps at offsets -1..2, cubic kernel a=-0.5."""
    a = -0.5
    t = frac
    d0 = 1.0 + t  # distance to tap at floor-1, in [1, 2)
    d1 = t  # tap at floor
    d2 = 1.0 - t  # tap at floor+1
    d3 = 2.0 - t  # tap at floor+2, in (1, 2]

    def near(d):
        return (a + 2.0) * d**3 - (a + 3.0) * d**2 + 1.0

    def far(d):
        return a * d**3 - 5.0 * a * d**2 + 8.0 * a * d - 4.0 * a

    return np.stack([far(d0), near(d1), near(d2), far(d3)], axis=-1)


def _resize_axis(p: np.ndarray, out_len: int, axis: int) -> np.ndarray:
    in_len = p.shape[axis]
    scale = in_len / out_len
    x = (np.arange(out_len, dtype=np.float64) + 0.5) * scale - 0.5
    base = np.floor(x)
    frac = x - base
    weights = _catmull_rom_weights(frac)  # (out_len, 4)
    moved = np.moveaxis(p, axis, 0)
    out = np.zeros((out_len,) + moved.shape[1:], dtype=np.float64)
    for k in range(4):
        idx = np.clip(base.astype(np.int64) + (k - 1), 0, in_len - 1)
        w = weights[:, k].reshape((out_len,) + (1,) * (moved.ndim - 1))
        out += w * moved[idx]
    return np.moveaxis(out, 0, axis)


def resize_bicubic(plane, height: int, width: int) -> np.ndarray:
    """Separable Catmull-Rom (a=-0.5) resampling with edge clamp and
    pixel-center alignment."""
    p = as_plane(plane)
    if height < 4 or width < 4:
        raise BadArgumentError("resize target must be at least 4x4")
    out = _resize_axis(p, height, axis=0)
    out = _resize_axis(out, width, axis=1)
    return out


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    role: str
    label: str
    tags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.role not in ROLES:
            raise VocabularyError(f"unknown role {self.role!r}")
        if self.label not in LABELS:
            raise VocabularyError(f"unknown label {self.label!r}")
        bad = set(self.tags) - TAGS
        if bad:
            raise VocabularyError(f"unknown tags {sorted(bad)!r}")


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple = ()

    def __post_init__(self):
        paths = [e.path for e in self.entries]
        if len(paths) != len(set(paths)):
            dupes = sorted({p for p in paths if paths.count(p) > 1})
            raise DuplicatePathError(f"duplicate manifest paths: {dupes}")

    def __len__(self):
        return len(self.entries)

    def with_role(self, role: str):
        return [e for e in self.entries if e.role == role]


def load_manifest(path) -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}") from exc
    entries = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise MalformedHeaderError(
                f"{path}:{lineno}: expected 4 tab-separated fields"
            )
        p, role, label, tags_field = fields
        tags = frozenset(t for t in tags_field.split(",") if t)
        entries.append(ManifestEntry(path=p, role=role, label=label, tags=tags))
    return DatasetManifest(entries=tuple(entries))


def save_manifest(manifest: DatasetManifest, path) -> None:
    lines = []
    for e in manifest.entries:
        lines.append(f"{e.path}\t{e.role}\t{e.label}\t{','.join(sorted(e.tags))}")
    text = "\n".join(lines)
    if text:
        text += "\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UnwritablePathError(f"cannot write {path}: {exc}") from exc
