"""Synthetic camera pipeline with injectable periodic artifacts.

The sensor model is multiplicative pattern noise plus additive noise:
``Y = clamp(round((1 + K) * X + Theta + pattern))`` with an optional
pipeline pattern added after the sensor terms and before quantization.

Two pattern waveforms are provided. ``tiled_noise`` builds a full-width
band of seeded noise, `basis[0]` rows tall, and stacks copies of it each
circularly rotated `basis[1]` columns further than the last; the only
translation invariances are the integer multiples of ``basis``, so its
autocorrelation is a clean diagonal peak train. ``cosine`` is a plane wave
whose autocorrelation peaks include every integer multiple of ``basis``
(plus the finer lattice a plane wave cannot avoid).

All randomness flows through the counter-based Philox generator
(``philox4x64-10``), keyed by (seed, stream, index), so outputs are
bit-reproducible across platforms and trivially splittable per image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import (
    BadArgumentError,
    RectOutOfBoundsError,
    RectOverlapError,
)
from .localmap import ShiftMap, _grid_shape
from .tensorio import Image

RNG_ALGORITHM = "philox4x64-10"

_STREAM_PRNU = 1
_STREAM_THETA = 2
_STREAM_PATTERN = 3
_STREAM_SCENE = 4
_STREAM_GRAIN = 5

MAX_HDR_SHIFT = 16


def _rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    # 128-bit key: the user seed in one word, stream/index packed in the other.
    key = np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, ((stream & 0xFF) << 56) | (index & 0xFFFFFFFFFFFFFF)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class PatternSpec:
    basis: tuple  # (p1, p2) fundamental offset in pixels
    amplitude: float  # 8-bit units
    phase: tuple = (0, 0)
    waveform: str = "tiled_noise"  # or "cosine"
    seed: int = 0

    def __post_init__(self):
        p1, p2 = self.basis
        if p1 <= 0 or p2 <= 0:
            raise BadArgumentError("pattern basis must be positive")
        if self.waveform not in ("tiled_noise", "cosine"):
            raise BadArgumentError(f"unknown waveform {self.waveform!r}")
        if not self.amplitude > 0:
            raise BadArgumentError("pattern amplitude must be > 0")


@dataclass(frozen=True)
class SynthSpec:
    height: int = 512
    width: int = 512
    prnu_sigma: float = 0.02
    noise_sigma: float = 3.0
    scene: str = "flat"  # flat | gradient | texture
    intensity: float = 128.0
    scene_seed: int = 0
    pattern: PatternSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.height < 8 or self.width < 8:
            raise BadArgumentError("frame must be at least 8x8")
        if not (0.0 < self.prnu_sigma <= 0.1):
            raise BadArgumentError("prnu_sigma must be in (0, 0.1]")
        if self.noise_sigma < 0:
            raise BadArgumentError("noise_sigma must be >= 0")
        if self.scene not in ("flat", "gradient", "texture"):
            raise BadArgumentError(f"unknown scene {self.scene!r}")
        if self.scene == "flat" and not (16.0 <= self.intensity <= 250.0):
            raise BadArgumentError("flat intensity must stay in [16, 250]")

    @property
    def dims(self):
        return (self.height, self.width)


@dataclass(frozen=True)
class TruthBundle:
    k_true: np.ndarray
    pattern_plane: np.ndarray | None = None
    hdr_truth: ShiftMap | None = None
    bokeh_truth: np.ndarray | None = None


def gen_prnu(spec: SynthSpec) -> np.ndarray:
    """Per-sensor multiplicative pattern: iid zero-mean Gaussian."""
    rng = _rng(spec.seed, _STREAM_PRNU)
    return spec.prnu_sigma * rng.standard_normal(spec.dims)


def scene_plane(spec: SynthSpec, index: int = 0) -> np.ndarray:
    if spec.scene == "flat":
        return np.full(spec.dims, float(spec.intensity))
    if spec.scene == "gradient":
        i = np.arange(spec.height)[:, None]
        j = np.arange(spec.width)[None, :]
        ramp = (i + j) / max(spec.height + spec.width - 2, 1)
        return 16.0 + 234.0 * ramp
    rng = _rng(spec.scene_seed, _STREAM_SCENE, index)
    rough = rng.uniform(size=spec.dims)
    smooth = gaussian_filter(rough, sigma=4.0)
    lo, hi = smooth.min(), smooth.max()
    if hi <= lo:
        return np.full(spec.dims, 128.0)
    return 30.0 + 190.0 * (smooth - lo) / (hi - lo)


def pattern_plane(dims, pattern: PatternSpec) -> np.ndarray:
    h, w = dims
    p1, p2 = pattern.basis
    if pattern.waveform == "cosine":
        i = np.arange(h)[:, None] - pattern.phase[0]
        j = np.arange(w)[None, :] - pattern.phase[1]
        return pattern.amplitude * np.cos(2.0 * np.pi * (i / p1 - j / p2))
    band = pattern.amplitude * _rng(pattern.seed, _STREAM_PATTERN).standard_normal((p1, w))
    rows = np.arange(h)
    band_rows = band[rows % p1]
    cols = (np.arange(w)[None, :] - p2 * (rows // p1)[:, None]) % w
    plane = np.take_along_axis(band_rows, cols, axis=1)
    return np.roll(plane, pattern.phase, axis=(0, 1))


def capture(spec: SynthSpec, k: np.ndarray, index: int = 0):
    """One 8-bit exposure plus its ground truth."""
    if k.shape != spec.dims:
        raise BadArgumentError(f"PRNU plane {k.shape} vs spec dims {spec.dims}")
    x = scene_plane(spec, index)
    theta = spec.noise_sigma * _rng(spec.seed, _STREAM_THETA, index).standard_normal(spec.dims)
    signal = (1.0 + k) * x + theta
    pat = None
    if spec.pattern is not None:
        pat = pattern_plane(spec.dims, spec.pattern)
        signal = signal + pat
    pixels = np.clip(np.rint(signal), 0, 255).astype(np.uint8)[:, :, None]
    img = Image(
        pixels=pixels,
        depth=8,
        source_tag=f"synth:seed={spec.seed}:index={index}",
    )
    return img, TruthBundle(k_true=k, pattern_plane=pat)


def capture_set(spec: SynthSpec, k: np.ndarray, count: int, start_index: int = 0):
    """Independent exposures of the same sensor, seeded per index."""
    return [capture(spec, k, index=start_index + i)[0] for i in range(count)]


def _rects_overlap(a, b) -> bool:
    ar, ac, ah, aw = a
    br, bc, bh, bw = b
    return ar < br + bh and br < ar + ah and ac < bc + bw and bc < ac + aw


def apply_hdr_shifts(img: Image, regions, block: int = 512):
    """Translate rectangular regions, as multi-frame stacking does locally.

    Each region is ((r0, c0, h, w), (d1, d2)); the rectangle's content is
    re-sampled from (+d1, +d2) with frame-edge clamping, matching the shift
    convention that block_shift_map reports. Returns the shifted image and
    the ground-truth shift map on a `block`-pitch grid.
    """
    h, w = img.height, img.width
    seen = []
    for rect, shift in regions:
        r0, c0, rh, rw = rect
        d1, d2 = shift
        if r0 < 0 or c0 < 0 or rh <= 0 or rw <= 0 or r0 + rh > h or c0 + rw > w:
            raise RectOutOfBoundsError(f"rect {rect} outside {h}x{w}")
        if abs(d1) > MAX_HDR_SHIFT or abs(d2) > MAX_HDR_SHIFT:
            raise BadArgumentError(f"shift {shift} exceeds +-{MAX_HDR_SHIFT}")
        for other in seen:
            if _rects_overlap(rect, other):
                raise RectOverlapError(f"rects {rect} and {other} overlap")
        seen.append(rect)

    out = img.pixels.copy()
    for rect, (d1, d2) in regions:
        r0, c0, rh, rw = rect
        rows = np.clip(np.arange(r0, r0 + rh) + d1, 0, h - 1)
        cols = np.clip(np.arange(c0, c0 + rw) + d2, 0, w - 1)
        out[r0 : r0 + rh, c0 : c0 + rw] = img.pixels[np.ix_(rows, cols)]

    gh, gw = _grid_shape(h, w, block)
    shifts = np.zeros((gh, gw, 2), dtype=np.int64)
    for gi in range(gh):
        for gj in range(gw):
            center = (gi * block + min(block, h - gi * block) // 2,
                      gj * block + min(block, w - gj * block) // 2)
            for rect, shift in regions:
                r0, c0, rh, rw = rect
                if r0 <= center[0] < r0 + rh and c0 <= center[1] < c0 + rw:
                    shifts[gi, gj] = shift
                    break
    truth = ShiftMap(
        shifts=shifts,
        confidences=np.ones((gh, gw), dtype=np.float64),
        block=block,
        stride=block,
        dims=(h, w),
    )
    shifted = Image(pixels=out, depth=img.depth, source_tag=img.source_tag + ":hdr")
    return shifted, truth


def apply_bokeh(img: Image, mask, blur_sigma: float, grain_sigma: float, seed: int = 0):
    """Low-pass filter plus grain inside the mask, as portrait pipelines do.

    Blur uses a Gaussian truncated at radius 3*sigma; grain is additive
    Gaussian noise. Pixels outside the mask are untouched. Returns the
    processed image and the mask as a {0,1} truth plane.
    """
    if not blur_sigma > 0:
        raise BadArgumentError("blur_sigma must be > 0")
    m = np.asarray(mask, dtype=bool)
    if m.shape != (img.height, img.width):
        raise BadArgumentError(f"mask {m.shape} vs frame {(img.height, img.width)}")
    if not m.any():
        return img, m.astype(np.float64)
    source = img.pixels.astype(np.float64)
    blurred = gaussian_filter(source, sigma=(blur_sigma, blur_sigma, 0.0), truncate=3.0)
    grain = grain_sigma * _rng(seed, _STREAM_GRAIN).standard_normal((img.height, img.width))
    inside = blurred + grain[:, :, None]
    out = np.where(m[:, :, None], inside, source)
    out = np.clip(np.rint(out), 0, img.max_value)
    pixels = out.astype(np.uint8 if img.depth == 8 else np.uint16)
    processed = Image(pixels=pixels, depth=img.depth, source_tag=img.source_tag + ":bokeh")
    return processed, m.astype(np.float64)
