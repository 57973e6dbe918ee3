"""Multiplicative sensor-noise fingerprint estimation.

The estimator accumulates, over reference images, the element-wise products
residual*luma (numerator) and luma*luma (denominator); the fingerprint is
their element-wise ratio with a small epsilon guarding dark pixels.
Saturated pixels are down-weighted to zero in both sums by default, since
clipped photosites carry no usable pattern.

Post-processing (row/column zero-meaning and frequency-domain attenuation of
strong periodic components) is available but OFF by default: the periodic
pipeline artifacts this toolkit studies must survive into the estimate for
the lattice analyses to see them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .denoise import DenoiseConfig, Residual
from .errors import (
    BadArgumentError,
    DimensionError,
    EmptyAccumulatorError,
    MalformedHeaderError,
)
from .tensorio import Image, analysis_luma, as_plane, load_plane, save_plane

DEFAULT_EPS = 1.0


@dataclass
class FingerprintAccumulator:
    numerator: np.ndarray
    denominator: np.ndarray
    count: int = 0
    provenance: list = field(default_factory=list)

    @classmethod
    def empty(cls, height: int, width: int) -> "FingerprintAccumulator":
        return cls(
            numerator=np.zeros((height, width), dtype=np.float64),
            denominator=np.zeros((height, width), dtype=np.float64),
        )

    @property
    def dims(self):
        return self.numerator.shape


@dataclass(frozen=True)
class Fingerprint:
    plane: np.ndarray
    post_flags: tuple = ()
    provenance: tuple = ()
    eps: float = DEFAULT_EPS

    @property
    def dims(self):
        return self.plane.shape


def saturation_keep_mask(img: Image) -> np.ndarray:
    """1.0 where usable, 0.0 where any channel sits at the clip level."""
    saturated = (img.pixels == img.max_value).any(axis=2)
    return np.where(saturated, 0.0, 1.0)


def accumulate(
    acc: FingerprintAccumulator,
    img: Image,
    res: Residual,
    downweight_saturated: bool = True,
) -> FingerprintAccumulator:
    """Add one image/residual pair to the running sums (in place)."""
    luma = analysis_luma(img)
    plane = as_plane(res.plane)
    if luma.shape != acc.dims or plane.shape != acc.dims:
        raise DimensionError(
            f"image {luma.shape} / residual {plane.shape} vs accumulator {acc.dims}"
        )
    if downweight_saturated:
        keep = saturation_keep_mask(img)
        luma = luma * keep
    acc.numerator += plane * luma
    acc.denominator += luma * luma
    acc.count += 1
    acc.provenance.append(img.source_tag)
    return acc


def merge(a: FingerprintAccumulator, b: FingerprintAccumulator) -> FingerprintAccumulator:
    if a.dims != b.dims:
        raise DimensionError(f"accumulator dims {a.dims} vs {b.dims}")
    return FingerprintAccumulator(
        numerator=a.numerator + b.numerator,
        denominator=a.denominator + b.denominator,
        count=a.count + b.count,
        provenance=list(a.provenance) + list(b.provenance),
    )


def merge_tree(accumulators) -> FingerprintAccumulator:
    """Pairwise-tree merge in list order.

    The tree shape depends only on the number of shards, so parallel runs
    that shard the same manifest reproduce the serial reduction.
    """
    items = list(accumulators)
    if not items:
        raise EmptyAccumulatorError("nothing to merge")
    while len(items) > 1:
        nxt = []
        for i in range(0, len(items) - 1, 2):
            nxt.append(merge(items[i], items[i + 1]))
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def finalize(acc: FingerprintAccumulator, eps: float = DEFAULT_EPS) -> Fingerprint:
    """Element-wise ratio of the two sums; eps guards zero denominators."""
    if acc.count < 1:
        raise EmptyAccumulatorError("accumulator holds no images")
    if not eps > 0:
        raise BadArgumentError("eps must be > 0")
    plane = acc.numerator / (acc.denominator + eps)
    return Fingerprint(
        plane=plane,
        post_flags=(),
        provenance=tuple(acc.provenance),
        eps=eps,
    )


def zero_mean(fp: Fingerprint) -> Fingerprint:
    """Subtract each row mean, then each column mean."""
    plane = fp.plane - fp.plane.mean(axis=1, keepdims=True)
    plane = plane - plane.mean(axis=0, keepdims=True)
    return replace(fp, plane=plane, post_flags=fp.post_flags + ("zero_mean",))


def wiener_fft(fp: Fingerprint, strength: float = 1.0) -> Fingerprint:
    """Attenuate spectral magnitudes toward the median magnitude.

    Bins whose magnitude exceeds the median get their excess divided by
    1 + strength * (excess/median)^2, which crushes strong periodic
    components while leaving the noise-like floor nearly untouched. The
    strength -> 0 limit is the identity.
    """
    if not strength > 0:
        raise BadArgumentError("strength must be > 0")
    spectrum = np.fft.fft2(fp.plane)
    magnitude = np.abs(spectrum)
    floor = float(np.median(magnitude))
    if floor == 0.0:
        return replace(fp, post_flags=fp.post_flags + ("wiener_fft",))
    excess = np.maximum(magnitude - floor, 0.0)
    gain_num = floor + excess / (1.0 + strength * (excess / floor) ** 2)
    new_magnitude = np.where(magnitude > floor, gain_num, magnitude)
    scale = np.ones_like(magnitude)
    nonzero = magnitude > 0
    scale[nonzero] = new_magnitude[nonzero] / magnitude[nonzero]
    plane = np.fft.ifft2(spectrum * scale).real
    return replace(fp, plane=plane, post_flags=fp.post_flags + ("wiener_fft",))


# ---------------------------------------------------------------------------
# Serialization: FPT plane plus a JSON sidecar (<path>.meta)
# ---------------------------------------------------------------------------


def save_fingerprint(fp: Fingerprint, path, denoise_config: DenoiseConfig | None = None) -> None:
    save_plane(fp.plane, path)
    meta = {
        "height": int(fp.plane.shape[0]),
        "width": int(fp.plane.shape[1]),
        "post_flags": list(fp.post_flags),
        "provenance": list(fp.provenance),
        "eps": fp.eps,
        "luma": "bt601",
    }
    if denoise_config is not None:
        meta["denoise"] = {
            "levels": denoise_config.levels,
            "base_noise_sigma": denoise_config.base_noise_sigma,
            "window_sizes": list(denoise_config.window_sizes),
        }
    with open(f"{path}.meta", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_fingerprint(path) -> Fingerprint:
    plane = load_plane(path)
    try:
        with open(f"{path}.meta", "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        meta = {}
    except json.JSONDecodeError as exc:
        raise MalformedHeaderError(f"{path}.meta: {exc}") from exc
    if meta and (meta.get("height"), meta.get("width")) != plane.shape:
        raise MalformedHeaderError(f"{path}.meta dims disagree with the FPT payload")
    return Fingerprint(
        plane=plane,
        post_flags=tuple(meta.get("post_flags", ())),
        provenance=tuple(meta.get("provenance", ())),
        eps=float(meta.get("eps", DEFAULT_EPS)),
    )
