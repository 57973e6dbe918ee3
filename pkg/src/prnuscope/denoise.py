"""Wavelet-domain adaptive denoiser and noise-residual extraction.

The filter is the classic local-Wiener shrink on an orthonormal 8-tap
Daubechies decomposition with periodic boundary extension: per detail
coefficient, the local signal variance is estimated as the minimum over
several window sizes of the windowed mean of squared coefficients minus the
assumed noise power, clamped at zero; the coefficient is scaled by
var/(var + noise_power). The approximation band passes through untouched, so
the residual (input minus filtered input) is the high-frequency noise
estimate used for fingerprint work.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .errors import BadArgumentError, PlaneTooSmallError
from .tensorio import Image, analysis_luma, as_plane

log = logging.getLogger(__name__)

MIN_DENOISE_EDGE = 64


@dataclass(frozen=True)
class DenoiseConfig:
    """Filter parameters. `base_noise_sigma` is on the 8-bit pixel scale."""

    levels: int = 4
    base_noise_sigma: float = 3.0
    window_sizes: tuple = (3, 5, 7, 9)

    def __post_init__(self):
        if self.levels < 1:
            raise BadArgumentError("levels must be >= 1")
        if not self.base_noise_sigma > 0:
            raise BadArgumentError("base_noise_sigma must be > 0")
        if not self.window_sizes:
            raise BadArgumentError("window_sizes must be non-empty")
        for w in self.window_sizes:
            if w < 3 or w % 2 == 0:
                raise BadArgumentError("window sizes must be odd and >= 3")


@dataclass(frozen=True)
class WaveletPyramid:
    """`details[i]` holds (lh, hl, hh) for level i+1, finest first."""

    approx: np.ndarray
    details: tuple

    @property
    def levels(self) -> int:
        return len(self.details)


@dataclass(frozen=True)
class Residual:
    plane: np.ndarray
    source_tag: str = ""


def dwt2(plane, levels: int) -> WaveletPyramid:
    """Periodized orthonormal decomposition; dims must be divisible by 2**levels."""
    p = as_plane(plane)
    if levels < 1:
        raise BadArgumentError("levels must be >= 1")
    div = 1 << levels
    h, w = p.shape
    if h % div or w % div or h < div or w < div:
        raise PlaneTooSmallError(
            f"plane {h}x{w} not decomposable into {levels} periodized levels "
            f"(dims must be positive multiples of {div})"
        )
    details = []
    current = p
    for _ in range(levels):
        ll, lh, hl, hh = kernels.dwt_level2d(current)
        details.append((lh, hl, hh))
        current = ll
    return WaveletPyramid(approx=current, details=tuple(details))


def idwt2(pyramid: WaveletPyramid) -> np.ndarray:
    current = pyramid.approx
    for lh, hl, hh in reversed(pyramid.details):
        current = kernels.idwt_level2d(current, lh, hl, hh)
    return current


def _shrink(coeff: np.ndarray, noise_var: float, window_sizes) -> np.ndarray:
    local = kernels.min_box_mean(coeff * coeff, window_sizes)
    signal_var = np.maximum(local - noise_var, 0.0)
    return coeff * (signal_var / (signal_var + noise_var))


def denoise(plane, config: DenoiseConfig = DenoiseConfig()) -> np.ndarray:
    """Filter a plane on the 8-bit scale (callers rescale 16-bit by 1/257).

    Arbitrary sizes >= 64x64 are handled by circular padding up to the next
    multiple of 2**levels and cropping back after synthesis.
    """
    p = as_plane(plane)
    h, w = p.shape
    if h < MIN_DENOISE_EDGE or w < MIN_DENOISE_EDGE:
        raise PlaneTooSmallError(f"denoise needs at least 64x64, got {h}x{w}")
    div = 1 << config.levels
    ph = -h % div
    pw = -w % div
    padded = np.pad(p, ((0, ph), (0, pw)), mode="wrap") if (ph or pw) else p

    pyramid = dwt2(padded, config.levels)
    noise_var = config.base_noise_sigma**2
    filtered = tuple(
        tuple(_shrink(band, noise_var, config.window_sizes) for band in trio)
        for trio in pyramid.details
    )
    out = idwt2(WaveletPyramid(approx=pyramid.approx, details=filtered))
    return out[:h, :w]


def residual(img: Image, config: DenoiseConfig = DenoiseConfig()) -> Residual:
    """Noise residual of an image: analysis luma minus its filtered version."""
    luma = analysis_luma(img)
    res = luma - denoise(luma, config)
    offset = float(res.mean())
    if abs(offset) > 0.5:
        log.warning("residual mean %.3f exceeds +-0.5 for %s", offset, img.source_tag)
    return Residual(plane=res, source_tag=img.source_tag)


def residual_of_plane(plane, config: DenoiseConfig = DenoiseConfig(), source_tag: str = "") -> Residual:
    """Residual of an already-extracted plane on the 8-bit scale."""
    p = as_plane(plane)
    return Residual(plane=p - denoise(p, config), source_tag=source_tag)
