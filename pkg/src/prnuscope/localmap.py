"""Block-wise cross-correlation analytics.

Three tools built on the same block grid machinery:

* shift maps: per-block translation between a residual and a fingerprint
  term, for frames whose regions were locally translated by multi-frame
  stacking (each cell's confidence is the block-level PCE);
* fingerprint adaptation: re-sampling a fingerprint through a shift map so a
  locally-translated frame can be verified at full size;
* block correlation maps and masks: per-block zero-shift correlation, used
  to localize synthetic-blur regions that destroy the sensor pattern.

Shift semantics match the correlation convention: a cell shift of (d1, d2)
means block content of the first input matches the second input sampled at
(+d1, +d2); adaptation therefore pulls fingerprint content from (+d1, +d2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .correlate import EXCLUSION_EDGE, _pce_at_peak, ncc_surface, pce_from_surface
from .errors import (
    BadArgumentError,
    DegenerateInputError,
    DimensionError,
    InsufficientSupportError,
)
from .fingerprint import Fingerprint
from .tensorio import as_plane


def block_grid(height: int, width: int, block: int, stride: int):
    """Yield (r0, c0, h, w) tiles; tiles at the far edges are clipped."""
    for r0 in range(0, height, stride):
        for c0 in range(0, width, stride):
            yield r0, c0, min(block, height - r0), min(block, width - c0)


@dataclass(frozen=True)
class ShiftMap:
    shifts: np.ndarray  # (gh, gw, 2) signed int
    confidences: np.ndarray  # (gh, gw) float
    block: int
    stride: int
    dims: tuple

    @property
    def grid_dims(self):
        return self.confidences.shape

    def cell_origin(self, gi: int, gj: int) -> tuple:
        return gi * self.stride, gj * self.stride

    def to_json(self) -> dict:
        return {
            "block": self.block,
            "stride": self.stride,
            "dims": list(self.dims),
            "shifts": self.shifts.tolist(),
            "confidences": self.confidences.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ShiftMap":
        return cls(
            shifts=np.asarray(obj["shifts"], dtype=np.int64),
            confidences=np.asarray(obj["confidences"], dtype=np.float64),
            block=int(obj["block"]),
            stride=int(obj["stride"]),
            dims=tuple(obj["dims"]),
        )


@dataclass(frozen=True)
class BlockCorrMap:
    grid: np.ndarray  # (gh, gw) float, zero-shift block correlations
    block: int
    dims: tuple

    def to_json(self) -> dict:
        return {"block": self.block, "dims": list(self.dims), "grid": self.grid.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "BlockCorrMap":
        return cls(
            grid=np.asarray(obj["grid"], dtype=np.float64),
            block=int(obj["block"]),
            dims=tuple(obj["dims"]),
        )


@dataclass(frozen=True)
class BokehMask:
    block_mask: np.ndarray  # (gh, gw) bool, True = blur-suspect
    pixel_mask: np.ndarray  # (H, W) float {0, 1}
    threshold_used: float
    block: int
    degenerate: bool = False  # every block flagged


def _plane_of(x) -> np.ndarray:
    return as_plane(getattr(x, "plane", x))


def _grid_shape(height: int, width: int, stride: int) -> tuple:
    return (-(-height // stride), -(-width // stride))


def block_shift_map(
    w,
    term,
    block: int = 512,
    search_radius: int = 20,
    stride: int | None = None,
) -> ShiftMap:
    """Per-block argmax shift within +-search_radius, with block PCE confidence."""
    wp, tp = _plane_of(w), _plane_of(term)
    if wp.shape != tp.shape:
        raise DimensionError(f"shape mismatch {wp.shape} vs {tp.shape}")
    h, wd = wp.shape
    if block > min(h, wd):
        raise BadArgumentError(f"block {block} exceeds frame {h}x{wd}")
    if search_radius < 0 or search_radius > block // 4:
        raise BadArgumentError("search_radius must be in [0, block/4]")
    stride = block if stride is None else stride
    if stride < 1 or stride > block:
        raise BadArgumentError("stride must be in [1, block]")

    gh, gw = _grid_shape(h, wd, stride)
    shifts = np.zeros((gh, gw, 2), dtype=np.int64)
    confidences = np.zeros((gh, gw), dtype=np.float64)
    for r0, c0, bh, bw in block_grid(h, wd, block, stride):
        gi, gj = r0 // stride, c0 // stride
        wb = wp[r0 : r0 + bh, c0 : c0 + bw]
        tb = tp[r0 : r0 + bh, c0 : c0 + bw]
        try:
            surface = ncc_surface(wb, tb)
        except DegenerateInputError:
            continue  # flat block: shift (0,0), confidence 0
        values = surface.values
        radius = min(search_radius, bh // 4, bw // 4)
        offsets = np.arange(-radius, radius + 1)
        window = values[np.ix_(offsets % bh, offsets % bw)]
        flat = int(np.argmax(window))  # row-major: smallest signed d1, then d2
        d1 = int(offsets[flat // window.shape[1]])
        d2 = int(offsets[flat % window.shape[1]])
        shifts[gi, gj] = (d1, d2)
        if bh * bw > EXCLUSION_EDGE * EXCLUSION_EDGE:
            confidences[gi, gj] = _pce_at_peak(values, (d1 % bh, d2 % bw))
    return ShiftMap(shifts=shifts, confidences=confidences, block=block, stride=stride, dims=(h, wd))


def adapt_fingerprint(fp: Fingerprint, smap: ShiftMap) -> Fingerprint:
    """Resample each block of the fingerprint through its cell shift.

    Content is pulled from (+d1, +d2) with circular frame indexing and pasted
    over the block's own region, visiting cells in row-major order (later
    cells win where an overlapping stride makes regions collide).
    """
    plane = _plane_of(fp)
    if plane.shape != tuple(smap.dims):
        raise DimensionError(f"fingerprint {plane.shape} vs map dims {smap.dims}")
    h, w = plane.shape
    out = plane.copy()
    for r0, c0, bh, bw in block_grid(h, w, smap.block, smap.stride):
        gi, gj = r0 // smap.stride, c0 // smap.stride
        d1, d2 = (int(v) for v in smap.shifts[gi, gj])
        if d1 == 0 and d2 == 0:
            continue
        rows = (np.arange(r0, r0 + bh) + d1) % h
        cols = (np.arange(c0, c0 + bw) + d2) % w
        out[r0 : r0 + bh, c0 : c0 + bw] = plane[np.ix_(rows, cols)]
    return replace(fp, plane=out, post_flags=fp.post_flags + ("adapted",))


def block_corr_map(w, term, block: int = 21) -> BlockCorrMap:
    """Zero-shift correlation per block, with block-local means and norms.

    Constant blocks in either input map to 0 rather than erroring: flat
    saturated patches are common and carry no evidence either way.
    """
    wp, tp = _plane_of(w), _plane_of(term)
    if wp.shape != tp.shape:
        raise DimensionError(f"shape mismatch {wp.shape} vs {tp.shape}")
    if block < 3:
        raise BadArgumentError("block must be >= 3")
    h, wd = wp.shape
    gh, gw = _grid_shape(h, wd, block)
    grid = np.zeros((gh, gw), dtype=np.float64)
    for r0, c0, bh, bw in block_grid(h, wd, block, block):
        wb = wp[r0 : r0 + bh, c0 : c0 + bw]
        tb = tp[r0 : r0 + bh, c0 : c0 + bw]
        ca = wb - wb.mean()
        cb = tb - tb.mean()
        na = float(np.sqrt((ca * ca).sum()))
        nb = float(np.sqrt((cb * cb).sum()))
        if na == 0.0 or nb == 0.0:
            continue
        grid[r0 // block, c0 // block] = float((ca * cb).sum() / (na * nb))
    return BlockCorrMap(grid=grid, block=block, dims=(h, wd))


def _otsu_threshold(values: np.ndarray) -> float:
    v = np.asarray(values, dtype=np.float64).ravel()
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return lo
    hist, edges = np.histogram(v, bins=256, range=(lo, hi))
    p = hist.astype(np.float64) / v.size
    centers = 0.5 * (edges[:-1] + edges[1:])
    omega = np.cumsum(p)
    mu = np.cumsum(p * centers)
    mu_total = mu[-1]
    denom = omega * (1.0 - omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        between = np.where(denom > 0, (mu_total * omega - mu) ** 2 / denom, 0.0)
    return float(centers[int(np.argmax(between))])


def bokeh_mask(corr_map: BlockCorrMap, threshold: float | None = None) -> BokehMask:
    """Flag blocks whose correlation falls below the threshold (None = Otsu)."""
    thr = _otsu_threshold(corr_map.grid) if threshold is None else float(threshold)
    block_mask = corr_map.grid < thr
    h, w = corr_map.dims
    pixel_mask = np.zeros((h, w), dtype=np.float64)
    for r0, c0, bh, bw in block_grid(h, w, corr_map.block, corr_map.block):
        if block_mask[r0 // corr_map.block, c0 // corr_map.block]:
            pixel_mask[r0 : r0 + bh, c0 : c0 + bw] = 1.0
    return BokehMask(
        block_mask=block_mask,
        pixel_mask=pixel_mask,
        threshold_used=thr,
        block=corr_map.block,
        degenerate=bool(block_mask.all()),
    )


def masked_pce(w, term, mask: BokehMask):
    """PCE with masked pixels neutralized.

    Masked pixels are replaced by each plane's mean over the unmasked support
    (so they contribute nothing after centering); the peak-energy scale
    factor counts only unmasked pixels.
    """
    wp, tp = _plane_of(w), _plane_of(term)
    if wp.shape != tp.shape or wp.shape != mask.pixel_mask.shape:
        raise DimensionError("residual, term, and mask dims must agree")
    masked = mask.pixel_mask > 0.5
    total = masked.size
    covered = int(masked.sum())
    if covered > 0.9 * total:
        raise InsufficientSupportError(
            f"mask covers {covered}/{total} pixels (> 90%)"
        )
    if covered:
        keep = ~masked
        wp = wp.copy()
        tp = tp.copy()
        wp[masked] = wp[keep].mean()
        tp[masked] = tp[keep].mean()
    return pce_from_surface(ncc_surface(wp, tp), support=total - covered)
