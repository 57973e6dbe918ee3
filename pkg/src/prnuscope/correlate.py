"""Circular normalized cross-correlation, autocorrelation, and signed PCE.

Conventions, pinned for determinism:

* ``rho(s1, s2) = sum_ij centered_a[i, j] * centered_b[i+s1, j+s2] / (||a|| ||b||)``
  with circular indexing of ``b``; means are global sample means and the
  denominator uses full centered norms, so it is shift-invariant.
* Surfaces are indexed by non-negative shifts ``[0..H-1, 0..W-1]``.
* The PCE exclusion zone is an 11x11 block centered on the peak, wrapping
  circularly; ties in the peak search break to the smallest s1, then s2.
* The decision rule is strict: PCE equal to the threshold is H0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadArgumentError, DegenerateInputError, DimensionError
from .tensorio import as_plane

EXCLUSION_EDGE = 11
H1 = "H1"
H0 = "H0"


@dataclass(frozen=True)
class CorrSurface:
    """NCC over all circular shifts; values[s1, s2] = rho(s1, s2)."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise BadArgumentError("surface must be 2-D")
        if np.abs(v).max() > 1.0 + 1e-9:
            raise BadArgumentError("correlation values outside [-1, 1]")

    @property
    def dims(self):
        return self.values.shape

    def centered(self) -> np.ndarray:
        """Origin moved to the center cell (for windowed inspection/plots)."""
        return np.fft.fftshift(self.values)


@dataclass(frozen=True)
class PceResult:
    pce: float
    peak_shift: tuple  # (s1, s2), non-negative circular shifts
    rho_max: float
    dims: tuple
    excluded: int = EXCLUSION_EDGE * EXCLUSION_EDGE
    pce_zero: float = 0.0  # peak constrained to (0, 0)
    rho_zero: float = 0.0
    support: int = 0  # pixels behind the peak-energy scale factor


@dataclass(frozen=True)
class VerifyConfig:
    tau: float = 60.0
    search: str = "full"  # "full" or "zero_only"

    def __post_init__(self):
        if not self.tau > 0:
            raise BadArgumentError("tau must be > 0")
        if self.search not in ("full", "zero_only"):
            raise BadArgumentError(f"unknown search mode {self.search!r}")


def _plane_of(x) -> np.ndarray:
    plane = getattr(x, "plane", x)
    return as_plane(plane)


def _centered_pair(a, b):
    pa, pb = _plane_of(a), _plane_of(b)
    if pa.shape != pb.shape:
        raise DimensionError(f"shape mismatch {pa.shape} vs {pb.shape}")
    ca = pa - pa.mean()
    cb = pb - pb.mean()
    na = float(np.sqrt((ca * ca).sum()))
    nb = float(np.sqrt((cb * cb).sum()))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("constant plane has no correlation")
    return ca, cb, na, nb


def ncc_at(a, b, s1: int, s2: int) -> float:
    """Direct-sum NCC at one circular shift (the brute-force reference path)."""
    ca, cb, na, nb = _centered_pair(a, b)
    shifted = np.roll(cb, (-s1, -s2), axis=(0, 1))  # shifted[i, j] = cb[i+s1, j+s2]
    return float((ca * shifted).sum() / (na * nb))


def ncc_surface(a, b) -> CorrSurface:
    """All-shift NCC via frequency-domain circular cross-correlation."""
    ca, cb, na, nb = _centered_pair(a, b)
    raw = np.fft.ifft2(np.conj(np.fft.fft2(ca)) * np.fft.fft2(cb)).real
    values = raw / (na * nb)
    np.clip(values, -1.0, 1.0, out=values)
    return CorrSurface(values=values)


def autocorr(p) -> CorrSurface:
    return ncc_surface(p, p)


def _neighborhood_sumsq(values: np.ndarray, peak, edge: int = EXCLUSION_EDGE) -> float:
    h, w = values.shape
    half = edge // 2
    rows = (np.arange(peak[0] - half, peak[0] + half + 1)) % h
    cols = (np.arange(peak[1] - half, peak[1] + half + 1)) % w
    block = values[np.ix_(rows, cols)]
    return float((block * block).sum())


def _pce_at_peak(values: np.ndarray, peak, support: int | None = None) -> float:
    h, w = values.shape
    n_cells = EXCLUSION_EDGE * EXCLUSION_EDGE
    total = float((values * values).sum())
    denom = total - _neighborhood_sumsq(values, peak)
    if denom <= 0.0:
        raise DegenerateInputError("correlation energy outside the peak is zero")
    size = h * w if support is None else support
    rho = float(values[peak[0], peak[1]])
    return (size - n_cells) * np.sign(rho) * rho * rho / denom


def pce_from_surface(surface: CorrSurface, support: int | None = None) -> PceResult:
    """Signed PCE of a correlation surface, plus the zero-shift-constrained value."""
    values = surface.values
    h, w = values.shape
    if h * w <= EXCLUSION_EDGE * EXCLUSION_EDGE:
        raise BadArgumentError("surface not larger than the exclusion neighborhood")
    flat_peak = int(np.argmax(values))  # first max in row-major order:
    peak = (flat_peak // w, flat_peak % w)  # smallest s1, then s2, on ties
    return PceResult(
        pce=_pce_at_peak(values, peak, support),
        peak_shift=peak,
        rho_max=float(values[peak]),
        dims=(h, w),
        pce_zero=_pce_at_peak(values, (0, 0), support),
        rho_zero=float(values[0, 0]),
        support=h * w if support is None else support,
    )


def pce(w, term) -> PceResult:
    """PCE between a residual and a fingerprint-times-luma term plane.

    The caller forms ``term`` as the element-wise product of the fingerprint
    estimate and the test image's analysis luma.
    """
    return pce_from_surface(ncc_surface(w, term))


def verify(result: PceResult, config: VerifyConfig = VerifyConfig()) -> str:
    """Strict threshold decision; zero_only uses the (0,0)-constrained PCE."""
    statistic = result.pce if config.search == "full" else result.pce_zero
    return H1 if statistic > config.tau else H0


def signed_shift(shift, dims) -> tuple:
    """Map a non-negative circular shift into the symmetric range."""
    out = []
    for s, n in zip(shift, dims):
        s = s % n
        out.append(s - n if s > n // 2 else s)
    return tuple(out)
