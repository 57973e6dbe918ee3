"""Periodic-peak-train detection in correlation surfaces, and fingerprint
collision screening built on it.

Some smartphone pipelines stamp a shared periodic pattern into every frame;
the pattern survives into noise-residual fingerprints and shows up in their
autocorrelation as a train of peaks at integer multiples of a fundamental
offset. Fingerprints from different devices that share the pattern then
cross-correlate far above any sane identity threshold. The screen combines
the pairwise PCE with a comparison of the detected peak trains: a high PCE
alone is only a collision *suspicion* when both surfaces carry a matching
periodicity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlate import (
    CorrSurface,
    PceResult,
    VerifyConfig,
    autocorr,
    ncc_surface,
    pce_from_surface,
)
from .errors import BadArgumentError, DimensionError
from .fingerprint import Fingerprint
from .tensorio import as_plane, resize_bicubic

DEFAULT_WINDOW = 551
DEFAULT_MIN_PEAK = 0.02
ORIGIN_GUARD = 11  # reuses the PCE exclusion edge

VERDICT_COLLISION = "collision_suspected"
VERDICT_DISTINCT = "distinct"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LatticePeak:
    shift: tuple  # signed (s1, s2) relative to the origin
    value: float
    polarity: str  # "positive" | "negative"


@dataclass(frozen=True)
class LatticeReport:
    basis: tuple  # fundamental positive-peak offset; (0, 0) = none found
    peaks: tuple  # LatticePeak entries
    strength: float  # mean |rho| over the detected train
    window: int

    @property
    def found(self) -> bool:
        return self.basis != (0, 0)

    def to_json(self) -> dict:
        return {
            "basis": list(self.basis),
            "strength": self.strength,
            "window": self.window,
            "peaks": [
                {"shift": list(p.shift), "value": p.value, "polarity": p.polarity}
                for p in self.peaks
            ],
        }


@dataclass(frozen=True)
class CollisionReport:
    pce_ab: PceResult
    lattice_a: LatticeReport
    lattice_b: LatticeReport
    basis_match: bool
    verdict: str

    def to_json(self) -> dict:
        return {
            "pce": self.pce_ab.pce,
            "peak_shift": list(self.pce_ab.peak_shift),
            "rho_max": self.pce_ab.rho_max,
            "basis_match": self.basis_match,
            "verdict": self.verdict,
            "lattice_a": self.lattice_a.to_json(),
            "lattice_b": self.lattice_b.to_json(),
        }


def _local_maxima(magnitude: np.ndarray) -> np.ndarray:
    """Boolean grid: strictly greater than all 8 neighbours (border excluded)."""
    m = magnitude
    out = np.zeros_like(m, dtype=bool)
    center = m[1:-1, 1:-1]
    greater = np.ones_like(center, dtype=bool)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            greater &= center > m[1 + dr : m.shape[0] - 1 + dr, 1 + dc : m.shape[1] - 1 + dc]
    out[1:-1, 1:-1] = greater
    return out


def detect_lattice(
    surface: CorrSurface,
    window: int = DEFAULT_WINDOW,
    min_peak: float = DEFAULT_MIN_PEAK,
) -> LatticeReport:
    """Find the fundamental offset of a periodic peak train.

    Candidate peaks are local maxima of |rho| above `min_peak` inside the
    centered window, outside an 11x11 origin guard. The basis is the
    smallest-norm positive candidate whose integer multiples, as far as they
    fit in the window, all land within one pixel of positive candidates; a
    single in-window multiple is not accepted as evidence of periodicity.
    Absence of any such train yields the (0, 0) sentinel, not an error.
    """
    h, w = surface.dims
    if window > min(h, w):
        raise BadArgumentError(f"window {window} exceeds surface {h}x{w}")
    if window % 2 == 0 or window < ORIGIN_GUARD + 4:
        raise BadArgumentError("window must be odd and comfortably exceed the origin guard")
    if not (0.0 < min_peak < 1.0):
        raise BadArgumentError("min_peak must be in (0, 1)")

    centered = surface.centered()
    half = window // 2
    ch, cw = h // 2, w // 2
    sub = centered[ch - half : ch + half + 1, cw - half : cw + half + 1]
    magnitude = np.abs(sub)

    guard = ORIGIN_GUARD // 2
    candidates = {}
    maxima = _local_maxima(magnitude) & (magnitude >= min_peak)
    for r, c in zip(*np.nonzero(maxima)):
        s1, s2 = int(r) - half, int(c) - half
        if abs(s1) <= guard and abs(s2) <= guard:
            continue
        candidates[(s1, s2)] = float(sub[r, c])

    if not candidates:
        return LatticeReport(basis=(0, 0), peaks=(), strength=0.0, window=window)

    positives = {s: v for s, v in candidates.items() if v > 0}

    def match_near(target):
        best = None
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                key = (target[0] + dr, target[1] + dc)
                if key in positives:
                    if best is None or abs(positives[key]) > abs(positives[best]):
                        best = key
        return best

    def canonical(shift):
        s1, s2 = shift
        if s1 < 0 or (s1 == 0 and s2 < 0):
            return (-s1, -s2)
        return (s1, s2)

    ordered = sorted(
        {canonical(s) for s in positives},
        key=lambda s: (s[0] * s[0] + s[1] * s[1], s[0], s[1]),
    )
    for cand in ordered:
        p1, p2 = cand
        k_max = half  # how many multiples fit in the window
        if p1:
            k_max = min(k_max, half // abs(p1))
        if p2:
            k_max = min(k_max, half // abs(p2))
        if k_max < 2:
            continue  # one peak is not a period
        chain = []
        # Each matched multiple sharpens the period estimate to position/k,
        # keeping the +-1 match honest for the fractional periods a rescaled
        # pattern produces.
        est1, est2 = float(p1), float(p2)
        for k in range(1, k_max + 1):
            hit = match_near((int(round(k * est1)), int(round(k * est2))))
            if hit is None:
                chain = None
                break
            chain.append(hit)
            est1, est2 = hit[0] / k, hit[1] / k
        if chain:
            peaks = [
                LatticePeak(shift=hit, value=positives[hit], polarity="positive")
                for hit in chain
            ]
            peaks.extend(
                LatticePeak(shift=s, value=v, polarity="negative")
                for s, v in sorted(candidates.items())
                if v < 0
            )
            strength = float(np.mean([abs(positives[hit]) for hit in chain]))
            basis = chain[0]
            return LatticeReport(
                basis=basis, peaks=tuple(peaks), strength=strength, window=window
            )

    return LatticeReport(basis=(0, 0), peaks=(), strength=0.0, window=window)


def _effective_window(dims, window: int) -> int:
    limit = min(dims)
    w = min(window, limit)
    return w if w % 2 else w - 1


def _bases_match(a: LatticeReport, b: LatticeReport) -> bool:
    """Within one pixel per axis; two pattern-free surfaces match vacuously."""
    if not a.found and not b.found:
        return True
    if a.found != b.found:
        return False
    return abs(a.basis[0] - b.basis[0]) <= 1 and abs(a.basis[1] - b.basis[1]) <= 1


def collision_screen(
    fa: Fingerprint,
    fb: Fingerprint,
    config: VerifyConfig = VerifyConfig(),
    window: int = DEFAULT_WINDOW,
    min_peak: float = DEFAULT_MIN_PEAK,
) -> CollisionReport:
    """Pairwise fingerprint comparison with periodicity-aware verdict."""
    pa, pb = as_plane(fa.plane), as_plane(fb.plane)
    if pa.shape != pb.shape:
        raise DimensionError(f"fingerprint dims {pa.shape} vs {pb.shape}")
    w_eff = _effective_window(pa.shape, window)
    result = pce_from_surface(ncc_surface(pa, pb))
    lattice_a = detect_lattice(autocorr(pa), w_eff, min_peak)
    lattice_b = detect_lattice(autocorr(pb), w_eff, min_peak)
    basis_match = _bases_match(lattice_a, lattice_b)
    statistic = result.pce if config.search == "full" else result.pce_zero
    if statistic <= config.tau:
        verdict = VERDICT_DISTINCT
    elif basis_match:
        verdict = VERDICT_COLLISION
    else:
        verdict = VERDICT_INCONCLUSIVE
    return CollisionReport(
        pce_ab=result,
        lattice_a=lattice_a,
        lattice_b=lattice_b,
        basis_match=basis_match,
        verdict=verdict,
    )


def cross_model_screen(
    fingerprints,
    config: VerifyConfig = VerifyConfig(),
    window: int = DEFAULT_WINDOW,
    min_peak: float = DEFAULT_MIN_PEAK,
) -> dict:
    """All-pairs screening; returns {(i, j): CollisionReport} for i < j.

    Fingerprints of unequal size are resampled to the smallest height/width
    in the set before comparison.
    """
    fps = list(fingerprints)
    if len(fps) < 2:
        raise BadArgumentError("cross-model screening needs at least 2 fingerprints")
    target_h = min(fp.plane.shape[0] for fp in fps)
    target_w = min(fp.plane.shape[1] for fp in fps)
    common = []
    for fp in fps:
        if fp.plane.shape != (target_h, target_w):
            resized = resize_bicubic(fp.plane, target_h, target_w)
            fp = Fingerprint(
                plane=resized,
                post_flags=fp.post_flags + ("resized",),
                provenance=fp.provenance,
                eps=fp.eps,
            )
        common.append(fp)
    reports = {}
    for i in range(len(common)):
        for j in range(i + 1, len(common)):
            reports[(i, j)] = collision_screen(
                common[i], common[j], config=config, window=window, min_peak=min_peak
            )
    return reports
