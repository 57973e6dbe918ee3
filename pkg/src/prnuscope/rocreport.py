"""Score aggregation: ROC curves and operating-point rates.

All comparisons are strict (score > threshold counts as a detection),
matching the verification decision rule, so a point read off the curve at a
listed threshold reproduces `rates_at` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadArgumentError, VocabularyError

LABEL_GENUINE = "genuine"
LABEL_IMPOSTOR = "impostor"


@dataclass(frozen=True)
class ScoreEntry:
    score: float
    label: str
    group: str = ""

    def __post_init__(self):
        if self.label not in (LABEL_GENUINE, LABEL_IMPOSTOR):
            raise VocabularyError(f"unknown label {self.label!r}")
        if not math.isfinite(self.score):
            raise BadArgumentError("scores must be finite")


@dataclass(frozen=True)
class ScoreSet:
    entries: tuple

    def __post_init__(self):
        labels = {e.label for e in self.entries}
        if LABEL_GENUINE not in labels or LABEL_IMPOSTOR not in labels:
            raise BadArgumentError("need at least one genuine and one impostor score")

    @property
    def genuine(self) -> np.ndarray:
        return np.array([e.score for e in self.entries if e.label == LABEL_GENUINE])

    @property
    def impostor(self) -> np.ndarray:
        return np.array([e.score for e in self.entries if e.label == LABEL_IMPOSTOR])


def rates_at(scores: ScoreSet, tau: float) -> tuple:
    """(TPR, FPR) at a threshold, strict > comparison."""
    genuine = scores.genuine
    impostor = scores.impostor
    tpr = float((genuine > tau).mean())
    fpr = float((impostor > tau).mean())
    return tpr, fpr


def roc(scores: ScoreSet):
    """Operating points (fpr, tpr, threshold) sorted by threshold descending.

    Thresholds are every distinct score plus -inf/+inf sentinels, so the
    curve starts at (0, 0) and ends at (1, 1).
    """
    thresholds = sorted(set(e.score for e in scores.entries), reverse=True)
    thresholds = [math.inf] + thresholds + [-math.inf]
    points = []
    for tau in thresholds:
        tpr, fpr = rates_at(scores, tau)
        points.append((fpr, tpr, tau))
    return points


def auc(points) -> float:
    """Trapezoidal area under the (fpr, tpr) curve."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    area = 0.0
    for i in range(1, len(xs)):
        area += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1])
    return area
