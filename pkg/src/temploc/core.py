"""Shared domain types and elementary window arithmetic.

Frame indices are 1-based and inclusive everywhere in the public API;
conversion to 0-based array storage happens inside the operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Window",
    "PartScores",
    "PartWeights",
    "ScoredWindow",
    "UNIT_WEIGHTS",
    "iou",
    "delta",
    "window_score",
    "ranking_key",
]


@dataclass(frozen=True, slots=True)
class Window:
    """Closed temporal interval [start, end] in 1-based frame indices."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not (1 <= self.start <= self.end):
            raise ValueError(f"invalid window [{self.start}, {self.end}]: need 1 <= start <= end")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class PartWeights:
    """Relative importance of the start/middle/end contributions."""

    lambda_start: float = 1.0
    lambda_middle: float = 1.0
    lambda_end: float = 1.0

    def __post_init__(self) -> None:
        for name in ("lambda_start", "lambda_middle", "lambda_end"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")


UNIT_WEIGHTS = PartWeights()


def _as_track(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ValueError(f"{name} must contain at least one frame")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class PartScores:
    """Per-frame start/middle/end score tracks for one class over one sequence."""

    start_scores: np.ndarray
    middle_scores: np.ndarray
    end_scores: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_scores", _as_track(self.start_scores, "start_scores"))
        object.__setattr__(self, "middle_scores", _as_track(self.middle_scores, "middle_scores"))
        object.__setattr__(self, "end_scores", _as_track(self.end_scores, "end_scores"))
        n = self.start_scores.size
        if self.middle_scores.size != n or self.end_scores.size != n:
            raise ValueError(
                "track lengths differ: "
                f"{n}/{self.middle_scores.size}/{self.end_scores.size}"
            )

    @property
    def n(self) -> int:
        return self.start_scores.size

    def scaled(self, weights: PartWeights) -> "PartScores":
        """Tracks with the part weights folded in (identity for unit weights)."""
        if weights == UNIT_WEIGHTS:
            return self
        return PartScores(
            weights.lambda_start * self.start_scores,
            weights.lambda_middle * self.middle_scores,
            weights.lambda_end * self.end_scores,
        )


@dataclass(frozen=True, slots=True)
class ScoredWindow:
    """A window together with its confidence score and class label."""

    window: Window
    score: float
    class_id: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score}")
        if self.class_id < 0:
            raise ValueError(f"class_id must be non-negative, got {self.class_id}")


def ranking_key(det: ScoredWindow) -> tuple:
    """Deterministic sort key: score desc, then start asc, then length asc."""
    return (-det.score, det.window.start, det.window.length, det.class_id)


def _overlap(a: Window, b: Window) -> int:
    lo = max(a.start, b.start)
    hi = min(a.end, b.end)
    return max(0, hi - lo + 1)


def iou(a: Window, b: Window) -> float:
    """Temporal intersection-over-union with frame counts on closed intervals."""
    inter = _overlap(a, b)
    union = a.length + b.length - inter
    return inter / union


def delta(y: Window, y_bar: Window) -> int:
    """Symmetric-difference frame count |y ∪ ȳ| − |y ∩ ȳ| between two windows."""
    return y.length + y_bar.length - 2 * _overlap(y, y_bar)


def window_score(scores: PartScores, w: Window, weights: PartWeights = UNIT_WEIGHTS) -> float:
    """Confidence of window ``w``: weighted start + sum of interior middles + end.

    The middle sum runs over frames start+1 .. end-1 and is empty for
    length-2 windows.  Raises ValueError for windows outside [1, n] or
    shorter than 2 frames.
    """
    n = scores.n
    if not (1 <= w.start and w.end <= n):
        raise ValueError(f"window [{w.start}, {w.end}] out of range for {n} frames")
    if w.length < 2:
        raise ValueError(f"window [{w.start}, {w.end}] shorter than 2 frames")
    middle = float(scores.middle_scores[w.start : w.end - 1].sum())
    return (
        weights.lambda_start * float(scores.start_scores[w.start - 1])
        + weights.lambda_middle * middle
        + weights.lambda_end * float(scores.end_scores[w.end - 1])
    )
