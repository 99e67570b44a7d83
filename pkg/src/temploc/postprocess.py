"""Detection postprocessing: snippet slicing, score normalization, duration
priors, non-maximum suppression, and the full per-video detection pipeline.

Long videos are cut into overlapping fixed-duration snippets, the window
search runs independently on each snippet and class, and the pooled
candidates are re-scored (length normalization, then an optional
log-normal duration prior) before greedy per-class NMS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PartScores, PartWeights, ScoredWindow, UNIT_WEIGHTS, Window, iou, ranking_key
from .maxsum import k_max_sums
from .sms import SmsConfig, sms_topk

__all__ = [
    "Snippet",
    "DurationPrior",
    "PipelineConfig",
    "SIGMA_MIN",
    "split_snippets",
    "fit_duration_prior",
    "rank_score",
    "nms",
    "detect",
    "detect_flat",
]

SIGMA_MIN = 0.05
_PRIOR_FLOOR = 1e-6


@dataclass(frozen=True)
class Snippet:
    """One slice of a longer video: global 1-based start offset and frame count."""

    offset: int
    length: int

    @property
    def end(self) -> int:
        return self.offset + self.length - 1


@dataclass(frozen=True)
class DurationPrior:
    """Log-normal prior over window lengths (in frames) for one class."""

    class_id: int
    log_mean: float
    log_std: float

    def __post_init__(self) -> None:
        if self.log_std < SIGMA_MIN:
            raise ValueError(f"log_std must be >= {SIGMA_MIN}, got {self.log_std}")

    def density(self, duration: float) -> float:
        if duration <= 0:
            return 0.0
        z = (math.log(duration) - self.log_mean) / self.log_std
        return math.exp(-0.5 * z * z) / (duration * self.log_std * math.sqrt(2.0 * math.pi))

    def mode(self) -> float:
        return math.exp(self.log_mean - self.log_std**2)

    def multiplier(self, duration: float) -> float:
        """Density relative to the mode, clamped to [1e-6, 1]."""
        ratio = self.density(duration) / self.density(self.mode())
        return min(1.0, max(_PRIOR_FLOOR, ratio))


@dataclass(frozen=True)
class PipelineConfig:
    fps: float = 5.0
    snippet_seconds: float = 20.0
    overlap_seconds: float = 18.0
    k: int = 100
    nms_iou: float = 0.4
    use_prior: bool = True
    use_length_norm: bool = True
    weights: PartWeights = UNIT_WEIGHTS

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError(f"fps must be > 0, got {self.fps}")
        if not (0 <= self.overlap_seconds < self.snippet_seconds):
            raise ValueError(
                f"need 0 <= overlap ({self.overlap_seconds}) < snippet ({self.snippet_seconds})"
            )
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not (0.0 < self.nms_iou < 1.0):
            raise ValueError(f"nms_iou must be in (0, 1), got {self.nms_iou}")

    @property
    def snippet_frames(self) -> int:
        return max(2, round(self.fps * self.snippet_seconds))

    @property
    def stride_frames(self) -> int:
        return max(1, round(self.fps * (self.snippet_seconds - self.overlap_seconds)))


def split_snippets(n: int, config: PipelineConfig = PipelineConfig()) -> list[Snippet]:
    """Overlapping snippets covering frames 1..n; the last ends exactly at n."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    length = config.snippet_frames
    stride = config.stride_frames
    if n <= length:
        return [Snippet(1, n)]
    snippets = []
    offset = 1
    while offset + length - 1 < n:
        snippets.append(Snippet(offset, length))
        offset += stride
    final_offset = n - length + 1
    if not snippets or final_offset > snippets[-1].offset:
        snippets.append(Snippet(final_offset, length))
    return snippets


def fit_duration_prior(durations, class_id: int = 0) -> DurationPrior:
    """Log-normal fit of ground-truth durations (frames); std floored at 0.05."""
    arr = np.asarray(durations, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot fit a duration prior to zero durations")
    if (arr <= 0).any():
        raise ValueError("durations must be positive")
    logs = np.log(arr)
    return DurationPrior(class_id, float(logs.mean()), max(SIGMA_MIN, float(logs.std())))


def rank_score(det: ScoredWindow, prior: DurationPrior | None, config: PipelineConfig) -> float:
    """Final ranking score: optional length normalization, then duration prior.

    The prior multiplier only applies to positive scores: damping a
    negative score would raise it, inverting the intended penalty.
    """
    score = det.score
    if config.use_length_norm:
        score /= det.window.length
    if config.use_prior and prior is not None and score > 0:
        score *= prior.multiplier(det.window.length)
    return score


def nms(dets: list[ScoredWindow], iou_threshold: float) -> list[ScoredWindow]:
    """Greedy suppression: drop detections overlapping a better survivor.

    Detections with IoU strictly above the threshold against an already
    kept window are removed; survivors come back sorted by score desc with
    (start, length) tie order.
    """
    ordered = sorted(dets, key=ranking_key)
    kept: list[ScoredWindow] = []
    for det in ordered:
        if all(iou(det.window, k.window) <= iou_threshold for k in kept):
            kept.append(det)
    return kept


def _pipeline(per_snippet_topk, n: int, priors, config: PipelineConfig) -> list[ScoredWindow]:
    """Shared pooling / rescoring / suppression around a per-snippet search."""
    snippets = split_snippets(n, config)
    pooled: dict[int, list[ScoredWindow]] = {}
    seen: dict[int, set[tuple[int, int]]] = {}
    for snip in snippets:
        for class_id, dets in per_snippet_topk(snip):
            bucket = pooled.setdefault(class_id, [])
            keys = seen.setdefault(class_id, set())
            for det in dets:
                window = Window(det.window.start + snip.offset - 1, det.window.end + snip.offset - 1)
                key = (window.start, window.end)
                if key in keys:
                    continue  # identical window recovered from an overlapping snippet
                keys.add(key)
                bucket.append(ScoredWindow(window, det.score, class_id))
    results: list[ScoredWindow] = []
    for class_id in sorted(pooled):
        prior = priors.get(class_id) if priors else None
        rescored = [
            ScoredWindow(d.window, rank_score(d, prior, config), class_id)
            for d in pooled[class_id]
        ]
        results.extend(nms(rescored, config.nms_iou))
    results.sort(key=ranking_key)
    return results


def detect(
    scores_by_class: dict[int, PartScores],
    priors: dict[int, DurationPrior] | None,
    config: PipelineConfig = PipelineConfig(),
) -> list[ScoredWindow]:
    """Full-video detection from per-class part-score tracks.

    Runs the structured top-K search per snippet and class, shifts windows
    to global coordinates, pools, rescores, and suppresses per class.
    """
    if not scores_by_class:
        raise ValueError("scores_by_class is empty")
    lengths = {s.n for s in scores_by_class.values()}
    if len(lengths) != 1:
        raise ValueError(f"per-class tracks disagree on length: {sorted(lengths)}")
    n = lengths.pop()
    sms_config = SmsConfig(k=config.k, weights=config.weights)

    def per_snippet(snip: Snippet):
        for class_id in sorted(scores_by_class):
            scores = scores_by_class[class_id]
            piece = PartScores(
                scores.start_scores[snip.offset - 1 : snip.end],
                scores.middle_scores[snip.offset - 1 : snip.end],
                scores.end_scores[snip.offset - 1 : snip.end],
            )
            yield class_id, sms_topk(piece, sms_config)

    return _pipeline(per_snippet, n, priors, config)


def detect_flat(
    track_by_class: dict[int, np.ndarray],
    priors: dict[int, DurationPrior] | None,
    config: PipelineConfig = PipelineConfig(),
) -> list[ScoredWindow]:
    """No-structure detection from one signed score track per class.

    Same snippet/pool/rescore/NMS pipeline, but candidates come from the
    flat k-maximal-sums search; with length normalization on (the default)
    each confidence is the window's mean frame score.
    """
    if not track_by_class:
        raise ValueError("track_by_class is empty")
    tracks = {c: np.asarray(t, dtype=np.float64) for c, t in track_by_class.items()}
    lengths = {t.size for t in tracks.values()}
    if len(lengths) != 1:
        raise ValueError(f"per-class tracks disagree on length: {sorted(lengths)}")
    n = lengths.pop()

    def per_snippet(snip: Snippet):
        for class_id in sorted(tracks):
            piece = tracks[class_id][snip.offset - 1 : snip.end]
            yield class_id, k_max_sums(piece, config.k)

    return _pipeline(per_snippet, n, priors, config)
