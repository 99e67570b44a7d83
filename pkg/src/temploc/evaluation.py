"""Detection scoring: IoU-matched average precision and mAP over thresholds.

A detection counts as correct when its class matches and its temporal IoU
with a still-unmatched ground-truth window strictly exceeds the overlap
threshold; each ground truth matches at most one detection.  AP is the
non-interpolated sum of precision at every true-positive rank divided by
the number of ground truths.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Window, iou

__all__ = ["Detection", "EvalResult", "DEFAULT_SIGMAS", "average_precision", "mean_ap"]

DEFAULT_SIGMAS = (0.1, 0.2, 0.3, 0.4, 0.5)

# gts mapping used throughout: (video_id, class_id) -> list[Window]
GroundTruthSet = dict


@dataclass(frozen=True)
class Detection:
    """One detection in a (possibly multi-video) result set."""

    video_id: str
    class_id: int
    window: Window
    score: float


@dataclass(frozen=True)
class EvalResult:
    """Per-class AP per threshold plus the per-threshold mean."""

    sigmas: tuple[float, ...]
    classes: tuple[int, ...]
    per_class: dict[int, dict[float, float]]
    map_at: dict[float, float]


def _det_order(det: Detection) -> tuple:
    return (-det.score, det.video_id, det.window.start, det.window.length)


def average_precision(
    dets: list[Detection], gts: GroundTruthSet, sigma: float, class_id: int
) -> float | None:
    """AP for one class; None when the class has no ground truth anywhere."""
    gt_windows: dict[str, list[Window]] = {}
    for (video_id, cid), windows in gts.items():
        if cid == class_id and windows:
            gt_windows.setdefault(video_id, []).extend(windows)
    num_gt = sum(len(ws) for ws in gt_windows.values())
    if num_gt == 0:
        return None
    matched = {vid: [False] * len(ws) for vid, ws in gt_windows.items()}
    ranked = sorted((d for d in dets if d.class_id == class_id), key=_det_order)
    tp_count = 0
    ap = 0.0
    for rank, det in enumerate(ranked, start=1):
        best_iou = 0.0
        best_idx = -1
        for idx, gt in enumerate(gt_windows.get(det.video_id, [])):
            if matched[det.video_id][idx]:
                continue
            overlap = iou(det.window, gt)
            if overlap > best_iou:
                best_iou = overlap
                best_idx = idx
        if best_idx >= 0 and best_iou > sigma:
            matched[det.video_id][best_idx] = True
            tp_count += 1
            ap += tp_count / rank
    return ap / num_gt


def mean_ap(
    dets: list[Detection],
    gts: GroundTruthSet,
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS,
) -> EvalResult:
    """Per-class AP at each threshold; mAP averages classes that have ground truth."""
    classes = sorted({cid for (_, cid), windows in gts.items() if windows})
    per_class: dict[int, dict[float, float]] = {c: {} for c in classes}
    map_at: dict[float, float] = {}
    for sigma in sigmas:
        aps = []
        for c in classes:
            ap = average_precision(dets, gts, sigma, c)
            per_class[c][sigma] = 0.0 if ap is None else ap
            if ap is not None:
                aps.append(ap)
        map_at[sigma] = sum(aps) / len(aps) if aps else 0.0
    return EvalResult(tuple(sigmas), tuple(classes), per_class, map_at)
