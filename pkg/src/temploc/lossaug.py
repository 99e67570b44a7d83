"""Loss-augmented window search: argmax over windows of task loss plus confidence.

The task loss against a ground-truth window decomposes over the frames of
the candidate window (+1 for every frame outside the ground truth, -1 for
every frame inside, plus a window-independent constant equal to the ground
truth's length).  Adding that per-frame offset to all three score tracks
therefore turns the loss-augmented maximization into a plain structured
top-K search, keeping it linear in the sequence length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PartScores, PartWeights, ScoredWindow, UNIT_WEIGHTS, Window
from .sms import SmsConfig, sms_topk

__all__ = ["AugmentedProblem", "augment_scores", "loss_augmented_argmax"]


@dataclass(frozen=True)
class AugmentedProblem:
    """Score tracks with the per-frame loss offsets folded in.

    For any window y:
    ``window_score(augmented, y) + additive_constant ==
    window_score(original, y) + delta(gt, y)``.
    """

    augmented_scores: PartScores
    additive_constant: float


def augment_scores(scores: PartScores, gt: Window) -> AugmentedProblem:
    """Fold the symmetric-difference loss against ``gt`` into the tracks."""
    n = scores.n
    if gt.end > n:
        raise ValueError(f"ground truth [{gt.start}, {gt.end}] out of range for {n} frames")
    per_frame = np.ones(n)
    per_frame[gt.start - 1 : gt.end] = -1.0
    return AugmentedProblem(
        PartScores(
            scores.start_scores + per_frame,
            scores.middle_scores + per_frame,
            scores.end_scores + per_frame,
        ),
        float(gt.length),
    )


def loss_augmented_argmax(
    scores: PartScores, gt: Window, weights: PartWeights = UNIT_WEIGHTS
) -> ScoredWindow:
    """Most-violating window: argmax over feasible y != gt of loss(gt, y) + score(y).

    Part weights apply to the original scores only; the loss offsets are
    never scaled.  The reported value is the augmented window score plus
    the ground truth length, i.e. loss + weighted confidence.  Raises
    ValueError when no feasible window other than ``gt`` exists.
    """
    if scores.n < 2:
        raise ValueError(f"need at least 2 frames, got {scores.n}")
    problem = augment_scores(scores.scaled(weights), gt)
    top2 = sms_topk(problem.augmented_scores, SmsConfig(k=2))
    candidates = [d for d in top2 if d.window != gt]
    if not candidates:
        raise ValueError("no feasible window distinct from the ground truth")
    best = candidates[0]
    return ScoredWindow(best.window, best.score + problem.additive_constant)
