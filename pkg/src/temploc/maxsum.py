"""Maximum-sum and k-maximal-sums baselines over a single flat score track.

These are the no-structure counterparts of the start/middle/end search:
a window is any nonempty contiguous run of frames (single frames allowed)
scored by the plain sum of its per-frame values.
"""

from __future__ import annotations

import numpy as np

from .core import PartScores, ScoredWindow, Window, _as_track, ranking_key
from .sms import SmsConfig, sms_topk

__all__ = ["max_sum", "k_max_sums", "baseline_detect"]


def max_sum(scores) -> ScoredWindow:
    """Best-sum contiguous window (classic single-track scan).

    Ties break toward the earlier start, then the shorter window; with
    all-negative input the best single frame wins.
    """
    f = _as_track(scores, "scores").tolist()
    best_sum, best_start, best_end = f[0], 1, 1
    cur_sum, cur_start = f[0], 1
    for t in range(2, len(f) + 1):
        if cur_sum < 0.0:
            cur_sum, cur_start = f[t - 1], t
        else:
            # Extending on a zero running sum keeps the earlier start, which
            # the tie order prefers over restarting.
            cur_sum += f[t - 1]
        if cur_sum > best_sum or (cur_sum == best_sum and cur_start < best_start):
            best_sum, best_start, best_end = cur_sum, cur_start, t
    return ScoredWindow(Window(best_start, best_end), best_sum)


def k_max_sums(scores, k: int, engine: str = "auto") -> list[ScoredWindow]:
    """The k highest-sum windows (overlaps allowed), sorted by score desc.

    Runs the structured sweep on a padded problem: every frame acts as a
    possible start and middle, and a zero-scored virtual frame after the
    sequence closes windows, so the structured window [s, e] maps to the
    flat window [s, e-1] with an identical sum.  Returns fewer than k
    windows when fewer than k exist.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    f = _as_track(scores, "scores")
    n = f.size
    padded_track = np.append(f, 0.0)
    padded = PartScores(padded_track, padded_track, np.zeros(n + 1))
    dets = sms_topk(padded, SmsConfig(k=k), engine=engine)
    return [
        ScoredWindow(Window(d.window.start, d.window.end - 1), d.score) for d in dets
    ]


def baseline_detect(scores, k: int, engine: str = "auto") -> list[ScoredWindow]:
    """Top-k windows by sum, re-scored by their per-frame average and re-sorted.

    The no-temporal-structure detection mode: candidate windows come from
    :func:`k_max_sums` and each confidence is the window's mean score.
    """
    pooled = k_max_sums(scores, k, engine=engine)
    averaged = [
        ScoredWindow(d.window, d.score / d.window.length, d.class_id) for d in pooled
    ]
    averaged.sort(key=ranking_key)
    return averaged
