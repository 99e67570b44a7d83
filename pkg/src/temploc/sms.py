"""Top-K structured maximal-sum search over start/middle/end score tracks.

A feasible window [s, e] (length >= 2) is scored as
``start[s] + middle[s+1] + ... + middle[e-1] + end[e]``.  The search makes
one pass over the frames, maintaining two sorted candidate lists:

* the K best *incomplete* windows seen so far (a start frame plus the
  middle scores accumulated since), and
* the K best *complete* windows.

At each frame the incomplete candidates are completed with the frame's end
score handled as one batch, then extended with the frame's middle score,
then the frame is added as a fresh incomplete start.  Extending every
incomplete candidate is done lazily through a single running offset, and
the completed batch (already sorted) is merged with the complete list in
one two-pointer pass, so the per-frame cost stays O(K) and the whole
sweep is O(nK).

Candidate values carried through the sweep accumulate rounding differently
from direct per-window summation, so recovered windows are re-scored with
:func:`temploc.core.window_score` before being returned; reported scores
therefore match the canonical scoring path exactly.
"""

from __future__ import annotations

from bisect import insort
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .core import PartScores, PartWeights, ScoredWindow, UNIT_WEIGHTS, Window, ranking_key, window_score

__all__ = ["CandidateEntry", "SmsConfig", "merge_topk", "sms_topk", "incomplete_candidate_trace"]

# Sequences at least this long go through the compiled sweep (unless an
# engine is forced); shorter ones are not worth the numba import.
_KERNEL_MIN_N = 4096


class CandidateEntry(NamedTuple):
    """One candidate window: running score, start frame, end frame (None while incomplete)."""

    value: float
    start: int
    end: int | None = None


def _entry_key(e: CandidateEntry) -> tuple[float, int, int]:
    # Total order: value desc, start asc, end asc (incomplete entries first).
    return (-e.value, e.start, -1 if e.end is None else e.end)


@dataclass(frozen=True)
class SmsConfig:
    """Search parameters: K, part weights, and window-length bounds."""

    k: int
    weights: PartWeights = UNIT_WEIGHTS
    min_length: int = 2
    max_length: int | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.min_length < 2:
            raise ValueError(f"min_length must be >= 2, got {self.min_length}")
        if self.max_length is not None and self.max_length < self.min_length:
            raise ValueError(
                f"max_length {self.max_length} smaller than min_length {self.min_length}"
            )


def merge_topk(
    a: list[CandidateEntry], b: list[CandidateEntry], k: int
) -> list[CandidateEntry]:
    """Top-k of two already-sorted candidate lists, in one O(k) pass.

    Both inputs must be sorted by (value desc, start asc, end asc); ties
    across the lists keep entries from ``a`` first.
    """
    out: list[CandidateEntry] = []
    ia = ib = 0
    na, nb = len(a), len(b)
    while len(out) < k and (ia < na or ib < nb):
        if ib >= nb or (ia < na and _entry_key(a[ia]) <= _entry_key(b[ib])):
            out.append(a[ia])
            ia += 1
        else:
            out.append(b[ib])
            ib += 1
    return out


def _sweep(
    frames: Iterator[tuple[float, float, float]],
    k: int,
    min_length: int,
    max_length: int | None,
    trace: list | None = None,
) -> list[CandidateEntry]:
    """Single streaming pass; consumes each frame's (start, middle, end) scores once.

    Incomplete candidates store their value relative to ``offset`` (the
    middle mass accumulated so far), which makes the batch "extend all by
    middle[i]" a single float addition.  Starts sit in ``pending`` until a
    window of ``min_length`` could legally end at the next frame.
    """
    offset = 0.0
    rmax: list[CandidateEntry] = []  # incomplete; .value is offset-relative
    kmax: list[CandidateEntry] = []
    pending: deque[tuple[int, int, float]] = deque()  # (insert_at_frame, start, rel_value)
    # Without a length cap the relative order of incomplete candidates never
    # changes, so anything outside the top k is dead and rmax can be trimmed.
    # With a cap, lower-valued starts may outlive higher-valued older ones,
    # so every start still inside the cap must be kept.
    trim = max_length is None

    for i, (fs_i, fm_i, fe_i) in enumerate(frames, start=1):
        if i >= 2:
            if max_length is not None:
                # Windows only grow; candidates past the length cap never come back.
                cutoff = i - max_length + 1
                rmax = [e for e in rmax if e.start >= cutoff]
            completed = [CandidateEntry(e.value + offset + fe_i, e.start, i) for e in rmax[:k]]
            kmax = merge_topk(kmax, completed, k)
            offset += fm_i
        # A start at frame i first becomes completable at frame i + min_length - 1.
        pending.append((i + min_length - 2, i, fs_i - offset))
        while pending and pending[0][0] <= i:
            _, s, rel = pending.popleft()
            insort(rmax, CandidateEntry(rel, s, None), key=lambda e: (-e.value, e.start))
            if trim and len(rmax) > k:
                rmax.pop()
        if trace is not None:
            trace.append([(e.value + offset, e.start) for e in rmax])
    return kmax


def _run_compiled(prescaled: PartScores, config: SmsConfig) -> list[CandidateEntry]:
    from ._kernel import structured_topk_sweep

    max_len = 0 if config.max_length is None else int(config.max_length)
    vals, starts, ends = structured_topk_sweep(
        np.ascontiguousarray(prescaled.start_scores),
        np.ascontiguousarray(prescaled.middle_scores),
        np.ascontiguousarray(prescaled.end_scores),
        int(config.k),
        int(config.min_length),
        max_len,
    )
    return [
        CandidateEntry(float(v), int(s), int(e)) for v, s, e in zip(vals, starts, ends)
    ]


def sms_topk(
    scores: PartScores, config: SmsConfig, engine: str = "auto"
) -> list[ScoredWindow]:
    """The K highest-scoring feasible windows, sorted deterministically.

    Weights are folded into the tracks before the sweep.  Returns fewer
    than K entries when fewer feasible windows exist, and an empty list
    for single-frame sequences.  ``engine`` is ``auto`` (pick by length),
    ``python`` or ``compiled``; both engines produce identical results.
    """
    if engine not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown engine {engine!r}")
    n = scores.n
    if n < 2:
        return []
    prescaled = scores.scaled(config.weights)
    if engine == "auto":
        engine = "compiled" if n >= _KERNEL_MIN_N else "python"
    if engine == "python":
        frames = zip(
            prescaled.start_scores.tolist(),
            prescaled.middle_scores.tolist(),
            prescaled.end_scores.tolist(),
        )
        entries = _sweep(frames, config.k, config.min_length, config.max_length)
    else:
        entries = _run_compiled(prescaled, config)
    dets = [
        ScoredWindow(Window(e.start, e.end), window_score(scores, Window(e.start, e.end), config.weights))
        for e in entries
    ]
    dets.sort(key=ranking_key)
    return dets


def incomplete_candidate_trace(
    scores: PartScores, config: SmsConfig
) -> tuple[list[ScoredWindow], list[list[tuple[float, int]]]]:
    """Run the pure-Python sweep recording the incomplete top-K after every frame.

    The per-frame snapshots materialize absolute values (offset applied) as
    (value, start) pairs; intended for small-n verification of the
    incomplete-candidate invariant.
    """
    prescaled = scores.scaled(config.weights)
    trace: list[list[tuple[float, int]]] = []
    frames = zip(
        prescaled.start_scores.tolist(),
        prescaled.middle_scores.tolist(),
        prescaled.end_scores.tolist(),
    )
    entries = _sweep(frames, config.k, config.min_length, config.max_length, trace=trace)
    dets = [
        ScoredWindow(Window(e.start, e.end), window_score(scores, Window(e.start, e.end), config.weights))
        for e in entries
    ]
    dets.sort(key=ranking_key)
    return dets, trace
