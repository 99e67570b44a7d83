"""Empirical scaling checks for the window searches.

Times the structured top-K sweep (and the flat k-maximal-sums variant)
on seeded random tracks across a range of sequence lengths, and checks
the top-1 score against an exhaustive quadratic search wherever that is
affordable.  Medians over repetitions with one warmup call; raw rows are
reported so thresholds can be tuned per machine.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import PartScores
from .maxsum import k_max_sums
from .sms import SmsConfig, sms_topk

__all__ = [
    "BenchRow",
    "BenchReport",
    "brute_top1_structured",
    "brute_top1_flat",
    "bench_scaling",
    "loglog_slope",
    "write_report",
]

_REL_TOL = 1e-9


@dataclass(frozen=True)
class BenchRow:
    n: int
    k: int
    algorithm: str  # "sms", "kmaxsum", "brute", "brute_flat"
    reps: int
    median_seconds: float
    top1_score: float
    matches_fast: bool | None  # brute rows: agreement with the O(nK) result

    @property
    def checksum(self) -> str:
        return f"{self.top1_score:.9e}"


@dataclass(frozen=True)
class BenchReport:
    k: int
    seed: int
    rows: list[BenchRow]

    def medians(self, algorithm: str) -> list[tuple[int, float]]:
        return [(r.n, r.median_seconds) for r in self.rows if r.algorithm == algorithm]


def brute_top1_structured(scores: PartScores) -> float:
    """Best window score by scoring every (start, end) pair; O(n^2)."""
    fs, fm, fe = scores.start_scores, scores.middle_scores, scores.end_scores
    n = scores.n
    if n < 2:
        raise ValueError("need at least 2 frames")
    prefix = np.cumsum(fm)  # prefix[t-1] = middle mass of frames 1..t
    start_part = fs - prefix  # indexed by start frame
    end_part = np.empty(n)
    end_part[1:] = prefix[:-1] + fe[1:]  # indexed by end frame, ends >= 2
    grid = start_part[: n - 1, None] + end_part[None, 1:]
    mask = np.tri(n - 1, n - 1, dtype=bool).T  # row s-1 <= column e-2, i.e. length >= 2
    return float(grid.max(initial=-np.inf, where=mask))


def brute_top1_flat(track: np.ndarray) -> float:
    """Best subarray sum by scoring every (start, end) pair; O(n^2)."""
    track = np.asarray(track, dtype=np.float64)
    n = track.size
    prefix = np.concatenate(([0.0], np.cumsum(track)))
    grid = prefix[1:, None] - prefix[None, :-1]  # sum of frames j+1..i
    mask = np.tri(n, n).astype(bool)
    return float(grid.max(initial=-np.inf, where=mask))


def _median_time(fn, reps: int) -> float:
    fn()  # warmup (JIT compile, caches)
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= _REL_TOL * max(1.0, abs(a), abs(b))


def bench_scaling(
    ns: list[int],
    k: int = 100,
    reps: int = 5,
    seed: int = 0,
    brute_cap: int = 2000,
    include_flat: bool = True,
) -> BenchReport:
    """Measure the searches at each n; brute-force rows appear for n <= brute_cap."""
    if list(ns) != sorted(set(ns)):
        raise ValueError("ns must be strictly increasing")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    rows: list[BenchRow] = []
    for n in ns:
        rng = np.random.default_rng([seed, n])
        scores = PartScores(
            rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal(n)
        )
        config = SmsConfig(k=k)
        sms_top1 = sms_topk(scores, config)[0].score
        rows.append(
            BenchRow(n, k, "sms", reps, _median_time(lambda: sms_topk(scores, config), reps), sms_top1, None)
        )
        flat_top1 = None
        if include_flat:
            track = scores.middle_scores
            flat_top1 = k_max_sums(track, k)[0].score
            rows.append(
                BenchRow(n, k, "kmaxsum", reps, _median_time(lambda: k_max_sums(track, k), reps), flat_top1, None)
            )
        if n <= brute_cap:
            brute = brute_top1_structured(scores)
            rows.append(
                BenchRow(n, k, "brute", reps, _median_time(lambda: brute_top1_structured(scores), reps), brute, _close(brute, sms_top1))
            )
            if include_flat:
                brute_f = brute_top1_flat(scores.middle_scores)
                rows.append(
                    BenchRow(n, k, "brute_flat", reps, _median_time(lambda: brute_top1_flat(scores.middle_scores), reps), brute_f, _close(brute_f, flat_top1))
                )
    return BenchReport(k, seed, rows)


def loglog_slope(pairs: list[tuple[int, float]]) -> float:
    """Least-squares slope of log(time) against log(n)."""
    if len(pairs) < 2:
        raise ValueError("need at least two (n, time) pairs")
    xs = np.log([p[0] for p in pairs])
    ys = np.log([max(p[1], 1e-12) for p in pairs])
    return float(np.polyfit(xs, ys, 1)[0])


def write_report(path, report: BenchReport) -> None:
    lines = ["n\tk\talgorithm\treps\tmedian_seconds\ttop1\tmatches_fast"]
    for r in report.rows:
        match = "" if r.matches_fast is None else str(r.matches_fast).lower()
        lines.append(
            f"{r.n}\t{r.k}\t{r.algorithm}\t{r.reps}\t{r.median_seconds:.9f}\t{r.checksum}\t{match}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
