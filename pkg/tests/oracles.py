"""Independent brute-force references used to pin expected values.

Everything here enumerates windows explicitly and scores them with plain
Python float arithmetic, deliberately sharing no code with the library's
search paths.
"""

from __future__ import annotations


def enumerate_windows(n: int, min_length: int = 2, max_length: int | None = None):
    """All (start, end) pairs with min_length <= length <= max_length."""
    for start in range(1, n + 1):
        for end in range(start + min_length - 1, n + 1):
            if max_length is not None and end - start + 1 > max_length:
                break
            yield start, end


def score_window(fs, fm, fe, start: int, end: int,
                 lam_s: float = 1.0, lam_m: float = 1.0, lam_e: float = 1.0) -> float:
    mid = 0.0
    for t in range(start + 1, end):
        mid += fm[t - 1]
    return lam_s * fs[start - 1] + lam_m * mid + lam_e * fe[end - 1]


def brute_structured_topk(fs, fm, fe, k: int, min_length: int = 2, max_length: int | None = None,
                          lam_s: float = 1.0, lam_m: float = 1.0, lam_e: float = 1.0):
    """Top-k (score, start, end) under the deterministic tie order."""
    scored = [
        (score_window(fs, fm, fe, s, e, lam_s, lam_m, lam_e), s, e)
        for s, e in enumerate_windows(len(fs), min_length, max_length)
    ]
    scored.sort(key=lambda t: (-t[0], t[1], t[2] - t[1]))
    return scored[:k]


def brute_flat_topk(f, k: int):
    """Top-k (sum, start, end) over all nonempty subarrays."""
    n = len(f)
    scored = []
    for s in range(1, n + 1):
        total = 0.0
        for e in range(s, n + 1):
            total += f[e - 1]
            scored.append((total, s, e))
    scored.sort(key=lambda t: (-t[0], t[1], t[2] - t[1]))
    return scored[:k]


def interval_overlap(a, b) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]) + 1)


def task_loss(gt, y) -> int:
    """Symmetric difference size |gt ∪ y| - |gt ∩ y| in frames."""
    len_gt = gt[1] - gt[0] + 1
    len_y = y[1] - y[0] + 1
    return len_gt + len_y - 2 * interval_overlap(gt, y)


def brute_loss_augmented_argmax(fs, fm, fe, gt, lam_s=1.0, lam_m=1.0, lam_e=1.0):
    """(value, start, end) maximizing task_loss + score over windows != gt."""
    best = None
    for s, e in enumerate_windows(len(fs)):
        if (s, e) == tuple(gt):
            continue
        value = task_loss(gt, (s, e)) + score_window(fs, fm, fe, s, e, lam_s, lam_m, lam_e)
        key = (-value, s, e - s)
        if best is None or key < best[0]:
            best = (key, (value, s, e))
    return None if best is None else best[1]


def brute_incomplete_topk(fs, fm, i: int, k: int):
    """Top-k (value, start) of start-plus-middles runs ending at frame i."""
    values = []
    for j in range(1, i + 1):
        v = fs[j - 1]
        for q in range(j + 1, i + 1):
            v += fm[q - 1]
        values.append((v, j))
    values.sort(key=lambda t: (-t[0], t[1]))
    return values[:k]
