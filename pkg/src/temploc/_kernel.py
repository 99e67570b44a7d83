"""Compiled O(nK) sweep for long sequences.

Mirrors the pure-Python sweep in :mod:`temploc.sms` operation for
operation (same lazy middle-mass offset, same batch completion merge,
same tie order), so both engines produce bit-identical candidates.
Kept separate so importing the package never pays the numba import.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def structured_topk_sweep(fs, fm, fe, k, min_len, max_len):  # pragma: no cover - exercised via sms_topk
    """Return (values, starts, ends) of the top-k windows; max_len <= 0 means unbounded."""
    n = fs.shape[0]
    # Without a length cap only the top-k incomplete candidates can ever
    # matter (their relative order is fixed); with a cap, every start still
    # inside the cap must survive, since better-but-older ones expire first.
    rcap = k if max_len <= 0 else max(k, max_len + 2)
    rmax_val = np.empty(rcap, np.float64)
    rmax_start = np.empty(rcap, np.int64)
    nr = 0
    kmax_val = np.empty(k, np.float64)
    kmax_start = np.empty(k, np.int64)
    kmax_end = np.empty(k, np.int64)
    nk = 0
    scratch_val = np.empty(k, np.float64)
    scratch_start = np.empty(k, np.int64)
    scratch_end = np.empty(k, np.int64)
    # Ring of past offsets; a start inserted at frame i needs the offset of
    # frame i - min_len + 2, i.e. history depth min_len - 1.
    hist = np.zeros(min_len, np.float64)
    offset = 0.0

    for i in range(1, n + 1):
        if i >= 2:
            if max_len > 0:
                cutoff = i - max_len + 1
                w = 0
                for a in range(nr):
                    if rmax_start[a] >= cutoff:
                        rmax_val[w] = rmax_val[a]
                        rmax_start[w] = rmax_start[a]
                        w += 1
                nr = w
            fei = fe[i - 1]
            # Merge the completed batch (rmax + end score, already sorted)
            # with kmax: value desc, then start asc, then end asc.
            ia = 0
            ib = 0
            m = 0
            while m < k and (ia < nr or ib < nk):
                take_a = False
                if ib >= nk:
                    take_a = True
                elif ia < nr:
                    av = rmax_val[ia] + offset + fei
                    if av > kmax_val[ib]:
                        take_a = True
                    elif av == kmax_val[ib] and rmax_start[ia] < kmax_start[ib]:
                        take_a = True
                    # equal value and start: the kmax entry ended earlier, it wins
                if take_a:
                    scratch_val[m] = rmax_val[ia] + offset + fei
                    scratch_start[m] = rmax_start[ia]
                    scratch_end[m] = i
                    ia += 1
                else:
                    scratch_val[m] = kmax_val[ib]
                    scratch_start[m] = kmax_start[ib]
                    scratch_end[m] = kmax_end[ib]
                    ib += 1
                m += 1
            for a in range(m):
                kmax_val[a] = scratch_val[a]
                kmax_start[a] = scratch_start[a]
                kmax_end[a] = scratch_end[a]
            nk = m
            offset += fm[i - 1]
        hist[i % min_len] = offset
        # Insert the start that first becomes completable at frame i + 1.
        j = i - min_len + 2
        if j >= 1:
            rel = fs[j - 1] - hist[j % min_len]
            pos = 0
            while pos < nr and rmax_val[pos] >= rel:
                pos += 1
            if pos < rcap:
                lim = nr if nr < rcap else rcap - 1
                for a in range(lim, pos, -1):
                    rmax_val[a] = rmax_val[a - 1]
                    rmax_start[a] = rmax_start[a - 1]
                rmax_val[pos] = rel
                rmax_start[pos] = j
                if nr < rcap:
                    nr += 1

    return kmax_val[:nk].copy(), kmax_start[:nk].copy(), kmax_end[:nk].copy()
