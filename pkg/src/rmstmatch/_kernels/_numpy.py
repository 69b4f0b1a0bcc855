"""Pure NumPy versions of the compiled kernels (import-time fallback)."""
import numpy as np


def monotone_match(t, c):
    """Order-preserving minimum-cost matching of sorted ``t`` into sorted ``c``.

    Dynamic program over prefixes: ``f[i][j]`` is the cheapest way to match
    the first ``i`` treated values into the first ``j`` controls.  Only the
    band ``i <= j <= n_c - n_t + i`` can lead to a full matching.
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    nt, nc = t.shape[0], c.shape[0]
    if nt == 0:
        return np.empty(0, dtype=np.int64), 0.0
    width = nc - nt + 1
    prev = np.zeros(width)
    take = np.zeros((nt, width), dtype=bool)
    for i in range(nt):
        g = prev + np.abs(t[i] - c[i:i + width])
        acc = np.minimum.accumulate(g)
        row = take[i]
        row[0] = True
        # strict improvement only: ties keep the earlier control
        row[1:] = g[1:] < acc[:-1]
        prev = acc
    total = float(prev[-1])
    match = np.empty(nt, dtype=np.int64)
    i, k = nt, width - 1
    while i > 0:
        if take[i - 1, k]:
            match[i - 1] = i - 1 + k
            i -= 1
        else:
            k -= 1
    return match, total


def risk_table(time, event, weight):
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if time.size == 0:
        empty = np.empty(0)
        return empty, empty.copy(), empty.copy()
    uniq, start = np.unique(time, return_index=True)
    w_at = np.add.reduceat(weight, start)
    d_at = np.add.reduceat(event * weight, start)
    # sequential sum keeps the at-risk totals identical to the compiled loop
    total = 0.0
    for w in weight:
        total += w
    removed = np.concatenate(([0.0], np.cumsum(w_at)[:-1]))
    keep = d_at > 0.0
    return uniq[keep], (total - removed)[keep], d_at[keep]
