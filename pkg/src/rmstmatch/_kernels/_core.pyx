# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Must stay bit-for-bit equivalent to ``_numpy.py``."""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()


def monotone_match(const double[::1] t, const double[::1] c):
    """Order-preserving minimum-cost matching of sorted ``t`` into sorted ``c``.

    Returns ``(match, total)`` where ``match[i]`` is the position in ``c``
    assigned to ``t[i]``.
    """
    cdef Py_ssize_t nt = t.shape[0], nc = c.shape[0]
    cdef Py_ssize_t width = nc - nt + 1
    cdef Py_ssize_t i, j, k
    cdef double g, acc, ti

    if nt == 0:
        return np.empty(0, dtype=np.int64), 0.0

    cdef cnp.ndarray[cnp.float64_t, ndim=1] prev_arr = np.zeros(width, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cur_arr = np.empty(width, dtype=np.float64)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] take_arr = np.zeros((nt, width), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] take = take_arr
    cdef double[::1] tmp

    # Row 0: cost of matching nothing is zero for every prefix.
    # Window column k of row i (1-based) corresponds to control prefix j = i + k.
    with nogil:
        for i in range(1, nt + 1):
            ti = t[i - 1]
            acc = INFINITY
            for k in range(width):
                # f[i-1][j-1] sits at column k of the previous row
                g = prev[k] + fabs(ti - c[i - 1 + k])
                if g < acc:
                    acc = g
                    take[i - 1, k] = 1
                cur[k] = acc
            tmp = prev
            prev = cur
            cur = tmp

    cdef double total = prev[width - 1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] match = np.empty(nt, dtype=np.int64)
    i = nt
    k = width - 1
    while i > 0:
        if take[i - 1, k]:
            match[i - 1] = i - 1 + k
            i -= 1
        else:
            k -= 1
    return match, total


def risk_table(const double[::1] time, const double[::1] event, const double[::1] weight):
    """Collapse time-sorted records into distinct event times.

    ``event`` and ``weight`` are aligned with ``time`` (ascending).  Returns
    ``(event_times, at_risk, events)``; at-risk is the weight with time >= t.
    """
    cdef Py_ssize_t n = time.shape[0]
    cdef Py_ssize_t i = 0, j, m = 0
    cdef double total = 0.0, removed = 0.0, d, w_here, tcur

    for j in range(n):
        total += weight[j]

    cdef cnp.ndarray[cnp.float64_t, ndim=1] times_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] risk_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out_t = times_arr
    cdef double[::1] out_y = risk_arr
    cdef double[::1] out_d = d_arr

    with nogil:
        while i < n:
            tcur = time[i]
            d = 0.0
            w_here = 0.0
            j = i
            while j < n and time[j] == tcur:
                d += event[j] * weight[j]
                w_here += weight[j]
                j += 1
            if d > 0.0:
                out_t[m] = tcur
                out_y[m] = total - removed
                out_d[m] = d
                m += 1
            removed += w_here
            i = j
    return times_arr[:m].copy(), risk_arr[:m].copy(), d_arr[:m].copy()
