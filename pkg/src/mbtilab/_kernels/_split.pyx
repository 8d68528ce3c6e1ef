# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split search. Must stay bit-identical to split_py.best_split:
same stable argsort, same sequential accumulation order, same score
expression tree (built with -ffp-contract=off so no FMA contraction), same
first-minimum tie-breaking."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def best_split(double[:, ::1] cols, double[:] wy, double[:] w, Py_ssize_t min_leaf):
    cdef Py_ssize_t f = cols.shape[0]
    cdef Py_ssize_t n = cols.shape[1]
    cdef Py_ssize_t best_j = -1
    cdef double best_thr = float("nan")
    cdef double best_score = float("inf")
    if n < 2 * min_leaf:
        return best_j, best_thr, best_score

    cdef cnp.ndarray xs_buf = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray ws_buf = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray wys_buf = np.empty(n, dtype=np.float64)
    cdef double[::1] xs = xs_buf
    cdef double[::1] ws = ws_buf
    cdef double[::1] wys = wys_buf

    cdef Py_ssize_t j, i, k
    cdef double W, WY, cw, cwy, wl, pl, nl, wr, pr, nr, score
    cdef cnp.intp_t[::1] order

    for j in range(f):
        order = np.argsort(np.asarray(cols[j]), kind="stable")
        for k in range(n):
            xs[k] = cols[j, order[k]]
            ws[k] = w[order[k]]
            wys[k] = wy[order[k]]
        W = 0.0
        WY = 0.0
        for k in range(n):
            W = W + ws[k]
            WY = WY + wys[k]

        cw = 0.0
        cwy = 0.0
        for i in range(n - min_leaf):
            cw = cw + ws[i]
            cwy = cwy + wys[i]
            if i < min_leaf - 1:
                continue
            if xs[i] == xs[i + 1]:
                continue
            wl = cw
            pl = cwy
            nl = wl - pl
            wr = W - wl
            pr = WY - pl
            nr = wr - pr
            if wl <= 0.0 or wr <= 0.0:
                continue
            score = (wl - (pl * pl + nl * nl) / wl) + (wr - (pr * pr + nr * nr) / wr)
            if score < best_score:
                best_score = score
                best_j = j
                best_thr = 0.5 * (xs[i] + xs[i + 1])
    return best_j, best_thr, best_score
