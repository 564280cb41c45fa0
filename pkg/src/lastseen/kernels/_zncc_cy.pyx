# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled zero-normalized cross-correlation scan.

Semantics must stay in lockstep with ``_zncc_py.zncc_scan``: same position
grid, same zero-variance rule, same first-position tie break.
"""

from libc.math cimport sqrt, INFINITY


def zncc_scan(const double[:, ::1] image, const double[:, ::1] template,
              Py_ssize_t y0, Py_ssize_t x0, Py_ssize_t y1, Py_ssize_t x1,
              Py_ssize_t stride):
    """Best ZNCC over window top-lefts (y, x) with y in [y0, y1], x in
    [x0, x1], both stepped by ``stride``. Returns (score, y, x); ties keep
    the first position in scan order (y outer, x inner). Windows or
    templates with zero variance score 0 by definition.
    """
    cdef Py_ssize_t th = template.shape[0]
    cdef Py_ssize_t tw = template.shape[1]
    cdef double n = <double> (th * tw)
    cdef Py_ssize_t i, j, y, x
    cdef double v, w
    cdef double tsum = 0.0, tsq = 0.0

    for i in range(th):
        for j in range(tw):
            v = template[i, j]
            tsum += v
            tsq += v * v
    cdef double tmean = tsum / n
    cdef double tvar = tsq - tsum * tsum / n
    if tvar <= 0.0:
        return 0.0, y0, x0

    cdef double best = -INFINITY
    cdef Py_ssize_t best_y = y0, best_x = x0
    cdef double ws, wsq, wt, cross, wvar, den2, score

    with nogil:
        y = y0
        while y <= y1:
            x = x0
            while x <= x1:
                ws = 0.0
                wsq = 0.0
                wt = 0.0
                for i in range(th):
                    for j in range(tw):
                        w = image[y + i, x + j]
                        ws += w
                        wsq += w * w
                        wt += w * template[i, j]
                cross = wt - tmean * ws
                wvar = wsq - ws * ws / n
                den2 = wvar * tvar
                if den2 > 0.0:
                    score = cross / sqrt(den2)
                else:
                    score = 0.0
                if score > best:
                    best = score
                    best_y = y
                    best_x = x
                x += stride
            y += stride

    return best, best_y, best_x
