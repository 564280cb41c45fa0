"""Pure-numpy ZNCC scan, the fallback twin of the compiled kernel.

Row-at-a-time vectorization over a zero-copy sliding-window view keeps the
memory footprint at one row of window statistics regardless of image size.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def zncc_scan(
    image: np.ndarray,
    template: np.ndarray,
    y0: int,
    x0: int,
    y1: int,
    x1: int,
    stride: int,
) -> tuple[float, int, int]:
    """Best ZNCC over window top-lefts (y, x) with y in [y0, y1], x in
    [x0, x1], both stepped by ``stride``. Returns (score, y, x); ties keep
    the first position in scan order (y outer, x inner). Windows or
    templates with zero variance score 0 by definition.
    """
    th, tw = template.shape
    n = float(th * tw)
    tsum = float(template.sum())
    tsq = float((template * template).sum())
    tmean = tsum / n
    tvar = tsq - tsum * tsum / n
    if tvar <= 0.0:
        return 0.0, y0, x0

    best_score = -np.inf
    best_y, best_x = y0, x0
    for y in range(y0, y1 + 1, stride):
        strip = image[y : y + th, x0 : x1 + tw]
        windows = sliding_window_view(strip, (th, tw))[0, ::stride]
        ws = np.einsum("ijk->i", windows)
        wsq = np.einsum("ijk,ijk->i", windows, windows)
        wt = np.einsum("ijk,jk->i", windows, template)
        cross = wt - tmean * ws
        wvar = wsq - ws * ws / n
        den2 = wvar * tvar
        scores = np.zeros(ws.shape[0])
        valid = den2 > 0.0
        np.divide(cross, np.sqrt(np.maximum(den2, 0.0)), out=scores, where=valid)
        i = int(np.argmax(scores))
        if scores[i] > best_score:
            best_score = float(scores[i])
            best_y = y
            best_x = x0 + i * stride
    return best_score, best_y, best_x
