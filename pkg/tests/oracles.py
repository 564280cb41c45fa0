"""Independent reference implementations used only to check the library.

Everything here is deliberately written from a different angle than the
library code: shapely for areas, explicit frame-set enumeration for
intervals, and a raw PR-staircase walk for AP.
"""

from __future__ import annotations

import numpy as np
from shapely.geometry import box as shapely_box

from lastseen.core import Box, ResponseTrack


def box_iou_oracle(a: Box, b: Box) -> float:
    pa = shapely_box(a.x, a.y, a.x + a.w, a.y + a.h)
    pb = shapely_box(b.x, b.y, b.x + b.w, b.y + b.h)
    union = pa.union(pb).area
    if union == 0:
        return 0.0
    return pa.intersection(pb).area / union


def temporal_iou_oracle(a: tuple[int, int], b: tuple[int, int]) -> float:
    sa = set(range(a[0], a[1] + 1))
    sb = set(range(b[0], b[1] + 1))
    return len(sa & sb) / len(sa | sb)


def st_iou_oracle(pred: ResponseTrack, gt: ResponseTrack) -> float:
    """Per-frame shapely areas summed over the union of covered frames."""
    inter = 0.0
    union = 0.0
    frames = set(pred.frames()) | set(gt.frames())
    for f in frames:
        p = pred.box_at(f)
        g = gt.box_at(f)
        polys = []
        if p is not None:
            polys.append(shapely_box(p.x, p.y, p.x + p.w, p.y + p.h))
        if g is not None:
            polys.append(shapely_box(g.x, g.y, g.x + g.w, g.y + g.h))
        if len(polys) == 2:
            inter += polys[0].intersection(polys[1]).area
            union += polys[0].union(polys[1]).area
        else:
            union += polys[0].area
    return inter / union


def average_precision_oracle(ranked: list[tuple[float, bool]], num_gt: int) -> float:
    """Walk every prefix of the confidence-sorted list and integrate the raw
    precision/recall staircase (no interpolation)."""
    order = sorted(range(len(ranked)), key=lambda i: -ranked[i][0])
    flags = [ranked[i][1] for i in order]
    ap = 0.0
    prev_recall = 0.0
    tp = 0
    for k, flag in enumerate(flags, start=1):
        if flag:
            tp += 1
        precision = tp / k
        recall = tp / num_gt
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def zncc_oracle(window: np.ndarray, template: np.ndarray) -> float:
    """Pearson correlation of the flattened window and template; 0 when
    either side has zero variance."""
    w = window.astype(np.float64).ravel()
    t = template.astype(np.float64).ravel()
    wd = w - w.mean()
    td = t - t.mean()
    denom = np.sqrt((wd * wd).sum() * (td * td).sum())
    if denom == 0:
        return 0.0
    return float((wd * td).sum() / denom)
