"""Domain types and spatio-temporal geometry shared by every other module."""

from __future__ import annotations

import math
from dataclasses import dataclass

# Frame ordinals are plain non-negative ints throughout.
FrameIndex = int


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle (x, y, w, h) in pixels, real-valued."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"box position must be finite, got ({self.x}, {self.y})")
        if not (self.w > 0 and self.h > 0 and math.isfinite(self.w) and math.isfinite(self.h)):
            raise ValueError(f"box size must be positive and finite, got ({self.w}, {self.h})")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    def translate(self, dx: float, dy: float) -> Box:
        return Box(self.x + dx, self.y + dy, self.w, self.h)


@dataclass(frozen=True)
class VisualQuery:
    """A retrieval question: find the most recent appearance, before
    ``query_frame``, of the object registered by the crop."""

    query_id: str
    video_id: str
    query_frame: FrameIndex
    crop_video_id: str
    crop_frame: FrameIndex
    crop_box: Box

    def __post_init__(self) -> None:
        if self.query_frame < 1:
            raise ValueError(
                f"query {self.query_id}: query_frame must be >= 1, got {self.query_frame}"
            )
        if self.crop_frame < 0:
            raise ValueError(
                f"query {self.query_id}: crop_frame must be >= 0, got {self.crop_frame}"
            )


@dataclass(frozen=True)
class ResponseTrack:
    """A temporally contiguous run of per-frame boxes, one per frame from
    ``start`` to ``end`` inclusive."""

    video_id: str
    start: FrameIndex
    boxes: tuple[Box, ...]

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"track start must be >= 0, got {self.start}")
        if not self.boxes:
            raise ValueError("track must contain at least one box")
        object.__setattr__(self, "boxes", tuple(self.boxes))

    @property
    def end(self) -> FrameIndex:
        return self.start + len(self.boxes) - 1

    def box_at(self, frame: FrameIndex) -> Box | None:
        """Box on ``frame``, or None when the track does not cover it."""
        if self.start <= frame <= self.end:
            return self.boxes[frame - self.start]
        return None

    def frames(self) -> range:
        return range(self.start, self.end + 1)


@dataclass(frozen=True)
class ScoredTrack:
    """A response track plus the confidence used to rank it for AP."""

    track: ResponseTrack
    confidence: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.confidence):
            raise ValueError(f"confidence must be finite, got {self.confidence}")


def box_iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two boxes; 0 when disjoint."""
    ix = min(a.x2, b.x2) - max(a.x, b.x)
    iy = min(a.y2, b.y2) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def _box_intersection(a: Box, b: Box) -> float:
    ix = min(a.x2, b.x2) - max(a.x, b.x)
    iy = min(a.y2, b.y2) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    return ix * iy


def temporal_iou(a: tuple[FrameIndex, FrameIndex], b: tuple[FrameIndex, FrameIndex]) -> float:
    """IoU of two inclusive frame intervals, counted in whole frames."""
    (a_s, a_e), (b_s, b_e) = a, b
    if a_s > a_e or b_s > b_e:
        raise ValueError(f"intervals must satisfy s <= e, got {a} and {b}")
    inter = min(a_e, b_e) - max(a_s, b_s) + 1
    if inter <= 0:
        return 0.0
    union = (a_e - a_s + 1) + (b_e - b_s + 1) - inter
    return inter / union


def st_iou(pred: ResponseTrack, gt: ResponseTrack) -> float:
    """Volumetric tube IoU: summed per-frame intersection area over summed
    per-frame union area, frames covered by one track contributing that
    track's full box area to the union.
    """
    if pred.video_id != gt.video_id:
        raise ValueError(
            f"st_iou compares tracks from one video, got {pred.video_id!r} vs {gt.video_id!r}"
        )
    inter = 0.0
    union = 0.0
    for frame in range(min(pred.start, gt.start), max(pred.end, gt.end) + 1):
        p = pred.box_at(frame)
        g = gt.box_at(frame)
        if p is not None and g is not None:
            i = _box_intersection(p, g)
            inter += i
            union += p.area + g.area - i
        elif p is not None:
            union += p.area
        elif g is not None:
            union += g.area
    return inter / union
