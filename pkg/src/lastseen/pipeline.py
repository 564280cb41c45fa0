"""The three-step retrieval baseline: score every frame before the query
frame against the crop, seed at the most confident frame, then track
outwards in both directions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import Box, FrameIndex, ResponseTrack, ScoredTrack, VisualQuery
from .frames import FrameStore
from .kernels import zncc_best
from .scoring import FrameScorer


class NoProposalError(ValueError):
    """The scorer produced no proposal on any frame in range."""


@dataclass(frozen=True)
class CurvePoint:
    score: float
    box: Box | None


@dataclass(frozen=True)
class SimilarityCurve:
    """Per-frame top-1 score and box over a contiguous frame range.

    Points with ``box=None`` mark frames where the scorer had no proposal;
    their score is a filler 0.0 and peak detection skips them.
    """

    first_frame: FrameIndex
    points: tuple[CurvePoint, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("similarity curve must contain at least one point")
        for i, p in enumerate(self.points):
            if not math.isfinite(p.score):
                raise ValueError(f"non-finite score at frame {self.first_frame + i}")

    @property
    def last_frame(self) -> FrameIndex:
        return self.first_frame + len(self.points) - 1


@dataclass(frozen=True)
class TrackerConfig:
    """Bidirectional template tracker settings.

    ``search_margin=None`` means half the peak-box diagonal, computed per
    query. ``template_update="every_frame"`` re-cuts the template from each
    matched box (drift-prone, opt-in).
    """

    stop_threshold: float = 0.6
    search_margin: float | None = None
    template_update: Literal["none", "every_frame"] = "none"

    def __post_init__(self) -> None:
        if not math.isfinite(self.stop_threshold):
            raise ValueError("stop_threshold must be finite")
        if self.search_margin is not None and self.search_margin < 0:
            raise ValueError("search_margin must be >= 0")
        if self.template_update not in ("none", "every_frame"):
            raise ValueError(f"unknown template_update {self.template_update!r}")


@dataclass(frozen=True)
class Peak:
    frame: FrameIndex
    box: Box
    score: float


@dataclass(frozen=True)
class QueryAnswer:
    """Full pipeline outcome: the scored track plus the peak that seeded it.
    Both are None when no frame had a proposal ("no response")."""

    scored: ScoredTrack | None
    peak: Peak | None


def score_frames(
    store: FrameStore,
    video_id: str,
    frame_range: tuple[FrameIndex, FrameIndex],
    crop_pixels: np.ndarray,
    scorer: FrameScorer,
) -> SimilarityCurve:
    """One curve point per frame in the inclusive range, in frame order."""
    first, last = frame_range
    if first < 0 or first > last:
        raise ValueError(f"invalid frame range {frame_range}")
    points = []
    for frame in range(first, last + 1):
        pixels = store.load_frame(video_id, frame) if scorer.needs_pixels else None
        box, score = scorer.best_match(video_id, frame, pixels, crop_pixels)
        if box is None:
            points.append(CurvePoint(0.0, None))
        else:
            points.append(CurvePoint(float(score), box))
    return SimilarityCurve(first, tuple(points))


def detect_peak(curve: SimilarityCurve) -> Peak:
    """Argmax of the curve over points that carry a box; score ties go to
    the latest frame (the most recent appearance wins)."""
    best: Peak | None = None
    for i, point in enumerate(curve.points):
        if point.box is None:
            continue
        if best is None or point.score >= best.score:
            best = Peak(curve.first_frame + i, point.box, point.score)
    if best is None:
        raise NoProposalError("no frame in range produced a proposal")
    return best


def _match_in_window(
    pixels: np.ndarray, template: np.ndarray, prev: Box, margin: float
) -> tuple[Box, float] | None:
    """Best template position inside the previous box grown by ``margin``;
    None when the clipped window cannot contain the template."""
    h, w = pixels.shape
    th, tw = template.shape
    wy0 = max(0, math.floor(prev.y - margin))
    wx0 = max(0, math.floor(prev.x - margin))
    wy1 = min(h, math.ceil(prev.y2 + margin))
    wx1 = min(w, math.ceil(prev.x2 + margin))
    y_hi = min(wy1 - th, h - th)
    x_hi = min(wx1 - tw, w - tw)
    if y_hi < wy0 or x_hi < wx0:
        return None
    score, y, x = zncc_best(pixels, template, stride=1, region=(wy0, wx0, y_hi, x_hi))
    return Box(float(x), float(y), float(tw), float(th)), score


def track_bidirectional(
    store: FrameStore,
    video_id: str,
    peak_frame: FrameIndex,
    peak_box: Box,
    peak_template: np.ndarray,
    cfg: TrackerConfig,
    first_frame: FrameIndex = 0,
    last_frame: FrameIndex | None = None,
) -> ResponseTrack:
    """Track the peak template forward then backward from the peak frame.

    Each direction stops at the first frame whose best match inside the
    search window scores below ``cfg.stop_threshold``, or at the
    [first_frame, last_frame] bounds.
    """
    if last_frame is None:
        last_frame = store.num_frames(video_id) - 1
    if not first_frame <= peak_frame <= last_frame:
        raise ValueError(
            f"peak frame {peak_frame} outside track bounds [{first_frame}, {last_frame}]"
        )
    margin = (
        cfg.search_margin
        if cfg.search_margin is not None
        else 0.5 * math.hypot(peak_box.w, peak_box.h)
    )

    def follow(frames) -> list[Box]:
        template = peak_template
        prev = peak_box
        out = []
        for frame in frames:
            pixels = store.load_frame(video_id, frame)
            match = _match_in_window(pixels, template, prev, margin)
            if match is None or match[1] < cfg.stop_threshold:
                break
            prev = match[0]
            out.append(prev)
            if cfg.template_update == "every_frame":
                template = store.load_box(video_id, frame, prev)
        return out

    forward = follow(range(peak_frame + 1, last_frame + 1))
    backward = follow(range(peak_frame - 1, first_frame - 1, -1))
    boxes = tuple(reversed(backward)) + (peak_box,) + tuple(forward)
    return ResponseTrack(video_id, peak_frame - len(backward), boxes)


def answer_query(
    store: FrameStore,
    query: VisualQuery,
    scorer: FrameScorer,
    cfg: TrackerConfig = TrackerConfig(),
) -> QueryAnswer:
    """Run the full pipeline for one query."""
    num = store.num_frames(query.video_id)
    if query.query_frame >= num:
        raise ValueError(
            f"query {query.query_id}: query_frame {query.query_frame} outside video "
            f"{query.video_id!r} with {num} frames"
        )
    crop = store.load_box(query.crop_video_id, query.crop_frame, query.crop_box)
    last = query.query_frame - 1
    curve = score_frames(store, query.video_id, (0, last), crop, scorer)
    try:
        peak = detect_peak(curve)
    except NoProposalError:
        return QueryAnswer(None, None)
    template = store.load_box(query.video_id, peak.frame, peak.box)
    track = track_bidirectional(
        store, query.video_id, peak.frame, peak.box, template, cfg, 0, last
    )
    return QueryAnswer(ScoredTrack(track, peak.score), peak)


def run_query(
    store: FrameStore,
    query: VisualQuery,
    scorer: FrameScorer,
    cfg: TrackerConfig = TrackerConfig(),
) -> ScoredTrack | None:
    """Pipeline composition; None is the explicit "no response" outcome."""
    return answer_query(store, query, scorer, cfg).scored
