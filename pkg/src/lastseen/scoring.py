"""Frame scorers: the pluggable "how similar is this frame to the crop"
step. Two built-ins — multi-scale NCC template matching, and a replay
scorer fed by a detections file from any external detector."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np
from PIL import Image

from .core import Box, FrameIndex
from .kernels import zncc_best

DEFAULT_SCALES = (0.75, 1.0, 1.33)
DEFAULT_STRIDE = 4


@runtime_checkable
class FrameScorer(Protocol):
    """Top-1 proposal for one frame against the query crop.

    Implementations must be deterministic for fixed inputs and callable from
    concurrent workers. ``needs_pixels`` lets the pipeline skip decoding
    frames for scorers that never look at them.
    """

    needs_pixels: bool

    def best_match(
        self,
        video_id: str,
        frame: FrameIndex,
        frame_pixels: np.ndarray | None,
        crop_pixels: np.ndarray,
    ) -> tuple[Box | None, float]: ...


def _resize_bilinear(image: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    if (new_h, new_w) == image.shape:
        return image
    resized = Image.fromarray(image.astype(np.float32), mode="F").resize(
        (new_w, new_h), Image.BILINEAR
    )
    return np.asarray(resized, dtype=np.float64)


def ncc_score(
    frame: np.ndarray,
    template: np.ndarray,
    scales: tuple[float, ...] = DEFAULT_SCALES,
    stride: int = DEFAULT_STRIDE,
    backend: str | None = None,
) -> tuple[Box, float]:
    """Best zero-normalized cross-correlation of the template over all
    sliding windows and scales of one frame.

    Coarse scan at ``stride``, then an exhaustive +-stride refinement around
    each scale's coarse argmax; the best refined hit across scales wins.
    """
    frame = np.ascontiguousarray(frame, dtype=np.float64)
    template = np.ascontiguousarray(template, dtype=np.float64)
    h, w = frame.shape
    best: tuple[float, Box] | None = None
    for scale in scales:
        th = max(1, round(template.shape[0] * scale))
        tw = max(1, round(template.shape[1] * scale))
        if th > h or tw > w:
            continue
        scaled = _resize_bilinear(template, th, tw)
        score, y, x = zncc_best(frame, scaled, stride=stride, backend=backend)
        region = (
            max(0, y - stride),
            max(0, x - stride),
            min(h - th, y + stride),
            min(w - tw, x + stride),
        )
        score, y, x = zncc_best(frame, scaled, stride=1, region=region, backend=backend)
        if best is None or score > best[0]:
            best = (score, Box(float(x), float(y), float(tw), float(th)))
    if best is None:
        raise ValueError(
            f"template {template.shape} larger than frame {frame.shape} at every scale"
        )
    return best[1], best[0]


@dataclass(frozen=True)
class NccScorer:
    """Multi-scale NCC matcher; the desk-scale stand-in for a learned
    crop-conditioned detector."""

    scales: tuple[float, ...] = DEFAULT_SCALES
    stride: int = DEFAULT_STRIDE

    needs_pixels = True

    def best_match(self, video_id, frame, frame_pixels, crop_pixels):
        return ncc_score(frame_pixels, crop_pixels, self.scales, self.stride)


class DetectionsFileScorer:
    """Replays per-frame detections from a file, so outputs of a real
    detector drive the identical pipeline. Loads lazily; the loaded table is
    dropped on pickling so workers re-read from disk."""

    needs_pixels = False

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._table: dict | None = None

    def __getstate__(self):
        return {"path": self.path}

    def __setstate__(self, state):
        self.path = state["path"]
        self._table = None

    def best_match(self, video_id, frame, frame_pixels, crop_pixels):
        if self._table is None:
            from .formats import load_detections

            self._table = load_detections(self.path)
        best: tuple[Box, float] | None = None
        for box, score in self._table.get((video_id, frame), ()):
            if best is None or score > best[1]:
                best = (box, score)
        if best is None:
            return None, 0.0
        return best
