"""On-disk frame stores: one directory per video, one lossless grayscale
image per frame, named by zero-padded frame index."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .core import Box, FrameIndex

FRAME_NAME = "{:05d}.png"


class FrameStore:
    """Read side of a frame directory. Safe for concurrent readers; a store
    object is picklable (it carries only the root path)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise FileNotFoundError(f"frame store root {self.root} does not exist")
        self._frame_counts: dict[str, int] = {}

    def __getstate__(self):
        return {"root": self.root}

    def __setstate__(self, state):
        self.root = state["root"]
        self._frame_counts = {}

    def video_ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())

    def frame_path(self, video_id: str, frame: FrameIndex) -> Path:
        return self.root / video_id / FRAME_NAME.format(frame)

    def num_frames(self, video_id: str) -> int:
        if video_id not in self._frame_counts:
            video_dir = self.root / video_id
            if not video_dir.is_dir():
                raise FileNotFoundError(f"video {video_id!r} not found under {self.root}")
            self._frame_counts[video_id] = sum(1 for _ in video_dir.glob("*.png"))
        return self._frame_counts[video_id]

    def load_frame(self, video_id: str, frame: FrameIndex) -> np.ndarray:
        """Frame pixels as float64 grayscale (H, W) in [0, 255]."""
        path = self.frame_path(video_id, frame)
        try:
            with Image.open(path) as img:
                return np.asarray(img.convert("L"), dtype=np.float64)
        except FileNotFoundError:
            raise FileNotFoundError(f"video {video_id!r} frame {frame} missing at {path}") from None

    def load_box(self, video_id: str, frame: FrameIndex, box: Box) -> np.ndarray:
        """Pixels under ``box`` (rounded to whole pixels, clipped to the
        frame). Raises when the clipped region is empty."""
        pixels = self.load_frame(video_id, frame)
        h, w = pixels.shape
        x0 = max(0, round(box.x))
        y0 = max(0, round(box.y))
        x1 = min(w, round(box.x + box.w))
        y1 = min(h, round(box.y + box.h))
        if x1 <= x0 or y1 <= y0:
            raise ValueError(
                f"box {box} falls outside video {video_id!r} frame {frame} of size {w}x{h}"
            )
        return pixels[y0:y1, x0:x1]


def write_frame(root: str | Path, video_id: str, frame: FrameIndex, pixels: np.ndarray) -> Path:
    """Write one uint8 grayscale frame; creates the video directory."""
    video_dir = Path(root) / video_id
    video_dir.mkdir(parents=True, exist_ok=True)
    path = video_dir / FRAME_NAME.format(frame)
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode="L").save(path)
    return path
