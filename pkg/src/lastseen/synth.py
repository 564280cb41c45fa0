"""Synthetic video generator: one uniquely textured moving target per video
with exact ground truth, plus optional failure-mode scenarios (a
near-identical distractor, an ambiguous crop context, blurred background
frames)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageFilter

from .core import Box, ResponseTrack, VisualQuery
from .formats import save_annotations
from .frames import write_frame
from .harness import Workload

CONTEXT_BAR_WIDTH = 8
BLUR_RADIUS = 2.0
MAX_SPEED = 2.0  # px per frame, per axis
# Object positions snap to this grid so the default coarse NCC scan (stride
# 4) lands on exact alignments: the white-noise textures decorrelate at any
# sub-grid offset, so off-grid plants would be invisible to a strided scan.
POSITION_GRID = 4


@dataclass(frozen=True)
class SynthConfig:
    num_videos: int = 8
    frames_per_video: int = 40
    width: int = 160
    height: int = 120
    texture_seed: int = 7
    rng_seed: int = 0
    distractor_similar: bool = False
    ambiguous_context: bool = False
    blur_background: bool = False
    # gray-level amplitude of the distractor texture perturbation; 0 keeps it
    # an exact copy of the target texture
    distractor_noise: float = 0.0

    def __post_init__(self) -> None:
        if self.num_videos < 1:
            raise ValueError("num_videos must be >= 1")
        if self.frames_per_video < 2:
            raise ValueError("frames_per_video must be >= 2")
        if self.width < 32 or self.height < 32:
            raise ValueError("frame size must be at least 32x32")
        if self.distractor_noise < 0:
            raise ValueError("distractor_noise must be >= 0")


def _smooth_noise(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    raw = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    blurred = Image.fromarray(raw, mode="L").filter(ImageFilter.GaussianBlur(3))
    return np.asarray(blurred, dtype=np.uint8)


def _sample_path(rng: np.random.Generator, lo: int, hi: int, steps: int) -> list[int]:
    """Linear motion: constant velocity, positions snapped to the position
    grid, kept inside [lo, hi]. Velocity is halved until the path fits."""
    grid = POSITION_GRID
    lo_g = -(-lo // grid) * grid
    hi_g = (hi // grid) * grid
    if hi_g < lo_g:
        raise ValueError("no room for the object path")
    v = float(rng.uniform(-MAX_SPEED, MAX_SPEED))
    while True:
        lo_start = lo_g + max(0.0, -v * steps)
        hi_start = hi_g - max(0.0, v * steps)
        if hi_start >= lo_start:
            break
        v *= 0.5
    x0 = float(rng.uniform(lo_start, hi_start))
    return [grid * round((x0 + v * k) / grid) for k in range(steps + 1)]


def _paste(image: np.ndarray, patch: np.ndarray, x: int, y: int) -> None:
    image[y : y + patch.shape[0], x : x + patch.shape[1]] = patch


def _blur(image: np.ndarray) -> np.ndarray:
    out = Image.fromarray(image, mode="L").filter(ImageFilter.GaussianBlur(BLUR_RADIUS))
    return np.asarray(out, dtype=np.uint8)


def _generate_video(
    cfg: SynthConfig, index: int, frames_root: Path
) -> tuple[VisualQuery, ResponseTrack]:
    video_id = f"video{index:03d}"
    rng = np.random.default_rng([cfg.rng_seed, index])
    texture_rng = np.random.default_rng([cfg.texture_seed, index])
    num_frames, width, height = cfg.frames_per_video, cfg.width, cfg.height
    if num_frames < 12:
        raise ValueError(
            "frames_per_video must be >= 12 to fit a visibility span with "
            "background frames on both sides"
        )

    th = int(rng.integers(14, 21))
    tw = int(rng.integers(18, 27))
    margin_x = min(12, (width - tw) // 2)
    margin_y = min(12, (height - th) // 2)
    if margin_x < 1 or margin_y < 1:
        raise ValueError(f"target {tw}x{th} does not fit in frame {width}x{height}")
    if cfg.ambiguous_context and margin_x < CONTEXT_BAR_WIDTH + 2:
        raise ValueError("frame too narrow for the ambiguous-context bar")

    texture = texture_rng.integers(0, 256, size=(th, tw), dtype=np.uint8)
    background = _smooth_noise(rng, height, width)

    start = int(rng.integers(3, num_frames // 4 + 1))
    end = int(rng.integers((2 * num_frames) // 3, num_frames - 3))
    xs = _sample_path(rng, margin_x, width - tw - margin_x, end - start)
    ys = _sample_path(rng, margin_y, height - th - margin_y, end - start)
    crop_frame = int(rng.integers(start, end + 1))

    bar = None
    if cfg.ambiguous_context:
        bar_tex = texture_rng.integers(0, 256, size=(th, CONTEXT_BAR_WIDTH), dtype=np.uint8)
        bar_x = xs[crop_frame - start] - CONTEXT_BAR_WIDTH
        bar_y = ys[crop_frame - start]
        bar = (bar_tex, bar_x, bar_y)

    distractor = None
    if cfg.distractor_similar:
        noise = rng.normal(0.0, 1.0, size=texture.shape)
        d_tex = np.clip(
            texture.astype(np.float64) + cfg.distractor_noise * noise, 0, 255
        ).astype(np.uint8)
        # even videos hide the distractor after the target span (its equal
        # score steals the latest-frame tie break), odd ones before it
        if index % 2 == 0:
            d_span = (end + 2, num_frames - 2)
        else:
            d_span = (1, start - 2)
        d_xs = _sample_path(rng, margin_x, width - tw - margin_x, d_span[1] - d_span[0])
        d_ys = _sample_path(rng, margin_y, height - th - margin_y, d_span[1] - d_span[0])
        distractor = (d_tex, d_span, d_xs, d_ys)

    for frame in range(num_frames):
        image = background.copy()
        if bar is not None:
            _paste(image, bar[0], bar[1], bar[2])
        if distractor is not None:
            d_tex, (d_s, d_e), d_xs, d_ys = distractor
            if d_s <= frame <= d_e:
                _paste(image, d_tex, d_xs[frame - d_s], d_ys[frame - d_s])
        visible = start <= frame <= end
        if visible:
            _paste(image, texture, xs[frame - start], ys[frame - start])
        if cfg.blur_background and not visible:
            image = _blur(image)
        write_frame(frames_root, video_id, frame, image)

    track = ResponseTrack(
        video_id,
        start,
        tuple(Box(float(x), float(y), float(tw), float(th)) for x, y in zip(xs, ys)),
    )
    ci = crop_frame - start
    if cfg.ambiguous_context:
        crop_box = Box(
            float(xs[ci] - CONTEXT_BAR_WIDTH), float(ys[ci]), float(tw + CONTEXT_BAR_WIDTH), float(th)
        )
    else:
        crop_box = Box(float(xs[ci]), float(ys[ci]), float(tw), float(th))
    query = VisualQuery(
        query_id=f"{video_id}-q0",
        video_id=video_id,
        query_frame=num_frames - 1,
        crop_video_id=video_id,
        crop_frame=crop_frame,
        crop_box=crop_box,
    )
    return query, track


def synth_generate(cfg: SynthConfig, out_dir: str | Path) -> tuple[Path, Path]:
    """Write the frame store and annotation file; fully reproducible from
    the config's seeds. Returns (frames_root, annotations_path)."""
    out_dir = Path(out_dir)
    frames_root = out_dir / "frames"
    frames_root.mkdir(parents=True, exist_ok=True)
    groups = []
    ground_truth = {}
    for i in range(cfg.num_videos):
        query, track = _generate_video(cfg, i, frames_root)
        groups.append((query.video_id, (query,)))
        ground_truth[query.query_id] = track
    workload = Workload(groups=tuple(groups), ground_truth=ground_truth)
    annotations_path = out_dir / "annotations.jsonl"
    save_annotations(annotations_path, workload)
    return frames_root, annotations_path
