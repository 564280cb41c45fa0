import numpy as np
import pytest
from PIL import Image, ImageFilter

from lastseen.frames import FrameStore, write_frame

TEX_H, TEX_W = 12, 16


def smooth_background(seed: int, height: int, width: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    blurred = Image.fromarray(raw, mode="L").filter(ImageFilter.GaussianBlur(3))
    return np.asarray(blurred, dtype=np.uint8)


def make_texture(seed: int, height: int = TEX_H, width: int = TEX_W) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(height, width), dtype=np.uint8)


def make_planted_store(
    root,
    placements: dict[int, tuple[int, int]],
    video_id: str = "vid",
    num_frames: int = 10,
    size: tuple[int, int] = (60, 80),
    seed: int = 0,
) -> tuple[FrameStore, np.ndarray]:
    """A single-video store with one texture planted at (x, y) on the frames
    listed in ``placements``. Returns the store and the texture."""
    height, width = size
    background = smooth_background(seed, height, width)
    texture = make_texture(seed + 1)
    for frame in range(num_frames):
        image = background.copy()
        if frame in placements:
            x, y = placements[frame]
            image[y : y + TEX_H, x : x + TEX_W] = texture
        write_frame(root, video_id, frame, image)
    return FrameStore(root), texture


@pytest.fixture
def planted_store(tmp_path):
    """Object static at (20, 24) over frames 3..8 of a 10-frame video."""
    placements = {f: (20, 24) for f in range(3, 9)}
    return make_planted_store(tmp_path, placements)
