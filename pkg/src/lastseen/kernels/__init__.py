"""ZNCC scan kernels: the compiled extension when built, a numpy fallback
otherwise. ``LASTSEEN_ZNCC_BACKEND={cython,python}`` forces the choice."""

from __future__ import annotations

import os

import numpy as np

from . import _zncc_py

try:
    from . import _zncc_cy
except ImportError:
    _zncc_cy = None


def _select_backend() -> tuple[str, object]:
    forced = os.environ.get("LASTSEEN_ZNCC_BACKEND")
    if forced == "python":
        return "python", _zncc_py
    if forced == "cython":
        if _zncc_cy is None:
            raise ImportError(
                "LASTSEEN_ZNCC_BACKEND=cython but the compiled kernel is not built; "
                "run `pip install -e . --no-build-isolation`"
            )
        return "cython", _zncc_cy
    if forced is not None:
        raise ValueError(f"unknown LASTSEEN_ZNCC_BACKEND {forced!r}")
    if _zncc_cy is not None:
        return "cython", _zncc_cy
    return "python", _zncc_py


_BACKEND_NAME, _BACKEND = _select_backend()


def active_backend() -> str:
    return _BACKEND_NAME


def available_backends() -> tuple[str, ...]:
    return ("python",) if _zncc_cy is None else ("cython", "python")


def _backend_module(name: str | None):
    if name is None:
        return _BACKEND
    if name == "python":
        return _zncc_py
    if name == "cython":
        if _zncc_cy is None:
            raise ValueError("compiled kernel not built")
        return _zncc_cy
    raise ValueError(f"unknown backend {name!r}")


def zncc_best(
    image: np.ndarray,
    template: np.ndarray,
    stride: int = 1,
    region: tuple[int, int, int, int] | None = None,
    backend: str | None = None,
) -> tuple[float, int, int]:
    """Best zero-normalized cross-correlation of ``template`` against
    template-sized windows of ``image``.

    ``region`` is an inclusive (y0, x0, y1, x1) bound on window top-left
    positions; by default every valid position is scanned. Returns
    (score, y, x) of the argmax window, ties resolved to the first position
    in row-major scan order.
    """
    image = np.ascontiguousarray(image, dtype=np.float64)
    template = np.ascontiguousarray(template, dtype=np.float64)
    if image.ndim != 2 or template.ndim != 2:
        raise ValueError("image and template must be 2-D grayscale arrays")
    h, w = image.shape
    th, tw = template.shape
    if th > h or tw > w:
        raise ValueError(f"template {th}x{tw} larger than image {h}x{w}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if region is None:
        y0, x0, y1, x1 = 0, 0, h - th, w - tw
    else:
        y0, x0, y1, x1 = region
        if not (0 <= y0 <= y1 <= h - th and 0 <= x0 <= x1 <= w - tw):
            raise ValueError(
                f"region {region} out of bounds for image {h}x{w} and template {th}x{tw}"
            )
    score, y, x = _backend_module(backend).zncc_scan(image, template, y0, x0, y1, x1, stride)
    return float(score), int(y), int(x)
