"""Anti-aliased disc rendering onto a square grayscale canvas."""

from __future__ import annotations

from typing import Iterable, Tuple

import numpy as np

BACKGROUND = 0.0
GOAL_INTENSITY = 0.5
AGENT_INTENSITY = 1.0

# (x, y, radius, intensity) in world units, world square is [-1, 1]^2 with y up
Disc = Tuple[float, float, float, float]


def world_to_pixel(x: float, y: float, size: int) -> Tuple[float, float]:
    """Map world coordinates to continuous (row, col) pixel coordinates."""

    col = (x + 1.0) * 0.5 * size
    row = (1.0 - y) * 0.5 * size
    return row, col


def disc_coverage(center: Tuple[float, float], radius_px: float, size: int) -> np.ndarray:
    """Per-pixel coverage of a disc, with a one-pixel linear edge ramp."""

    centers = np.arange(size, dtype=np.float64) + 0.5
    rows, cols = np.meshgrid(centers, centers, indexing="ij")
    dist = np.hypot(rows - center[0], cols - center[1])
    return np.clip(radius_px - dist + 0.5, 0.0, 1.0)


def render_discs(discs: Iterable[Disc], size: int) -> np.ndarray:
    """Composite discs (later ones on top by max) into a ``[1, size, size]`` frame."""

    canvas = np.full((size, size), BACKGROUND, dtype=np.float64)
    for x, y, radius, intensity in discs:
        cover = disc_coverage(world_to_pixel(x, y, size), radius * 0.5 * size, size)
        np.maximum(canvas, intensity * cover, out=canvas)
    frame = np.round(np.clip(canvas, 0.0, 1.0) * 255.0) / 255.0
    return frame.astype(np.float32)[None]
