"""Directed gray-level co-occurrence matrices over the eight unit offsets.

``counts[i, j]`` is the number of pixel positions whose gray level is ``i``
and whose neighbour at the direction's (row, col) offset has gray level
``j``. Neighbours falling outside the window are skipped (no wraparound), so
the matrix for a direction's 180-degree opposite is its exact transpose.
Counts stay exact integers; normalization happens only downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .imaging import QuantizedImage


class Direction(Enum):
    """Unit (row, col) offsets, named by their angle in degrees.

    Angle 0 points to the right-hand neighbour, angles grow counterclockwise,
    and ``offset(angle + 180)`` is always the negated offset.
    """

    D0 = (0, 1)
    D45 = (-1, 1)
    D90 = (-1, 0)
    D135 = (-1, -1)
    D180 = (0, -1)
    D225 = (1, -1)
    D270 = (1, 0)
    D315 = (1, 1)

    @property
    def offset(self) -> tuple[int, int]:
        """The (row delta, col delta) of the neighbour relation."""
        return self.value

    def opposite(self) -> "Direction":
        """The direction rotated by 180 degrees."""
        dr, dc = self.value
        return Direction((-dr, -dc))


#: The four directions used for training and inference. The other four are
#: their transposes, which every downstream energy statistic cannot tell
#: apart, so computing them would be pure overhead.
CANONICAL_DIRECTIONS = (Direction.D0, Direction.D45, Direction.D90, Direction.D135)


@dataclass(frozen=True)
class Glcm:
    """Co-occurrence counts of one direction over an L-level alphabet."""

    levels: int
    direction: Direction
    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.shape != (self.levels, self.levels):
            raise ValueError(
                f"counts shape {arr.shape} does not match levels {self.levels}"
            )
        if not np.issubdtype(arr.dtype, np.integer) or (arr < 0).any():
            raise ValueError("counts must be nonnegative integers")
        arr = arr.astype(np.int64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def total(self) -> int:
        """Number of in-bounds pixel pairs counted."""
        return int(self.counts.sum())


def compute_glcm(window: QuantizedImage, direction: Direction) -> Glcm:
    """Count ordered gray-level pairs at the direction's unit offset.

    Parameters
    ----------
    window : QuantizedImage
        Pixel block to analyse; must admit at least one in-bounds pair for
        the direction (e.g. width >= 2 for horizontal offsets).
    direction : Direction
        Neighbour relation to count.

    Returns
    -------
    Glcm
        Exact integer pair counts; ``total`` equals
        ``(height - |dr|) * (width - |dc|)``.
    """
    dr, dc = direction.offset
    px = window.pixels
    height, width = px.shape
    if height <= abs(dr) or width <= abs(dc):
        raise ValueError(
            f"window {width}x{height} has no pixel pairs for direction "
            f"{direction.name}"
        )
    r0, r1 = max(0, -dr), height - max(0, dr)
    c0, c1 = max(0, -dc), width - max(0, dc)
    src = px[r0:r1, c0:c1].astype(np.int32)
    dst = px[r0 + dr : r1 + dr, c0 + dc : c1 + dc].astype(np.int32)
    levels = window.levels
    flat = np.bincount((src * levels + dst).ravel(), minlength=levels * levels)
    return Glcm(levels, direction, flat.reshape(levels, levels))


def glcm_quad(window: QuantizedImage) -> tuple[Glcm, Glcm, Glcm, Glcm]:
    """The four canonical-direction GLCMs of a window (needs >= 2x2)."""
    if window.height < 2 or window.width < 2:
        raise ValueError(
            f"window must be at least 2x2, got {window.width}x{window.height}"
        )
    return tuple(compute_glcm(window, d) for d in CANONICAL_DIRECTIONS)
