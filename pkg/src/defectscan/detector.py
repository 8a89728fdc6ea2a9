"""Detection phase: score test-image windows against a trained model.

Every disjoint window of the test image gets a Sorensen distance to the
model's mean vector; a window is defective exactly when that distance
strictly exceeds the model threshold. Results come back as a grid-shaped
map supporting re-thresholding, a JSON report, and a visual overlay.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._util import atomic_write_text, map_ordered
from .features import feature_vector
from .imaging import GrayImage, quantize, save_image, tile
from .model import FEATURE_DIM, INFINITE_DISTANCE, DefectModel, sorensen_distance


@dataclass(frozen=True)
class WindowVerdict:
    """Verdict for one window: grid position, distance, classification."""

    row: int
    col: int
    distance: float
    defective: bool


@dataclass(frozen=True)
class DefectMap:
    """Per-window distances for one scanned image, plus the threshold used.

    ``defective`` is derived from ``distances > threshold`` on access, so a
    map's verdicts always agree with its threshold; :meth:`rescored` swaps in
    a different threshold without touching the distances.
    """

    distances: np.ndarray
    window: int
    threshold: float
    image_width: int
    image_height: int

    def __post_init__(self):
        grid = np.asarray(self.distances, dtype=np.float64)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("distances must form a non-empty 2-D grid")
        if np.any(np.isnan(grid)) or np.any(grid < 0.0):
            raise ValueError("distances must be >= 0 (inf allowed)")
        grid = grid.copy()
        grid.setflags(write=False)
        object.__setattr__(self, "distances", grid)
        if int(self.window) < 2:
            raise ValueError(f"window must be at least 2, got {self.window}")
        object.__setattr__(self, "window", int(self.window))
        if math.isnan(self.threshold) or self.threshold < 0.0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "image_width", int(self.image_width))
        object.__setattr__(self, "image_height", int(self.image_height))

    @property
    def rows(self) -> int:
        return self.distances.shape[0]

    @property
    def cols(self) -> int:
        return self.distances.shape[1]

    @property
    def defective(self) -> np.ndarray:
        """Boolean grid: True where distance strictly exceeds the threshold."""
        return self.distances > self.threshold

    @property
    def defective_count(self) -> int:
        return int(self.defective.sum())

    def verdicts(self) -> Iterator[WindowVerdict]:
        """Yield one verdict per window in row-major order."""
        flags = self.defective
        for row in range(self.rows):
            for col in range(self.cols):
                yield WindowVerdict(
                    row=row,
                    col=col,
                    distance=float(self.distances[row, col]),
                    defective=bool(flags[row, col]),
                )

    def rescored(self, threshold: float) -> "DefectMap":
        """Same distances, different threshold."""
        return DefectMap(
            distances=self.distances,
            window=self.window,
            threshold=threshold,
            image_width=self.image_width,
            image_height=self.image_height,
        )


def classify_window(features, model: DefectModel) -> tuple[float, bool]:
    """Score one feature vector: (distance to mean, strictly-over-threshold)."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (FEATURE_DIM,):
        raise ValueError(f"expected a vector of {FEATURE_DIM} components")
    distance = sorensen_distance(features, model.average)
    return distance, distance > model.threshold


def detect(image: GrayImage, model: DefectModel) -> DefectMap:
    """Scan an image with a trained model.

    The image is quantized and tiled with the model's own configuration;
    windows are scored independently (in parallel when worthwhile) and the
    distances assembled row-major.
    """
    if not isinstance(image, GrayImage):
        raise TypeError(f"expected GrayImage, got {type(image).__name__}")
    grid = tile(quantize(image, model.config.levels), model.config.window)
    mode = model.config.energy_mode
    windows = [w for _, _, w in grid]
    distances = map_ordered(
        lambda w: sorensen_distance(feature_vector(w, mode), model.average),
        windows,
    )
    return DefectMap(
        distances=np.array(distances, dtype=np.float64).reshape(grid.rows, grid.cols),
        window=model.config.window,
        threshold=model.threshold,
        image_width=image.width,
        image_height=image.height,
    )


def render_overlay(image: GrayImage, defect_map: DefectMap, path: str | os.PathLike) -> None:
    """Write the image with defective windows highlighted.

    Defective blocks are brightened halfway to white and get a one-pixel
    white border; healthy pixels (including the tiled-away margins) pass
    through untouched.
    """
    if not isinstance(image, GrayImage):
        raise TypeError(f"expected GrayImage, got {type(image).__name__}")
    if image.width != defect_map.image_width or image.height != defect_map.image_height:
        raise ValueError("image dimensions do not match the defect map")
    out = image.pixels.astype(np.int16)
    w = defect_map.window
    flags = defect_map.defective
    for row in range(defect_map.rows):
        for col in range(defect_map.cols):
            if not flags[row, col]:
                continue
            r0, c0 = row * w, col * w
            block = out[r0 : r0 + w, c0 : c0 + w]
            block[:] = (block + 255) // 2
            block[0, :] = 255
            block[-1, :] = 255
            block[:, 0] = 255
            block[:, -1] = 255
    save_image(GrayImage(out.astype(np.uint8)), path)


def report_dict(defect_map: DefectMap) -> dict:
    """Report as a plain dict; infinite distances encode as the string "inf"."""
    windows = []
    for v in defect_map.verdicts():
        distance = "inf" if v.distance == INFINITE_DISTANCE else v.distance
        windows.append(
            {
                "row": v.row,
                "col": v.col,
                "distance": distance,
                "defective": v.defective,
            }
        )
    return {
        "rows": defect_map.rows,
        "cols": defect_map.cols,
        "window": defect_map.window,
        "threshold": defect_map.threshold,
        "windows": windows,
    }


def write_report(defect_map: DefectMap, path: str | os.PathLike) -> None:
    """Write the JSON window report (atomic)."""
    atomic_write_text(path, json.dumps(report_dict(defect_map), indent=2) + "\n")
