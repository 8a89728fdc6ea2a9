"""Training phase: mean feature vector, health threshold, model persistence.

A model is fit from defect-free images only. All their windows' feature
vectors are pooled; the model keeps the componentwise mean and a threshold
equal to the largest Sorensen distance between any training window and that
mean (optionally widened by a margin multiplier). By construction, re-scoring
the training windows against their own model never exceeds the threshold.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from ._util import atomic_write_text
from .features import FEATURE_DIM, EnergyMode, feature_vectors
from .imaging import GrayImage, quantize, tile

#: Distance reported when two vectors are maximally dissimilar (the distance
#: denominator vanishes while the numerator does not). Compares greater than
#: every finite threshold, so such windows always classify as defective.
INFINITE_DISTANCE = math.inf

# Below this, a Sorensen numerator/denominator is treated as exactly zero.
_EPS = 1e-12

MODEL_FORMAT_VERSION = 1

_MODEL_KEYS = (
    "version",
    "levels",
    "window",
    "energy_mode",
    "margin",
    "average",
    "threshold",
    "trained_windows",
)


@dataclass(frozen=True)
class TrainConfig:
    """Knobs of the training pipeline.

    ``threshold_margin`` scales the fitted threshold; 1.0 keeps the plain
    max-distance rule, larger values absorb single outlier training windows.
    """

    levels: int = 32
    window: int = 32
    energy_mode: EnergyMode = EnergyMode.ASM
    threshold_margin: float = 1.0

    def __post_init__(self):
        if not 2 <= int(self.levels) <= 256:
            raise ValueError(f"levels out of range [2, 256]: {self.levels}")
        if int(self.window) < 2:
            raise ValueError(f"window must be at least 2, got {self.window}")
        if not (
            isinstance(self.threshold_margin, (int, float))
            and math.isfinite(self.threshold_margin)
            and self.threshold_margin >= 1.0
        ):
            raise ValueError(f"threshold margin must be >= 1, got {self.threshold_margin}")
        object.__setattr__(self, "levels", int(self.levels))
        object.__setattr__(self, "window", int(self.window))
        object.__setattr__(self, "energy_mode", EnergyMode(self.energy_mode))
        object.__setattr__(self, "threshold_margin", float(self.threshold_margin))


@dataclass(frozen=True)
class DefectModel:
    """Trained artifact: config, mean feature vector, health threshold."""

    config: TrainConfig
    average: np.ndarray
    threshold: float
    trained_windows: int

    def __post_init__(self):
        avg = np.asarray(self.average, dtype=np.float64)
        if avg.shape != (FEATURE_DIM,) or not np.all(np.isfinite(avg)):
            raise ValueError(f"average must be {FEATURE_DIM} finite components")
        avg = avg.copy()
        avg.setflags(write=False)
        object.__setattr__(self, "average", avg)
        if not (math.isfinite(self.threshold) and self.threshold >= 0.0):
            raise ValueError(f"threshold must be finite and >= 0, got {self.threshold}")
        object.__setattr__(self, "threshold", float(self.threshold))
        if int(self.trained_windows) < 1:
            raise ValueError("model must be trained on at least one window")
        object.__setattr__(self, "trained_windows", int(self.trained_windows))


def _as_feature_matrix(vectors) -> np.ndarray:
    mat = np.asarray(list(vectors), dtype=np.float64)
    if mat.size == 0:
        raise ValueError("empty feature vector list")
    if mat.ndim != 2 or mat.shape[1] != FEATURE_DIM:
        raise ValueError(f"expected vectors of {FEATURE_DIM} components, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("feature vectors must be finite")
    return mat


def average_vector(vectors) -> np.ndarray:
    """Componentwise arithmetic mean of a non-empty list of feature vectors.

    Identical inputs yield exactly that vector (no accumulated rounding), so
    a constant training texture gets an exactly-zero threshold downstream.
    """
    mat = _as_feature_matrix(vectors)
    if bool(np.all(mat == mat[0])):
        return mat[0].copy()
    return mat.mean(axis=0)


def sorensen_distance(f, g) -> float:
    """Sorensen distance ``sum|f-g| / sum|f+g|`` between two 6-D vectors.

    The components are signed, so the denominator can vanish. When it does:
    a vanishing numerator means the vectors are equal (distance 0), anything
    else means maximal dissimilarity and returns :data:`INFINITE_DISTANCE`.
    """
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != (FEATURE_DIM,) or g.shape != (FEATURE_DIM,):
        raise ValueError(f"expected two vectors of {FEATURE_DIM} components")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
        raise ValueError("vectors must be finite")
    numerator = float(np.abs(f - g).sum())
    denominator = float(np.abs(f + g).sum())
    if denominator < _EPS:
        return 0.0 if numerator < _EPS else INFINITE_DISTANCE
    return numerator / denominator


def compute_threshold(vectors, average, margin: float = 1.0) -> float:
    """Largest distance between any training vector and the mean, times margin.

    An infinite distance inside the training set means the healthy windows
    are mutually inconsistent and is rejected.
    """
    mat = _as_feature_matrix(vectors)
    if margin < 1.0:
        raise ValueError(f"threshold margin must be >= 1, got {margin}")
    distances = [sorensen_distance(v, average) for v in mat]
    if any(math.isinf(d) for d in distances):
        raise ValueError("training data inconsistent: infinite distance to the mean vector")
    return float(margin) * max(distances)


def train(images, config: TrainConfig = TrainConfig()) -> DefectModel:
    """Fit a model from defect-free images.

    Each image is quantized, tiled, and featurized; windows from all images
    are pooled into one training set (image order, then row-major window
    order) before the mean and threshold are computed.

    Parameters
    ----------
    images : iterable of GrayImage
        At least one defect-free image; each must admit at least one window.
    config : TrainConfig
        Quantization levels, window size, energy mode, threshold margin.

    Returns
    -------
    DefectModel
    """
    images = list(images)
    if not images:
        raise ValueError("no training images")
    vectors: list[np.ndarray] = []
    for img in images:
        if not isinstance(img, GrayImage):
            raise TypeError(f"expected GrayImage, got {type(img).__name__}")
        grid = tile(quantize(img, config.levels), config.window)
        vectors.extend(feature_vectors(grid, config.energy_mode))
    if not vectors:
        raise ValueError("no windows produced from the training images")
    average = average_vector(vectors)
    threshold = compute_threshold(vectors, average, config.threshold_margin)
    return DefectModel(
        config=config,
        average=average,
        threshold=threshold,
        trained_windows=len(vectors),
    )


# --------------------------------------------------------------------------
# Persistence (versioned JSON document; unknown keys rejected)
# --------------------------------------------------------------------------


def save_model(model: DefectModel, path: str | os.PathLike) -> None:
    """Write a model as JSON with full float round-trip precision (atomic)."""
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "levels": model.config.levels,
        "window": model.config.window,
        "energy_mode": model.config.energy_mode.value,
        "margin": model.config.threshold_margin,
        "average": [float(x) for x in model.average],
        "threshold": model.threshold,
        "trained_windows": model.trained_windows,
    }
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def _require_int(doc: dict, key: str) -> int:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"malformed model file: {key} must be an integer")
    return value


def _require_finite(doc: dict, key: str) -> float:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"malformed model file: {key} must be a number")
    if not math.isfinite(value):
        raise ValueError(f"malformed model file: {key} is not finite")
    return float(value)


def load_model(path: str | os.PathLike) -> DefectModel:
    """Read a model written by :func:`save_model`; strict about the schema."""
    path = os.fspath(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed model file: {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError(f"malformed model file: {path}: not a JSON object")
    unknown = sorted(set(doc) - set(_MODEL_KEYS))
    if unknown:
        raise ValueError(f"malformed model file: unknown keys {unknown}")
    missing = sorted(set(_MODEL_KEYS) - set(doc))
    if missing:
        raise ValueError(f"malformed model file: missing keys {missing}")
    version = _require_int(doc, "version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version: {version}")
    mode = doc["energy_mode"]
    if mode not in (EnergyMode.ASM.value, EnergyMode.HISTOGRAM.value):
        raise ValueError(f"malformed model file: unknown energy_mode {mode!r}")
    average = doc["average"]
    if not isinstance(average, list) or len(average) != FEATURE_DIM:
        raise ValueError(f"malformed model file: average must hold {FEATURE_DIM} numbers")
    avg = []
    for x in average:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ValueError("malformed model file: average components must be finite numbers")
        avg.append(float(x))
    config = TrainConfig(
        levels=_require_int(doc, "levels"),
        window=_require_int(doc, "window"),
        energy_mode=EnergyMode(mode),
        threshold_margin=_require_finite(doc, "margin"),
    )
    return DefectModel(
        config=config,
        average=np.array(avg),
        threshold=_require_finite(doc, "threshold"),
        trained_windows=_require_int(doc, "trained_windows"),
    )
