"""Window-level surface defect detection from directional texture energies.

Train a one-class model on defect-free images: quantize, tile into disjoint
windows, summarize each window by the differences between its co-occurrence
energies along four directions, and keep the mean vector plus a distance
threshold. At test time, any window whose feature vector strays beyond the
threshold is flagged defective.
"""

from .detector import DefectMap, WindowVerdict, classify_window, detect, render_overlay, write_report
from .evaluation import (
    DetectionCounts,
    GroundTruth,
    detection_counts,
    detection_rate,
    inject_defect,
    macro_detection_rate,
    mask_to_ground_truth,
    pooled_detection_rate,
    synth_texture,
)
from .features import FEATURE_DIM, EnergyMode, directional_energies, energy, feature_vector, feature_vectors
from .glcm import CANONICAL_DIRECTIONS, Direction, Glcm, compute_glcm, glcm_quad
from .imaging import GrayImage, QuantizedImage, WindowGrid, load_image, quantize, save_image, tile, to_grayscale
from .model import (
    INFINITE_DISTANCE,
    DefectModel,
    TrainConfig,
    average_vector,
    compute_threshold,
    load_model,
    save_model,
    sorensen_distance,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_DIRECTIONS",
    "DefectMap",
    "DefectModel",
    "DetectionCounts",
    "Direction",
    "EnergyMode",
    "FEATURE_DIM",
    "Glcm",
    "GrayImage",
    "GroundTruth",
    "INFINITE_DISTANCE",
    "QuantizedImage",
    "TrainConfig",
    "WindowGrid",
    "WindowVerdict",
    "average_vector",
    "classify_window",
    "compute_glcm",
    "compute_threshold",
    "detect",
    "detection_counts",
    "detection_rate",
    "directional_energies",
    "energy",
    "feature_vector",
    "feature_vectors",
    "glcm_quad",
    "inject_defect",
    "load_image",
    "load_model",
    "macro_detection_rate",
    "mask_to_ground_truth",
    "pooled_detection_rate",
    "quantize",
    "render_overlay",
    "save_image",
    "save_model",
    "sorensen_distance",
    "synth_texture",
    "tile",
    "to_grayscale",
    "train",
    "write_report",
    "__version__",
]
