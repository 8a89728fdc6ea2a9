"""Scoring against ground truth, plus synthetic fixtures for experiments.

The metric is window accuracy as a percent: of all windows, how many were
classified correctly (healthy predicted healthy, defective predicted
defective). Ground truth comes from a pixel mask via a coverage rule.
Texture generators and defect injectors provide deterministic, seedable
test material in place of photographic surface corpora.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .detector import DefectMap
from .imaging import GrayImage

_TEXTURE_KINDS = ("stripes", "checker", "sinusoid")
_DEFECT_KINDS = ("rotate90", "blur", "level-shift")

_BLUR_SIGMA = 2.0
_LEVEL_SHIFT = 64


@dataclass(frozen=True)
class GroundTruth:
    """True per-window labels on the same grid a detection run produces."""

    defective: np.ndarray
    window: int

    def __post_init__(self):
        grid = np.asarray(self.defective, dtype=bool)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("labels must form a non-empty 2-D grid")
        grid = grid.copy()
        grid.setflags(write=False)
        object.__setattr__(self, "defective", grid)
        if int(self.window) < 2:
            raise ValueError(f"window must be at least 2, got {self.window}")
        object.__setattr__(self, "window", int(self.window))

    @property
    def rows(self) -> int:
        return self.defective.shape[0]

    @property
    def cols(self) -> int:
        return self.defective.shape[1]


@dataclass(frozen=True)
class DetectionCounts:
    """Correct-healthy and correct-defective window counts out of a total."""

    correct_healthy: int
    correct_defective: int
    total: int

    def __post_init__(self):
        ch, cd, total = (int(self.correct_healthy), int(self.correct_defective), int(self.total))
        if ch < 0 or cd < 0 or total < 0 or ch + cd > total:
            raise ValueError(f"inconsistent counts: {ch} + {cd} over {total}")
        object.__setattr__(self, "correct_healthy", ch)
        object.__setattr__(self, "correct_defective", cd)
        object.__setattr__(self, "total", total)

    @property
    def rate(self) -> float:
        """Percent of windows classified correctly."""
        if self.total == 0:
            raise ValueError("no windows to score")
        return 100.0 * (self.correct_healthy + self.correct_defective) / self.total


def mask_to_ground_truth(mask: GrayImage, window: int, coverage: float = 0.10) -> GroundTruth:
    """Derive per-window labels from a pixel mask.

    A window is labeled defective iff at least ``coverage`` of its pixels
    are mask-positive, so a defect boundary clipping a few pixels does not
    condemn a whole window. Tiling matches detection: disjoint blocks,
    margins dropped.

    Parameters
    ----------
    mask : GrayImage
        Pixel labels, 0 = healthy and 255 = defective; no other values.
    window : int
        Block edge length in pixels; at most the mask dimensions.
    coverage : float
        Defective-pixel fraction in (0, 1] at which a window counts as
        defective.

    Returns
    -------
    GroundTruth
    """
    if not isinstance(mask, GrayImage):
        raise TypeError(f"expected GrayImage, got {type(mask).__name__}")
    px = mask.pixels
    if not np.all((px == 0) | (px == 255)):
        raise ValueError("mask values must be 0 or 255")
    window = int(window)
    if window < 2 or window > min(mask.height, mask.width):
        raise ValueError(f"window {window} does not fit mask {mask.width}x{mask.height}")
    if not 0.0 < coverage <= 1.0:
        raise ValueError(f"coverage must be in (0, 1], got {coverage}")
    rows, cols = mask.height // window, mask.width // window
    positive = (px[: rows * window, : cols * window] == 255)
    fraction = positive.reshape(rows, window, cols, window).mean(axis=(1, 3))
    return GroundTruth(defective=fraction >= coverage, window=window)


def detection_counts(defect_map: DefectMap, truth: GroundTruth) -> DetectionCounts:
    """Tally correct verdicts of a detection run against ground truth."""
    if (
        defect_map.rows != truth.rows
        or defect_map.cols != truth.cols
        or defect_map.window != truth.window
    ):
        raise ValueError(
            f"grid mismatch: map {defect_map.rows}x{defect_map.cols}/w{defect_map.window}"
            f" vs truth {truth.rows}x{truth.cols}/w{truth.window}"
        )
    predicted = defect_map.defective
    actual = truth.defective
    return DetectionCounts(
        correct_healthy=int(np.sum(~actual & ~predicted)),
        correct_defective=int(np.sum(actual & predicted)),
        total=actual.size,
    )


def detection_rate(defect_map: DefectMap, truth: GroundTruth) -> float:
    """Percent of windows whose verdict matches ground truth."""
    return detection_counts(defect_map, truth).rate


def pooled_detection_rate(pairs) -> float:
    """Detection rate with windows pooled across many (map, truth) pairs."""
    ch = cd = total = 0
    for defect_map, truth in pairs:
        counts = detection_counts(defect_map, truth)
        ch += counts.correct_healthy
        cd += counts.correct_defective
        total += counts.total
    return DetectionCounts(ch, cd, total).rate


def macro_detection_rate(pairs) -> float:
    """Unweighted mean of per-image detection rates."""
    rates = [detection_counts(m, t).rate for m, t in pairs]
    if not rates:
        raise ValueError("no image pairs to score")
    return float(np.mean(rates))


# --------------------------------------------------------------------------
# Synthetic fixtures
# --------------------------------------------------------------------------


def synth_texture(
    kind: str, period: int, size: int, noise: float = 0.0, seed: int = 0
) -> GrayImage:
    """Generate a square periodic texture, optionally with Gaussian noise.

    Kinds: ``stripes`` (vertical two-level bands), ``checker`` (two-level
    checkerboard), ``sinusoid`` (horizontal gray-level wave). Deterministic
    for a fixed seed; pixel values stay in [0, 255].

    Parameters
    ----------
    kind : str
        One of ``stripes``, ``checker``, ``sinusoid``.
    period : int
        Pattern period in pixels, at least 2.
    size : int
        Image edge length in pixels, at least ``period``.
    noise : float
        Standard deviation of additive Gaussian noise; 0 disables it.
    seed : int
        Noise generator seed.

    Returns
    -------
    GrayImage
    """
    if kind not in _TEXTURE_KINDS:
        raise ValueError(f"unknown texture kind: {kind!r}")
    period, size = int(period), int(size)
    if period < 2:
        raise ValueError(f"period must be at least 2, got {period}")
    if size < period:
        raise ValueError(f"size must be at least the period, got {size} < {period}")
    if not noise >= 0.0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    coords = np.arange(size)
    band = (coords % period) * 2 < period
    if kind == "stripes":
        base = np.where(band, 192.0, 64.0)[np.newaxis, :].repeat(size, axis=0)
    elif kind == "checker":
        base = np.where(band[:, np.newaxis] == band[np.newaxis, :], 192.0, 64.0)
    else:
        # phase from (c mod period) so the wave is exactly periodic
        row = 127.5 + 100.0 * np.sin(2.0 * np.pi * (coords % period) / period)
        base = row[np.newaxis, :].repeat(size, axis=0)
    if noise > 0.0:
        base = base + np.random.default_rng(seed).normal(0.0, noise, base.shape)
    return GrayImage(np.clip(np.rint(base), 0, 255).astype(np.uint8))


def inject_defect(
    image: GrayImage,
    region: tuple[int, int, int, int],
    kind: str,
    seed: int = 0,
) -> tuple[GrayImage, GrayImage]:
    """Corrupt a rectangular region of an image and return (image, mask).

    Kinds: ``rotate90`` turns the region a quarter turn (region must be
    square), ``blur`` smooths it with a Gaussian, ``level-shift`` brightens
    it by a constant. Pixels outside the region are untouched; the mask is
    255 inside the region and 0 elsewhere. All kinds are deterministic;
    ``seed`` is accepted for interface stability.

    Parameters
    ----------
    image : GrayImage
        Source texture.
    region : tuple of int
        ``(x, y, width, height)`` with x across and y down; must lie within
        the image. Zero width or height is a no-op.
    kind : str
        One of ``rotate90``, ``blur``, ``level-shift``.
    seed : int
        Unused by the current kinds.

    Returns
    -------
    (GrayImage, GrayImage)
        The defected image and its pixel mask.
    """
    if not isinstance(image, GrayImage):
        raise TypeError(f"expected GrayImage, got {type(image).__name__}")
    if kind not in _DEFECT_KINDS:
        raise ValueError(f"unknown defect kind: {kind!r}")
    x, y, w, h = (int(v) for v in region)
    if w < 0 or h < 0 or x < 0 or y < 0 or x + w > image.width or y + h > image.height:
        raise ValueError(f"region out of bounds: {(x, y, w, h)} in {image.width}x{image.height}")
    mask = np.zeros((image.height, image.width), dtype=np.uint8)
    if w == 0 or h == 0:
        return GrayImage(image.pixels), GrayImage(mask)
    out = image.pixels.copy()
    patch = out[y : y + h, x : x + w]
    if kind == "rotate90":
        if w != h:
            raise ValueError(f"rotate90 needs a square region, got {w}x{h}")
        patch[:] = np.rot90(patch)
    elif kind == "blur":
        blurred = gaussian_filter(patch.astype(np.float64), sigma=_BLUR_SIGMA)
        patch[:] = np.clip(np.rint(blurred), 0, 255).astype(np.uint8)
    else:
        patch[:] = np.clip(patch.astype(np.int16) + _LEVEL_SHIFT, 0, 255).astype(np.uint8)
    mask[y : y + h, x : x + w] = 255
    return GrayImage(out), GrayImage(mask)
