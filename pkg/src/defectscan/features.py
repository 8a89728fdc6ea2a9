"""Scalar energy of a co-occurrence matrix and the 6-D directional feature.

The feature vector of a window is the six signed pairwise differences of its
four canonical-direction energies, in the fixed order

    (E0-E45, E0-E90, E0-E135, E45-E90, E45-E135, E90-E135).

Only four directions are ever computed: the opposite-direction matrices are
transposes, and both energy statistics are transpose-invariant.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from ._util import map_ordered
from .glcm import Glcm, glcm_quad
from .imaging import QuantizedImage, WindowGrid

#: Length of a feature vector.
FEATURE_DIM = 6

# Component k of the feature vector is energies[a] - energies[b].
_DIFF_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class EnergyMode(Enum):
    """How a GLCM is reduced to one scalar in (0, 1].

    ASM
        Angular second moment: normalize the counts to probabilities
        ``p = counts / total`` and return ``sum(p**2)``. Equals 1 exactly
        when all mass sits in a single cell (a constant window).
    HISTOGRAM
        Treat the L x L count grid itself as an image whose "gray level" at
        each cell is the raw count value: histogram the distinct values,
        normalize by the cell count L**2, and return the sum of squared
        relative frequencies.
    """

    ASM = "asm"
    HISTOGRAM = "histogram"


def energy(g: Glcm, mode: EnergyMode | str = EnergyMode.ASM) -> float:
    """Energy of one co-occurrence matrix; raises on an empty matrix."""
    mode = EnergyMode(mode)
    total = g.total
    if total == 0:
        raise ValueError("empty GLCM: no pixel pairs to normalize")
    if mode is EnergyMode.ASM:
        p = g.counts / total
        return float(np.sum(p * p))
    _, freq = np.unique(g.counts, return_counts=True)
    q = freq / g.counts.size
    return float(np.sum(q * q))


def directional_energies(
    window: QuantizedImage, mode: EnergyMode | str = EnergyMode.ASM
) -> np.ndarray:
    """The four canonical energies ``(E0, E45, E90, E135)`` of a window."""
    return np.array([energy(g, mode) for g in glcm_quad(window)])


def feature_vector(
    window: QuantizedImage, mode: EnergyMode | str = EnergyMode.ASM
) -> np.ndarray:
    """6-D vector of signed pairwise energy differences for one window.

    Every component lies in [-1, 1]; a window whose four directional
    energies agree (e.g. a constant window) maps to the zero vector. The
    construction forces three exact linear dependencies, but all six
    components are kept because the downstream distance is not invariant to
    dropping coordinates.

    Parameters
    ----------
    window : QuantizedImage
        Pixel block, at least 2x2.
    mode : EnergyMode or str
        Energy statistic; a trained model and all inference on it must use
        the same mode.

    Returns
    -------
    numpy.ndarray
        Shape ``(6,)``, dtype float64.
    """
    e = directional_energies(window, mode)
    return np.array([e[a] - e[b] for a, b in _DIFF_PAIRS])


def feature_vectors(
    grid: WindowGrid, mode: EnergyMode | str = EnergyMode.ASM
) -> list[np.ndarray]:
    """Feature vector of every window of a grid, in row-major order.

    Windows are independent, so extraction fans out to worker threads (see
    ``DEFECTSCAN_THREADS``); the returned order is always row-major.
    """
    mode = EnergyMode(mode)
    windows = [window for _, _, window in grid]
    return map_ordered(lambda w: feature_vector(w, mode), windows)
