"""Walkthrough: from pixels to a directional-energy feature vector.

Builds two tiny textures by hand in order to show each stage of the feature
pipeline: gray-level quantization, co-occurrence counting along the four
canonical directions, the two energy statistics, and the 6-component
difference vector that detection is based on.

Run:  python3 demos/01_texture_energy_features.py
"""

from __future__ import annotations

import numpy as np

from defectscan import (
    CANONICAL_DIRECTIONS,
    EnergyMode,
    GrayImage,
    compute_glcm,
    directional_energies,
    feature_vector,
    quantize,
)


def show_matrix(label, matrix):
    print(f"{label}:")
    for row in np.asarray(matrix):
        print("   ", " ".join(f"{v:3d}" for v in row))


def main():
    # ------------------------------------------------------------------
    # 1. quantization squeezes 256 gray values into a small alphabet
    # ------------------------------------------------------------------
    gradient = GrayImage(np.linspace(0, 255, 16, dtype=np.uint8).reshape(4, 4))
    q = quantize(gradient, levels=4)
    show_matrix("4x4 gradient, original", gradient.pixels)
    show_matrix("same pixels at 4 gray levels", q.pixels)
    print()

    # ------------------------------------------------------------------
    # 2. co-occurrence matrices count ordered neighbor pairs per direction
    # ------------------------------------------------------------------
    stripes = GrayImage(np.tile(np.array([0, 0, 255, 255], dtype=np.uint8), (8, 2)))
    window = quantize(stripes, levels=2)
    show_matrix("8x8 vertical stripes (2 levels)", window.pixels)
    for direction in CANONICAL_DIRECTIONS:
        g = compute_glcm(window, direction)
        print(f"  {direction.name:>4}: counts {g.counts.ravel().tolist()}"
              f"  (total {g.total})")
    print()

    # ------------------------------------------------------------------
    # 3. energy condenses each matrix to one number in (0, 1]
    # ------------------------------------------------------------------
    for mode in (EnergyMode.ASM, EnergyMode.HISTOGRAM):
        energies = directional_energies(window, mode)
        labeled = ", ".join(
            f"E{d.name[1:]}={e:.4f}" for d, e in zip(CANONICAL_DIRECTIONS, energies)
        )
        print(f"energies [{mode.value}]: {labeled}")
    print()

    # ------------------------------------------------------------------
    # 4. the feature vector is the six pairwise energy differences;
    #    a perfectly uniform window collapses to the zero vector
    # ------------------------------------------------------------------
    f = feature_vector(window)
    print("stripe feature vector (asm):", np.round(f, 4).tolist())
    flat = quantize(GrayImage(np.full((8, 8), 77, dtype=np.uint8)), levels=2)
    print("constant feature vector:    ", feature_vector(flat).tolist())
    print()
    print("anisotropy shows up as nonzero components; detection later asks "
          "how far a window's vector strays from the trained average.")


if __name__ == "__main__":
    main()
