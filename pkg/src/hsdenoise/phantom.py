"""Synthetic piecewise-constant cubes for demos and validation runs."""

from __future__ import annotations

import numpy as np

from .cube import HSCube


def piecewise_cube(n1: int, n2: int, n3: int, n_regions: int = 6, seed: int = 0) -> HSCube:
    """Piecewise-constant cube with smooth, strongly correlated spectra.

    The spatial plane is partitioned by stacking random rectangles, and
    every region carries its own brightness-scaled mixture of two smooth
    endmember spectra.  Values stay strictly inside (0, 1).
    """
    if min(n1, n2, n3) < 1:
        raise ValueError("dimensions must be positive")
    if n_regions < 1:
        raise ValueError("need at least one region")
    rng = np.random.default_rng(seed)

    labels = np.zeros((n1, n2), dtype=np.intp)
    for region in range(1, n_regions):
        h = int(rng.integers(max(1, n1 // 4), max(2, n1 // 2) + 1))
        w = int(rng.integers(max(1, n2 // 4), max(2, n2 // 2) + 1))
        i = int(rng.integers(0, n1 - h + 1))
        j = int(rng.integers(0, n2 - w + 1))
        labels[i : i + h, j : j + w] = region

    k = np.arange(n3)
    e1 = 0.5 + 0.45 * np.sin(2.0 * np.pi * k / n3 + 0.7)
    e2 = 0.5 + 0.45 * np.cos(4.0 * np.pi * k / n3)
    spectra = np.empty((n_regions, n3))
    for region in range(n_regions):
        weight = rng.uniform(0.0, 1.0)
        brightness = rng.uniform(0.25, 0.95)
        spectra[region] = brightness * (weight * e1 + (1.0 - weight) * e2)

    return HSCube(spectra[labels])
