"""Mixed-noise simulation and constraint-radius calibration.

The observation model is clean + sparse + stripe + gaussian.  Sparse
noise replaces a fraction of voxels by 0 or 1 (equally likely); stripe
noise adds a constant along each selected (column, band) line, drawn
uniformly from [-amplitude, amplitude]; gaussian noise is zero-mean
i.i.d. and is skipped on the voxels the sparse noise replaced.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .cube import HSCube

# case number -> (gaussian sigma, sparse rate, stripe rate)
NOISE_CASES = {
    1: (0.05, 0.05, 0.0),
    2: (0.10, 0.05, 0.0),
    3: (0.05, 0.0, 0.05),
    4: (0.10, 0.0, 0.05),
    5: (0.05, 0.05, 0.05),
    6: (0.10, 0.05, 0.05),
}


@dataclass(frozen=True)
class NoiseSpec:
    """Noise levels plus the calibration safety factor rho."""

    gaussian_sigma: float
    sparse_rate: float
    stripe_rate: float
    stripe_amplitude: float = 0.5
    rho: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.gaussian_sigma < 0:
            raise ValueError("gaussian_sigma must be nonnegative")
        for name in ("sparse_rate", "stripe_rate"):
            r = getattr(self, name)
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.stripe_amplitude < 0:
            raise ValueError("stripe_amplitude must be nonnegative")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")

    @classmethod
    def from_case(cls, case: int, seed: int = 0, rho: float = 0.95) -> "NoiseSpec":
        if case not in NOISE_CASES:
            raise ValueError(f"unknown case {case}; pick one of {sorted(NOISE_CASES)}")
        sigma, p_sparse, p_stripe = NOISE_CASES[case]
        return cls(
            gaussian_sigma=sigma,
            sparse_rate=p_sparse,
            stripe_rate=p_stripe,
            seed=seed,
            rho=rho,
        )

    def with_seed(self, seed: int) -> "NoiseSpec":
        return replace(self, seed=seed)

    def as_dict(self) -> dict:
        return {
            "gaussian_sigma": self.gaussian_sigma,
            "sparse_rate": self.sparse_rate,
            "stripe_rate": self.stripe_rate,
            "stripe_amplitude": self.stripe_amplitude,
            "rho": self.rho,
            "seed": self.seed,
        }


def calibrate_radii(spec: NoiseSpec, n_voxels: int) -> tuple[float, float, float]:
    """Constraint radii matched to the expected noise budgets.

    alpha bounds the l1 mass of the sparse component (expected magnitude
    1/2 per replaced voxel for images in [0, 1]); beta the stripe mass
    (mean magnitude amplitude/2, discounted by the sparse overwrite
    rate); epsilon the l2 mass of the gaussian part, which only lives on
    the voxels the sparse noise left alone.  All three are shrunk by rho.
    """
    n = float(n_voxels)
    alpha = spec.rho * n * spec.sparse_rate / 2.0
    beta = (
        spec.rho
        * spec.stripe_amplitude
        * n
        * spec.stripe_rate
        * (1.0 - spec.sparse_rate)
        / 2.0
    )
    epsilon = spec.rho * np.sqrt(
        spec.gaussian_sigma**2 * n * (1.0 - spec.sparse_rate)
    )
    return float(alpha), float(beta), float(epsilon)


def _as_array(x) -> np.ndarray:
    if isinstance(x, HSCube):
        return x.data
    return np.asarray(x, dtype=np.float64)


def _require_normalized(arr: np.ndarray):
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("clean cube must be normalized to [0, 1]")


def _sparse_noise(arr, rate, rng):
    """Replacement mask and values; returns (corrupted, s_true, mask)."""
    n = arr.size
    count = int(round(rate * n))
    mask = np.zeros(arr.shape, dtype=bool)
    s_true = np.zeros_like(arr)
    corrupted = arr.copy()
    if count:
        flat = rng.choice(n, size=count, replace=False)
        values = rng.integers(0, 2, size=count).astype(np.float64)
        idx = np.unravel_index(flat, arr.shape)
        mask[idx] = True
        corrupted[idx] = values
        s_true[idx] = values - arr[idx]
    return corrupted, s_true, mask


def _stripe_noise(shape, rate, amplitude, rng):
    """Stripe field t with t constant along the vertical axis."""
    n1, n2, n3 = shape
    count = int(round(rate * n2 * n3))
    plane = np.zeros((n2, n3))
    if count:
        flat = rng.choice(n2 * n3, size=count, replace=False)
        values = rng.uniform(-amplitude, amplitude, size=count)
        plane.ravel()[flat] = values
    return np.broadcast_to(plane, (n1, n2, n3)).copy()


def add_gaussian(x, sigma: float, seed: int = 0) -> HSCube:
    """x plus i.i.d. zero-mean gaussian noise of the given sigma."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    arr = _as_array(x)
    rng = np.random.default_rng(seed)
    return HSCube(arr + rng.normal(0.0, sigma, size=arr.shape))


def add_salt_pepper(x, rate: float, seed: int = 0) -> tuple[HSCube, HSCube]:
    """Replace a fraction of voxels by 0 or 1.

    Returns (corrupted, s_true) with corrupted = x + s_true up to
    roundoff; exactly round(rate * size) voxels are hit.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    arr = _as_array(x)
    _require_normalized(arr)
    corrupted, s_true, _ = _sparse_noise(arr, rate, np.random.default_rng(seed))
    return HSCube(corrupted), HSCube(s_true)


def add_stripes(x, rate: float, amplitude: float = 0.5, seed: int = 0) -> tuple[HSCube, HSCube]:
    """Add vertical stripes to round(rate * n2 * n3) (column, band) lines.

    Returns (corrupted, t_true); t_true is constant along the vertical
    axis by construction.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    arr = _as_array(x)
    t_true = _stripe_noise(arr.shape, rate, amplitude, np.random.default_rng(seed))
    return HSCube(arr + t_true), HSCube(t_true)


class SimulationResult(NamedTuple):
    observed: HSCube
    sparse: HSCube
    stripe: HSCube
    gaussian: HSCube


def simulate(clean, spec: NoiseSpec) -> SimulationResult:
    """Draw one mixed-noise realization of the clean cube.

    The observed cube is exactly clean + sparse + stripe + gaussian with
    that summation order, so the decomposition can be replayed bit for
    bit from the components.
    """
    arr = _as_array(clean)
    _require_normalized(arr)
    rng = np.random.default_rng(spec.seed)
    _, s_true, mask = _sparse_noise(arr, spec.sparse_rate, rng)
    t_true = _stripe_noise(arr.shape, spec.stripe_rate, spec.stripe_amplitude, rng)
    n_true = rng.normal(0.0, spec.gaussian_sigma, size=arr.shape)
    n_true[mask] = 0.0
    observed = arr + s_true + t_true + n_true
    return SimulationResult(
        observed=HSCube(observed),
        sparse=HSCube(s_true),
        stripe=HSCube(t_true),
        gaussian=HSCube(n_true),
    )
