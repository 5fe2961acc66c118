"""Band-averaged reconstruction quality metrics.

Both metrics treat the data as lying in [0, 1] (dynamic range 1) and
average a per-band score over the spectral axis.  PSNR values are capped
at 300 dB so identical bands stay finite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .cube import HSCube

PSNR_CAP = 300.0

# structural-similarity constants for dynamic range 1
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_SSIM_C1 = (_SSIM_K1) ** 2
_SSIM_C2 = (_SSIM_K2) ** 2
_SSIM_SIGMA = 1.5
_SSIM_RADIUS = 5  # 11x11 window


def _as_array(x) -> np.ndarray:
    if isinstance(x, HSCube):
        return x.data
    return np.asarray(x, dtype=np.float64)


def _check_pair(estimate, reference):
    est = _as_array(estimate)
    ref = _as_array(reference)
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {ref.shape}")
    if est.ndim != 3:
        raise ValueError("expected 3-d cubes")
    return est, ref


def per_band_psnr(estimate, reference) -> np.ndarray:
    """PSNR of every band in dB, capped at 300."""
    est, ref = _check_pair(estimate, reference)
    n1, n2, n3 = ref.shape
    out = np.empty(n3)
    for k in range(n3):
        e = (est[:, :, k] - ref[:, :, k]).ravel()
        sse = float(np.dot(e, e))
        if sse == 0.0:
            out[k] = PSNR_CAP
        else:
            out[k] = min(PSNR_CAP, 10.0 * np.log10(n1 * n2 / sse))
    return out


def mpsnr(estimate, reference) -> float:
    """Mean over bands of the per-band PSNR."""
    return float(per_band_psnr(estimate, reference).mean())


def _smooth(img):
    return gaussian_filter(img, sigma=_SSIM_SIGMA, radius=_SSIM_RADIUS, mode="reflect")


def _ssim_band(x, y) -> float:
    mu_x = _smooth(x)
    mu_y = _smooth(y)
    var_x = _smooth(x * x) - mu_x * mu_x
    var_y = _smooth(y * y) - mu_y * mu_y
    cov = _smooth(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
    den = (mu_x * mu_x + mu_y * mu_y + _SSIM_C1) * (var_x + var_y + _SSIM_C2)
    return float(np.mean(num / den))


def per_band_ssim(estimate, reference) -> np.ndarray:
    """Structural similarity of every band.

    Gaussian window (sigma 1.5, 11x11 support), symmetric boundary
    handling, weighted moments without sample-size correction.
    """
    est, ref = _check_pair(estimate, reference)
    n3 = ref.shape[2]
    return np.array([_ssim_band(est[:, :, k], ref[:, :, k]) for k in range(n3)])


def mssim(estimate, reference) -> float:
    """Mean over bands of the per-band structural similarity."""
    return float(per_band_ssim(estimate, reference).mean())


@dataclass(frozen=True)
class MetricReport:
    """Band-averaged scores plus the per-band traces behind them."""

    mpsnr_db: float
    mssim: float
    band_psnr: tuple[float, ...]
    band_ssim: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "mpsnr_db": self.mpsnr_db,
            "mssim": self.mssim,
            "band_psnr": list(self.band_psnr),
            "band_ssim": list(self.band_ssim),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


def metric_report(estimate, reference) -> MetricReport:
    """Evaluate both metrics for one estimate/reference pair."""
    psnr = per_band_psnr(estimate, reference)
    ssim = per_band_ssim(estimate, reference)
    return MetricReport(
        mpsnr_db=float(psnr.mean()),
        mssim=float(ssim.mean()),
        band_psnr=tuple(float(p) for p in psnr),
        band_ssim=tuple(float(s) for s in ssim),
    )
