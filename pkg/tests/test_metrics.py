import json

import numpy as np
import pytest

from hsdenoise.degrade import add_gaussian
from hsdenoise.metrics import (
    PSNR_CAP,
    MetricReport,
    metric_report,
    mpsnr,
    mssim,
    per_band_psnr,
    per_band_ssim,
)
from hsdenoise.phantom import piecewise_cube

from _oracles import psnr_fsum, ssim_windowed


class TestPSNR:
    def test_self_comparison_hits_cap(self, rng):
        u = rng.uniform(size=(12, 10, 5))
        assert np.all(per_band_psnr(u, u) == PSNR_CAP)
        assert mpsnr(u, u) == PSNR_CAP

    def test_constant_offset_single_band(self):
        ref = np.linspace(0.0, 1.0, 7 * 9).reshape(7, 9, 1)
        est = ref + 0.1
        # sse = N * 0.01 so the ratio is exactly 100
        assert per_band_psnr(est, ref)[0] == pytest.approx(20.0, abs=1e-12)

    def test_near_zero_error_capped(self):
        ref = np.zeros((10, 10, 1))
        est = np.full_like(ref, 1e-16)
        assert per_band_psnr(est, ref)[0] == PSNR_CAP

    def test_matches_fsum_oracle(self, rng):
        ref = rng.uniform(size=(14, 11, 6))
        est = ref + rng.normal(scale=0.07, size=ref.shape)
        got = per_band_psnr(est, ref)
        want = [psnr_fsum(est[:, :, k], ref[:, :, k]) for k in range(6)]
        assert np.allclose(got, want, atol=1e-10)

    def test_bands_scored_independently(self, rng):
        ref = rng.uniform(size=(8, 8, 3))
        est = ref.copy()
        est[:, :, 1] += 0.2
        scores = per_band_psnr(est, ref)
        assert scores[0] == PSNR_CAP
        assert scores[2] == PSNR_CAP
        assert scores[1] < 30.0


class TestSSIM:
    def test_self_comparison_is_one(self, rng):
        u = rng.uniform(size=(16, 13, 4))
        assert np.all(per_band_ssim(u, u) == 1.0)
        assert mssim(u, u) == 1.0

    def test_matches_windowed_oracle(self, rng):
        ref = rng.uniform(size=(24, 17, 2))
        est = np.clip(ref + rng.normal(scale=0.1, size=ref.shape), 0.0, 1.0)
        got = per_band_ssim(est, ref)
        want = [ssim_windowed(est[:, :, k], ref[:, :, k]) for k in range(2)]
        assert np.allclose(got, want, atol=1e-10)

    def test_inverted_checkerboard_scores_low(self):
        i, j = np.indices((20, 20))
        board = ((i + j) % 2).astype(np.float64)
        x = board[:, :, None]
        y = 1.0 - x
        assert mssim(x, y) < 0.5

    def test_structure_dominates_offset(self, rng):
        ref = rng.uniform(size=(20, 20, 1))
        shifted = np.clip(ref + 0.05, 0.0, 1.0)
        noisy = np.clip(ref + rng.normal(scale=0.2, size=ref.shape), 0.0, 1.0)
        assert mssim(shifted, ref) > mssim(noisy, ref)


class TestMonotonicity:
    def test_scores_degrade_with_noise(self):
        clean = piecewise_cube(32, 32, 8, seed=5)
        mild = add_gaussian(clean, 0.05, seed=1)
        harsh = add_gaussian(clean, 0.10, seed=1)
        assert mpsnr(mild, clean) > mpsnr(harsh, clean)
        assert mssim(mild, clean) > mssim(harsh, clean)


class TestValidation:
    def test_shape_mismatch(self, rng):
        with pytest.raises(ValueError):
            mpsnr(rng.uniform(size=(4, 4, 2)), rng.uniform(size=(4, 4, 3)))

    def test_requires_three_dims(self, rng):
        with pytest.raises(ValueError):
            mssim(rng.uniform(size=(4, 4)), rng.uniform(size=(4, 4)))


class TestMetricReport:
    def test_report_consistent_with_functions(self, rng):
        ref = piecewise_cube(16, 16, 4, seed=2)
        est = add_gaussian(ref, 0.05, seed=3)
        report = metric_report(est, ref)
        assert report.mpsnr_db == pytest.approx(mpsnr(est, ref))
        assert report.mssim == pytest.approx(mssim(est, ref))
        assert len(report.band_psnr) == 4
        assert len(report.band_ssim) == 4

    def test_json_round_trip(self, rng):
        u = rng.uniform(size=(6, 6, 2))
        report = metric_report(u, u)
        payload = json.loads(report.to_json())
        assert payload == {
            "mpsnr_db": 300.0,
            "mssim": 1.0,
            "band_psnr": [300.0, 300.0],
            "band_ssim": [1.0, 1.0],
        }

    def test_accepts_cubes_and_arrays(self, rng):
        ref = piecewise_cube(8, 8, 3, seed=1)
        est = add_gaussian(ref, 0.02, seed=4)
        mixed = metric_report(est.data, ref)
        pure = metric_report(est, ref)
        assert mixed == pure
