import numpy as np
import pytest

from hsdenoise.cube import Axis, HSCube, adjoint_diff, forward_diff, second_order_diff

from _oracles import dense_operator


class TestHSCube:
    def test_copies_and_freezes(self):
        arr = np.ones((2, 3, 4))
        cube = HSCube(arr)
        arr[0, 0, 0] = 7.0
        assert cube.data[0, 0, 0] == 1.0
        with pytest.raises(ValueError):
            cube.data[0, 0, 0] = 2.0

    def test_rejects_non_finite(self):
        bad = np.ones((2, 2, 2))
        bad[1, 1, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            HSCube(bad)
        bad[1, 1, 1] = np.inf
        with pytest.raises(ValueError, match="non-finite"):
            HSCube(bad)

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValueError):
            HSCube(np.ones((3, 3)))

    def test_flat_roundtrip_is_band_sequential(self):
        cube = HSCube(np.arange(24, dtype=float).reshape(2, 3, 4))
        flat = cube.to_flat()
        # vertical index fastest, then horizontal, then band
        assert flat[0] == cube.data[0, 0, 0]
        assert flat[1] == cube.data[1, 0, 0]
        assert flat[2] == cube.data[0, 1, 0]
        assert flat[6] == cube.data[0, 0, 1]
        back = HSCube.from_flat(flat, 2, 3, 4)
        assert np.array_equal(back.data, cube.data)

    def test_from_flat_rejects_bad_length(self):
        with pytest.raises(ValueError):
            HSCube.from_flat(np.zeros(7), 2, 2, 2)


class TestForwardDiff:
    def test_constant_cube_maps_to_zero(self):
        cube = HSCube(np.full((4, 5, 3), 0.37))
        for axis in Axis:
            out = forward_diff(cube, axis)
            assert np.all(out.data == 0.0)

    def test_two_element_axis(self):
        # out[0] = b - a, out[1] = a - b on a 2-cycle
        cube = HSCube(np.array([3.0, 5.0]).reshape(2, 1, 1))
        out = forward_diff(cube, Axis.VERTICAL)
        assert out.data.ravel().tolist() == [2.0, -2.0]

    @pytest.mark.parametrize("axis", list(Axis))
    def test_output_sums_to_zero_on_cycles(self, axis, rng):
        x = rng.normal(size=(4, 3, 5))
        out = forward_diff(x, axis)
        # telescoping around the periodic boundary
        assert abs(out.data.sum()) < 1e-10
        assert abs(out.data.sum(axis=int(axis)).max()) < 1e-12

    @pytest.mark.parametrize("axis", list(Axis))
    def test_operator_norm_bound(self, axis, rng):
        for _ in range(20):
            x = rng.normal(size=(5, 4, 6))
            out = forward_diff(x, axis)
            assert np.linalg.norm(out.data.ravel()) <= 2.0 * np.linalg.norm(x.ravel()) + 1e-12


class TestAdjointDiff:
    def test_zero_maps_to_zero(self):
        out = adjoint_diff(np.zeros((3, 3, 3)), Axis.SPECTRAL)
        assert np.all(out.data == 0.0)

    @pytest.mark.parametrize("axis", list(Axis))
    def test_adjoint_identity(self, axis, rng):
        for _ in range(50):
            x = rng.normal(size=(5, 4, 3))
            y = rng.normal(size=(5, 4, 3))
            fx = forward_diff(x, axis).data
            aty = adjoint_diff(y, axis).data
            lhs = np.vdot(fx, y)
            rhs = np.vdot(x, aty)
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_matches_dense_transpose(self, rng):
        shape = (3, 4, 2)
        for axis in Axis:
            fwd = dense_operator(lambda a: forward_diff(a, axis).data, shape)
            adj = dense_operator(lambda a: adjoint_diff(a, axis).data, shape)
            assert np.allclose(adj, fwd.T, atol=1e-14)

    def test_two_cycle_is_symmetric(self, rng):
        # with n = 2 the difference matrix is its own transpose
        x = rng.normal(size=(2, 1, 1))
        assert np.allclose(
            forward_diff(x, Axis.VERTICAL).data, adjoint_diff(x, Axis.VERTICAL).data
        )


class TestSecondOrderDiff:
    def test_identical_bands_vanish(self, rng):
        band = rng.normal(size=(6, 5))
        cube = np.repeat(band[:, :, None], 4, axis=2)
        dv, dh = second_order_diff(cube)
        assert np.all(dv.data == 0.0)
        assert np.all(dh.data == 0.0)

    def test_constant_cube_vanishes(self):
        dv, dh = second_order_diff(np.full((3, 3, 3), 0.5))
        assert np.all(dv.data == 0.0)
        assert np.all(dh.data == 0.0)

    def test_composition_order_commutes(self, rng):
        x = rng.normal(size=(6, 6, 4))
        dv, dh = second_order_diff(x)
        # spatial-then-spectral equals spectral-then-spatial
        alt_v = forward_diff(forward_diff(x, Axis.VERTICAL), Axis.SPECTRAL)
        alt_h = forward_diff(forward_diff(x, Axis.HORIZONTAL), Axis.SPECTRAL)
        assert np.allclose(dv.data, alt_v.data, atol=1e-12)
        assert np.allclose(dh.data, alt_h.data, atol=1e-12)

    def test_matches_explicit_loops(self, rng):
        x = rng.normal(size=(4, 3, 3))
        dv, dh = second_order_diff(x)
        n1, n2, n3 = x.shape
        for i in range(n1):
            for j in range(n2):
                for k in range(n3):
                    ds_here = x[i, j, (k + 1) % n3] - x[i, j, k]
                    ds_down = x[(i + 1) % n1, j, (k + 1) % n3] - x[(i + 1) % n1, j, k]
                    ds_right = x[i, (j + 1) % n2, (k + 1) % n3] - x[i, (j + 1) % n2, k]
                    assert dv.data[i, j, k] == pytest.approx(ds_down - ds_here, abs=1e-12)
                    assert dh.data[i, j, k] == pytest.approx(ds_right - ds_here, abs=1e-12)
