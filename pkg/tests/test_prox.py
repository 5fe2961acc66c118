import numpy as np
import pytest
from scipy.optimize import NonlinearConstraint, minimize

from hsdenoise.prox import (
    NumericalFailure,
    project_box,
    project_l1_ball,
    project_l2_ball,
    prox_conjugate,
    prox_l1,
    prox_nuclear,
)

from _oracles import l1_projection_sort, nuclear_prox_eigh


class TestProjectBox:
    def test_feasible_point_unchanged(self, rng):
        x = rng.uniform(0.2, 0.8, size=(4, 4))
        assert np.array_equal(project_box(x, 0.0, 1.0), x)

    def test_scalar_example(self):
        assert project_box(np.array([-0.3]), 0.0, 1.0)[0] == 0.0
        assert project_box(np.array([1.7]), 0.0, 1.0)[0] == 1.0

    def test_rejects_empty_box(self):
        with pytest.raises(ValueError):
            project_box(np.zeros(3), 1.0, 0.0)

    def test_variational_inequality(self, rng):
        # <x - P(x), z - P(x)> <= 0 for every feasible z
        x = rng.normal(scale=2.0, size=50)
        p = project_box(x, -0.5, 0.5)
        for _ in range(25):
            z = rng.uniform(-0.5, 0.5, size=50)
            assert np.dot(x - p, z - p) <= 1e-10


class TestProjectL2Ball:
    def test_center_unchanged(self, rng):
        c = rng.normal(size=12)
        assert np.array_equal(project_l2_ball(c, c, 0.5), c)

    def test_radial_pullback(self):
        c = np.zeros(3)
        x = np.array([2.0, 0.0, 0.0])
        out = project_l2_ball(x, c, 0.5)
        assert np.allclose(out, [0.5, 0.0, 0.0])

    def test_lands_on_sphere(self, rng):
        for _ in range(30):
            c = rng.normal(size=20)
            x = c + rng.normal(size=20) * 5.0
            r = rng.uniform(0.01, 1.0)
            if np.linalg.norm(x - c) <= r:
                continue
            out = project_l2_ball(x, c, r)
            assert np.linalg.norm(out - c) == pytest.approx(r, rel=1e-12)

    def test_matches_constrained_optimizer(self, rng):
        # independent route: solve min ||y - x||^2 s.t. ||y - c|| <= r
        for _ in range(5):
            c = rng.normal(size=8)
            x = c + rng.normal(size=8) * 3.0
            r = 1.25
            ours = project_l2_ball(x, c, r)
            res = minimize(
                lambda y: np.sum((y - x) ** 2),
                x0=c,
                jac=lambda y: 2.0 * (y - x),
                constraints=[
                    NonlinearConstraint(
                        lambda y: np.sum((y - c) ** 2),
                        -np.inf,
                        r * r,
                        jac=lambda y: 2.0 * (y - c),
                    )
                ],
                method="trust-constr",
                options={"maxiter": 2000, "gtol": 1e-12, "xtol": 1e-14},
            )
            assert res.status in (1, 2), res.message
            assert np.allclose(ours, res.x, atol=5e-6)

    def test_zero_radius_returns_center(self, rng):
        c = rng.normal(size=5)
        x = rng.normal(size=5)
        assert np.allclose(project_l2_ball(x, c, 0.0), c)


class TestProjectL1Ball:
    def test_feasible_point_unchanged(self):
        x = np.array([0.25, -0.25, 0.1])
        assert np.array_equal(project_l1_ball(x, 1.0), x)

    def test_known_values(self):
        assert np.allclose(project_l1_ball(np.array([3.0, 0.0]), 1.0), [1.0, 0.0])
        assert np.allclose(project_l1_ball(np.array([2.0, 1.0]), 1.0), [1.0, 0.0])
        assert np.allclose(project_l1_ball(np.array([2.0, 2.0]), 1.0), [0.5, 0.5])

    def test_zero_radius(self, rng):
        out = project_l1_ball(rng.normal(size=10), 0.0)
        assert np.all(out == 0.0)

    def test_rejects_negative_radius(self):
        with pytest.raises(ValueError):
            project_l1_ball(np.ones(3), -1.0)

    def test_boundary_magnitude_maps_to_zero(self):
        # theta = 1 here; the entry sitting exactly at theta must vanish
        x = np.array([3.0, 1.0])
        out = project_l1_ball(x, 2.0)
        assert np.allclose(out, [2.0, 0.0])
        assert out[1] == 0.0

    def test_matches_sort_oracle(self, rng):
        for trial in range(300):
            n = int(rng.integers(1, 2000))
            scale = 10.0 ** rng.uniform(-3, 3)
            x = rng.normal(size=n) * scale
            if rng.uniform() < 0.3:
                x[rng.uniform(size=n) < 0.5] = 0.0
            radius = rng.uniform(0.05, 1.2) * np.abs(x).sum() + 1e-12
            ours = project_l1_ball(x, radius)
            ref = l1_projection_sort(x, radius)
            scale_ref = max(1.0, np.abs(ref).max())
            assert np.abs(ours - ref).max() <= 1e-10 * scale_ref, trial

    def test_budget_met_and_signs_kept(self, rng):
        for _ in range(40):
            x = rng.normal(size=200)
            r = rng.uniform(0.1, 0.9) * np.abs(x).sum()
            out = project_l1_ball(x, r)
            assert np.abs(out).sum() <= r * (1.0 + 1e-9)
            assert np.all(out * x >= 0.0)
            assert np.all(np.abs(out) <= np.abs(x) + 1e-15)

    def test_idempotent_and_nonexpansive(self, rng):
        for _ in range(20):
            x = rng.normal(size=60)
            y = rng.normal(size=60)
            r = 3.0
            px, py = project_l1_ball(x, r), project_l1_ball(y, r)
            assert np.allclose(project_l1_ball(px, r), px, atol=1e-12)
            assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12

    def test_preserves_shape(self, rng):
        x = rng.normal(size=(4, 5, 2))
        out = project_l1_ball(x, 1.0)
        assert out.shape == x.shape


class TestProxL1:
    def test_soft_threshold_values(self):
        x = np.array([-2.0, -0.3, 0.0, 0.3, 2.0])
        assert np.allclose(prox_l1(x, 0.5), [-1.5, 0.0, 0.0, 0.0, 1.5])

    def test_zero_gamma_is_identity(self, rng):
        x = rng.normal(size=10)
        assert np.array_equal(prox_l1(x, 0.0), x)


class TestProxNuclear:
    def test_diagonal_example(self):
        m = np.diag([3.0, 1.0])
        assert np.allclose(prox_nuclear(m, 1.0), np.diag([2.0, 0.0]), atol=1e-12)

    def test_zero_gamma_is_identity(self, rng):
        m = rng.normal(size=(5, 7))
        assert np.allclose(prox_nuclear(m, 0.0), m, atol=1e-12)

    def test_rejects_vectors(self):
        with pytest.raises(ValueError):
            prox_nuclear(np.ones(4), 0.5)

    def test_matches_eigendecomposition_route(self, rng):
        for _ in range(40):
            r = int(rng.integers(1, 9))
            c = int(rng.integers(1, 9))
            m = rng.normal(size=(r, c))
            gamma = rng.uniform(0.0, 2.0)
            ours = prox_nuclear(m, gamma)
            ref = nuclear_prox_eigh(m, gamma)
            assert np.abs(ours - ref).max() <= 1e-10

    def test_batch_matches_loop(self, rng):
        stack = rng.normal(size=(6, 4, 5))
        batch = prox_nuclear(stack, 0.7)
        for b in range(6):
            assert np.allclose(batch[b], prox_nuclear(stack[b], 0.7), atol=1e-12)

    def test_firmly_nonexpansive(self, rng):
        for _ in range(15):
            a = rng.normal(size=(6, 4))
            b = rng.normal(size=(6, 4))
            pa, pb = prox_nuclear(a, 0.8), prox_nuclear(b, 0.8)
            lhs = np.linalg.norm(pa - pb) ** 2
            rhs = np.vdot(pa - pb, a - b)
            assert lhs <= rhs + 1e-10

    def test_failure_type_carries_block_index(self):
        err = NumericalFailure("boom", block_index=3)
        assert err.block_index == 3
        assert isinstance(err, RuntimeError)


class TestProxConjugate:
    def test_zero_set_conjugate_is_identity(self, rng):
        # conjugate of the indicator of {0} has prox equal to the identity
        x = rng.normal(size=20)
        out = prox_conjugate(x, 0.5, lambda w, g: np.zeros_like(w))
        assert np.allclose(out, x, atol=1e-15)

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError):
            prox_conjugate(np.ones(3), 0.0, lambda w, g: w)

    @pytest.mark.parametrize("gamma", [0.25, 1.0, 3.0])
    def test_conjugate_of_l1_norm_is_linf_clip(self, gamma, rng):
        x = rng.normal(scale=3.0, size=30)
        out = prox_conjugate(x, gamma, lambda w, g: prox_l1(w, g))
        assert np.abs(out - np.clip(x, -1.0, 1.0)).max() <= 1e-10

    @pytest.mark.parametrize("gamma", [0.25, 1.0, 3.0])
    def test_conjugate_of_nuclear_is_spectral_clip(self, gamma, rng):
        m = rng.normal(scale=2.0, size=(6, 4))
        out = prox_conjugate(m, gamma, lambda w, g: prox_nuclear(w, g))
        u, sv, vt = np.linalg.svd(m, full_matrices=False)
        clipped = (u * np.minimum(sv, 1.0)) @ vt
        assert np.abs(out - clipped).max() <= 1e-10

    @pytest.mark.parametrize("gamma", [0.25, 1.0, 3.0])
    def test_conjugate_of_l2_ball_is_shifted_norm_prox(self, gamma, rng):
        # f = indicator of the ball B(center, r); f* = <center, .> + r||.||,
        # whose prox has the closed form below
        center = rng.normal(size=24)
        r = 1.5
        x = rng.normal(scale=2.0, size=24)
        out = prox_conjugate(x, gamma, lambda w, g: project_l2_ball(w, center, r))
        w = x - gamma * center
        nw = np.linalg.norm(w)
        expected = w * max(1.0 - gamma * r / nw, 0.0)
        assert np.abs(out - expected).max() <= 1e-10

    @pytest.mark.parametrize("gamma", [0.25, 1.0, 3.0])
    def test_conjugate_of_l1_ball_scaling_identity(self, gamma, rng):
        # f = indicator of the l1 ball of radius r; f* = r||.||_inf with
        # prox_{g f*}(x) = x - P_{l1 ball of radius g*r}(x)
        x = rng.normal(scale=2.0, size=24)
        r = 2.0
        out = prox_conjugate(x, gamma, lambda w, g: project_l1_ball(w, r))
        expected = x - project_l1_ball(x, gamma * r)
        assert np.abs(out - expected).max() <= 1e-10
