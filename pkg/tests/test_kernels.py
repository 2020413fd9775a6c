"""Scaled Wendland kernel values, gradients, and support behavior.

Gradient correctness is checked against central finite differences; scaling
and rotational symmetry are checked as exact algebraic identities.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbfmix.kernels import (
    KERNEL_NAMES,
    WendlandKernel,
    eval_univariate,
    grad,
    make_kernel,
    pairwise_gradients,
    pairwise_values,
)
from rbfmix import kernels

C0 = WendlandKernel(smoothness="C0", scale=1.0)
C2 = WendlandKernel(smoothness="C2", scale=1.0)


def fd_gradient(kernel, x, center, step):
    out = np.empty(2)
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = step
        out[axis] = (kernels.eval(kernel, x + e, center) - kernels.eval(kernel, x - e, center)) / (
            2.0 * step
        )
    return out


class TestProfiles:
    def test_value_at_origin_is_one(self):
        assert eval_univariate(C0, 0.0) == 1.0
        assert eval_univariate(C2, 0.0) == 1.0

    def test_c0_at_half(self):
        assert eval_univariate(C0, 0.5) == pytest.approx(0.25, abs=1e-15)

    def test_c2_at_half(self):
        # (1 - 0.5)^4 (4 * 0.5 + 1) = 0.0625 * 3 = 0.1875
        assert eval_univariate(C2, 0.5) == pytest.approx(0.1875, abs=1e-15)

    def test_zero_at_and_beyond_support(self):
        for k in (C0, C2):
            assert eval_univariate(k, 1.0) == 0.0
            assert eval_univariate(k, 1.5) == 0.0
            assert eval_univariate(k, 37.0) == 0.0

    def test_negative_rho_rejected(self):
        with pytest.raises(ValueError):
            eval_univariate(C0, -0.1)
        with pytest.raises(ValueError):
            eval_univariate(C2, np.array([0.2, -1e-9]))

    def test_vectorized_matches_scalar(self):
        rho = np.linspace(0.0, 1.2, 25)
        for k in (C0, C2):
            vec = eval_univariate(k, rho)
            assert vec.shape == rho.shape
            for r, v in zip(rho, vec):
                assert eval_univariate(k, float(r)) == v

    @given(st.floats(min_value=0.0, max_value=0.999))
    def test_profiles_positive_inside_support(self, rho):
        assert eval_univariate(C0, rho) > 0.0
        assert eval_univariate(C2, rho) > 0.0

    @given(st.floats(min_value=0.0, max_value=2.0))
    def test_profiles_bounded_by_one(self, rho):
        assert 0.0 <= eval_univariate(C0, rho) <= 1.0
        assert 0.0 <= eval_univariate(C2, rho) <= 1.0


class TestConstruction:
    def test_tau_values(self):
        assert C0.tau == 1.5
        assert C2.tau == 2.5

    def test_make_kernel_names(self):
        assert set(KERNEL_NAMES) == {"wendland_c0", "wendland_c2"}
        assert make_kernel("wendland_c0", 0.2).smoothness == "C0"
        assert make_kernel("wendland_c2", 0.1).scale == 0.1

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            make_kernel("gaussian", 0.2)

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(ValueError):
            WendlandKernel(smoothness="C2", scale=0.0)
        with pytest.raises(ValueError):
            make_kernel("wendland_c0", -1.0)

    def test_unknown_smoothness_rejected(self):
        with pytest.raises(ValueError):
            WendlandKernel(smoothness="C4", scale=1.0)


class TestScaledEvaluation:
    def test_center_value_is_inverse_scale_squared(self):
        k = WendlandKernel(smoothness="C2", scale=0.1)
        assert kernels.eval(k, np.array([0.3, 0.4]), np.array([0.3, 0.4])) == pytest.approx(
            100.0, rel=1e-15
        )
        k0 = WendlandKernel(smoothness="C0", scale=0.1)
        assert kernels.eval(k0, np.array([0.0, 0.0]), np.array([0.0, 0.0])) == pytest.approx(
            100.0, rel=1e-15
        )

    def test_zero_on_support_circle(self):
        k = WendlandKernel(smoothness="C2", scale=0.25)
        x = np.array([0.5 + 0.25, 0.5])
        assert kernels.eval(k, x, np.array([0.5, 0.5])) == 0.0

    def test_c0_quarter_support_value(self):
        # r = 0.2, |x - c| = 0.1: r^-2 (1 - 0.5)^2 = 25 * 0.25 = 6.25
        k = WendlandKernel(smoothness="C0", scale=0.2)
        got = kernels.eval(k, np.array([0.6, 0.5]), np.array([0.5, 0.5]))
        assert got == pytest.approx(6.25, rel=1e-15)

    def test_batched_eval_matches_scalar(self, rng):
        k = WendlandKernel(smoothness="C2", scale=0.3)
        c = np.array([0.4, 0.6])
        pts = rng.uniform(0.0, 1.0, size=(40, 2))
        batch = kernels.eval(k, pts, c)
        assert batch.shape == (40,)
        for p, v in zip(pts, batch):
            # scalar and batched code paths may differ by one rounding
            assert kernels.eval(k, p, c) == pytest.approx(v, rel=1e-14, abs=0.0)

    @given(
        st.floats(min_value=0.05, max_value=3.0),
        st.floats(min_value=-1.0, max_value=1.0),
        st.floats(min_value=-1.0, max_value=1.0),
    )
    def test_scaling_identity(self, r, yx, yy):
        """Phi_r(r * y) = r^-2 Phi_1(y), exactly in floating point up to one rounding."""
        y = np.array([yx, yy])
        origin = np.zeros(2)
        for smoothness in ("C0", "C2"):
            scaled = WendlandKernel(smoothness=smoothness, scale=r)
            unit = WendlandKernel(smoothness=smoothness, scale=1.0)
            lhs = kernels.eval(scaled, r * y, origin)
            rhs = kernels.eval(unit, y, origin) / (r * r)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)

    @given(st.floats(min_value=0.0, max_value=2.0 * math.pi), st.floats(min_value=0.0, max_value=1.5))
    def test_radial_symmetry(self, angle, rho):
        k = WendlandKernel(smoothness="C2", scale=0.7)
        c = np.array([0.2, -0.3])
        base = kernels.eval(k, c + np.array([k.scale * rho, 0.0]), c)
        turned = c + k.scale * rho * np.array([math.cos(angle), math.sin(angle)])
        assert kernels.eval(k, turned, c) == pytest.approx(base, rel=1e-14, abs=1e-16)


class TestGradient:
    def test_gradient_zero_at_center(self):
        for smoothness in ("C0", "C2"):
            k = WendlandKernel(smoothness=smoothness, scale=0.2)
            g = grad(k, np.array([0.5, 0.5]), np.array([0.5, 0.5]))
            assert np.array_equal(g, np.zeros(2))

    def test_gradient_zero_outside_support(self):
        k = WendlandKernel(smoothness="C2", scale=0.2)
        g = grad(k, np.array([0.9, 0.5]), np.array([0.5, 0.5]))
        assert np.array_equal(g, np.zeros(2))

    def test_c2_halfway_closed_form(self):
        # r = 1, x - c = (0.5, 0): phi'(0.5) = -20 * 0.5 * 0.125 = -1.25,
        # gradient = phi'(rho) * (x-c)/|x-c| = (-1.25, 0)
        k = WendlandKernel(smoothness="C2", scale=1.0)
        g = grad(k, np.array([0.5, 0.0]), np.array([0.0, 0.0]))
        assert np.allclose(g, [-1.25, 0.0], atol=1e-15)

    def test_gradient_matches_finite_differences_at_fixed_point(self):
        for smoothness in ("C0", "C2"):
            for r in (0.1, 0.2, 1.0):
                k = WendlandKernel(smoothness=smoothness, scale=r)
                c = np.array([0.3, 0.7])
                x = c + np.array([0.3 * r * 0.6, 0.3 * r * 0.8])
                g = grad(k, x, c)
                ref = fd_gradient(k, x, c, 1e-6 * r)
                scale = max(np.abs(ref).max(), 1.0 / (r * r))
                assert np.abs(g - ref).max() <= 1e-6 * scale

    @given(
        st.sampled_from(["C0", "C2"]),
        st.floats(min_value=0.05, max_value=0.95),
        st.floats(min_value=0.0, max_value=2.0 * math.pi),
        st.floats(min_value=0.05, max_value=2.0),
    )
    @settings(max_examples=60)
    def test_gradient_finite_difference_property(self, smoothness, rho, angle, r):
        k = WendlandKernel(smoothness=smoothness, scale=r)
        c = np.array([0.1, -0.2])
        x = c + r * rho * np.array([math.cos(angle), math.sin(angle)])
        g = grad(k, x, c)
        ref = fd_gradient(k, x, c, 1e-6 * r)
        assert np.abs(g - ref).max() <= 1e-6 * max(np.abs(ref).max(), 1.0 / (r * r))

    def test_c2_gradient_vanishes_approaching_center(self):
        k = WendlandKernel(smoothness="C2", scale=0.4)
        c = np.array([0.0, 0.0])
        norms = []
        for eps in (1e-2, 1e-4, 1e-7):
            g = grad(k, c + np.array([eps, eps]), c)
            norms.append(np.hypot(*g))
        assert norms[0] > norms[1] > norms[2]
        assert norms[2] < 1e-3

    def test_batched_grad_matches_scalar(self, rng):
        k = WendlandKernel(smoothness="C0", scale=0.5)
        c = np.array([0.5, 0.5])
        pts = rng.uniform(0.0, 1.0, size=(30, 2))
        batch = grad(k, pts, c)
        assert batch.shape == (30, 2)
        for p, row in zip(pts, batch):
            assert np.array_equal(grad(k, p, c), row)


class TestPairwise:
    def test_pairwise_values_match_eval(self, rng):
        k = WendlandKernel(smoothness="C2", scale=0.35)
        centers = rng.uniform(0.0, 1.0, size=(7, 2))
        pts = rng.uniform(0.0, 1.0, size=(11, 2))
        table = pairwise_values(k, centers, pts)
        assert table.shape == (7, 11)
        for i, c in enumerate(centers):
            assert np.allclose(table[i], kernels.eval(k, pts, c), rtol=0.0, atol=1e-15)

    def test_pairwise_gradients_match_grad(self, rng):
        k = WendlandKernel(smoothness="C0", scale=0.35)
        centers = rng.uniform(0.0, 1.0, size=(5, 2))
        pts = rng.uniform(0.0, 1.0, size=(9, 2))
        gx, gy = pairwise_gradients(k, centers, pts)
        assert gx.shape == gy.shape == (5, 9)
        for i, c in enumerate(centers):
            rows = grad(k, pts, c)
            assert np.allclose(gx[i], rows[:, 0], rtol=0.0, atol=1e-15)
            assert np.allclose(gy[i], rows[:, 1], rtol=0.0, atol=1e-15)
