import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gptwin.emulator import KERNEL_KINDS, Kernel, kernel_eval, kernel_pool
from gptwin.errors import ArgumentError


def closed_form(kind, r, sf2=1.0, alpha=1.0):
    """Textbook stationary kernels as functions of the scaled distance."""
    if kind == "exponential":
        return sf2 * math.exp(-r)
    if kind == "squared_exponential":
        return sf2 * math.exp(-0.5 * r * r)
    if kind == "matern32":
        return sf2 * (1 + math.sqrt(3) * r) * math.exp(-math.sqrt(3) * r)
    if kind == "matern52":
        return sf2 * (1 + math.sqrt(5) * r + 5 * r * r / 3) * math.exp(-math.sqrt(5) * r)
    return sf2 * (1 + r * r / (2 * alpha)) ** (-alpha)


def make(kind, ard=False, dim=1, sf2=1.3, ell=0.7, alpha=2.5):
    ells = tuple(ell * (1 + 0.3 * i) for i in range(dim)) if ard else (ell,)
    return Kernel(kind, sf2, ells, alpha if kind == "rational_quadratic" else None, ard)


ALL = [(k, ard) for ard in (False, True) for k in KERNEL_KINDS]

inputs = arrays(np.float64, (6, 2), elements=st.floats(-5, 5))


class TestValues:
    def test_squared_exponential_unit(self):
        k = Kernel("squared_exponential")
        assert kernel_eval(k, 0.0, 1.0) == pytest.approx(0.606530659712633423604, abs=1e-15)

    def test_matern32_unit(self):
        k = Kernel("matern32")
        assert kernel_eval(k, 0.0, 1.0) == pytest.approx(0.483357724596507650595, abs=1e-15)

    @pytest.mark.parametrize("kind", KERNEL_KINDS)
    def test_zero_lag_is_signal_variance(self, kind):
        assert kernel_eval(make(kind), 0.4, 0.4) == pytest.approx(1.3, rel=1e-15)

    @pytest.mark.parametrize("kind", KERNEL_KINDS)
    @pytest.mark.parametrize("lag", [0.05, 0.7, 2.0, 9.0])
    def test_matches_closed_form(self, kind, lag):
        k = make(kind)
        expected = closed_form(kind, lag / 0.7, 1.3, 2.5)
        assert kernel_eval(k, 1.0, 1.0 + lag) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("kind", KERNEL_KINDS)
    def test_ard_uses_scaled_euclidean_distance(self, kind):
        k = Kernel(kind, 2.0, (0.5, 3.0), 1.5 if kind == "rational_quadratic" else None, True)
        r = math.hypot(0.4 / 0.5, 1.2 / 3.0)
        assert kernel_eval(k, [0.0, 0.0], [0.4, 1.2]) == pytest.approx(closed_form(kind, r, 2.0, 1.5), rel=1e-13)

    def test_diag(self):
        np.testing.assert_array_equal(make("matern52").diag(np.zeros(4)), np.full(4, 1.3))


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(ArgumentError):
            Kernel("periodic")

    def test_non_positive(self):
        with pytest.raises(ArgumentError):
            Kernel("matern32", sf2=0.0)
        with pytest.raises(ArgumentError):
            Kernel("matern32", ell=(-1.0,))

    def test_alpha_only_for_rq(self):
        with pytest.raises(ArgumentError):
            Kernel("matern32", alpha=1.0)
        assert Kernel("rational_quadratic").alpha == 1.0

    def test_isotropic_single_ell(self):
        with pytest.raises(ArgumentError):
            Kernel("matern32", ell=(1.0, 2.0))

    def test_ard_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            Kernel("matern32", ell=(1.0, 2.0), ard=True)(np.zeros((3, 3)))


class TestParameters:
    def test_pool(self):
        pool = kernel_pool()
        assert len(pool) == 10
        assert [k.name for k in pool[:2]] == ["Exponential", "Squared Exponential"]
        assert pool[-1].name == "ARD Rational Quadratic"

    @pytest.mark.parametrize("kind, ard", ALL)
    def test_log_params_round_trip(self, kind, ard):
        k = make(kind, ard, dim=2)
        z = k.get_log_params()
        assert len(z) == k.n_params == len(k.param_names())
        back = k.with_log_params(z)
        np.testing.assert_allclose(back.get_log_params(), z, rtol=1e-15)

    @pytest.mark.parametrize("kind, ard", ALL)
    def test_dict_round_trip(self, kind, ard):
        k = make(kind, ard, dim=3)
        assert Kernel.from_dict(k.to_dict()) == k

    @pytest.mark.parametrize("kind, ard", ALL)
    def test_gram_gradients_match_finite_differences(self, kind, ard):
        X = np.random.default_rng(1).uniform(0, 3, size=(5, 2))
        k = make(kind, ard, dim=2)
        _, grads = k.matrix_and_grads(X)
        z = k.get_log_params()
        h = 1e-6
        for i, g in enumerate(grads):
            dz = np.zeros_like(z)
            dz[i] = h
            fd = (k.with_log_params(z + dz)(X) - k.with_log_params(z - dz)(X)) / (2 * h)
            np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-8)

    def test_exponential_gradient_zero_on_diagonal(self):
        _, grads = make("exponential").matrix_and_grads(np.array([[0.0], [1.0]]))
        assert grads[1][0, 0] == 0.0 and grads[1][1, 1] == 0.0


class TestProperties:
    @pytest.mark.parametrize("kind, ard", ALL)
    @settings(max_examples=30, deadline=None)
    @given(X=inputs)
    def test_symmetric_psd(self, kind, ard, X):
        K = make(kind, ard, dim=2)(X)
        assert np.array_equal(K, K.T)
        assert np.linalg.eigvalsh(K).min() >= -1e-10 * np.trace(K)

    @pytest.mark.parametrize("kind, ard", ALL)
    @settings(max_examples=30, deadline=None)
    @given(X=inputs, shift=arrays(np.float64, 2, elements=st.floats(-100, 100)))
    def test_translation_invariance(self, kind, ard, X, shift):
        k = make(kind, ard, dim=2)
        np.testing.assert_allclose(k(X + shift), k(X), rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("kind", KERNEL_KINDS)
    @settings(max_examples=30, deadline=None)
    @given(X=inputs, ell=st.floats(0.05, 20.0))
    def test_ard_equal_scales_is_isotropic(self, kind, X, ell):
        alpha = 1.7 if kind == "rational_quadratic" else None
        iso = Kernel(kind, 0.9, (ell,), alpha, False)
        ard = Kernel(kind, 0.9, (ell, ell), alpha, True)
        np.testing.assert_allclose(ard(X), iso(X), rtol=1e-14, atol=1e-14)

    @pytest.mark.parametrize("kind", KERNEL_KINDS)
    @given(a=st.floats(-10, 10), b=st.floats(-10, 10))
    def test_symmetric_in_arguments(self, kind, a, b):
        k = make(kind)
        assert kernel_eval(k, a, b) == kernel_eval(k, b, a)
