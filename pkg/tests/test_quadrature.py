import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qbm_decoherence.quadrature import ConvergenceError, integrate


def test_polynomial_exact_on_single_panel():
    res = integrate(lambda x: x ** 10, [0.0, 2.0])
    assert res.value[0] == pytest.approx(2 ** 11 / 11, rel=1e-14)


def test_vector_valued_integrand():
    res = integrate(lambda x: np.vstack([np.sin(x), np.cos(x)]), np.linspace(0, math.pi, 4))
    assert res.value == pytest.approx([2.0, 0.0], abs=1e-12)


def test_oscillatory_integral_with_panels():
    t = 200.0
    edges = np.linspace(0, 10, int(10 / (math.pi / (4 * t))) + 1)
    res = integrate(lambda w: np.exp(-w) * np.cos(w * t), edges)
    exact = (1 + math.exp(-10) * (t * math.sin(10 * t) - math.cos(10 * t))) / (1 + t * t)
    assert res.value[0] == pytest.approx(exact, rel=1e-8)


def test_adaptive_refinement_of_kink():
    res = integrate(lambda x: np.abs(x - 0.3), [0.0, 1.0], rel_tol=1e-10)
    assert res.value[0] == pytest.approx(0.5 * 0.09 + 0.5 * 0.49, rel=1e-9)
    assert res.n_panels > 1


def test_zero_length_range():
    assert integrate(lambda x: x, [1.0, 1.0]).value[0] == 0.0


def test_budget_exhaustion_raises_with_estimate():
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: 1 / np.sqrt(np.abs(x - 1 / 3)), [0.0, 1.0], rel_tol=1e-14,
                  abs_tol=1e-16, max_subdivisions=5)
    assert info.value.estimate is not None


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_gaussian_moments(a, b):
    res = integrate(lambda x: np.exp(-a * x * x), np.linspace(-b, b, 5), rel_tol=1e-11)
    exact = math.sqrt(math.pi / a) * math.erf(b * math.sqrt(a))
    assert res.value[0] == pytest.approx(exact, rel=1e-9)
