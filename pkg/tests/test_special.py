import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from nfrange.errors import InvalidParameterError
from nfrange.special import fresnel, fresnel_ratio, sinc


def fresnel_by_quadrature(x):
    re = quad(lambda t: math.cos(math.pi * t * t / 2), 0, x, limit=2000, epsabs=1e-12, epsrel=1e-12)[0]
    im = quad(lambda t: math.sin(math.pi * t * t / 2), 0, x, limit=2000, epsabs=1e-12, epsrel=1e-12)[0]
    return complex(re, im)


def test_fresnel_at_zero():
    assert fresnel(0.0) == 0


def test_fresnel_is_odd():
    assert fresnel(-1.3) == pytest.approx(-fresnel(1.3), abs=1e-15)


def test_fresnel_at_one():
    expected = fresnel_by_quadrature(1.0)
    assert abs(fresnel(1.0) - expected) < 1e-12
    assert fresnel(1.0).real == pytest.approx(0.7798934, abs=1e-7)
    assert fresnel(1.0).imag == pytest.approx(0.4382591, abs=1e-7)


def test_fresnel_matches_quadrature_on_grid():
    xs = np.linspace(-10, 10, 41)
    got = fresnel(xs)
    want = np.array([fresnel_by_quadrature(x) for x in xs])
    assert np.max(np.abs(got - want)) < 1e-9


def test_fresnel_large_argument_limit():
    assert abs(fresnel(50.0) - (0.5 + 0.5j)) < 0.01


def test_fresnel_derivative_is_integrand():
    x, h = 0.7, 1e-5
    fd = (fresnel(x + h) - fresnel(x - h)) / (2 * h)
    assert abs(fd - np.exp(1j * np.pi * x * x / 2)) < 1e-6


@given(st.floats(-0.05, 0.05).filter(lambda v: v != 0))
def test_fresnel_ratio_small_argument(x):
    # F(x)/x = 1 + j pi x^2/6 - pi^2 x^4/40 + ...
    ratio = fresnel(x) / x
    assert abs(ratio - 1) <= math.pi * x * x / 6 * (1 + 1e-2) + 1e-15
    assert abs(ratio - (1 + 1j * math.pi * x * x / 6)) <= x ** 4 + 1e-15
    assert abs(fresnel_ratio(x) - ratio) < 1e-12


@given(st.floats(-0.01, 0.01).filter(lambda v: v != 0))
def test_fresnel_ratio_within_1e4_of_one_near_zero(x):
    assert abs(fresnel(x) / x - 1) < 1e-4


def test_fresnel_ratio_removable_singularity():
    assert fresnel_ratio(0.0) == 1
    assert abs(fresnel_ratio(1e-8) - 1) < 1e-15


def test_fresnel_rejects_non_finite():
    with pytest.raises(InvalidParameterError):
        fresnel(float("nan"))


def test_sinc_values():
    assert sinc(0.0) == 1
    assert sinc(1.0) == 0
    assert sinc(0.5) == pytest.approx(2 / math.pi, rel=1e-15)


@given(st.integers(-1000, 1000).filter(lambda n: n != 0))
def test_sinc_integer_zeros(n):
    assert sinc(float(n)) == 0


@given(st.floats(-200, 200))
def test_sinc_even_and_matches_definition(x):
    assert sinc(x) == pytest.approx(sinc(-x), abs=1e-15)
    ref = 1.0 if x == 0 else math.sin(math.pi * x) / (math.pi * x)
    assert sinc(x) == pytest.approx(ref, abs=1e-12)


def test_sinc_series_branch_continuity():
    x = np.array([0.99e-4, 1.01e-4])
    ref = np.sin(np.pi * x) / (np.pi * x)
    assert np.max(np.abs(sinc(x) - ref)) < 1e-15
