import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruscs import BandLimitError, ConfigError, CoherentPoint, TorusGrid, alpha, coherent_coeffs, coherent_samples
from toruscs.coherent import euclid_gaussian_ft, image_sum
from toruscs.grid import TWO_PI


@pytest.mark.parametrize(
    "n,h,expected",
    [(1, 1.0, 0.2996557375766119), (1, 0.5, 0.5039588710767615), (2, 1.0, 0.08979356106258328)],
)
def test_alpha_values(n, h, expected):
    assert alpha(n, h) == pytest.approx(expected, rel=1e-15)
    assert alpha(n, h) == pytest.approx(2 ** (-n / 2) * (math.pi * h) ** (-3 * n / 4), rel=1e-15)


def test_fourier_coefficients_at_origin():
    g = TorusGrid.create(1, 16, 1.0)
    c = coherent_coeffs(CoherentPoint((0.0,), (0,), 1.0), g)
    assert c.coeffs[g.mode_index((0,))] == pytest.approx(0.11954534328418684, rel=1e-14)


def test_fourier_coefficient_with_shifted_centre():
    g = TorusGrid.create(1, 16, 1.0)
    c = coherent_coeffs(CoherentPoint((math.pi,), (0,), 1.0), g)
    assert c.coeffs[g.mode_index((1,))] == pytest.approx(-0.07250791592773109, abs=1e-15)


def test_value_at_centre():
    g = TorusGrid.create(1, 16, 1.0)
    s = coherent_samples(CoherentPoint((0.0,), (0,), 1.0), g)
    assert s[0].real == pytest.approx(0.2996557391799427, rel=1e-14)
    # the periodized value exceeds alpha by the nearest images only
    assert s[0].real - alpha(1, 1.0) == pytest.approx(2 * alpha(1, 1.0) * math.exp(-2 * math.pi**2), rel=1e-6)


def test_norm_squared_at_quarter():
    g = TorusGrid.create(1, 32, 0.25)
    c = coherent_coeffs(CoherentPoint((1.0,), (3,), 0.25), g)
    assert c.norm() ** 2 == pytest.approx(0.6366197723675816, rel=1e-13)


@pytest.mark.parametrize("n,K,h", [(1, 16, 0.5), (2, 16, 0.5), (1, 48, 0.1)])
def test_samples_match_image_sum(n, K, h):
    g = TorusGrid.create(n, K, h)
    rng = np.random.default_rng(7)
    x = tuple(rng.uniform(0, TWO_PI, n))
    idx = tuple(int(v) for v in rng.integers(-3, 4, n))
    p = CoherentPoint(x, idx, h)
    samples = coherent_samples(p, g).reshape(-1)
    direct = image_sum(p, g.nodes)
    assert np.max(np.abs(samples - direct)) < 1e-13 * np.max(np.abs(direct))


def test_euclid_transform_matches_numerical_integral():
    p = CoherentPoint((0.7,), (2,), 0.5)
    y = np.linspace(-40, 40, 400001)
    dy = y[1] - y[0]
    phi = alpha(1, 0.5) * np.exp(1j * p.xi[0] * (0.7 - y) / 0.5 - (y - 0.7) ** 2 / (2 * 0.5))
    for k in (-3, -2, 0, 1):
        integral = np.sum(np.exp(-1j * k * y) * phi) * dy
        assert abs(euclid_gaussian_ft(np.array([k]), p) - integral) < 1e-10


@given(st.integers(-5, 5), st.floats(0, 2 * math.pi, allow_nan=False))
@settings(max_examples=30, deadline=None)
def test_spectrum_peaks_at_minus_index(j, x):
    g = TorusGrid.create(1, 24, 0.5)
    c = coherent_coeffs(CoherentPoint((x,), (j,), 0.5), g)
    assert tuple(g.modes[np.argmax(np.abs(c.coeffs))]) == (-j,)


def test_position_reduced_mod_two_pi():
    p = CoherentPoint((TWO_PI + 1.0,), (0,), 0.5)
    assert p.x[0] == pytest.approx(1.0)


def test_from_momentum_requires_lattice():
    p = CoherentPoint.from_momentum((0.0,), (-1.5,), 0.5)
    assert p.index == (-3,)
    with pytest.raises(ConfigError):
        CoherentPoint.from_momentum((0.0,), (0.3,), 0.5)


def test_band_edge_guard():
    with pytest.raises(BandLimitError):
        coherent_coeffs(CoherentPoint((0.0,), (0,), 0.5), TorusGrid.create(1, 6, 0.5))
    with pytest.raises(BandLimitError):
        coherent_coeffs(CoherentPoint((0.0,), (10,), 0.5), TorusGrid.create(1, 16, 0.5))


def test_dimension_and_h_mismatch():
    g = TorusGrid.create(2, 16, 0.5)
    with pytest.raises(ConfigError):
        coherent_coeffs(CoherentPoint((0.0,), (0,), 0.5), g)
    with pytest.raises(ConfigError):
        coherent_coeffs(CoherentPoint((0.0, 0.0), (0, 0), 0.25), g)
