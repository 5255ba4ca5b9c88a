import numpy as np
import pytest

from toruscs import (
    BandLimitError,
    FourierField,
    QuantizationError,
    Symbol,
    TorusGrid,
    apply_kn,
    ellipticity_check,
    kn_matrix,
    symbol_coeff,
    symbol_from_spec,
    weyl_matrix,
)
from toruscs.quantize import ProbeSpec, quantize
from toruscs.symbols import PRESETS

from conftest import random_field

XI_COS = {"n": 1, "order": 1, "terms": [{"x": {"1": 0.5, "-1": 0.5}, "xi": "xi"}]}


def test_pendulum_kn_entries(pendulum):
    h = 0.1
    g = TorusGrid.create(1, 8, h)
    A = kn_matrix(pendulum, g).entries
    for k in range(-8, 9):
        i = g.mode_index((k,))
        assert A[i, i] == pytest.approx(0.5 * (h * k) ** 2 + 1.0, rel=1e-15)
        if k < 8:
            assert A[i, i + 1] == pytest.approx(-0.5)
            assert A[i + 1, i] == pytest.approx(-0.5)
        if k < 7:
            assert A[i, i + 2] == 0


def test_kn_equals_weyl_for_sum_of_x_and_xi_parts():
    b = symbol_from_spec(
        {"n": 1, "order": 2, "terms": [{"x": {"0": 1}, "xi": "0.5*xi^2"}, {"x": {"1": 0.5, "-1": 0.5}, "xi": "1"}]}
    )
    g = TorusGrid.create(1, 16, 0.25)
    assert np.max(np.abs(kn_matrix(b, g).entries - weyl_matrix(b, g).entries)) <= 1e-12


def test_mixed_symbol_kn_is_not_hermitian_but_weyl_is():
    b = symbol_from_spec(XI_COS)
    g = TorusGrid.create(1, 4, 1.0)
    kn = kn_matrix(b, g)
    i0, i1 = g.mode_index((0,)), g.mode_index((1,))
    assert kn.entries[i1, i0] == 0
    assert kn.entries[i0, i1] == pytest.approx(0.5)
    assert not kn.hermitian
    w = weyl_matrix(b, g)
    assert w.hermitian
    assert w.entries[i1, i0] == pytest.approx(0.25)
    assert w.entries[i0, i1] == pytest.approx(0.25)


def test_weyl_on_plane_waves_matches_integral_definition():
    # Op^w(b) e^{i mu y} at y, with b = a(x) c(xi), equals
    # sum_k a_hat(k - mu) c(h (k + mu) / 2) e^{i k y}
    b = symbol_from_spec({"n": 1, "order": 2, "terms": [{"x": {"2": [0.3, 0.1], "-2": [0.3, -0.1]}, "xi": "xi^2 + 1"}]})
    g = TorusGrid.create(1, 6, 0.5)
    A = weyl_matrix(b, g).entries
    mu = 1
    col = A[:, g.mode_index((mu,))]
    expected = np.zeros(g.size, dtype=complex)
    for m, a in {2: 0.3 + 0.1j, -2: 0.3 - 0.1j}.items():
        k = mu + m
        expected[g.mode_index((k,))] = a * ((0.5 * (k + mu) * 0.5) ** 2 + 1)
    assert np.max(np.abs(col - expected)) < 1e-15


def test_symbol_coeff_quadrature_agrees_with_terms(pendulum):
    for m in (-1, 0, 1, 2):
        for xi in (0.0, 0.7, -2.5):
            a = symbol_coeff(pendulum, (m,), (xi,))
            q = symbol_coeff(pendulum, (m,), (xi,), method="quadrature")
            assert abs(a - q) < 1e-14


def test_raw_symbol_matches_separable(pendulum):
    raw = Symbol(
        n=1,
        order_m=2,
        raw_eval=lambda x, xi: 0.5 * xi[:, 0] ** 2 + 1 - np.cos(x[:, 0]),
        x_degree=1,
    )
    g = TorusGrid.create(1, 8, 0.25)
    assert np.max(np.abs(kn_matrix(raw, g).entries - kn_matrix(pendulum, g).entries)) < 1e-14


def test_two_dimensional_pendulum_is_sum_of_axes():
    from toruscs.symbols import lift_preset

    b2 = symbol_from_spec(lift_preset(PRESETS["pendulum"], 2))
    x = np.array([[0.3, 1.1]])
    xi = np.array([[0.4, -0.9]])
    expected = 0.5 * (0.4**2 + 0.9**2) + (1 - np.cos(0.3)) + (1 - np.cos(1.1))
    assert b2(x, xi)[0] == pytest.approx(expected, rel=1e-15)
    g = TorusGrid.create(2, 3, 0.5)
    A = kn_matrix(b2, g)
    assert A.hermitian


@pytest.mark.parametrize("n,K,h", [(1, 16, 0.1), (2, 5, 0.3)])
def test_fast_apply_matches_dense(n, K, h):
    from toruscs.symbols import lift_preset

    b = symbol_from_spec(lift_preset(PRESETS["pendulum"], n))
    g = TorusGrid.create(n, K, h)
    psi = random_field(g, np.random.default_rng(1))
    fast = apply_kn(b, psi)
    dense = kn_matrix(b, g).apply(psi)
    assert np.max(np.abs(fast.coeffs - dense.coeffs)) < 1e-13


def test_band_limit_guard():
    b = symbol_from_spec({"n": 1, "order": 0, "terms": [{"x": {"5": 0.5, "-5": 0.5}, "xi": "1"}]})
    with pytest.raises(BandLimitError):
        kn_matrix(b, TorusGrid.create(1, 2, 0.5))


def test_quantize_dispatch(pendulum):
    g = TorusGrid.create(1, 4, 0.5)
    assert quantize(pendulum, g, "weyl").kind == "weyl"
    with pytest.raises(ValueError):
        quantize(pendulum, g, "anti-wick")


def test_ellipticity_pendulum(pendulum):
    rep = ellipticity_check(pendulum)
    assert rep.passed
    assert rep.worst_ratio == pytest.approx(0.45, rel=1e-2)


def test_ellipticity_failure_detected():
    # claims order 4 growth, actually quadratic
    b = symbol_from_spec({"n": 1, "order": 4, "ellipticity": {"C": 0.25, "c": 3}, "terms": [{"xi": "0.5*xi^2"}]})
    assert not ellipticity_check(b, ProbeSpec(r_max=50.0)).passed


def test_ellipticity_needs_constants():
    b = symbol_from_spec(PRESETS["free"])
    with pytest.raises(QuantizationError):
        ellipticity_check(b)


def test_expectation_is_real_for_hermitian(pendulum):
    g = TorusGrid.create(1, 8, 0.5)
    A = kn_matrix(pendulum, g)
    psi = random_field(g, np.random.default_rng(2))
    e = A.expectation(psi)
    assert abs(e.imag) < 1e-14
    const = FourierField.from_modes(g, {(0,): 1.0}).normalized()
    assert A.expectation(const).real == pytest.approx(1.0, rel=1e-15)
