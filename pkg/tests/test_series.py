import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from steklov.errors import ZeroAtOrigin
from steklov.series import PowerSeries, exp_series, log_series, sqrt_series

coef = st.complex_numbers(max_magnitude=0.5, allow_nan=False, allow_infinity=False)


def test_sqrt_examples():
    assert np.allclose(sqrt_series(PowerSeries([1.0]), 5).coeffs, [1, 0, 0, 0, 0, 0])
    w = sqrt_series(PowerSeries([1, 1, 0.25]), 6)
    assert np.allclose(w.coeffs, [1, 0.5, 0, 0, 0, 0, 0], atol=1e-15)


def test_sqrt_of_mobius_derivative_matches_geometric_series():
    # g = (1 - 0.64) / (0.8 z - 1)^2
    N = 20
    g = PowerSeries(0.36 * (np.arange(N + 1) + 1) * 0.8 ** np.arange(N + 1))
    w = sqrt_series(g, N)
    ref = 0.6 * 0.8 ** np.arange(N + 1)
    phase = w[0] / ref[0]
    assert abs(abs(phase) - 1) < 1e-14
    assert np.allclose(w.coeffs, phase * ref, atol=1e-13)


def test_log_of_zero_constant_raises():
    with pytest.raises(ZeroAtOrigin):
        log_series(PowerSeries([0.0, 1.0]))


@settings(max_examples=60, deadline=None)
@given(st.lists(coef, min_size=1, max_size=12))
def test_sqrt_squared_is_identity(tail):
    g = PowerSeries([1.0] + tail)
    N = len(tail)
    w = sqrt_series(g, N)
    assert np.allclose((w * w).coeffs, g.truncate(N).coeffs, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(coef, min_size=1, max_size=12))
def test_exp_log_roundtrip(tail):
    g = PowerSeries([1.0] + tail)
    assert np.allclose(exp_series(log_series(g)).coeffs, g.coeffs, atol=1e-12)


def test_division_inverts_multiplication():
    a = PowerSeries([1, 2, 3, 4])
    b = PowerSeries([2, -1, 0.5, 0.25])
    assert np.allclose(((a * b) / b).coeffs, a.coeffs)
