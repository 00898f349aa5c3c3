from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwplanes.series import SeriesError, TruncatedSeries

T = 24


def damped(rng, shape=()):
    c = (rng.normal(size=(T + 1,) + shape) + 1j * rng.normal(size=(T + 1,) + shape)) * (0.5 ** np.arange(T + 1)).reshape(
        (-1,) + (1,) * len(shape)
    )
    return c


def scalar_series(seed):
    c = damped(np.random.default_rng(seed))
    c[0] = 1 + 0.3j
    return TruncatedSeries(c)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_inverse_residual(seed):
    s = scalar_series(seed)
    one = s * s.inverse()
    assert one.truncate_residual(TruncatedSeries.constant(1.0, T)) < 1e-10


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_sqrt_squares_back(seed):
    s = scalar_series(seed)
    r = s.sqrt()
    assert (r * r).truncate_residual(s) < 1e-10
    assert r[0] == pytest.approx(np.sqrt(s[0]))


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_matrix_inverse(seed):
    rng = np.random.default_rng(seed)
    c = damped(rng, (3, 3))
    c[0] = np.eye(3) + 0.1 * c[0]
    m = TruncatedSeries(c)
    eye = TruncatedSeries.constant(np.eye(3), T)
    inv = m.inverse()
    # relative to the size of the terms being cancelled
    scale = max(1.0, np.abs(inv.coeffs).max())
    assert (m * inv).truncate_residual(eye) < 1e-12 * scale
    assert (inv * m).truncate_residual(eye) < 1e-12 * scale


def test_geometric_series():
    z = TruncatedSeries.monomial(1, T)
    g = (1 - z).inverse()
    assert np.allclose(g.coeffs, 1)
    assert g(0.5) == pytest.approx(2 * (1 - 0.5 ** (T + 1)))


def test_sqrt_of_one_minus_z_matches_binomial():
    from scipy.special import binom

    s = (1 - TruncatedSeries.monomial(1, T)).sqrt()
    expect = [binom(0.5, n) * (-1) ** n for n in range(T + 1)]
    assert np.allclose(s.coeffs, expect, atol=1e-14)


def test_scalar_times_matrix_series():
    m = TruncatedSeries.constant(np.eye(2), T)
    z = TruncatedSeries.monomial(1, T, 2.0)
    out = z * m
    assert out.is_matrix and np.allclose(out[1], 2 * np.eye(2))
    assert np.allclose((m * z)[1], 2 * np.eye(2))


def test_shift():
    s = TruncatedSeries.monomial(2, T)
    assert s.shift(3)[5] == 1
    assert s.shift(-2)[0] == 1
    with pytest.raises(SeriesError):
        s.shift(-3)


def test_errors():
    with pytest.raises(SeriesError):
        TruncatedSeries(np.zeros((3, 2, 3)))
    with pytest.raises(SeriesError):
        TruncatedSeries.monomial(1, T).inverse()
    with pytest.raises(SeriesError):
        TruncatedSeries.zeros(T) + TruncatedSeries.zeros(T + 1)
    with pytest.raises(SeriesError):
        TruncatedSeries.zeros(T, 2).sqrt()
    with pytest.raises(SeriesError):
        TruncatedSeries.zeros(T)[T + 1]
    with pytest.raises(SeriesError):
        TruncatedSeries.constant(np.zeros((2, 2)), T).inverse()


def test_division_and_subtraction():
    s = scalar_series(1)
    assert (s / s).truncate_residual(TruncatedSeries.constant(1.0, T)) < 1e-12
    assert (s - s).truncate_residual(TruncatedSeries.zeros(T)) == 0
    assert (2 - s)[0] == pytest.approx(2 - s[0])
    assert (s / 2)[3] == pytest.approx(s[3] / 2)
