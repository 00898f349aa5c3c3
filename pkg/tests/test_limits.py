from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from qwplanes.coins import CoinParams, ReducedCoinParams
from qwplanes.genfunc import GenfuncError
from qwplanes.lattice import build_walk, evolve, trajectory
from qwplanes.limits import (
    LimitError,
    empirical_rescaled_stats,
    f_H_cdf,
    f_H_density,
    f_H_integral,
    fourier_hat_alpha,
    site_mass_series,
    localization_asymptotic,
    limit_params,
    weak_limit_density,
    weak_limit_total_mass,
    time_averaged_probability,
    v_pm,
)
from qwplanes.reduction import InitialPsi

# origin (both origin groups) plus its four neighbours, two on each copy
NEIGHBOURHOOD = [(r, x, y) for r in range(2) for (x, y) in ((0, 0), (1, 0), (0, 1))]


@pytest.fixture
def hadamard_tp(hadamard):
    return limit_params(hadamard, InitialPsi([1.0, 0.0]))


@pytest.mark.parametrize("a_mod", [0.3, 1 / np.sqrt(2), 0.9])
def test_f_H_half_mass(a_mod):
    assert f_H_integral(a_mod) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("a_mod", [0.3, 1 / np.sqrt(2), 0.9])
def test_f_H_at_zero(a_mod):
    assert f_H_density(0.0, a_mod) == pytest.approx(np.sqrt(1 - a_mod**2) / (np.pi * a_mod), abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(a_mod=st.floats(0.05, 0.95), frac=st.floats(0.0, 0.999))
def test_f_H_cdf_matches_quadrature(a_mod, frac):
    x = frac * a_mod
    assert f_H_cdf(x, a_mod, normalized=False) == pytest.approx(f_H_integral(a_mod, x), abs=1e-9)


def test_f_H_cdf_oracle_against_plain_quad():
    a = 0.6
    val, _ = integrate.quad(lambda x: f_H_density(x, a), 0, 0.4)
    assert f_H_cdf(0.4, a, normalized=False) == pytest.approx(val, abs=1e-10)


def test_f_H_support_and_limits():
    assert f_H_density(-0.1, 0.5) == 0 and f_H_density(0.5, 0.5) == 0
    assert f_H_cdf(0.5, 0.5) == pytest.approx(1.0)
    assert f_H_cdf(-1.0, 0.5) == 0
    assert np.all(np.diff(f_H_cdf(np.linspace(0, 0.5, 50), 0.5)) >= 0)
    with pytest.raises(LimitError):
        f_H_density(0.1, 1.0)


def test_localization_params_hadamard(hadamard_tp):
    tp = hadamard_tp
    assert tp.phi == pytest.approx(0.0)
    assert tp.K_plus == pytest.approx(2.25)
    assert tp.K_minus == pytest.approx(0.25)
    assert tp.c_abs2 == pytest.approx(0.5)
    assert "K_minus_sign" in tp.assumption_flags


@pytest.mark.parametrize("k", [2, 3, 4])
def test_theta_statistics_identities(k):
    rng = np.random.default_rng(k)
    v = rng.normal(size=k) + 1j * rng.normal(size=k)
    psi = InitialPsi(v / np.linalg.norm(v), np.exp(0.3j))
    tp = limit_params(CoinParams.hadamard(np.exp(0.3j)), psi)
    pp = psi.psi_prime
    for r in range(k):
        other = pp.sum() - pp[r]
        # ordered pairs with the factor 2 count each cross term twice
        sq = np.sum(np.abs(pp) ** 2) - abs(pp[r]) ** 2
        assert tp.theta3[r] == pytest.approx(2 * abs(other) ** 2 - sq)
        assert tp.theta2[r] == pytest.approx(np.conj(pp[r]) * other)
    assert np.allclose(tp.theta1, np.abs(pp) ** 2)


def test_localization_gate_and_active_terms(hadamard_tp):
    even = localization_asymptotic(100, 0, 0, 0, hadamard_tp)
    odd = localization_asymptotic(100, 0, 1, 0, hadamard_tp)
    assert even.active == ("L_p",)
    assert even.value == pytest.approx(even.L_p)
    assert odd.value == 0.0
    assert "gamma_cross_ratio" in even.assumption_flags
    assert not even.boundary


def test_localization_errors(hadamard_tp):
    with pytest.raises(LimitError):
        localization_asymptotic(10, 0, -1, 0, hadamard_tp)
    with pytest.raises(LimitError):
        localization_asymptotic(10, 5, 0, 0, hadamard_tp)
    with pytest.raises(LimitError):
        limit_params(CoinParams.hadamard(), InitialPsi([1.0]), ReducedCoinParams.grover_default(2))


def test_site_series_matches_direct_evolution(hadamard):
    spec = build_walk("joined", hadamard, 2, "unitarized", [1, 0])
    ser = site_mass_series(spec, NEIGHBOURHOOD, 12)
    assert ser.parity_violation == 0.0
    for t, s in enumerate(trajectory(spec, 12)):
        origin, grid = s.site_masses()
        expect = [origin[r] if (x, y) == (0, 0) else (grid[r, x, y] if max(x, y) < grid.shape[1] else 0) for r, x, y in NEIGHBOURHOOD]
        assert np.allclose(ser.values[t], expect)


def test_time_average_windows(hadamard):
    spec = build_walk("joined", hadamard, 2, "unitarized", [1, 0])
    ser = site_mass_series(spec, NEIGHBOURHOOD, 20)
    ta = time_averaged_probability(spec, NEIGHBOURHOOD, (10, 20), ser)
    direct = np.mean(ser.values[10:21].sum(axis=1))
    assert ta.mean == pytest.approx(direct)
    assert ta.mean == pytest.approx((6 * ta.even + 5 * ta.odd) / 11)
    with pytest.raises(LimitError):
        time_averaged_probability(spec, NEIGHBOURHOOD, (10, 30), ser)
    with pytest.raises(LimitError):
        time_averaged_probability(spec, NEIGHBOURHOOD, (0, 5))
    with pytest.raises(LimitError):
        site_mass_series(build_walk("quarter", hadamard), [(0, 0, 0)], 3)


def test_localization_golden(hadamard):
    # regression values frozen from the simulator; origin-neighbourhood mass,
    # parity resolved, for k=2, Hadamard, psi=(1, 0), unitarized
    spec = build_walk("joined", hadamard, 2, "unitarized", [1, 0])
    ser = site_mass_series(spec, NEIGHBOURHOOD, 300)
    a = time_averaged_probability(spec, NEIGHBOURHOOD, (100, 200), ser)
    b = time_averaged_probability(spec, NEIGHBOURHOOD, (200, 300), ser)
    assert a.even == pytest.approx(0.06440415196320955, rel=1e-9)
    assert a.odd == pytest.approx(0.10662058888349643, rel=1e-9)
    assert a.mean == pytest.approx(0.08530337816137137, rel=1e-9)
    assert b.even == pytest.approx(0.06410534875808771, rel=1e-9)
    assert b.odd == pytest.approx(0.10585278170256825, rel=1e-9)
    assert b.mean == pytest.approx(0.0847723947702068, rel=1e-9)


def test_empirical_stats_shapes(hadamard):
    s = evolve(build_walk("joined", hadamard, 2, "unitarized", [1, 0]), 40)
    es = empirical_rescaled_stats(s, 1, 1 / np.sqrt(2))
    assert es.t == 40
    assert es.marginal_x[1].sum() == pytest.approx(1.0)
    assert es.marginal_y[1].sum() == pytest.approx(1.0)
    assert 0 <= es.inside_fraction <= 1
    assert es.quantiles[0.5] <= es.quantiles[0.9] <= es.quantiles[0.99]
    assert 0 <= es.ks_x <= 1 and 0 <= es.ks_y <= 1
    total = sum(empirical_rescaled_stats(s, r, 0.7).off_origin_mass for r in (0, 1))
    assert total + s.site_masses()[0].sum() == pytest.approx(1.0)
    with pytest.raises(LimitError):
        empirical_rescaled_stats(build_walk("joined", hadamard, 2).initial, 0, 0.7)


def test_ks_small_for_matching_sample():
    # n equal-mass atoms at the f_H quantiles are within 1/n in Kolmogorov distance
    from qwplanes.limits import _ks_to_fh

    a, n = 0.7, 2000
    T = np.tan(np.pi / 2 * np.arange(1, n) / n)
    pts = np.append(T * a / np.sqrt(1 - a * a + T * T), a)
    assert np.allclose(f_H_cdf(pts, a), np.arange(1, n + 1) / n)
    assert _ks_to_fh(pts, np.ones(n), a) == pytest.approx(1 / n)


@pytest.mark.parametrize("theta", ["phi", "zero"])
def test_weak_limit_evaluates(theta, hadamard_tp):
    v = weak_limit_density(0.2, 0.3, 0, hadamard_tp, 1 / np.sqrt(2), theta)
    assert np.isfinite(v.density)
    assert f"theta={theta}" in v.assumption_flags
    tot = weak_limit_total_mass(0, hadamard_tp, 1 / np.sqrt(2), theta)
    assert tot["total"] == pytest.approx(tot["point_mass"] + tot["continuous_mass"])
    assert weak_limit_density(0.9, 0.3, 0, hadamard_tp, 1 / np.sqrt(2), theta).density == 0


def test_weak_limit_bad_theta(hadamard_tp):
    with pytest.raises(LimitError):
        weak_limit_density(0.1, 0.1, 0, hadamard_tp, 0.7, "pi")


def test_fourier_side_guards(hadamard):
    with pytest.raises(GenfuncError):
        fourier_hat_alpha(0.1, 0.2, 0.6, 1.0, "Left", hadamard)
    with pytest.raises(LimitError):
        fourier_hat_alpha(0.1, 0.2, 0.1, 1.0, "Sideways", hadamard)
    for label in ("Left", "Right", "Down", "Up"):
        assert np.isfinite(fourier_hat_alpha(0.1, 0.2, 0.1, 1.0, label, hadamard))
    # for Hadamard both poles lie outside the disc where the formula is evaluated
    assert all(abs(v) > 0.5 for v in v_pm(0.1, 0.2, hadamard))
