"""Localization and weak-limit formulas, and the simulation statistics they predict.

Formula-side quantities are evaluated exactly as printed. Where a symbol is
undefined, the substitution is named in ``assumption_flags`` on the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .coins import CoinParams, ReducedCoinParams
from .genfunc import GenfuncError, genfunc_scalars, radius_r1
from .lattice import Model, WalkSpec, trajectory
from .reduction import InitialPsi

__all__ = [
    "LimitError",
    "LimitParams",
    "limit_params",
    "LocalizationValue",
    "localization_asymptotic",
    "gamma_pm",
    "gamma_cross",
    "TimeAverage",
    "time_averaged_probability",
    "SiteSeries",
    "site_mass_series",
    "f_H_density",
    "f_H_cdf",
    "f_H_integral",
    "WeakLimitValue",
    "weak_limit_density",
    "weak_limit_total_mass",
    "EmpiricalStats",
    "empirical_rescaled_stats",
    "fourier_hat_alpha",
    "v_pm",
]


class LimitError(ValueError):
    pass


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class LimitParams:
    phi: float
    K_plus: float
    K_minus: float
    K_cross: complex
    theta1: np.ndarray
    theta2: np.ndarray
    theta3: np.ndarray
    h_values: tuple[float, float]
    q_values: tuple[float, float]
    c_abs2: float
    a_abs4: float
    psi: np.ndarray
    reduced: ReducedCoinParams
    assumption_flags: tuple[str, ...] = field(default=())

    @property
    def cos_phi(self) -> float:
        return float(np.cos(self.phi))


def limit_params(p: CoinParams, psi: InitialPsi, r: ReducedCoinParams | None = None) -> LimitParams:
    """phi, K_pm, K_x and the theta statistics of psi'.

    K_minus uses |1 - |c^2| e^{-i phi}|^2 (only K_+ is written out).
    theta3 sums over ordered pairs j != k, as printed.
    """
    r = r or ReducedCoinParams.grover_default(psi.k)
    if r.k != psi.k:
        raise LimitError("psi length must equal k")
    c2 = abs(p.c) ** 2
    phi = float(np.angle(p.c**2 / p.ctilde**2))
    e = np.exp(-1j * phi)
    pp = psi.psi_prime
    k = psi.k
    th1 = np.abs(pp) ** 2
    th2 = np.array([np.conj(pp[i]) * (pp.sum() - pp[i]) for i in range(k)])
    th3 = np.zeros(k)
    for i in range(k):
        rest = [j for j in range(k) if j != i]
        acc = sum(abs(pp[j]) ** 2 for j in rest)
        for j in rest:
            for l in rest:
                if j != l:
                    acc += 2 * (np.conj(pp[l]) * pp[j]).real
        th3[i] = acc
    return LimitParams(
        phi=phi,
        K_plus=float(abs(1 + c2 * e) ** 2),
        K_minus=float(abs(1 - c2 * e) ** 2),
        K_cross=complex((1 - c2 * np.exp(1j * phi)) * (1 + c2 * e)),
        theta1=th1,
        theta2=th2,
        theta3=th3,
        h_values=(r.a_k**2, r.a_k * r.b_k),
        q_values=(r.a_k * r.b_k, r.b_k**2),
        c_abs2=c2,
        a_abs4=abs(p.a) ** 4,
        psi=psi.psi,
        reduced=r,
        assumption_flags=("K_minus_sign",),
    )


# ---------------------------------------------------------------- localization


def gamma_pm(sign: int, x: int, y: int, tp: LimitParams) -> float:
    K = tp.K_plus if sign > 0 else tp.K_minus
    sq = sum(q * q for q in tp.q_values)
    lead = sq * tp.c_abs2**2 * (tp.cos_phi + sign * tp.c_abs2) ** 2 / K**2
    if x == 0 and y == 0:
        return float(lead)
    ratio = tp.a_abs4 / K
    return float(lead * ratio ** (x + y - 2) * (1 + ratio))


def gamma_cross(x: int, y: int, tp: LimitParams) -> complex:
    """Cross term; the printed sqrt(K_x / K_x) is read as sqrt(K_x / conj(K_x))."""
    Kx = tp.K_cross
    ph = np.sqrt(Kx / np.conj(Kx))
    lead = ph * tp.c_abs2**2 * (tp.cos_phi**2 - tp.c_abs2**2) / Kx**2
    if x == 0 and y == 0:
        return complex(-lead * ph)
    return complex(lead * (tp.a_abs4 / np.sqrt(tp.K_plus * tp.K_minus)) ** (x + y - 2) * (1 - tp.a_abs4 / Kx))


@dataclass(frozen=True)
class LocalizationValue:
    value: float
    L_m: float
    L_p: float
    L_c: float
    active: tuple[str, ...]
    boundary: bool
    assumption_flags: tuple[str, ...]


def _in(lo, hi, v, lo_closed, hi_closed) -> bool:
    return (lo < v or (lo_closed and v == lo)) and (v < hi or (hi_closed and v == hi))


def localization_asymptotic(t: int, r: int, x: int, y: int, tp: LimitParams) -> LocalizationValue:
    if x < 0 or y < 0:
        raise LimitError("(x, y) must lie in the quadrant")
    if not 0 <= r < len(tp.psi):
        raise LimitError(f"copy index {r} out of range")
    c2, cp = tp.c_abs2, tp.cos_phi
    psi = tp.psi
    L_m = gamma_pm(-1, x, y, tp) * abs(psi.sum()) ** 2
    L_p = gamma_pm(+1, x, y, tp) * abs(np.sum(psi - psi[r])) ** 2
    G = gamma_cross(x, y, tp)
    h, q = tp.h_values, tp.q_values
    th1, th2, th3 = tp.theta1[r], tp.theta2[r], tp.theta3[r]
    L_c = (
        2 * sum(-(1 - hh * hh) * th1 * G.real for hh in h)
        + 2 * sum(qq * (1 + hh) * (th2 * G).real for hh in h for qq in q)
        - 2 * sum(-qq * (1 - hh) * (th2 * np.conj(G)).real for hh in h for qq in q)
        + 2 * sum(qq * qq * th3 * G.real for qq in q)
    )
    active = []
    total = 0.0
    if _in(-1, c2, cp, True, False):
        active.append("L_m")
        total += L_m
    if _in(-c2, 1, cp, False, True):
        active.append("L_p")
        total += L_p
    if _in(-c2, c2, cp, False, False):
        active.append("L_c")
        total += L_c
    gate = (1 + (-1) ** (x + y + 2 * t)) / 2
    boundary = bool(np.isclose(abs(cp), c2, atol=1e-12))
    flags = list(tp.assumption_flags) + ["gamma_cross_ratio"]
    if boundary:
        flags.append("indicator_boundary")
    return LocalizationValue(
        value=float(gate * total),
        L_m=float(L_m),
        L_p=float(L_p),
        L_c=float(L_c),
        active=tuple(active),
        boundary=boundary,
        assumption_flags=tuple(flags),
    )


# ---------------------------------------------------------------- time averages


@dataclass(frozen=True)
class TimeAverage:
    mean: float
    even: float
    odd: float
    window: tuple[int, int]


def _normalize_sites(sites) -> list[tuple[int, int, int]]:
    if isinstance(sites, tuple) and len(sites) == 3 and isinstance(sites[0], (int, np.integer)):
        sites = [sites]
    return [tuple(int(v) for v in s) for s in sites]


@dataclass(frozen=True)
class SiteSeries:
    """P(X_{t,r}=x, Y_{t,r}=y) for t = 0..t_end, one column per site."""

    sites: tuple[tuple[int, int, int], ...]
    values: np.ndarray
    parity_violation: float


def site_mass_series(spec: WalkSpec, sites, t_end: int) -> SiteSeries:
    """Stream the joined walk once, keeping only the requested sites.

    Also records the largest mass found on any site with x + y of the wrong
    parity for its time (the origin counts as x + y = 0).
    """
    if spec.model is not Model.JOINED:
        raise LimitError("site series are defined on the joined walk")
    sites = _normalize_sites(sites)
    vals = np.zeros((t_end + 1, len(sites)))
    worst = 0.0
    for t, s in enumerate(trajectory(spec, t_end)):
        origin, grid = s.site_masses()
        L = grid.shape[1]
        for i, (r, x, y) in enumerate(sites):
            if (x, y) == (0, 0):
                vals[t, i] = origin[r]
            elif x < L and y < L:
                vals[t, i] = grid[r, x, y]
        ii, jj = np.indices((L, L))
        wrong = (ii + jj) % 2 != t % 2
        worst = max(worst, float(grid[:, wrong].max(initial=0.0)))
        if t % 2 == 1:
            worst = max(worst, float(origin.max(initial=0.0)))
    return SiteSeries(tuple(sites), vals, worst)


def time_averaged_probability(spec: WalkSpec, sites, window: tuple[int, int], series: SiteSeries | None = None) -> TimeAverage:
    """Mean over t in the window of sum_{(r,x,y) in sites} P(X_{t,r}=x, Y_{t,r}=y).

    Even-t and odd-t means are reported separately.
    """
    t0, t1 = window
    if not 1 <= t0 <= t1:
        raise LimitError("window must satisfy 1 <= t0 <= t1")
    sites = _normalize_sites(sites)
    if series is None:
        series = site_mass_series(spec, sites, t1)
    elif series.values.shape[0] <= t1:
        raise LimitError(f"window end {t1} exceeds the simulated horizon {series.values.shape[0] - 1}")
    idx = [series.sites.index(s) for s in sites]
    ts = np.arange(t0, t1 + 1)
    vs = series.values[t0 : t1 + 1][:, idx].sum(axis=1)
    even, odd = vs[ts % 2 == 0], vs[ts % 2 == 1]
    return TimeAverage(
        float(vs.mean()),
        float(even.mean()) if even.size else float("nan"),
        float(odd.mean()) if odd.size else float("nan"),
        (t0, t1),
    )


# ---------------------------------------------------------------- f_H


def _check_modulus(a_mod: float):
    if not 0 < a_mod < 1:
        raise LimitError(f"|a| must lie in (0, 1), got {a_mod!r}")


def f_H_density(x, a_mod: float):
    _check_modulus(a_mod)
    x = np.asarray(x, dtype=float)
    inside = (x >= 0) & (x < a_mod)
    xs = np.where(inside, x, 0.0)
    val = np.sqrt(1 - a_mod**2) / (np.pi * (1 - xs**2) * np.sqrt(a_mod**2 - xs**2))
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def f_H_cdf(x, a_mod: float, normalized: bool = True):
    """Integral of f_H from 0 to x; doubled when ``normalized`` so it ends at 1."""
    _check_modulus(a_mod)
    x = np.clip(np.asarray(x, dtype=float), 0.0, a_mod)
    with np.errstate(divide="ignore"):
        val = np.arctan2(np.sqrt(1 - a_mod**2) * x, np.sqrt(np.maximum(a_mod**2 - x**2, 0.0))) / np.pi
    if normalized:
        val = 2 * val
    return float(val) if val.ndim == 0 else val


def f_H_integral(a_mod: float, upper: float | None = None, weight=None) -> float:
    """Adaptive quadrature of (weight *) f_H over [0, upper] with x = |a| sin u."""
    _check_modulus(a_mod)
    upper = a_mod if upper is None else min(upper, a_mod)
    weight = weight or (lambda x: 1.0)

    def integrand(u):
        x = a_mod * np.sin(u)
        # f_H(x) dx with the sqrt(|a|^2 - x^2) cancelled by dx = |a| cos u du
        return weight(x) * np.sqrt(1 - a_mod**2) / (np.pi * (1 - x * x))

    val, _ = integrate.quad(integrand, 0.0, np.arcsin(upper / a_mod), epsabs=1e-12, epsrel=1e-12)
    return float(val)


# ---------------------------------------------------------------- weak limit


@dataclass(frozen=True)
class WeakLimitValue:
    density: float
    point_mass: float
    C_m: float
    C_p: float
    C_d_x: float
    C_d_y: float
    assumption_flags: tuple[str, ...]


def _gammas(x: float, tp: LimitParams, a_mod: float, theta: float):
    ak, bk = tp.reduced.a_k, tp.reduced.b_k
    c = np.sqrt(tp.c_abs2)
    cp, sp = np.cos(tp.phi), np.sin(tp.phi)
    common = 1 + c * c - 2 * c * c * cp * cp - sp * sp * (1 - x * x)
    g1 = 4 * ak * c * (a_mod**2 - x * x) * cp * sp * sp + (ak * ak + 2 * ak * c * cp + 1) * common
    g2 = -2 * bk * c * (a_mod**2 - x * x) * np.exp(1j * theta) * cp * sp + bk * (ak + c * np.exp(1j * theta)) * common
    g3 = bk * bk * common
    return g1, g2, g3


def _C_d(x: float, r: int, tp: LimitParams, a_mod: float, theta: float) -> float:
    g1, g2, g3 = _gammas(x, tp, a_mod, theta)
    sp2 = np.sin(tp.phi) ** 2
    den = (tp.K_plus - (1 - x * x) * sp2) * (tp.K_minus - (1 - x * x) * sp2)
    num = g1 * tp.theta1[r] + 2 * (g2 * tp.theta2[r]).real + g3 * tp.theta3[r]
    return float(num / den)


def _point_masses(r: int, tp: LimitParams) -> tuple[float, float]:
    sq = sum(q * q for q in tp.q_values)
    base = sq * tp.c_abs2**2 * (tp.cos_phi + tp.c_abs2) / (2 * tp.K_plus)
    cp, c2 = tp.cos_phi, tp.c_abs2
    C_p = base * abs(np.sum(tp.psi - tp.psi[r])) ** 2 if _in(-c2, 1, cp, False, True) else 0.0
    C_m = base * abs(tp.psi.sum()) ** 2 if _in(-1, c2, cp, True, False) else 0.0
    return float(C_m), float(C_p)


def _theta_value(tp: LimitParams, theta_choice: str) -> float:
    if theta_choice == "phi":
        return tp.phi
    if theta_choice == "zero":
        return 0.0
    raise LimitError(f"unknown theta choice {theta_choice!r}")


def weak_limit_density(x: float, y: float, r: int, tp: LimitParams, a_mod: float, theta_choice: str = "phi") -> WeakLimitValue:
    theta = _theta_value(tp, theta_choice)
    cx, cy = _C_d(x, r, tp, a_mod, theta), _C_d(y, r, tp, a_mod, theta)
    C_m, C_p = _point_masses(r, tp)
    dens = cx * cy * f_H_density(x, a_mod) * f_H_density(y, a_mod)
    return WeakLimitValue(
        density=float(dens),
        point_mass=C_m + C_p,
        C_m=C_m,
        C_p=C_p,
        C_d_x=cx,
        C_d_y=cy,
        assumption_flags=(f"theta={theta_choice}",) + tp.assumption_flags,
    )


def weak_limit_total_mass(r: int, tp: LimitParams, a_mod: float, theta_choice: str = "phi") -> dict:
    """Point mass plus the (separable) integral of C_d f_H over the square."""
    theta = _theta_value(tp, theta_choice)
    one_d = f_H_integral(a_mod, weight=lambda x: _C_d(x, r, tp, a_mod, theta))
    C_m, C_p = _point_masses(r, tp)
    return {
        "point_mass": C_m + C_p,
        "continuous_mass": one_d * one_d,
        "total": C_m + C_p + one_d * one_d,
        "assumption_flags": [f"theta={theta_choice}"] + list(tp.assumption_flags),
    }


# ---------------------------------------------------------------- empirical


@dataclass(frozen=True)
class EmpiricalStats:
    t: int
    copy: int
    origin_mass: float
    off_origin_mass: float
    inside_fraction: float
    quantiles: dict
    marginal_x: tuple[np.ndarray, np.ndarray]
    marginal_y: tuple[np.ndarray, np.ndarray]
    ks_x: float
    ks_y: float


def _ks_to_fh(points: np.ndarray, weights: np.ndarray, a_mod: float) -> float:
    """sup |F_emp - F_H| for a weighted discrete sample on a grid of points."""
    w = weights / weights.sum()
    cdf = np.cumsum(w)
    prev = np.concatenate([[0.0], cdf[:-1]])
    F = f_H_cdf(points, a_mod)
    return float(max(np.max(np.abs(cdf - F)), np.max(np.abs(prev - F))))


def _quantile(points: np.ndarray, weights: np.ndarray, q: float) -> float:
    cdf = np.cumsum(weights) / weights.sum()
    return float(points[min(np.searchsorted(cdf, q), len(points) - 1)])


def empirical_rescaled_stats(state, r: int, a_mod: float, margin: float = 0.05) -> EmpiricalStats:
    """Rescaled statistics of copy r from a joined-walk state at time t."""
    t = state.t
    if t < 1:
        raise LimitError("rescaling needs t >= 1")
    origin, grid = state.site_masses()
    g = grid[r].copy()
    g[0, 0] = 0.0
    off = float(g.sum())
    if off <= 0:
        raise LimitError("no off-origin mass")
    pts = np.arange(g.shape[0]) / t
    edge = a_mod + margin
    inside = float(g[np.ix_(pts <= edge, pts <= edge)].sum() / off)
    mx, my = g.sum(axis=1), g.sum(axis=0)
    return EmpiricalStats(
        t=t,
        copy=r,
        origin_mass=float(origin[r]),
        off_origin_mass=off,
        inside_fraction=inside,
        quantiles={q: _quantile(pts, mx, q) for q in (0.5, 0.9, 0.99)},
        marginal_x=(pts, mx / off),
        marginal_y=(pts, my / off),
        ks_x=_ks_to_fh(pts, mx, a_mod),
        ks_y=_ks_to_fh(pts, my, a_mod),
    )


# ---------------------------------------------------------------- Fourier side


def v_pm(s_x: float, s_y: float, p: CoinParams) -> tuple[complex, complex]:
    """The two poles v_pm(s) of Phi_2 as printed."""
    sig = s_x + s_y
    a, delta = p.a, p.det_delta
    B = a * a * np.exp(-1j * sig) + np.conj(a) ** 2 * delta * np.exp(1j * sig)
    Bp = a * a * np.exp(-1j * sig) + np.conj(a) ** 2 * np.exp(1j * sig)
    root = np.sqrt(Bp * Bp - 4 * delta)
    return complex((B + root) / (2 * delta)), complex((B - root) / (2 * delta))


def fourier_hat_alpha(
    s_x: float,
    s_y: float,
    z: complex,
    s_weight: float,
    label: str,
    p: CoinParams,
    mu_variant: str = "printed",
    pole_tol: float = 1e-12,
) -> complex:
    """Printed Fourier-domain amplitude for one chirality.

    eta_pm := Delta_pm(z) and e^{i k_x + i k_y} := e^{i s_x + i s_y}; both
    are assumptions.
    """
    if abs(z) >= radius_r1(p):
        raise GenfuncError(f"|z| = {abs(z)} is outside the disc of radius r1")
    sc = genfunc_scalars(z, p, mu_variant)
    a, b, c, d, ct, delta = p.a, p.b, p.c, p.d, p.ctilde, p.det_delta
    sv = np.sqrt(sc.v)
    phi1 = (
        ct**6
        * sc.w_plus_sq
        * sc.w_minus_sq
        * (sc.delta_plus + sv)
        * (sc.delta_minus - sv)
        / (4 * (ct**4 - c**4) * (z * z - sc.w_plus_sq) * (z * z - sc.w_minus_sq))
    )
    weight = ct * ct * s_weight * sc.mu + 1
    if label == "Left":
        return complex((-sc.mu + d * d / (a * a * c * c) * (sc.lam - a * a * z)) * weight * phi1)
    if label == "Down":
        return complex((sc.mu + c * c / (b * b * d * d) * (sc.lam - b * z)) * weight * phi1)
    if label in ("Right", "Up"):
        vp, vm = v_pm(s_x, s_y, p)
        if min(abs(z - vp), abs(z - vm)) < pole_tol:
            raise GenfuncError(f"z = {z} is a pole of Phi_2")
        sig = s_x + s_y
        gamma = 4 * a * a * np.exp(-1j * sig) * z - 1 - delta * z * z
        phi2 = np.exp(1j * sig) * (gamma - sv) / (4 * delta * (z - vp) * (z - vm))
        return complex(z * (1 + ct * ct * sc.mu) * phi1 * phi2)
    raise LimitError(f"unknown chirality {label!r}")
