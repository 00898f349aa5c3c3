"""Generating functions of the reduced 16-state walk.

Per-site states are 16-vectors indexed ``m * 4 + l`` (m over Own/Other
labels, l over chiralities). The origin keeps its amplitude in the Left slot;
the Right slot there is a dummy that never receives anything.

Three independent routes produce the same amplitudes:

* :func:`transfer_path_sum` applies the direction weight matrices site by
  site (the oracle);
* :func:`state_genfunc_coeff` builds the first-return series R(z) and the
  origin-avoiding propagator as matrix power series, then reads off
  coefficients of Xi(x, y; z) [I - R(z)]^{-1} Psi_0;
* the lattice simulator in literal reduced-star mode.

The closed forms in lambda(z) are evaluated as printed and compared against
path sums; disagreements are reported, not asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .coins import (
    DOWN,
    LEFT,
    RIGHT,
    UP,
    CoinParams,
    ReducedCoinParams,
    direction_weights,
    plane_coin,
)
from .lattice import Mode, Model, ResourceLimit, build_walk, trajectory
from .reduction import reduced_star_initial
from .series import DEFAULT_ORDER, SeriesError, TruncatedSeries

__all__ = [
    "GenfuncError",
    "BranchError",
    "Weights16",
    "weights16",
    "lambda_eval",
    "lambda_other_root",
    "lambda_series",
    "quadratic_residual",
    "radius_r0",
    "radius_r1",
    "GenfuncScalars",
    "genfunc_scalars",
    "closed_form_B",
    "closed_form_B_series",
    "origin_return_genfunc",
    "transfer_path_sum",
    "RenewalSeries",
    "renewal_series",
    "state_genfunc_coeff",
    "subwalk_coefficients",
    "phi_xyz",
    "alpha_tilde",
    "genfunc_check",
]

B_TAGS = ("p_R", "q_U", "p'_R", "q'_U")
MAX_TRANSFER_CELLS = 50_000_000


class GenfuncError(ValueError):
    pass


class BranchError(GenfuncError):
    pass


# ---------------------------------------------------------------- weights


@dataclass(frozen=True)
class Weights16:
    p_left: np.ndarray
    p_right: np.ndarray
    q_down: np.ndarray
    q_up: np.ndarray
    p_right_tilde: np.ndarray
    q_up_tilde: np.ndarray
    # Down arrival at the origin, written into its Left slot
    p_down_origin: np.ndarray
    # wall maps: Down at (x, 0) re-enters as Up, Left at (0, y) as Right
    wall_up: np.ndarray
    wall_right: np.ndarray
    p_right_prime: np.ndarray = field(repr=False)
    q_up_prime: np.ndarray = field(repr=False)
    q_tilde: np.ndarray = field(repr=False)


def _rows(src_row: int, dst_row: int, cz: np.ndarray) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[dst_row] = cz[src_row]
    return np.kron(np.eye(4), m)


def weights16(p: CoinParams, r: ReducedCoinParams) -> Weights16:
    w = direction_weights(p, r)
    cz = plane_coin(p)
    return Weights16(
        p_left=w.p_left,
        p_right=w.p_right,
        q_down=w.q_down,
        q_up=w.q_up,
        p_right_tilde=w.p_right_tilde,
        q_up_tilde=w.q_up_tilde,
        p_down_origin=_rows(DOWN, LEFT, cz),
        wall_up=_rows(DOWN, UP, cz),
        wall_right=_rows(LEFT, RIGHT, cz),
        p_right_prime=w.p_right_prime,
        q_up_prime=w.q_up_prime,
        q_tilde=w.q_tilde,
    )


# ---------------------------------------------------------------- lambda(z)


def _quad_terms(z: complex, p: CoinParams):
    delta = p.det_delta
    c2 = abs(p.c) ** 2
    A = delta * z * z + 1
    disc = delta**2 * z**4 + 2 * delta * (1 - 2 * c2) * z * z + 1
    return delta, A, disc


def lambda_eval(z: complex, p: CoinParams, form: str = "stable", check_branch: bool = True) -> complex:
    """Root of the quadratic with lambda(z) ~ c z near 0.

    ``form="literal"`` evaluates the printed quotient directly; ``"stable"``
    uses the equivalent 2cz / (A + sqrt(disc)), which has no cancellation at
    small z. Both use the principal square root.
    """
    z = complex(z)
    if z == 0:
        return 0j
    delta, A, disc = _quad_terms(z, p)
    root = np.sqrt(disc)
    if form == "literal":
        lam = (A - root) / (2 * delta * np.conj(p.c) * z)
    elif form == "stable":
        lam = 2 * p.c * z / (A + root)
    else:
        raise GenfuncError(f"unknown form {form!r}")
    if check_branch and abs(lam) >= 1 and abs(lambda_other_root(z, p, lam)) >= 1:
        raise BranchError(f"both roots have modulus >= 1 at z={z}")
    return complex(lam)


def lambda_other_root(z: complex, p: CoinParams, lam: complex | None = None) -> complex:
    """The second root, from the product of roots c / (Delta conj(c))."""
    lam = lambda_eval(z, p, check_branch=False) if lam is None else lam
    return complex(p.c / (p.det_delta * np.conj(p.c)) / lam)


def quadratic_residual(z: complex, lam: complex, p: CoinParams) -> float:
    delta = p.det_delta
    return float(abs(delta * np.conj(p.c) * z * lam**2 - (delta * z * z + 1) * lam + p.c * z))


def lambda_series(p: CoinParams, order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """lambda as a power series: 2cz / (A(z) + sqrt(disc(z)))."""
    delta = p.det_delta
    c2 = abs(p.c) ** 2
    coef = np.zeros(order + 1, dtype=complex)
    coef[0] = 1
    if order >= 2:
        coef[2] = 2 * delta * (1 - 2 * c2)
    if order >= 4:
        coef[4] = delta**2
    disc = TruncatedSeries(coef)
    A = TruncatedSeries.constant(1.0, order) + TruncatedSeries.monomial(2, order, delta)
    num = TruncatedSeries.monomial(1, order, 2 * p.c)
    return num / (A + disc.sqrt())


def _max_on_circle(p: CoinParams, r: float, n: int = 720) -> float:
    zs = r * np.exp(2j * np.pi * np.arange(n) / n)
    return max(abs(lambda_eval(z, p, check_branch=False)) for z in zs)


@lru_cache(maxsize=256)
def _r0_cached(a: complex, b: complex, c: complex, d: complex) -> float:
    p = CoinParams(a, b, c, d)
    hi_cap = 1 - 1e-9
    if _max_on_circle(p, hi_cap) < 1:
        return hi_cap
    lo, hi = 0.0, hi_cap
    for _ in range(60):
        mid = (lo + hi) / 2
        if _max_on_circle(p, mid) < 1:
            lo = mid
        else:
            hi = mid
    return lo


def radius_r0(p: CoinParams) -> float:
    """Largest r < 1 with max_{|z|=r} |lambda(z)| < 1 (max modulus makes it monotone)."""
    return _r0_cached(p.a, p.b, p.c, p.d)


def radius_r1(p: CoinParams) -> float:
    return min(abs(p.c**2), radius_r0(p))


# ---------------------------------------------------------------- scalars


@dataclass(frozen=True)
class GenfuncScalars:
    lam: complex
    mu: complex
    v: complex
    w_plus_sq: complex
    w_minus_sq: complex
    delta_plus: complex
    delta_minus: complex
    r0: float
    r1: float
    mu_variant: str


def genfunc_scalars(z: complex, p: CoinParams, mu_variant: str = "printed") -> GenfuncScalars:
    """mu, v, w_pm^2, Delta_pm at z.

    ``mu_variant="printed"`` uses (d^2 lambda - Delta^2 z) / c^2;
    ``"delta"`` replaces Delta^2 by Delta.
    """
    a, c, d, ct, delta = p.a, p.c, p.d, p.ctilde, p.det_delta
    lam = lambda_eval(z, p)
    if mu_variant == "printed":
        mu = (d * d * lam - delta**2 * z) / (c * c)
    elif mu_variant == "delta":
        mu = (d * d * lam - delta * z) / (c * c)
    else:
        raise GenfuncError(f"unknown mu variant {mu_variant!r}")
    a4 = abs(a) ** 4
    v = (1 + delta * z * z) ** 2 - 4 * delta * a4 * z * z
    c2, ct2 = c * c, ct * ct
    wp = -c2 * (ct2 + c2) / (ct2 * delta * (ct2 * a4 - ct2 - c2))
    wm = c2 * (ct2 - c2) / (ct2 * delta * (ct2 * a4 - ct2 + c2))
    return GenfuncScalars(
        lam=lam,
        mu=complex(mu),
        v=complex(v),
        w_plus_sq=complex(wp),
        w_minus_sq=complex(wm),
        delta_plus=complex(2 * c2 / ct2 + 1 - delta * z * z),
        delta_minus=complex(2 * c2 / ct2 - 1 + delta * z * z),
        r0=radius_r0(p),
        r1=radius_r1(p),
        mu_variant=mu_variant,
    )


# ---------------------------------------------------------------- closed-form B


def _b_support(tag: str, x: int, y: int) -> bool:
    if tag == "p_R":
        return x >= 1 and y >= 0
    if tag == "q_U":
        return x >= 0 and y >= 1
    if tag in ("p'_R", "q'_U"):
        return x >= 0 and y >= 0
    raise GenfuncError(f"unknown tag {tag!r}; expected one of {B_TAGS}")


def closed_form_B(tag: str, x: int, y: int, z: complex, p: CoinParams) -> complex:
    """Printed closed forms; 0 outside the printed support.

    The primed forms are written as (d^2/a^2)^n rho^n z^(n-1) (rho - a^2 z) / (a^2 c^2)
    with rho = lambda/z, which equals the printed quotient for z != 0 and
    gives the limit at z = 0 (a pole when n = x + y = 0).
    """
    if not _b_support(tag, x, y):
        return 0j
    a, c, d = p.a, p.c, p.d
    z = complex(z)
    lam = lambda_eval(z, p)
    n = x + y
    if tag in ("p_R", "q_U"):
        return complex((d * d * lam / (a * a)) ** n / (d * d))
    rho = lam / z if z != 0 else p.c
    if z == 0 and n == 0:
        return complex(np.inf)
    zpow = z ** (n - 1) if n >= 1 else 1 / z
    return complex((d * d / (a * a)) ** n * rho**n * zpow * (rho - a * a * z) / (a * a * c * c))


def closed_form_B_series(tag: str, x: int, y: int, p: CoinParams, order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """Power series of the closed form; raises if it has a pole at z = 0."""
    if not _b_support(tag, x, y):
        return TruncatedSeries.zeros(order)
    a, c, d = p.a, p.c, p.d
    lam = lambda_series(p, order)
    n = x + y
    base = TruncatedSeries.constant(1.0, order)
    for _ in range(n):
        base = base * lam * (d * d / (a * a))
    if tag in ("p_R", "q_U"):
        return base / (d * d)
    num = base * (lam - TruncatedSeries.monomial(2, order, a * a))
    try:
        return num.shift(-2) / (a * a * c * c)
    except SeriesError as exc:
        raise GenfuncError(f"{tag} at ({x},{y}) has a pole at z = 0") from exc


# ---------------------------------------------------------------- origin return (printed)


@dataclass(frozen=True)
class OriginReturn:
    value: np.ndarray
    spectral_radius_p: float
    spectral_radius_q: float
    printed_bound_p: float
    printed_bound_q: float


def origin_return_genfunc(
    z: complex, p: CoinParams, r: ReducedCoinParams, n_terms: int | None = None
) -> OriginReturn:
    """sum_tau Xi~((0,0)->(0,0); tau) z^tau from the printed n-recursion.

    The even-n sum of X^(n+1) is taken in closed form X (I - X^2)^{-1}, or as
    an explicit gated sum over n < ``n_terms`` when given.
    """
    w = weights16(p, r)
    ct2 = p.ctilde**2
    z = complex(z)
    if z == 0:
        bp = bq = 0j
        zz = 0j
    else:
        bp = closed_form_B("p'_R", 0, 0, z, p)
        bq = closed_form_B("q'_U", 0, 0, z, p)
        zz = z * z
    mp = w.p_left @ w.p_right_prime @ w.p_right_tilde * bp * zz
    mq = w.p_down_origin @ w.q_up_prime @ w.q_up_tilde * bq * zz
    eye = np.eye(16, dtype=complex)
    out = []
    radii = []
    for m in (mp, mq):
        X = ct2 * m
        rad = float(max(abs(np.linalg.eigvals(X @ X))))
        radii.append(rad)
        if n_terms is None:
            if rad >= 1:
                raise GenfuncError(f"origin-return series diverges at z={z} (spectral radius {rad:.3g})")
            out.append(X @ np.linalg.inv(eye - X @ X) / ct2)
        else:
            acc = np.zeros((16, 16), dtype=complex)
            power = X.copy()
            for n in range(n_terms):
                if n % 2 == 0:
                    acc += power
                power = power @ X
            out.append(acc / ct2)
    value = out[0] @ w.p_right_tilde + out[1] @ w.q_up_tilde + eye
    bound = [float(max(abs(np.linalg.eigvals(m - p.det_delta * z * eye)))) for m in (mp, mq)]
    return OriginReturn(value, radii[0], radii[1], bound[0], bound[1])


# ---------------------------------------------------------------- transfer oracle


def _check_cells(n: int, t: int, width: int):
    cells = n * n * width * (t + 1)
    if cells > MAX_TRANSFER_CELLS:
        raise ResourceLimit(f"path sum would touch {cells} cells (limit {MAX_TRANSFER_CELLS})")


def _pair_index(n: int) -> np.ndarray:
    idx = np.arange(1, n)
    return np.where(idx % 2 == 1, idx + 1, idx - 1)


def _propagate(w: Weights16, grid: np.ndarray, boundary: str) -> np.ndarray:
    """One step of the site-to-site weights on a (L, L, 16[, 16]) array.

    The origin cell is treated as an ordinary source only through its own
    rules, which the caller applies; here cell (0, 0) must be zero.
    """
    L = grid.shape[0]
    new = np.zeros((L + 1, L + 1) + grid.shape[2:], dtype=complex)

    vector = grid.ndim == 3

    def apply(W, block):
        return np.einsum("ij,...j->...i", W, block) if vector else np.einsum("ij,...jk->...ik", W, block)

    new[1:, :L] += apply(w.p_right, grid)
    new[:L, 1:] += apply(w.q_up, grid)
    new[: L - 1, :L] += apply(w.p_left, grid[1:])
    new[:L, : L - 1] += apply(w.q_down, grid[:, 1:])
    # arrivals at (0, 0) are handled by the origin rule
    new[0, 0] = 0
    down_wall = apply(w.wall_up, grid[1:, 0])
    left_wall = apply(w.wall_right, grid[0, 1:])
    if boundary == "wall-pair":
        np.add.at(new[:, 0], _pair_index(L), down_wall)
        np.add.at(new[0, :], _pair_index(L), left_wall)
    elif boundary == "bounce":
        new[1:L, 0] += down_wall
        new[0, 1:L] += left_wall
    else:
        raise GenfuncError(f"unknown boundary {boundary!r}")
    return new


def _origin_out(w: Weights16, origin, new: np.ndarray):
    new[1, 0] += w.p_right_tilde @ origin
    new[0, 1] += w.q_up_tilde @ origin


def _origin_in(w: Weights16, grid: np.ndarray):
    return w.p_left @ grid[1, 0] + w.p_down_origin @ grid[0, 1]


def transfer_path_sum(
    p: CoinParams,
    r: ReducedCoinParams,
    tmax: int,
    initial: np.ndarray | None = None,
    boundary: str = "wall-pair",
) -> list[np.ndarray]:
    """Amplitude grids (L, L, 16) for t = 0..tmax; cell (0, 0) is the origin."""
    if tmax < 0:
        raise GenfuncError("tmax must be >= 0")
    _check_cells(tmax + 2, tmax, 16)
    w = weights16(p, r)
    if initial is None:
        initial = reduced_star_initial(p, r)[0]
    grid = np.zeros((2, 2, 16), dtype=complex)
    grid[0, 0] = initial
    out = [grid]
    for _ in range(tmax):
        origin = grid[0, 0]
        body = grid.copy()
        body[0, 0] = 0
        new = _propagate(w, body, boundary)
        new[0, 0] = _origin_in(w, body)
        _origin_out(w, origin, new)
        grid = new
        out.append(grid)
    return out


def simulator_grid(p: CoinParams, r: ReducedCoinParams, tmax: int, boundary: str = "wall-pair") -> list[np.ndarray]:
    """Literal reduced-star simulator amplitudes in the same (L, L, 16) layout."""
    head = reduced_star_initial(p, r)[0].reshape(4, 4)[:, LEFT]
    spec = build_walk(Model.REDUCED_STAR, p, r, Mode.LITERAL, head, boundary=boundary, require_normalized=False)
    out = []
    for s in trajectory(spec, tmax):
        L = s.extent
        g = np.transpose(s.bulk, (1, 2, 0, 3)).reshape(L, L, 16).copy()
        g[0, 0] = 0
        g[0, 0, LEFT::4] = s.origin
        out.append(g)
    return out


# ---------------------------------------------------------------- renewal route


@dataclass(frozen=True)
class RenewalSeries:
    """First-return series and origin-avoiding propagators, as matrix series."""

    first_return: TruncatedSeries
    origin_series: TruncatedSeries
    avoiding: dict
    initial: np.ndarray

    @property
    def order(self) -> int:
        return self.first_return.order


def renewal_series(
    p: CoinParams,
    r: ReducedCoinParams,
    order: int = DEFAULT_ORDER,
    targets=None,
    boundary: str = "wall-pair",
) -> RenewalSeries:
    """R(z), [I - R(z)]^{-1}, and Xi(origin -> (x,y); z) avoiding the origin.

    ``targets`` lists the (x, y) sites whose avoiding propagators are kept
    (default: every site with x + y <= 6).
    """
    if targets is None:
        targets = [(x, s - x) for s in range(1, 7) for x in range(s + 1)]
    targets = [tuple(t) for t in targets if tuple(t) != (0, 0)]
    _check_cells(order + 2, 1, 256)
    w = weights16(p, r)
    ret = np.zeros((order + 1, 16, 16), dtype=complex)
    avoid = {t: np.zeros((order + 1, 16, 16), dtype=complex) for t in targets}
    grid = np.zeros((2, 2, 16, 16), dtype=complex)
    grid[1, 0] = w.p_right_tilde
    grid[0, 1] = w.q_up_tilde
    for tau in range(1, order + 1):
        L = grid.shape[0]
        for (x, y), arr in avoid.items():
            if x < L and y < L:
                arr[tau] = grid[x, y]
        if tau == order:
            break
        ret[tau + 1] = w.p_left @ grid[1, 0] + w.p_down_origin @ grid[0, 1]
        grid = _propagate(w, grid, boundary)
    R = TruncatedSeries(ret)
    origin = (TruncatedSeries.constant(np.eye(16), order) - R).inverse()
    return RenewalSeries(R, origin, {t: TruncatedSeries(a) for t, a in avoid.items()}, reduced_star_initial(p, r)[0])


def state_genfunc_coeff(x: int, y: int, t: int, ren: RenewalSeries) -> np.ndarray:
    """z^t coefficient of Psi~(x, y; z) from the renewal decomposition."""
    if t > ren.order:
        raise GenfuncError(f"t={t} exceeds the series order {ren.order}")
    if t < 0 or x < 0 or y < 0:
        raise GenfuncError("t, x, y must be nonnegative")
    if x + y > t:
        return np.zeros(16, dtype=complex)
    if (x, y) == (0, 0):
        return ren.origin_series[t] @ ren.initial
    if (x, y) not in ren.avoiding:
        raise GenfuncError(f"site ({x},{y}) was not among the renewal targets")
    xi = ren.avoiding[(x, y)].coeffs
    o = ren.origin_series.coeffs
    acc = np.zeros((16, 16), dtype=complex)
    for tau in range(1, t + 1):
        acc += xi[tau] @ o[t - tau]
    return acc @ ren.initial


# ---------------------------------------------------------------- printed-B sub-walk


def _basis4(p: CoinParams) -> dict[str, np.ndarray]:
    w = direction_weights(p, ReducedCoinParams.grover_default(1))
    return {
        "p_R": w.p_right[:4, :4],
        "q_U": w.q_up[:4, :4],
        "p'_R": w.p_right_prime[:4, :4],
        "q'_U": w.q_up_prime[:4, :4],
    }


def subwalk_coefficients(p: CoinParams, tmax: int) -> dict:
    """Path weights on the square lattice, decomposed on the printed basis.

    The sub-walk uses the four bulk weights everywhere on Z^2, starting from
    the identity at the origin. Each 4x4 path weight is projected by least
    squares onto span{P_R, Q_U, P'_R, Q'_U}; the coefficients and the
    projection residual are returned per (x, y, tau) with x, y >= 0.
    """
    cz = plane_coin(p)
    W = {}
    for name, row in (("L", LEFT), ("R", RIGHT), ("D", DOWN), ("U", UP)):
        m = np.zeros((4, 4), dtype=complex)
        m[row] = cz[row]
        W[name] = m
    basis = _basis4(p)
    A = np.stack([basis[t].ravel() for t in B_TAGS], axis=1)
    n = 2 * tmax + 1
    grid = np.zeros((n, n, 4, 4), dtype=complex)
    grid[tmax, tmax] = np.eye(4)
    out = {}
    for tau in range(1, tmax + 1):
        new = np.zeros_like(grid)
        new[1:] += W["R"] @ grid[:-1]
        new[:-1] += W["L"] @ grid[1:]
        new[:, 1:] += W["U"] @ grid[:, :-1]
        new[:, :-1] += W["D"] @ grid[:, 1:]
        grid = new
        for x in range(tau + 1):
            for y in range(tau + 1 - x):
                m = grid[tmax + x, tmax + y]
                if not np.any(m):
                    continue
                coef, *_ = np.linalg.lstsq(A, m.ravel(), rcond=None)
                resid = float(np.linalg.norm(A @ coef - m.ravel()))
                out[(x, y, tau)] = (dict(zip(B_TAGS, coef.astype(complex))), resid)
    return out


# ---------------------------------------------------------------- phi and alpha~


def phi_xyz(x: int, y: int, z: complex, p: CoinParams, eta: str = "delta_pm", exponent_offset: int = -2) -> complex:
    """phi(x, y; z) with the undefined eta_pm replaced per ``eta``.

    ``eta="delta_pm"`` substitutes Delta_pm(z). The result is
    assumption-dependent.
    """
    if eta != "delta_pm":
        raise GenfuncError(f"unsupported eta substitution {eta!r}")
    s = genfunc_scalars(z, p)
    a, c, d, ct = p.a, p.c, p.d, p.ctilde
    sv = np.sqrt(s.v)
    num = (
        (d * d * s.lam / (a * a)) ** (x + y + exponent_offset)
        * ct**6
        * s.w_plus_sq
        * s.w_minus_sq
        * (s.delta_plus + sv)
        * (s.delta_minus - sv)
    )
    den = 4 * (ct**4 - c**4) * (z * z - s.w_plus_sq) * (z * z - s.w_minus_sq)
    return complex(num / den)


def alpha_tilde(s_weight: float, x: int, y: int, label: str, z: complex, p: CoinParams, mu_variant: str = "printed") -> complex:
    """Generating-function amplitude display for one (m, l); nan where nothing is printed."""
    if not ((x > 0 and y > 0) or (x == 0 and y == 0)):
        return complex(np.nan)
    sc = genfunc_scalars(z, p, mu_variant)
    a, b, c, d, ct = p.a, p.b, p.c, p.d, p.ctilde
    common = (ct * ct * s_weight * sc.mu + 1) * phi_xyz(x, y, z, p)
    inner = x > 0
    if label == "Left":
        f = d * d / (a * a * c * c) * (sc.lam - a * a * z) if inner else -sc.mu
    elif label == "Right":
        f = -z if inner else 0
    elif label == "Down":
        f = c * c / (b * b * d * d) * (sc.lam - b * b * z) if inner else sc.mu
    elif label == "Up":
        f = z if inner else 0
    else:
        raise GenfuncError(f"unknown chirality {label!r}")
    return complex(f * common)


# ---------------------------------------------------------------- report


def genfunc_check(
    p: CoinParams,
    r: ReducedCoinParams,
    tmax: int = 30,
    max_sum: int = 6,
    order: int = DEFAULT_ORDER,
    z_probe: float = 0.1,
    boundary: str = "wall-pair",
) -> dict:
    """All cross-checks; hard agreements first, printed-formula comparisons as findings."""
    if tmax > order:
        raise GenfuncError(f"tmax={tmax} exceeds series order {order}")
    sites = [(x, s - x) for s in range(max_sum + 1) for x in range(s + 1)]
    tr = transfer_path_sum(p, r, tmax, boundary=boundary)
    sim = simulator_grid(p, r, tmax, boundary)
    ren = renewal_series(p, r, order, [s for s in sites if s != (0, 0)], boundary)

    def at(grid, x, y):
        return grid[x, y] if x < grid.shape[0] and y < grid.shape[1] else np.zeros(16, dtype=complex)

    d_sim = d_ren = 0.0
    for t in range(tmax + 1):
        for x, y in sites:
            v = at(tr[t], x, y)
            d_sim = max(d_sim, float(np.max(np.abs(v - at(sim[t], x, y)))))
            d_ren = max(d_ren, float(np.max(np.abs(v - state_genfunc_coeff(x, y, t, ren)))))

    psi1 = at(tr[1], 1, 0)
    printed_psi1 = np.kron(np.eye(4)[0], np.eye(4)[UP])

    findings = []
    sub = subwalk_coefficients(p, min(tmax, 12))
    zp = complex(z_probe)
    for tag in B_TAGS:
        for x, y in sites:
            gen = sum(
                (coef[tag] * zp**tau for (sx, sy, tau), (coef, _) in sub.items() if (sx, sy) == (x, y)),
                0j,
            )
            try:
                cf = closed_form_B(tag, x, y, zp, p)
            except GenfuncError:
                cf = complex(np.nan)
            findings.append(
                {
                    "quantity": f"B[{tag}]",
                    "site": [x, y],
                    "z": z_probe,
                    "path_sum": gen,
                    "closed_form": cf,
                    "abs_diff": abs(gen - cf),
                    "assumption_flags": ["square-lattice-subwalk", "truncated-at-tau-12"],
                }
            )
    resid = max((res for _, res in sub.values()), default=0.0)

    ret_true = ren.origin_series(zp)
    try:
        ret_printed = origin_return_genfunc(zp, p, r).value
        ret_diff = float(np.max(np.abs(ret_true - ret_printed)))
    except GenfuncError as exc:
        ret_diff = float("nan")
        findings.append({"quantity": "origin_return", "error": str(exc), "assumption_flags": []})
    findings.append(
        {
            "quantity": "origin_return",
            "z": z_probe,
            "abs_diff": ret_diff,
            "assumption_flags": ["printed-recursion"],
        }
    )
    return {
        "tmax": tmax,
        "max_sum": max_sum,
        "order": order,
        "boundary": boundary,
        "transfer_vs_simulator": d_sim,
        "renewal_vs_transfer": d_ren,
        "psi1_at_1_0": {
            "computed": psi1,
            "printed": printed_psi1,
            "abs_diff": float(np.max(np.abs(psi1 - printed_psi1))),
        },
        "subwalk_projection_residual": resid,
        "findings": findings,
    }
