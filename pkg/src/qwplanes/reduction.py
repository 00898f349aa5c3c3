"""Reduction of the k-plane walk to a single quarter plane.

The enlarged walk carries an extra index j (the ``eps'_j`` register) and is
started at t = 1 from the images of the origin labels of copy j. Contracting
that index against psi' reproduces the original walk. Because every copy uses
the same coin and the Grover origin coin is permutation invariant, the state
started from copy j has one amplitude pattern on copy j ("Own") and one shared
pattern on every other copy ("Other"). The Own/Other walk tracks just those two
patterns, in per-copy (unnormalized) coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coins import (
    LEFT,
    RIGHT,
    UP,
    CoinParams,
    ReducedCoinParams,
    direction_weights,
    grover,
    origin_coin_star,
)
from .lattice import (
    Mode,
    Model,
    StateVector,
    WalkSpec,
    build_walk,
    distribution,
    empty_state,
    make_layout,
    state_from_entries,
    step,
    trajectory,
)

__all__ = [
    "ReductionError",
    "InitialPsi",
    "EnlargedState",
    "EventTable",
    "lift_initial",
    "lambda_apply",
    "contraction_deviation",
    "own_other_origin_coin",
    "own_other_walk",
    "embed_own_other",
    "subspace_residual",
    "event_probabilities_direct",
    "event_probabilities_reduced",
    "event_table",
    "case_mapping_deviation",
    "reduced_star_initial",
    "printed_origin_table",
    "simulated_origin_table",
]


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class InitialPsi:
    psi: np.ndarray
    ctilde: complex = 1.0

    def __post_init__(self):
        psi = np.atleast_1d(np.asarray(self.psi, dtype=complex))
        if psi.ndim != 1 or psi.size == 0:
            raise ReductionError("psi must be a non-empty vector")
        n = np.linalg.norm(psi)
        if n == 0:
            raise ReductionError("psi must be nonzero")
        if abs(n - 1) > 1e-12:
            raise ReductionError(f"psi must be normalized, |psi| = {n!r}")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "ctilde", complex(self.ctilde))

    @property
    def k(self) -> int:
        return self.psi.size

    @property
    def psi_prime(self) -> np.ndarray:
        """psi'_r = sum_j ctilde (2/k - delta_rj) psi_j."""
        return self.ctilde * (grover(self.k) @ self.psi)

    def other_weight(self, r: int) -> complex:
        pp = self.psi_prime
        return complex(pp.sum() - pp[r])


def _first_step_entries(group: int, mode: Mode) -> dict:
    amp = 1 / np.sqrt(2) if Mode(mode) is Mode.UNITARIZED else 1.0
    return {(group, 1, 0, RIGHT): amp, (group, 0, 1, UP): amp}


@dataclass(frozen=True)
class EnlargedState:
    """One joined-walk state per eps'_j register value."""

    psi: InitialPsi
    parts: tuple[StateVector, ...]

    @property
    def t(self) -> int:
        return self.parts[0].t

    @property
    def norm2(self) -> float:
        return sum(p.norm2 for p in self.parts)


def lift_initial(psi: InitialPsi, spec: WalkSpec) -> EnlargedState:
    """The enlarged state at t = 1, with the contraction data psi'."""
    if spec.model not in (Model.JOINED, Model.QUARTER):
        raise ReductionError("lift_initial needs a joined-planes walk")
    if psi.k != spec.layout.n_groups:
        raise ReductionError(f"psi has {psi.k} entries but the walk has {spec.layout.n_groups} copies")
    parts = tuple(
        state_from_entries(spec.layout, _first_step_entries(j, spec.mode), t=1) for j in range(psi.k)
    )
    return EnlargedState(psi, parts)


def enlarged_step(spec: WalkSpec, e: EnlargedState) -> EnlargedState:
    return EnlargedState(e.psi, tuple(step(spec, p) for p in e.parts))


def _pad(s: StateVector, extent: int) -> np.ndarray:
    b = np.zeros(s.bulk.shape[:1] + (extent, extent, 4), dtype=complex)
    n = s.extent
    b[:, :n, :n] = s.bulk
    return b


def lambda_apply(psi: InitialPsi, e: EnlargedState) -> StateVector:
    if psi.k != len(e.parts):
        raise ReductionError("dimension mismatch between psi and enlarged state")
    pp = psi.psi_prime
    extent = max(p.extent for p in e.parts)
    bulk = sum(pp[j] * _pad(p, extent) for j, p in enumerate(e.parts))
    origin = sum(pp[j] * p.origin for j, p in enumerate(e.parts))
    return replace(e.parts[0], bulk=bulk, origin=origin)


def _sitewise_max(a: StateVector, b: StateVector) -> float:
    n = max(a.extent, b.extent)
    d = np.sqrt(np.sum(np.abs(_pad(a, n) - _pad(b, n)) ** 2, axis=-1))
    od = a.origin - b.origin
    # the origin is one site whose labels are all origin labels
    return float(max(d.max(initial=0.0), np.sqrt(np.sum(np.abs(od) ** 2))))


def contraction_deviation(coin: CoinParams, psi: InitialPsi, tmax: int, mode=Mode.LITERAL) -> np.ndarray:
    """max_site |Psi_t - Lambda(psi) Psi'_t| for t = 1..tmax."""
    if abs(coin.ctilde - psi.ctilde) > 0:
        raise ReductionError("coin and psi must share ctilde")
    spec = build_walk(Model.JOINED, coin, psi.k, mode, psi.psi)
    direct = trajectory(spec, tmax)
    next(direct)
    e = lift_initial(psi, spec)
    out = []
    for t in range(1, tmax + 1):
        s = next(direct)
        out.append(_sitewise_max(s, lambda_apply(psi, e)))
        if t < tmax:
            e = enlarged_step(spec, e)
    return np.array(out)


def own_other_origin_coin(k: int, ctilde: complex = 1.0, mode=Mode.LITERAL) -> np.ndarray:
    """Origin coin of the Own/Other walk, read off the full origin coin.

    Literal: 2x2 on (Own, Other). Unitarized: 4x4 on
    (Own H, Own V, Other H, Other V). For k = 1 there is no Other copy and its
    rows and columns are zero.
    """
    unit = Mode(mode) is Mode.UNITARIZED
    n_ax = 2 if unit else 1
    full = ctilde * grover(n_ax * k)
    emb = np.zeros((n_ax * k, 2 * n_ax), dtype=complex)
    read = np.zeros((2 * n_ax, n_ax * k), dtype=complex)
    for ax in range(n_ax):
        emb[ax, ax] = 1.0
        read[ax, ax] = 1.0
        if k > 1:
            for r in range(1, k):
                emb[r * n_ax + ax, n_ax + ax] = 1.0
            read[n_ax + ax, n_ax + ax] = 1.0
    return read @ full @ emb


def own_other_walk(coin: CoinParams, k: int, mode=Mode.LITERAL, boundary="wall-pair") -> WalkSpec:
    """Own/Other walk, started at t = 1 from the Own copy of the first step."""
    rp = ReducedCoinParams.grover_default(k)
    layout = make_layout(Model.OWN_OTHER, k, Mode(mode))
    init = state_from_entries(layout, _first_step_entries(0, mode), t=1)
    return build_walk(
        Model.OWN_OTHER,
        coin,
        rp,
        mode,
        init,
        boundary=boundary,
        origin_coin=own_other_origin_coin(k, coin.ctilde, mode),
        require_normalized=False,
    )


def embed_own_other(s: StateVector, k: int, joined_layout, j: int = 0) -> StateVector:
    """Joined-walk state for register j described by an Own/Other state."""
    st = empty_state(joined_layout, s.extent)
    bulk = np.zeros((k,) + s.bulk.shape[1:], dtype=complex)
    for r in range(k):
        bulk[r] = s.bulk[0] if r == j else s.bulk[1]
    n_ax = 2 if joined_layout.unitarized else 1
    origin = np.zeros(k * n_ax, dtype=complex)
    for r in range(k):
        src = s.origin[:n_ax] if r == j else s.origin[n_ax:]
        origin[r * n_ax : (r + 1) * n_ax] = src
    return replace(st, bulk=bulk, origin=origin, t=s.t)


def subspace_residual(coin: CoinParams, k: int, tmax: int, mode=Mode.LITERAL) -> float:
    """Largest mismatch between stepping the full walk and stepping the reduction."""
    red = own_other_walk(coin, k, mode)
    full = build_walk(Model.JOINED, coin, k, mode)
    worst = 0.0
    for s in trajectory(red, tmax):
        lhs = step(full, embed_own_other(s, k, full.layout))
        rhs = embed_own_other(step(red, s), k, full.layout)
        worst = max(worst, _sitewise_max(lhs, rhs))
    return worst


def event_probabilities_direct(s: StateVector) -> tuple[np.ndarray, np.ndarray]:
    """P(X_{t,r}=x, Y_{t,r}=y) read off a joined-walk state.

    Returns (origin (k,), grid (k, L, L)); the (0, 0) grid cell is unused.
    """
    return s.site_masses()


def event_probabilities_reduced(s: StateVector, psi: InitialPsi) -> tuple[np.ndarray, np.ndarray]:
    """Same probabilities from an Own/Other state through Lambda_r."""
    pp = psi.psi_prime
    n_ax = s.origin.size // 2
    origin = np.zeros(psi.k)
    grid = np.zeros((psi.k,) + s.bulk.shape[1:3])
    for r in range(psi.k):
        w_own, w_other = pp[r], psi.other_weight(r)
        amp = w_own * s.bulk[0] + w_other * s.bulk[1]
        grid[r] = np.sum(np.abs(amp) ** 2, axis=-1)
        o = w_own * s.origin[:n_ax] + w_other * s.origin[n_ax:]
        origin[r] = np.sum(np.abs(o) ** 2)
    return origin, grid


@dataclass(frozen=True)
class EventTable:
    """Rows (t, r, x, y, p) for t >= 1, plus the two-route agreement."""

    rows: tuple[tuple[int, int, int, int, float], ...]
    total_mass: tuple[float, ...]
    max_route_deviation: float

    def as_dicts(self) -> list[dict]:
        return [dict(zip(("t", "r", "x", "y", "p"), row)) for row in self.rows]


def event_table(coin: CoinParams, psi: InitialPsi, tmax: int, mode=Mode.UNITARIZED, threshold: float = 0.0) -> EventTable:
    if tmax < 1:
        raise ReductionError("event probabilities are defined for t >= 1")
    spec = build_walk(Model.JOINED, coin, psi.k, mode, psi.psi)
    red = own_other_walk(coin, psi.k, mode)
    direct = trajectory(spec, tmax)
    next(direct)
    reduced = trajectory(red, tmax - 1)
    rows, totals, worst = [], [], 0.0
    for t in range(1, tmax + 1):
        s, rs = next(direct), next(reduced)
        o1, g1 = event_probabilities_direct(s)
        o2, g2 = event_probabilities_reduced(rs, psi)
        n = g1.shape[1]
        worst = max(worst, float(np.max(np.abs(o1 - o2))), float(np.max(np.abs(g1 - g2[:, :n, :n]))))
        totals.append(float(o1.sum() + g1.sum()))
        for r in range(psi.k):
            if o1[r] > threshold:
                rows.append((t, r, 0, 0, float(o1[r])))
            xs, ys = np.nonzero(g1[r] > threshold)
            for x, y in zip(xs, ys):
                rows.append((t, r, int(x), int(y), float(g1[r, x, y])))
    return EventTable(tuple(rows), tuple(totals), worst)


def case_mapping_deviation(s: StateVector) -> float:
    """|P(P_{t,k} = h_r(x,y)) - case formula in terms of P(X_{t,r}, Y_{t,r})|."""
    dist = distribution(s)
    origin, grid = event_probabilities_direct(s)
    worst = 0.0
    for site, p in dist.items():
        expect = origin.sum() if site.is_origin else grid[site.copy, site.x, site.y]
        worst = max(worst, abs(p - expect))
    return worst


def reduced_star_initial(p: CoinParams, r: ReducedCoinParams) -> tuple[np.ndarray, np.ndarray, float]:
    """(Psi_0*(0,0), Psi_1*(1,0), |Q~ Psi_0* - Psi_1*|) as 16-vectors (m (x) chirality)."""
    if p.ctilde == 0:
        raise ReductionError("ctilde must be nonzero")
    c2 = p.ctilde**2
    head = np.array([r.a_k**2, r.a_k * r.b_k, r.a_k * r.b_k, r.b_k**2], dtype=complex) / c2
    psi0 = np.kron(head, np.eye(4)[LEFT])
    psi1 = np.kron(np.eye(4)[0], np.eye(4)[UP]).astype(complex)
    w = direction_weights(p, r)
    return psi0, psi1, float(np.max(np.abs(w.q_tilde @ psi0 - psi1)))


def printed_origin_table(p: CoinParams, r: ReducedCoinParams) -> np.ndarray:
    """Origin step coefficients transcribed row by row; column = source m."""
    k, a, b, c = r.k, r.a_k, r.b_k, p.ctilde
    cols = [
        # |Own_L,0,0,eps> -> Own_L, Own_D, Other_R, Other_U
        [a * a, a * b, a * b, b * b],
        [a * b * (k - 1), -a * a, b * b * (k - 1), -a * b],
        [a * b * (k - 1), b * b * (k - 1), -a * a, -a * b],
        [b * b * (k - 1) ** 2, -a * b * (k - 1), -a * b * (k - 1), a * a],
    ]
    return c * np.array(cols, dtype=complex).T


def simulated_origin_table(p: CoinParams, r: ReducedCoinParams) -> np.ndarray:
    """Amplitudes at (1, 0) Right after one literal step from each |m,0,0,eps>."""
    out = np.zeros((4, 4), dtype=complex)
    for m in range(4):
        e = np.zeros(4, dtype=complex)
        e[m] = 1.0
        spec = build_walk(Model.REDUCED_STAR, p, r, Mode.LITERAL, e)
        s = step(spec, spec.initial)
        out[:, m] = s.bulk[:, 1, 0, RIGHT]
    return out


def origin_coin_star_action(p: CoinParams, r: ReducedCoinParams) -> np.ndarray:
    return p.ctilde * origin_coin_star(r)
