"""State-vector evolution U = S F on the plane and on joined quarter planes.

Every quadrant-type model is stored the same way: ``bulk`` holds the
amplitudes of G independent quarter-plane "groups" (copies of the quarter
plane for the joined walk, Own/Other labels for the reduced walks) on an
L x L grid with chirality last, and ``origin`` holds the amplitudes of the
shared origin labels. Group g owns origin label g in literal mode and labels
(2g, 2g + 1) = (g, H), (g, V) in unitarized mode.

Literal mode uses the origin rules exactly as printed: the origin fans out to
both (1,0) Right and (0,1) Up, and both (1,0) Left and (0,1) Down flow into
the same origin label. That map is not injective, so the literal walk is a
linear but not norm-preserving evolution. Unitarized mode splits every origin
label into an H and a V copy, which makes the shift a permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, NamedTuple

import numpy as np

from .coins import (
    CHIRALITIES,
    DOWN,
    LEFT,
    M_LABELS,
    RIGHT,
    UP,
    CoinParams,
    ReducedCoinParams,
    grover,
    origin_coin_star,
    own_other_block_normalized,
    plane_coin,
)

__all__ = [
    "Model",
    "Mode",
    "Boundary",
    "Site",
    "Layout",
    "StateVector",
    "WalkSpec",
    "WalkError",
    "build_walk",
    "step",
    "evolve",
    "trajectory",
    "distribution",
    "norm_audit",
    "ResourceLimit",
    "check_budget",
    "parity_violation",
]

NORM_TOL = 1e-10


class WalkError(ValueError):
    pass


class ResourceLimit(RuntimeError):
    """A computation would exceed its memory budget."""


MAX_CELLS = 200_000_000


def check_budget(cells: int, what: str, limit: int = MAX_CELLS):
    if cells > limit:
        raise ResourceLimit(f"{what} needs about {cells} amplitudes (limit {limit})")


class Model(str, Enum):
    PLANE = "plane"
    QUARTER = "quarter"
    JOINED = "joined"
    REDUCED_STAR = "reduced-star"
    OWN_OTHER = "own-other"


class Mode(str, Enum):
    LITERAL = "literal"
    UNITARIZED = "unitarized"


class Boundary(str, Enum):
    """What happens to a component whose move would leave the quadrant.

    ``WALL_PAIR`` sends Down at (x, 0) to Up at (x', 0) and Left at (0, y) to
    Right at (0, y'), where x' pairs 1<->2, 3<->4, ...; it is a permutation
    and keeps x + y = t (mod 2). ``BOUNCE`` flips the chirality in place; it
    is also a permutation but breaks the parity law.
    """

    WALL_PAIR = "wall-pair"
    BOUNCE = "bounce"


class Site(NamedTuple):
    copy: int | None
    x: int
    y: int

    @property
    def is_origin(self) -> bool:
        return self.copy is None


ORIGIN = Site(None, 0, 0)


@dataclass(frozen=True)
class Layout:
    """Shape metadata shared by every state of one walk."""

    model: Model
    groups: tuple[str, ...]
    origin_labels: tuple[str, ...]
    unitarized: bool
    plane: bool = False

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_origin(self) -> int:
        return len(self.origin_labels)

    def origin_group(self, label_index: int) -> int:
        return label_index // 2 if self.unitarized else label_index

    @property
    def groups_are_copies(self) -> bool:
        return self.model in (Model.JOINED, Model.QUARTER, Model.PLANE)


@dataclass(frozen=True)
class StateVector:
    """Amplitudes at time ``t``.

    ``bulk`` has shape (G, L, L, 4). For quadrant models index (x, y) is the
    site itself and ``bulk[:, 0, 0]`` is always zero; for the plane the grid
    is centred and ``offset`` is the array index of coordinate 0.
    """

    layout: Layout
    bulk: np.ndarray
    origin: np.ndarray
    t: int = 0
    offset: int = 0

    @property
    def extent(self) -> int:
        return self.bulk.shape[1]

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.bulk) ** 2) + np.sum(np.abs(self.origin) ** 2))

    def amplitude(self, group: int, x: int, y: int, label: int) -> complex:
        i, j = x + self.offset, y + self.offset
        if 0 <= i < self.extent and 0 <= j < self.extent:
            return complex(self.bulk[group, i, j, label])
        return 0j

    def origin_amplitudes(self) -> np.ndarray:
        return self.origin.copy()

    def items(self, threshold: float = 0.0) -> Iterator[tuple[tuple, complex]]:
        """Sparse view: ((group, x, y, label_name), amplitude) in a fixed order.

        Origin entries come first with (x, y) = (0, 0). Entries whose modulus
        is <= ``threshold`` are skipped.
        """
        lay = self.layout
        for o, amp in enumerate(self.origin):
            if abs(amp) > threshold:
                yield (lay.origin_group(o), 0, 0, lay.origin_labels[o]), complex(amp)
        g, i, j, l = np.nonzero(np.abs(self.bulk) > threshold)
        for gg, ii, jj, ll in zip(g, i, j, l):
            yield (
                (int(gg), int(ii) - self.offset, int(jj) - self.offset, CHIRALITIES[ll]),
                complex(self.bulk[gg, ii, jj, ll]),
            )

    def site_masses(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-group origin mass (G,) and per-site mass (G, L, L)."""
        per_site = np.sum(np.abs(self.bulk) ** 2, axis=-1)
        om = np.abs(self.origin) ** 2
        per_group = np.zeros(self.layout.n_groups)
        for o, m in enumerate(om):
            per_group[self.layout.origin_group(o)] += m
        return per_group, per_site


@dataclass(frozen=True)
class WalkSpec:
    model: Model
    coin_params: CoinParams
    reduced_params: ReducedCoinParams
    mode: Mode
    boundary: Boundary
    initial: StateVector
    bulk_coin: np.ndarray = field(repr=False)
    origin_coin: np.ndarray = field(repr=False)

    @property
    def layout(self) -> Layout:
        return self.initial.layout

    @property
    def k(self) -> int:
        return self.reduced_params.k


def _origin_label_names(groups: tuple[str, ...], unitarized: bool) -> tuple[str, ...]:
    if unitarized:
        return tuple(f"eps_{g}_{ax}" for g in groups for ax in ("H", "V"))
    return tuple(f"eps_{g}" for g in groups)


def make_layout(model: Model, k: int, mode: Mode, groups: tuple[str, ...] | None = None) -> Layout:
    unit = mode is Mode.UNITARIZED
    if model is Model.PLANE:
        return Layout(model, ("0",), (), unit, plane=True)
    if groups is None:
        if model is Model.QUARTER:
            groups = ("0",)
        elif model is Model.JOINED:
            groups = tuple(str(r) for r in range(k))
        elif model is Model.REDUCED_STAR:
            groups = M_LABELS
        elif model is Model.OWN_OTHER:
            groups = ("Own", "Other")
    return Layout(model, groups, _origin_label_names(groups, unit), unit)


def _default_origin_coin(model: Model, mode: Mode, p: CoinParams, r: ReducedCoinParams) -> np.ndarray:
    unit = mode is Mode.UNITARIZED
    if model is Model.PLANE:
        return np.zeros((0, 0), dtype=complex)
    if model in (Model.QUARTER, Model.JOINED):
        k = 1 if model is Model.QUARTER else r.k
        return p.ctilde * grover(2 * k if unit else k)
    if model is Model.REDUCED_STAR:
        if unit:
            nn = own_other_block_normalized(r)
            return p.ctilde * np.kron(np.kron(nn, nn), grover(2))
        return p.ctilde * origin_coin_star(r)
    raise WalkError(f"model {model} needs an explicit origin coin")


def empty_state(layout: Layout, extent: int = 2) -> StateVector:
    if layout.plane:
        extent = max(extent, 1)
        extent += 1 - extent % 2
        return StateVector(
            layout,
            np.zeros((1, extent, extent, 4), dtype=complex),
            np.zeros(0, dtype=complex),
            0,
            extent // 2,
        )
    return StateVector(
        layout,
        np.zeros((layout.n_groups, extent, extent, 4), dtype=complex),
        np.zeros(layout.n_origin, dtype=complex),
    )


def state_from_entries(layout: Layout, entries: dict, t: int = 0) -> StateVector:
    """Build a state from {(group, x, y, label): amplitude}.

    ``label`` is a chirality name/index for lattice sites, or an origin label
    name/index when (x, y) = (0, 0) on a quadrant model.
    """
    reach = max([max(abs(x), abs(y)) for (_, x, y, _) in entries] + [0])
    st = empty_state(layout, 2 * reach + 3 if layout.plane else reach + 2)
    bulk, origin = st.bulk.copy(), st.origin.copy()
    for (g, x, y, label), amp in entries.items():
        if not layout.plane and (x, y) == (0, 0):
            idx = layout.origin_labels.index(label) if isinstance(label, str) else int(label)
            origin[idx] += amp
            continue
        if not layout.plane and (x < 0 or y < 0):
            raise WalkError(f"site ({x}, {y}) is outside the quadrant")
        li = CHIRALITIES.index(label) if isinstance(label, str) else int(label)
        bulk[int(g), x + st.offset, y + st.offset, li] += amp
    return replace(st, bulk=bulk, origin=origin, t=t)


def _initial_from_psi(layout: Layout, psi: np.ndarray) -> StateVector:
    st = empty_state(layout)
    if layout.plane:
        if psi.shape != (4,):
            raise WalkError("plane initial state must be a 4-vector over (L, R, D, U)")
        bulk = st.bulk.copy()
        bulk[0, st.offset, st.offset] = psi
        return replace(st, bulk=bulk)
    if psi.shape != (layout.n_groups,):
        raise WalkError(
            f"initial vector must have one amplitude per origin group ({layout.n_groups}), got {psi.shape}"
        )
    if layout.unitarized:
        origin = np.repeat(psi, 2) / np.sqrt(2)
    else:
        origin = psi.copy()
    return replace(st, origin=origin.astype(complex))


def build_walk(
    model: Model | str,
    coin_params: CoinParams,
    reduced_params: ReducedCoinParams | int | None = None,
    mode: Mode | str = Mode.UNITARIZED,
    initial=None,
    boundary: Boundary | str = Boundary.WALL_PAIR,
    origin_coin: np.ndarray | None = None,
    groups: tuple[str, ...] | None = None,
    require_normalized: bool = True,
) -> WalkSpec:
    """Assemble a walk.

    ``initial`` is either a vector (one amplitude per origin group, spread
    evenly over the H/V labels in unitarized mode; a chirality 4-vector for
    the plane), a dict of basis-element amplitudes, or a StateVector.
    """
    model, mode, boundary = Model(model), Mode(mode), Boundary(boundary)
    if reduced_params is None:
        reduced_params = ReducedCoinParams.grover_default(1)
    elif isinstance(reduced_params, int):
        reduced_params = ReducedCoinParams.grover_default(reduced_params)
    k = reduced_params.k
    if model is Model.JOINED and k < 1:
        raise WalkError("joined walk needs k >= 1")
    layout = make_layout(model, k, mode, groups)
    if origin_coin is None:
        origin_coin = _default_origin_coin(model, mode, coin_params, reduced_params)
    origin_coin = np.asarray(origin_coin, dtype=complex)
    if origin_coin.shape != (layout.n_origin, layout.n_origin):
        raise WalkError(f"origin coin shape {origin_coin.shape} does not match {layout.n_origin} labels")

    if initial is None:
        if layout.plane:
            initial = np.array([1, 0, 0, 0], dtype=complex)
        else:
            initial = np.zeros(layout.n_groups, dtype=complex)
            initial[0] = 1.0
    if isinstance(initial, StateVector):
        state = initial
    elif isinstance(initial, dict):
        state = state_from_entries(layout, initial)
    else:
        state = _initial_from_psi(layout, np.asarray(initial, dtype=complex))
    if require_normalized and abs(state.norm2 - 1.0) > 1e-12:
        raise WalkError(f"initial state must be normalized, got norm^2 = {state.norm2!r}")

    return WalkSpec(
        model=model,
        coin_params=coin_params,
        reduced_params=reduced_params,
        mode=mode,
        boundary=boundary,
        initial=state,
        bulk_coin=plane_coin(coin_params),
        origin_coin=origin_coin,
    )


def _pair(n: np.ndarray) -> np.ndarray:
    return np.where(n % 2 == 1, n + 1, n - 1)


def _shift_plane(c: np.ndarray) -> np.ndarray:
    G, L = c.shape[0], c.shape[1]
    new = np.zeros((G, L + 2, L + 2, 4), dtype=complex)
    new[:, 2:, 1:-1, RIGHT] = c[..., RIGHT]
    new[:, :-2, 1:-1, LEFT] = c[..., LEFT]
    new[:, 1:-1, 2:, UP] = c[..., UP]
    new[:, 1:-1, :-2, DOWN] = c[..., DOWN]
    return new


def _shift_quadrant(c: np.ndarray, origin_c: np.ndarray, layout: Layout, boundary: Boundary):
    G, L = c.shape[0], c.shape[1]
    new = np.zeros((G, L + 1, L + 1, 4), dtype=complex)
    new[:, 1:, :L, RIGHT] = c[..., RIGHT]
    new[:, :L, 1:, UP] = c[..., UP]
    new[:, : L - 1, :L, LEFT] = c[:, 1:, :, LEFT]
    new[:, :L, : L - 1, DOWN] = c[:, :, 1:, DOWN]

    # (1,0) Left and (0,1) Down land on (0,0): they belong to the origin
    in_h = new[:, 0, 0, LEFT].copy()
    in_v = new[:, 0, 0, DOWN].copy()
    new[:, 0, 0, :] = 0

    # components pushed off the quadrant
    left_wall = c[:, 0, 1:, LEFT]  # sources (0, y, Left), y >= 1
    down_wall = c[:, 1:, 0, DOWN]  # sources (x, 0, Down), x >= 1
    idx = np.arange(1, L)
    if boundary is Boundary.WALL_PAIR:
        np.add.at(new[:, 0, :, RIGHT], (slice(None), _pair(idx)), left_wall)
        np.add.at(new[:, :, 0, UP], (slice(None), _pair(idx)), down_wall)
    else:
        new[:, 0, 1:L, RIGHT] += left_wall
        new[:, 1:L, 0, UP] += down_wall

    origin_new = np.zeros_like(origin_c)
    if layout.unitarized:
        new[:, 1, 0, RIGHT] += origin_c[0::2]
        new[:, 0, 1, UP] += origin_c[1::2]
        origin_new[0::2] = in_h
        origin_new[1::2] = in_v
    else:
        new[:, 1, 0, RIGHT] += origin_c
        new[:, 0, 1, UP] += origin_c
        origin_new[:] = in_h + in_v
    return new, origin_new


def step(spec: WalkSpec, s: StateVector) -> StateVector:
    """One application of coin then shift."""
    coined = s.bulk @ spec.bulk_coin.T
    if s.layout.plane:
        return replace(s, bulk=_shift_plane(coined), t=s.t + 1, offset=s.offset + 1)
    origin_c = spec.origin_coin @ s.origin
    bulk, origin = _shift_quadrant(coined, origin_c, s.layout, spec.boundary)
    return replace(s, bulk=bulk, origin=origin, t=s.t + 1)


def trajectory(spec: WalkSpec, t: int, start: StateVector | None = None) -> Iterator[StateVector]:
    """Yield the states at times start.t, ..., start.t + t."""
    if t < 0:
        raise WalkError("t must be >= 0")
    s = spec.initial if start is None else start
    ext = s.extent + t * (2 if s.layout.plane else 1)
    check_budget(s.layout.n_groups * ext * ext * 4, f"a {t}-step {spec.model.value} walk")
    yield s
    for _ in range(t):
        s = step(spec, s)
        yield s


def evolve(spec: WalkSpec, t: int, start: StateVector | None = None) -> StateVector:
    s = None
    for s in trajectory(spec, t, start):
        pass
    return s


def norm_audit(spec: WalkSpec, t: int) -> np.ndarray:
    """Squared norm at times 0..t."""
    return np.array([s.norm2 for s in trajectory(spec, t)])


def distribution(s: StateVector) -> dict[Site, float]:
    """Site probabilities; reduced-walk groups are summed per site.

    For copy-type groups the key carries the copy index; the origin is shared.
    """
    per_group_origin, per_site = s.site_masses()
    out: dict[Site, float] = {}
    if not s.layout.plane:
        out[ORIGIN] = float(per_group_origin.sum())
    copies = s.layout.groups_are_copies
    if not copies:
        per_site = per_site.sum(axis=0, keepdims=True)
    g, i, j = np.nonzero(per_site)
    for gg, ii, jj in zip(g, i, j):
        out[Site(int(gg), int(ii) - s.offset, int(jj) - s.offset)] = float(per_site[gg, ii, jj])
    return out


def parity_violation(s: StateVector) -> float:
    """Largest site probability with x + y of the wrong parity for time t."""
    _, per_site = s.site_masses()
    n = s.extent
    ii, jj = np.indices((n, n)) - s.offset
    wrong = (ii + jj - s.t) % 2 != 0
    worst = float(per_site[:, wrong].max(initial=0.0))
    if s.t % 2 == 1 and s.origin.size:
        worst = max(worst, float(np.max(np.abs(s.origin) ** 2)))
    return worst
