"""Walk on the product of two homogeneous trees, and its projection to P_k.

A vertex of one tree factor is a reduced word over generators 0..k-1 (each
generator is an involution), stored as a tuple with the most recently applied
letter first. The coin acts on the pair (sigma_x, sigma_y) with G_k (x) G_k
(scaled by ctilde at the root pair) and the shift prepends sigma_x to the
x-word and sigma_y to the y-word.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .coins import CoinParams, ReducedCoinParams, grover, reduced_coin
from .lattice import ORIGIN, Mode, ResourceLimit, Site, build_walk, distribution, trajectory

__all__ = [
    "TreeError",
    "TreeState",
    "reduce_word",
    "is_reduced",
    "tree_initial",
    "tree_step",
    "tree_trajectory",
    "project_to_joined",
    "branch_of",
    "tree_projection_check",
    "ProjectionFinding",
]

MAX_TREE_STATES = 4_000_000

Word = tuple[int, ...]


class TreeError(ValueError):
    pass


def is_reduced(w: Word) -> bool:
    return all(w[i] != w[i + 1] for i in range(len(w) - 1))


def reduce_word(letters) -> Word:
    """Free reduction using sigma^2 = e (letters listed outermost first)."""
    out: list[int] = []
    for s in reversed(tuple(letters)):
        if out and out[-1] == s:
            out.pop()
        else:
            out.append(s)
    return tuple(reversed(out))


def _prepend(s: int, w: Word) -> Word:
    if w and w[0] == s:
        return w[1:]
    return (s,) + w


@dataclass(frozen=True)
class TreeState:
    """Amplitudes keyed by (x-word, y-word); values are k x k coin arrays."""

    k: int
    ctilde: complex
    sites: dict
    t: int = 0

    @property
    def norm2(self) -> float:
        return float(sum(np.sum(np.abs(v) ** 2) for v in self.sites.values()))

    def items(self) -> Iterator[tuple[tuple[Word, Word, int, int], complex]]:
        for (wx, wy), coin in sorted(self.sites.items()):
            for sx in range(self.k):
                for sy in range(self.k):
                    if coin[sx, sy] != 0:
                        yield (wx, wy, sx, sy), complex(coin[sx, sy])


def _guard(k: int, t: int):
    words = sum(k * (k - 1) ** (n - 1) if n else 1 for n in range(t + 1))
    est = words * words * k * k
    if est > MAX_TREE_STATES:
        raise ResourceLimit(
            f"tree walk with k={k}, t={t} needs about {est} amplitudes (limit {MAX_TREE_STATES})"
        )


def tree_initial(k: int, coin_state, ctilde: complex = 1.0) -> TreeState:
    """Walker at the root pair (e, e) with the given k x k coin amplitudes."""
    if k < 2:
        raise TreeError("tree walk needs k >= 2")
    coin = np.asarray(coin_state, dtype=complex)
    if coin.shape == (k,):
        coin = np.outer(coin, coin)
    if coin.shape != (k, k):
        raise TreeError(f"coin state must be k or k x k, got {coin.shape}")
    return TreeState(k, complex(ctilde), {((), ()): coin})


def tree_step(state: TreeState) -> TreeState:
    k = state.k
    g = grover(k)
    new: dict = {}
    for (wx, wy), coin in state.sites.items():
        if not (is_reduced(wx) and is_reduced(wy)):
            raise TreeError(f"non-reduced word at {(wx, wy)}")
        c = g @ coin @ g.T
        if not wx and not wy:
            c = state.ctilde * c
        for sx in range(k):
            nx = _prepend(sx, wx)
            for sy in range(k):
                amp = c[sx, sy]
                if amp == 0:
                    continue
                key = (nx, _prepend(sy, wy))
                slot = new.get(key)
                if slot is None:
                    slot = new[key] = np.zeros((k, k), dtype=complex)
                slot[sx, sy] += amp
    return TreeState(k, state.ctilde, new, state.t + 1)


def tree_trajectory(state: TreeState, t: int) -> Iterator[TreeState]:
    _guard(state.k, state.t + t)
    yield state
    for _ in range(t):
        state = tree_step(state)
        yield state


def branch_of(wx: Word, wy: Word, letter: str = "inner") -> int | None:
    """Quarter-plane copy assigned to a vertex pair.

    ``inner`` uses the letter next to the root (the subtree the word lies
    in); ``outer`` uses the most recently applied letter. The x-word decides
    unless it is empty.
    """
    w = wx if wx else wy
    if not w:
        return None
    return w[-1] if letter == "inner" else w[0]


def project_to_joined(state: TreeState, letter: str = "inner") -> dict[Site, float]:
    out: dict[Site, float] = {}
    for (wx, wy), coin in state.sites.items():
        r = branch_of(wx, wy, letter)
        site = ORIGIN if r is None else Site(r, len(wx), len(wy))
        out[site] = out.get(site, 0.0) + float(np.sum(np.abs(coin) ** 2))
    return out


@dataclass(frozen=True)
class ProjectionFinding:
    k: int
    reading: str
    mode: str
    max_deviation: float
    worst_t: int
    tree_mass: tuple[float, ...]
    joined_mass: tuple[float, ...]

    def matches(self, tol: float) -> bool:
        return self.max_deviation < tol


def _max_dev(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max((abs(a.get(s, 0.0) - b.get(s, 0.0)) for s in keys), default=0.0)


def tree_projection_check(
    k: int,
    tmax: int,
    coin: CoinParams | None = None,
    psi=None,
    letter: str = "inner",
    modes=(Mode.LITERAL,),
) -> list[ProjectionFinding]:
    """Compare the projected tree distribution with walks on P_k.

    Two readings of the reduced walk are tried: the plane coin away from the
    origin, and the reduced coin C_k away from the origin. Both use ctilde G_k
    at the origin (ctilde G_2k in unitarized mode).
    """
    coin = coin or CoinParams.hadamard()
    psi = np.full(k, 1 / np.sqrt(k), dtype=complex) if psi is None else np.asarray(psi, dtype=complex)
    tree = list(tree_trajectory(tree_initial(k, psi, coin.ctilde), tmax))
    tree_d = [project_to_joined(s, letter) for s in tree]
    rp = ReducedCoinParams.grover_default(k)
    findings = []
    for mode in modes:
        for reading in ("plane-coin", "reduced-coin"):
            spec = build_walk("joined", coin, rp, mode, psi)
            if reading == "reduced-coin":
                spec = replace(spec, bulk_coin=reduced_coin(rp))
            joined_d = [distribution(s) for s in trajectory(spec, tmax)]
            devs = [_max_dev(a, b) for a, b in zip(tree_d, joined_d)]
            worst = int(np.argmax(devs))
            findings.append(
                ProjectionFinding(
                    k=k,
                    reading=reading,
                    mode=Mode(mode).value,
                    max_deviation=float(devs[worst]),
                    worst_t=worst,
                    tree_mass=tuple(sum(d.values()) for d in tree_d),
                    joined_mass=tuple(sum(d.values()) for d in joined_d),
                )
            )
    return findings
