"""Coin and weight matrices for walks on joined quarter planes.

Chirality order throughout the package is (Left, Right, Down, Up), so the
plane coin is the Kronecker square of the 2x2 base coin ``[[a, b], [c, d]]``.
The reduced Own/Other index order is (Own_L, Own_D, Other_R, Other_U).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CoinError",
    "CoinParams",
    "ReducedCoinParams",
    "UnitarityReport",
    "WeightSet",
    "plane_coin",
    "grover",
    "reduced_coin",
    "origin_coin_star",
    "own_other_block",
    "own_other_block_normalized",
    "direction_weights",
    "is_unitary",
    "random_coin",
]

LEFT, RIGHT, DOWN, UP = range(4)
CHIRALITIES = ("Left", "Right", "Down", "Up")
M_LABELS = ("Own_L", "Own_D", "Other_R", "Other_U")

UNITARY_TOL = 1e-12


class CoinError(ValueError):
    """Raised when coin parameters violate their invariants."""


def _residual(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True)
class CoinParams:
    a: complex
    b: complex
    c: complex
    d: complex
    ctilde: complex = 1.0
    det_delta: complex = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "ctilde"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        base = self.base
        if _residual(base) > UNITARY_TOL:
            raise CoinError(f"base coin is not unitary (residual {_residual(base):.3e})")
        if abs(self.a * self.b * self.c * self.d) < UNITARY_TOL:
            raise CoinError("coin requires abcd != 0")
        if abs(abs(self.ctilde) - 1.0) > UNITARY_TOL:
            raise CoinError(f"|ctilde| must be 1, got {abs(self.ctilde)!r}")
        object.__setattr__(self, "det_delta", self.a * self.d - self.b * self.c)

    @property
    def base(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @classmethod
    def hadamard(cls, ctilde: complex = 1.0) -> "CoinParams":
        s = 1 / np.sqrt(2)
        return cls(s, s, s, -s, ctilde)

    @classmethod
    def from_matrix(cls, m, ctilde: complex = 1.0) -> "CoinParams":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], ctilde)

    def with_ctilde(self, ctilde: complex) -> "CoinParams":
        return CoinParams(self.a, self.b, self.c, self.d, ctilde)


def random_coin(rng: np.random.Generator, random_phase: bool = True) -> CoinParams:
    """Haar-random 2x2 unitary (all entries nonzero almost surely)."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    ctilde = np.exp(1j * rng.uniform(0, 2 * np.pi)) if random_phase else 1.0
    return CoinParams.from_matrix(q, ctilde)


@dataclass(frozen=True)
class ReducedCoinParams:
    """Parameters (a_k, b_k) of the reduced Grover coin on k joined planes.

    The default pair is read off the Grover matrix itself: its diagonal entry
    2/k - 1 and its off-diagonal entry 2/k.
    """

    k: int
    a_k: float
    b_k: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise CoinError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "a_k", float(self.a_k))
        object.__setattr__(self, "b_k", float(self.b_k))
        norm = self.a_k**2 + (self.k - 1) * self.b_k**2
        if abs(norm - 1.0) > UNITARY_TOL:
            raise CoinError(f"a_k^2 + (k-1) b_k^2 = {norm!r}, expected 1")

    @classmethod
    def grover_default(cls, k: int) -> "ReducedCoinParams":
        if k < 1:
            raise CoinError(f"k must be >= 1, got {k}")
        return cls(k, (2.0 - k) / k, 2.0 / k)


@dataclass(frozen=True)
class UnitarityReport:
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol

    def __bool__(self) -> bool:
        return self.passed


def is_unitary(m, tol: float = UNITARY_TOL) -> UnitarityReport:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return UnitarityReport(_residual(m), tol)


def plane_coin(p: CoinParams) -> np.ndarray:
    a, b, c, d = p.a, p.b, p.c, p.d
    return np.array(
        [
            [a * a, a * b, a * b, b * b],
            [a * c, a * d, b * c, b * d],
            [a * c, b * c, a * d, b * d],
            [c * c, c * d, c * d, d * d],
        ],
        dtype=complex,
    )


def grover(k: int) -> np.ndarray:
    if int(k) != k or k < 1:
        raise CoinError(f"Grover dimension must be a positive integer, got {k!r}")
    k = int(k)
    return np.full((k, k), 2.0 / k, dtype=complex) - np.eye(k)


def reduced_coin(r: ReducedCoinParams) -> np.ndarray:
    """Reduced coin C_k used away from the origin after the tree reduction."""
    k, a, b = r.k, r.a_k, r.b_k
    s = np.sqrt(k - 1)
    al, be, ga = (k - 1) * b * b, a * b * s, a * a
    return np.array(
        [
            [al, be, be, ga],
            [-be, al, -ga, be],
            [-be, -ga, al, be],
            [ga, -be, -be, al],
        ],
        dtype=complex,
    )


def own_other_block(r: ReducedCoinParams) -> np.ndarray:
    """Grover restricted to (own, sum-of-others) coordinates, unnormalized.

    Column j is the image of basis vector j: own -> (a_k, b_k),
    sum-of-others -> ((k-1) b_k, -a_k).
    """
    k, a, b = r.k, r.a_k, r.b_k
    return np.array([[a, (k - 1) * b], [b, -a]], dtype=complex)


def own_other_block_normalized(r: ReducedCoinParams) -> np.ndarray:
    """Same block in the orthonormal (own, uniform-others) basis; unitary."""
    s = np.sqrt(r.k - 1)
    return np.array([[r.a_k, s * r.b_k], [s * r.b_k, -r.a_k]], dtype=complex)


def origin_coin_star(r: ReducedCoinParams) -> np.ndarray:
    """Origin coin of the reduced 16-state walk, entry by entry as printed.

    Equal to ``kron(own_other_block(r), own_other_block(r))``; unitary only
    when k = 2 or b_k = 0.
    """
    k, a, b = r.k, r.a_k, r.b_k
    return np.array(
        [
            [a * a, a * b * (k - 1), a * b * (k - 1), b * b * (k - 1) ** 2],
            [a * b, -a * a, b * b * (k - 1), -a * b * (k - 1)],
            [a * b, (k - 1) * b * b, -a * a, -a * b * (k - 1)],
            [b * b, -a * b, -a * b, a * a],
        ],
        dtype=complex,
    )


def _unit(i: int, j: int, n: int = 4) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


@dataclass(frozen=True)
class WeightSet:
    """Direction weights of the reduced walk; all 16x16 (m index (x) chirality).

    ``p_right_tilde`` and ``q_up_tilde`` are the origin departure weights,
    embedded in 16 dimensions: the origin amplitude lives in the Left slot and
    leaves as Right (towards (1,0)) or Up (towards (0,1)).
    """

    p_left: np.ndarray
    p_right: np.ndarray
    q_down: np.ndarray
    q_up: np.ndarray
    q_tilde: np.ndarray
    p_right_prime: np.ndarray
    q_up_prime: np.ndarray
    p_right_tilde: np.ndarray
    q_up_tilde: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def direction_weights(p: CoinParams, r: ReducedCoinParams) -> WeightSet:
    cz = plane_coin(p)
    eye4 = np.eye(4, dtype=complex)

    def row_only(row_idx: int, row: np.ndarray) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        m[row_idx] = row
        return np.kron(eye4, m)

    a, b, c, d = p.a, p.b, p.c, p.d
    n2 = np.kron(own_other_block(r), own_other_block(r))
    return WeightSet(
        p_left=row_only(LEFT, cz[LEFT]),
        p_right=row_only(RIGHT, cz[RIGHT]),
        q_down=row_only(DOWN, cz[DOWN]),
        q_up=row_only(UP, cz[UP]),
        q_tilde=np.kron(origin_coin_star(r), p.ctilde**2 * _unit(UP, LEFT)),
        # printed with the Right-row entries placed in row 3
        p_right_prime=row_only(DOWN, np.array([a * c, a * d, b * c, b * d])),
        # printed last entry is cd, not d^2
        q_up_prime=row_only(LEFT, np.array([c * c, c * d, c * d, c * d])),
        p_right_tilde=np.kron(n2, p.ctilde * _unit(RIGHT, LEFT)),
        q_up_tilde=np.kron(n2, p.ctilde * _unit(UP, LEFT)),
    )
