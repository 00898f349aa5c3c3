"""Truncated power series with scalar or square-matrix coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SeriesError", "TruncatedSeries"]

DEFAULT_ORDER = 64


class SeriesError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """sum_{t <= order} coeffs[t] z^t.

    ``coeffs`` has shape (order + 1,) for scalar series and
    (order + 1, n, n) for matrix series. Products of two matrix series use
    matrix multiplication; a scalar series scales a matrix series.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim not in (1, 3) or (c.ndim == 3 and c.shape[1] != c.shape[2]):
            raise SeriesError(f"coefficients must be (T+1,) or (T+1, n, n), got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, order: int = DEFAULT_ORDER, dim: int | None = None) -> "TruncatedSeries":
        shape = (order + 1,) if dim is None else (order + 1, dim, dim)
        return cls(np.zeros(shape, dtype=complex))

    @classmethod
    def constant(cls, value, order: int = DEFAULT_ORDER) -> "TruncatedSeries":
        value = np.asarray(value, dtype=complex)
        c = np.zeros((order + 1,) + value.shape, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def monomial(cls, power: int, order: int = DEFAULT_ORDER, value=1.0) -> "TruncatedSeries":
        value = np.asarray(value, dtype=complex)
        c = np.zeros((order + 1,) + value.shape, dtype=complex)
        if power <= order:
            c[power] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def is_matrix(self) -> bool:
        return self.coeffs.ndim == 3

    def __getitem__(self, t: int):
        if not 0 <= t <= self.order:
            raise SeriesError(f"coefficient {t} is outside 0..{self.order}")
        return self.coeffs[t]

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.order != self.order:
                raise SeriesError(f"order mismatch: {self.order} vs {other.order}")
            return other
        return TruncatedSeries.constant(other, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        n = self.order + 1
        if a.ndim == 1 and b.ndim == 1:
            return TruncatedSeries(np.convolve(a, b)[:n])
        out = np.zeros((n,) + (a.shape[1:] if a.ndim == 3 else b.shape[1:]), dtype=complex)
        for i in range(n):
            ai = a[i]
            if not np.any(ai):
                continue
            if a.ndim == 3 and b.ndim == 3:
                out[i:] += ai @ b[: n - i]
            elif a.ndim == 3:
                out[i:] += ai * b[: n - i, None, None]
            else:
                out[i:] += ai * b[: n - i]
        return TruncatedSeries(out)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by z^k (k may be negative if the low coefficients vanish)."""
        c = np.zeros_like(self.coeffs)
        if k >= 0:
            c[k:] = self.coeffs[: self.order + 1 - k]
        else:
            if np.any(self.coeffs[:-k]):
                raise SeriesError("dividing by z would leave a pole")
            c[: self.order + 1 + k] = self.coeffs[-k:]
        return TruncatedSeries(c)

    def inverse(self) -> "TruncatedSeries":
        a = self.coeffs
        n = self.order + 1
        if self.is_matrix:
            try:
                inv0 = np.linalg.inv(a[0])
            except np.linalg.LinAlgError as exc:
                raise SeriesError("constant term is singular") from exc
            out = np.zeros_like(a)
            out[0] = inv0
            for t in range(1, n):
                acc = np.einsum("kij,kjl->il", a[1 : t + 1], out[t - 1 :: -1][:t])
                out[t] = -inv0 @ acc
            return TruncatedSeries(out)
        if a[0] == 0:
            raise SeriesError("constant term is zero")
        out = np.zeros_like(a)
        out[0] = 1 / a[0]
        for t in range(1, n):
            out[t] = -np.dot(a[1 : t + 1], out[t - 1 :: -1][:t]) / a[0]
        return TruncatedSeries(out)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        return TruncatedSeries(self.coeffs / complex(other))

    def sqrt(self) -> "TruncatedSeries":
        """Square root with constant term sqrt(c_0) on the principal branch.

        Newton iteration y <- (y + s / y) / 2, doubling the number of correct
        coefficients each round.
        """
        if self.is_matrix:
            raise SeriesError("sqrt is only defined for scalar series")
        c0 = self.coeffs[0]
        if c0 == 0:
            raise SeriesError("sqrt needs a nonzero constant term")
        unit = TruncatedSeries(self.coeffs / c0)
        y = TruncatedSeries.constant(1.0, self.order)
        good = 1
        while good < self.order + 1:
            good *= 2
            y = (y + unit / y) * 0.5
        y = (y + unit / y) * 0.5
        return y * np.sqrt(c0)

    def __call__(self, z: complex):
        """Horner evaluation of the truncated sum."""
        acc = np.zeros_like(self.coeffs[0])
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def truncate_residual(self, other: "TruncatedSeries") -> float:
        other = self._coerce(other)
        return float(np.max(np.abs(self.coeffs - other.coeffs)))
