"""State containers shared across modules: peakon superpositions and periodic grid fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PeakonState:
    """u(x, t) = sum_i p_i exp(-|x - q_i|) at time t."""

    p: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float)).copy()
        q = np.atleast_1d(np.asarray(self.q, dtype=float)).copy()
        if p.ndim != 1 or q.ndim != 1 or p.shape != q.shape:
            raise ValueError(f"p and q must be 1-d of equal length, got {p.shape} and {q.shape}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q)) and math.isfinite(self.t)):
            raise ValueError("peakon state entries must be finite")
        p.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @classmethod
    def empty(cls, t: float = 0.0) -> "PeakonState":
        return cls(np.zeros(0), np.zeros(0), t)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridField:
    """Samples of u on the periodic grid x_k = -L + 2L k/n, k = 0..n-1."""

    L: float
    n: int
    values: np.ndarray = field(repr=False)
    t: float = 0.0

    def __post_init__(self):
        n = int(self.n)
        if n < 16 or not _is_pow2(n):
            raise ValueError(f"grid size must be a power of two >= 16, got {self.n}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"half-length L must be positive, got {self.L}")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (n,):
            raise ValueError(f"expected {n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid field contains non-finite values")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return grid_points(self.L, self.n)

    def with_values(self, values, t: float | None = None) -> "GridField":
        return GridField(self.L, self.n, values, self.t if t is None else t)

    @classmethod
    def from_function(cls, func, L: float, n: int, t: float = 0.0) -> "GridField":
        return cls(L, n, func(grid_points(L, n)), t)


def grid_points(L: float, n: int) -> np.ndarray:
    return -L + 2.0 * L * np.arange(n) / n
