"""Uniform symmetric spatial grids and quadrature helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L, L] with an odd point count so x = 0 is a node."""

    half_width: float
    n_points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("n_points must be an odd integer >= 3")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    @classmethod
    def from_spacing(cls, half_width: float, dx: float) -> "GridSpec":
        """Grid with spacing as close as possible to dx (point count forced odd)."""
        n = int(round(2.0 * half_width / dx)) + 1
        if n % 2 == 0:
            n += 1
        return cls(half_width, n)


def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def simpson_weights(n: int, dx: float) -> np.ndarray:
    """Composite Simpson weights; n must be odd (even number of intervals)."""
    if n % 2 == 0:
        raise ValueError("Simpson weights need an odd number of points")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (dx / 3.0)


def inner(f: np.ndarray, g: np.ndarray, dx: float) -> float:
    """L2 inner product by the rectangle rule (exact enough for decayed tails)."""
    return float(dx * np.dot(f, g))


def is_even(f: np.ndarray, tol: float = 1e-8) -> bool:
    return bool(np.max(np.abs(f - f[::-1])) < tol)
