"""Uniform spatial grid and sampled field states."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Symmetric grid on [-L, L] with an odd point count so x = 0 is a node."""

    half_extent: float
    n_points: int

    def __post_init__(self) -> None:
        if self.half_extent <= 0:
            raise ValueError("half_extent must be positive")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("n_points must be odd and >= 3")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / (self.n_points - 1)

    @property
    def center_index(self) -> int:
        return (self.n_points - 1) // 2

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.n_points)


@dataclass
class FieldState:
    """Phase point (psi, pi) sampled on a grid at a given time."""

    grid: Grid
    psi: np.ndarray
    pi: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.psi = np.asarray(self.psi, dtype=complex)
        self.pi = np.asarray(self.pi, dtype=complex)
        n = self.grid.n_points
        if self.psi.shape != (n,) or self.pi.shape != (n,):
            raise ValueError("field arrays must match the grid point count")

    def require_finite(self) -> None:
        if not (np.all(np.isfinite(self.psi)) and np.all(np.isfinite(self.pi))):
            raise ValueError("non-finite field data")

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.psi.copy(), self.pi.copy(), self.time)

    @property
    def center_value(self) -> complex:
        return complex(self.psi[self.grid.center_index])


def zero_state(grid: Grid, time: float = 0.0) -> FieldState:
    z = np.zeros(grid.n_points, dtype=complex)
    return FieldState(grid, z, z.copy(), time)
