"""Discretization of the reservoir storage used by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .system import SystemSpec, volume_to_area, volume_to_level


@dataclass(frozen=True)
class StorageGrid:
    """Ordered storage levels (10^3 m^3), possibly non-uniform."""

    levels: tuple[float, ...]
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.levels, dtype=float)
        if arr.size < 2:
            raise ValueError("storage grid needs at least 2 levels")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("storage grid must be strictly increasing")
        object.__setattr__(self, "_arr", arr)
        object.__setattr__(self, "levels", tuple(float(x) for x in arr))

    @classmethod
    def uniform(cls, spec: SystemSpec, step: float) -> "StorageGrid":
        """Evenly spaced grid from s_dead upward, staying within s_max."""
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(np.floor((spec.s_max - spec.s_dead) / step + 1e-9)) + 1
        levels = spec.s_dead + step * np.arange(n)
        return cls(tuple(levels))

    @classmethod
    def from_levels(cls, levels, spec: SystemSpec | None = None) -> "StorageGrid":
        grid = cls(tuple(float(x) for x in levels))
        if spec is not None:
            if grid._arr[0] < spec.s_dead - 1e-9 or grid._arr[-1] > spec.s_max + 1e-9:
                raise ValueError("storage grid must lie within [s_dead, s_max]")
        return grid

    @property
    def m(self) -> int:
        return self._arr.size

    def as_array(self) -> np.ndarray:
        return self._arr

    def snap(self, storage: float) -> int:
        """Index of the nearest grid level; exact midpoints snap down."""
        return int(np.argmin(np.abs(self._arr - storage)))

    def areas(self, spec: SystemSpec) -> np.ndarray:
        return np.array([volume_to_area(spec, s) for s in self._arr])

    def surface_levels(self, spec: SystemSpec) -> np.ndarray:
        return np.array([volume_to_level(spec, s) for s in self._arr])

    def step_size(self) -> float:
        """Largest gap between adjacent levels (the grid resolution bound)."""
        return float(np.max(np.diff(self._arr)))


__all__ = ["StorageGrid"]
