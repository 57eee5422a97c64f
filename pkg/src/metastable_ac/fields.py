"""Uniform grids and nodal fields on ``[a, b]``."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigViolation


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    M: int  # number of cells; there are M + 1 nodes

    def __post_init__(self):
        if self.M < 2:
            raise ConfigViolation(f"grid needs M >= 2 cells, got {self.M}")
        if not self.a < self.b:
            raise ConfigViolation(f"empty domain [{self.a}, {self.b}]")

    @classmethod
    def with_spacing(cls, a, b, h):
        """Smallest uniform grid on ``[a, b]`` with spacing at most ``h``."""
        return cls(float(a), float(b), int(np.ceil((b - a) / h - 1e-9)))

    @property
    def h(self):
        return (self.b - self.a) / self.M

    @property
    def x(self):
        return np.linspace(self.a, self.b, self.M + 1)

    @property
    def weights(self):
        """Trapezoid weights (already multiplied by ``h``)."""
        w = np.full(self.M + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def describe(self):
        return {"a": self.a, "b": self.b, "M": self.M}


@dataclass
class PhaseField:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.M + 1,):
            raise ConfigViolation(
                f"field has {self.values.shape} values for a grid of {self.grid.M + 1} nodes"
            )

    @property
    def x(self):
        return self.grid.x

    def copy(self):
        return PhaseField(self.grid, self.values.copy())
