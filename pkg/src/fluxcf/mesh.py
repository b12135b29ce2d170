"""Uniform 1D partitions and uniform 2D Cartesian meshes."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition 0 = x_1 < ... < x_{N+1} = L of (0, L).

    Unknowns live at the interior nodes x_2..x_N; node j carries the
    control volume (x_{j-1/2}, x_{j+1/2}). Arrays are 0-based, so
    ``nodes[0]`` is x_1 and ``interfaces[i]`` sits between ``nodes[i]``
    and ``nodes[i+1]``.
    """

    n_cells: int
    length: float = 1.0

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ConfigurationError(f"n_cells must be an integer >= 2, got {self.n_cells!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"length must be positive, got {self.length!r}")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n_cells + 1) * self.dx
        x[-1] = self.length
        return x

    @cached_property
    def interfaces(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def n_interior(self) -> int:
        return self.n_cells - 1


@dataclass(frozen=True)
class Mesh2D:
    """Uniform Cartesian mesh of (0, Lx) x (0, Ly) with nx * ny cells.

    Cell-centred unknowns. Cell arrays have shape ``(nx, ny)`` and are
    flattened in C order, so cell (j, k) has index ``j * ny + k``.
    Vertical edges (normal e_x) form a ``(nx + 1, ny)`` array, horizontal
    edges (normal e_y) an ``(nx, ny + 1)`` array; the first and last
    entries along the normal direction are boundary edges.
    """

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 2:
                raise ConfigurationError(f"{name} must be an integer >= 2, got {n!r}")
        for name in ("lx", "ly"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ConfigurationError(f"{name} must be positive, got {v!r}")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @cached_property
    def xc(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    @cached_property
    def yc(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    @cached_property
    def xf(self) -> np.ndarray:
        """x-coordinates of the vertical edges (cell faces)."""
        x = np.arange(self.nx + 1) * self.dx
        x[-1] = self.lx
        return x

    @cached_property
    def yf(self) -> np.ndarray:
        y = np.arange(self.ny + 1) * self.dy
        y[-1] = self.ly
        return y

    def centers(self):
        """Meshgrid (X, Y) of cell centres, each of shape (nx, ny)."""
        return np.meshgrid(self.xc, self.yc, indexing="ij")

    def vertical_edge_midpoints(self):
        """(X, Y) of vertical-edge midpoints, shape (nx + 1, ny)."""
        return np.meshgrid(self.xf, self.yc, indexing="ij")

    def horizontal_edge_midpoints(self):
        """(X, Y) of horizontal-edge midpoints, shape (nx, ny + 1)."""
        return np.meshgrid(self.xc, self.yf, indexing="ij")

    def index(self, j, k):
        return j * self.ny + k


def build_mesh_1d(n_cells, length=1.0) -> Mesh1D:
    return Mesh1D(n_cells, float(length))


def build_mesh_2d(nx, ny, lx=1.0, ly=1.0) -> Mesh2D:
    return Mesh2D(nx, ny, float(lx), float(ly))
