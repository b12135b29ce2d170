"""Central-difference Poisson solves and interface velocity reconstruction.

The potential satisfies -phi'' = s_P (1D) or -Laplace(phi) = s_P (2D) and
the velocity is V = -grad(phi).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, SolverError
from .mesh import Mesh1D, Mesh2D


@dataclass(frozen=True)
class PotentialField1D:
    mesh: Mesh1D
    phi: np.ndarray


@dataclass(frozen=True)
class InterfaceVelocityField1D:
    """Velocity and its derivative at the N interfaces x_{j+1/2}."""

    v: np.ndarray
    dvdx: np.ndarray


@dataclass(frozen=True)
class PotentialField2D:
    """Cell-centre potential plus the Dirichlet data at boundary-edge midpoints.

    ``west``/``east`` have length ny, ``south``/``north`` length nx.
    """

    mesh: Mesh2D
    phi: np.ndarray
    west: np.ndarray
    east: np.ndarray
    south: np.ndarray
    north: np.ndarray


@dataclass(frozen=True)
class InterfaceVelocityField2D:
    """Normal velocity and its normal derivative on every edge.

    ``vx``/``dvx`` live on vertical edges, shape (nx + 1, ny);
    ``vy``/``dvy`` on horizontal edges, shape (nx, ny + 1).
    """

    vx: np.ndarray
    dvx: np.ndarray
    vy: np.ndarray
    dvy: np.ndarray


def _as_nodes(mesh, source, name="source"):
    s = np.asarray(source, dtype=float)
    if s.shape != (mesh.n_cells + 1,):
        raise ConfigurationError(f"{name} must have {mesh.n_cells + 1} nodal values, got shape {s.shape}")
    return s


def solve_poisson_1d(mesh: Mesh1D, source, bc) -> PotentialField1D:
    """Solve -(phi_{j+1} - 2 phi_j + phi_{j-1}) / dx^2 = s_P(x_j) at interior nodes.

    Parameters
    ----------
    mesh : Mesh1D
    source : array_like
        s_P at all N + 1 nodes (boundary entries unused).
    bc : (float, float)
        phi(0) and phi(L).
    """
    from .solver1d import TridiagonalSystem, solve_tridiagonal

    s = _as_nodes(mesh, source)
    n = mesh.n_interior
    dx2 = mesh.dx ** 2
    rhs = s[1:-1] * dx2
    rhs[0] += bc[0]
    rhs[-1] += bc[1]
    system = TridiagonalSystem(
        sub=-np.ones(n - 1), main=2.0 * np.ones(n), sup=-np.ones(n - 1), rhs=rhs)
    inner = solve_tridiagonal(system)
    phi = np.concatenate(([float(bc[0])], inner, [float(bc[1])]))
    return PotentialField1D(mesh, phi)


def reconstruct_velocity_1d(phi: PotentialField1D, source) -> InterfaceVelocityField1D:
    """Interface velocity -(phi_{j+1} - phi_j)/dx and derivative (s_{P,j} + s_{P,j+1})/2."""
    mesh = phi.mesh
    s = _as_nodes(mesh, source)
    p = np.asarray(phi.phi, dtype=float)
    if p.shape != s.shape:
        raise ConfigurationError("potential and source sizes differ")
    v = -(p[1:] - p[:-1]) / mesh.dx
    dvdx = 0.5 * (s[:-1] + s[1:])
    return InterfaceVelocityField1D(v, dvdx)


def _laplacian_2d(mesh: Mesh2D):
    """5-point operator with half-spacing Dirichlet closure, in flux form.

    Returns the sparse matrix (scaled by cell area) and the per-side
    boundary coefficients ax, ay multiplying the boundary values.
    """
    nx, ny = mesh.nx, mesh.ny
    ax = mesh.dy / mesh.dx  # edge length / spacing, vertical edges
    ay = mesh.dx / mesh.dy
    idx = np.arange(nx * ny).reshape(nx, ny)
    diag = np.zeros((nx, ny))
    rows, cols, vals = [], [], []

    def couple(a, b, w):
        rows.extend([a.ravel(), b.ravel()])
        cols.extend([b.ravel(), a.ravel()])
        vals.extend([np.full(a.size, -w), np.full(a.size, -w)])

    couple(idx[:-1, :], idx[1:, :], ax)
    couple(idx[:, :-1], idx[:, 1:], ay)
    diag[:-1, :] += ax
    diag[1:, :] += ax
    diag[:, :-1] += ay
    diag[:, 1:] += ay
    # boundary edges at half spacing
    diag[0, :] += 2 * ax
    diag[-1, :] += 2 * ax
    diag[:, 0] += 2 * ay
    diag[:, -1] += 2 * ay
    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())
    a = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(nx * ny, nx * ny))
    return a, ax, ay


def solve_poisson_2d(mesh: Mesh2D, source, bc) -> PotentialField2D:
    """Solve -Laplace(phi) = s_P with Dirichlet data on the unit-rectangle boundary.

    Parameters
    ----------
    mesh : Mesh2D
    source : array_like, shape (nx, ny)
        s_P at cell centres.
    bc : callable
        ``bc(x, y)`` giving phi on the boundary; sampled at boundary-edge
        midpoints.

    Raises
    ------
    SolverError
        If the relative residual exceeds 1e-10.
    """
    s = np.asarray(source, dtype=float)
    if s.shape != (mesh.nx, mesh.ny):
        raise ConfigurationError(f"source must have shape {(mesh.nx, mesh.ny)}, got {s.shape}")
    west = np.asarray(bc(np.zeros(mesh.ny), mesh.yc), dtype=float) * np.ones(mesh.ny)
    east = np.asarray(bc(np.full(mesh.ny, mesh.lx), mesh.yc), dtype=float) * np.ones(mesh.ny)
    south = np.asarray(bc(mesh.xc, np.zeros(mesh.nx)), dtype=float) * np.ones(mesh.nx)
    north = np.asarray(bc(mesh.xc, np.full(mesh.nx, mesh.ly)), dtype=float) * np.ones(mesh.nx)
    a, ax, ay = _laplacian_2d(mesh)
    rhs = s * mesh.cell_area
    rhs[0, :] += 2 * ax * west
    rhs[-1, :] += 2 * ax * east
    rhs[:, 0] += 2 * ay * south
    rhs[:, -1] += 2 * ay * north
    b = rhs.ravel()
    x = spla.spsolve(a.tocsc(), b)
    res = np.linalg.norm(a @ x - b) / max(np.linalg.norm(b), np.finfo(float).tiny)
    if not np.all(np.isfinite(x)) or res > 1e-10:
        raise SolverError(f"2D Poisson solve failed, relative residual {res:.3g}", residual=res)
    return PotentialField2D(mesh, x.reshape(mesh.nx, mesh.ny), west, east, south, north)


def _normal_derivative(v, h):
    """Derivative along axis 0 of edge values v, boundary edges at index 0 and -1."""
    d = np.zeros_like(v)
    n = v.shape[0] - 1  # cells along the axis
    if n >= 3:
        d[2:n - 1] = (v[3:n] - v[1:n - 2]) / (2 * h)
        d[1] = (v[2] - v[1]) / h
        d[n - 1] = (v[n - 1] - v[n - 2]) / h
    d[0] = d[1]
    d[n] = d[n - 1]
    return d


def _one_sided(g, p0, p1, h):
    """Inward derivative at a boundary edge from g (at 0), p0 (at h/2), p1 (at 3h/2)."""
    return (-8 * g + 9 * p0 - p1) / (3 * h)


def reconstruct_velocity_2d(phi: PotentialField2D, mesh: Mesh2D = None) -> InterfaceVelocityField2D:
    """Edge-normal velocities and their normal derivatives.

    Interior edges use -(phi_nbr - phi_own)/h; boundary edges use the
    one-sided difference through the Dirichlet value and the first two
    cell centres, exact for quadratics. Derivatives are central in the
    interior and one-sided next to the boundary; boundary edges copy
    the adjacent interior edge.
    """
    mesh = phi.mesh if mesh is None else mesh
    p = phi.phi
    dx, dy = mesh.dx, mesh.dy
    vx = np.empty((mesh.nx + 1, mesh.ny))
    vx[1:-1] = -(p[1:] - p[:-1]) / dx
    vx[0] = -_one_sided(phi.west, p[0], p[1], dx)
    vx[-1] = _one_sided(phi.east, p[-1], p[-2], dx)
    vy = np.empty((mesh.nx, mesh.ny + 1))
    vy[:, 1:-1] = -(p[:, 1:] - p[:, :-1]) / dy
    vy[:, 0] = -_one_sided(phi.south, p[:, 0], p[:, 1], dy)
    vy[:, -1] = _one_sided(phi.north, p[:, -1], p[:, -2], dy)
    dvx = _normal_derivative(vx, dx)
    dvy = _normal_derivative(vy.T, dy).T
    return InterfaceVelocityField2D(vx, dvx, vy, dvy)
