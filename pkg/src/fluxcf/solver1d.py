"""Assembly and solution of the 1D finite-volume balance.

Row j (interior node x_j) encodes f_{j+1/2} - f_{j-1/2} = dx s_j, with
Dirichlet values at x_1 and x_{N+1}.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SolverError
from .flux1d import FluxVariant, peclet_data, select_stencil
from .mesh import Mesh1D
from .poisson import InterfaceVelocityField1D


@dataclass(frozen=True)
class TridiagonalSystem:
    """sub[i] A[i+1, i], main[i] A[i, i], sup[i] A[i, i+1], rhs b.

    ``row_log_scale`` records the factor e^{-L} each row was multiplied
    by during assembly (zero for unscaled rows).
    """

    sub: np.ndarray
    main: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray
    row_log_scale: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.main)
        if len(self.rhs) != n or len(self.sub) != n - 1 or len(self.sup) != n - 1:
            raise ConfigurationError("inconsistent tridiagonal dimensions")

    @property
    def size(self) -> int:
        return len(self.main)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.main) + np.diag(self.sup, 1) + np.diag(self.sub, -1)

    def matvec(self, x):
        y = self.main * x
        y[:-1] += self.sup * x[1:]
        y[1:] += self.sub * x[:-1]
        return y


@dataclass(frozen=True)
class DiscreteSolution1D:
    mesh: Mesh1D
    values: np.ndarray
    residual: float = 0.0

    @property
    def x(self):
        return self.mesh.nodes


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Thomas elimination without pivoting.

    Raises
    ------
    SolverError
        On a zero pivot or a non-finite result.
    """
    a, b, c, d = (np.asarray(x, dtype=float) for x in
                  (system.sub, system.main, system.sup, system.rhs))
    n = len(b)
    cp = np.empty(max(n - 1, 0))
    dp = np.empty(n)
    piv = b[0]
    if piv == 0.0:
        raise SolverError("zero pivot in row 0")
    if n > 1:
        cp[0] = c[0] / piv
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i - 1] * cp[i - 1]
        if piv == 0.0 or not np.isfinite(piv):
            raise SolverError(f"zero or non-finite pivot in row {i}")
        if i < n - 1:
            cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / piv
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    if not np.all(np.isfinite(x)):
        raise SolverError("non-finite solution")
    return x


def relative_residual(system: TridiagonalSystem, x) -> float:
    r = system.matvec(x) - system.rhs
    scale = (np.max(np.abs(system.main)) + np.max(np.abs(system.sub), initial=0.0)
             + np.max(np.abs(system.sup), initial=0.0)) * np.max(np.abs(x)) + np.max(np.abs(system.rhs))
    return float(np.max(np.abs(r)) / scale) if scale > 0 else 0.0


def interface_stencils(mesh: Mesh1D, vel: InterfaceVelocityField1D, variant, mu, diffusion,
                       limiter_on=True):
    """Péclet data and flux stencils at all N interfaces."""
    if not diffusion > 0:
        raise ConfigurationError(f"diffusion must be positive, got {diffusion!r}")
    v = np.asarray(vel.v, dtype=float)
    dvdx = np.asarray(vel.dvdx, dtype=float)
    if v.shape != (mesh.n_cells,) or dvdx.shape != (mesh.n_cells,):
        raise ConfigurationError(f"velocity arrays must have {mesh.n_cells} interface values")
    p = peclet_data(v, dvdx, mesh.dx, mu, diffusion, limiter_on)
    return p, select_stencil(variant, p, diffusion, mesh.dx)


def assemble_1d(mesh: Mesh1D, vel: InterfaceVelocityField1D, source, bc, variant, mu, diffusion,
                limiter_on=True) -> TridiagonalSystem:
    """Tridiagonal system for the interior nodal values.

    Parameters
    ----------
    source : array_like
        s at all N + 1 nodes; boundary values enter through the source
        weights of the first and last interfaces.
    bc : (float, float)
        c at x = 0 and x = L.

    Each row is divided by e^{L}, L the largest log scale of its two
    interface stencils (or zero), so that it stays within float range.
    """
    variant = FluxVariant.parse(variant)
    s = np.asarray(source, dtype=float)
    if s.shape != (mesh.n_cells + 1,):
        raise ConfigurationError(f"source must have {mesh.n_cells + 1} nodal values")
    _, st = interface_stencils(mesh, vel, variant, mu, diffusion, limiter_on)
    al, ar, bl, br = (np.asarray(c, dtype=float) for c in (st.a_left, st.a_right, st.b_left, st.b_right))
    ls = np.asarray(st.log_scale, dtype=float) * np.ones(mesh.n_cells)

    # interface i sits between nodes i and i+1; row r <-> node j = r + 1
    lw, le = ls[:-1], ls[1:]
    lrow = np.maximum(0.0, np.maximum(lw, le))
    with np.errstate(under="ignore"):
        fw, fe, f0 = np.exp(lw - lrow), np.exp(le - lrow), np.exp(-lrow)
    main = al[1:] * fe - ar[:-1] * fw
    sub_full = -al[:-1] * fw  # coefficient of c_{j-1}
    sup_full = ar[1:] * fe  # coefficient of c_{j+1}
    flux_src_e = bl[1:] * s[1:-1] + br[1:] * s[2:]
    flux_src_w = bl[:-1] * s[:-2] + br[:-1] * s[1:-1]
    rhs = mesh.dx * s[1:-1] * f0 - flux_src_e * fe + flux_src_w * fw
    rhs[0] -= sub_full[0] * bc[0]
    rhs[-1] -= sup_full[-1] * bc[1]
    return TridiagonalSystem(sub=sub_full[1:].copy(), main=main, sup=sup_full[:-1].copy(),
                             rhs=rhs, row_log_scale=lrow)


def solve_transport_1d(mesh: Mesh1D, vel: InterfaceVelocityField1D, source, bc, variant, mu,
                       diffusion, limiter_on=True) -> DiscreteSolution1D:
    """Assemble, solve, and attach the Dirichlet values."""
    system = assemble_1d(mesh, vel, source, bc, variant, mu, diffusion, limiter_on)
    inner = solve_tridiagonal(system)
    res = relative_residual(system, inner)
    values = np.concatenate(([float(bc[0])], inner, [float(bc[1])]))
    return DiscreteSolution1D(mesh, values, res)
