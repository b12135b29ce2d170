"""Complete flux scheme on uniform Cartesian meshes.

Every edge flux is the 1D stencil of :mod:`fluxcf.flux1d` along the edge
normal, scaled by the edge length. Its source pair is the *total source*
of the two adjacent cells: the cell source minus the divergence of the
homogeneous fluxes across the two transverse edges (the cross flux).
The cross flux is kept implicit, so each balance couples a cell to its
eight neighbours.

Boundary edges reuse the 1D machinery on the half interval between the
cell centre and the edge midpoint, with alpha = 0. Both source values
are the adjacent cell's total source. The half-interval flux holds at
the interval midpoint, a quarter spacing inside; it is moved to the
edge by linear extrapolation through the flux on the cell's opposite
edge, F_edge = (4 F_mid - F_opposite) / 3.

Layout: cell (j, k) has flat index ``j * ny + k``. Vertical edges are
indexed (i, k), i = 0..nx, between cells (i-1, k) and (i, k);
horizontal edges (j, k), k = 0..ny, between cells (j, k-1) and (j, k).
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, SchemePolicyError, SolverError
from .flux1d import FluxVariant, PecletData, peclet_data, select_stencil, stencil_pwc
from .mesh import Mesh2D
from .poisson import InterfaceVelocityField2D


@dataclass(frozen=True)
class EdgeFluxStencil:
    """Integrated flux F = e^L (h_left c_left + h_right c_right + w_left s~_left + w_right s~_right).

    "left" is the lower-index side along the edge normal. On boundary
    edges the boundary side's source weight is zero and the cell side
    carries both source weights; these are the plain half-interval
    stencils, before extrapolation to the edge.
    """

    h_left: np.ndarray
    h_right: np.ndarray
    w_left: np.ndarray
    w_right: np.ndarray
    log_scale: np.ndarray


@dataclass(frozen=True)
class TotalSource:
    """Per-cell affine form s~ = const + sum over parts of coef * c[col] * e^{ls}.

    ``parts`` is a list of (col, coef, ls) arrays of cell shape; col = -1
    marks an unused slot (its value is already folded into ``const``).
    """

    const: np.ndarray
    parts: list

    def evaluate(self, c):
        """Numeric s~ for a cell field ``c`` of shape (nx, ny)."""
        flat = np.asarray(c, dtype=float).ravel()
        out = np.array(self.const, dtype=float)
        for col, coef, ls in self.parts:
            val = np.where(col >= 0, flat[np.maximum(col, 0)], 0.0)
            with np.errstate(over="ignore", invalid="ignore"):
                out = out + np.where(coef != 0.0, coef * np.exp(ls) * val, 0.0)
        return out


@dataclass(frozen=True)
class SparseSystem2D:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    row_log_scale: np.ndarray


@dataclass(frozen=True)
class DiscreteSolution2D:
    mesh: Mesh2D
    values: np.ndarray
    residual: float = 0.0


def _axis_fields(vel: InterfaceVelocityField2D, direction):
    if direction == "x":
        return vel.vx, vel.dvx
    if direction == "y":
        return vel.vy.T, vel.dvy.T
    raise ConfigurationError(f"direction must be 'x' or 'y', got {direction!r}")


def _spacings(mesh: Mesh2D, direction):
    return (mesh.dx, mesh.dy) if direction == "x" else (mesh.dy, mesh.dx)


def _restore(arr, direction):
    return arr if direction == "x" else arr.T


def edge_peclet_2d(vel: InterfaceVelocityField2D, direction, mu, diffusion, mesh: Mesh2D) -> PecletData:
    """Péclet data on all edges normal to ``direction``.

    Interior edges use the full spacing and the 1D limiter policy;
    boundary edges use half the spacing and alpha = 0.
    """
    v, dv = _axis_fields(vel, direction)
    h, _ = _spacings(mesh, direction)
    inner = peclet_data(v[1:-1], dv[1:-1], h, mu, diffusion)
    bnd = peclet_data(v[[0, -1]], dv[[0, -1]], 0.5 * h, mu, diffusion, small_pe_threshold=np.inf)
    fields = []
    for a, b in zip((inner.pe, inner.q, inner.alpha, inner.pe_plus, inner.pe_minus),
                    (bnd.pe, bnd.q, bnd.alpha, bnd.pe_plus, bnd.pe_minus)):
        full = np.concatenate((b[:1], a, b[1:]), axis=0)
        fields.append(_restore(full, direction))
    return PecletData(*fields)


def integrated_flux_stencil(direction, p: PecletData, variant, diffusion, mesh: Mesh2D) -> EdgeFluxStencil:
    """Edge-length-scaled stencils on all edges normal to ``direction``."""
    variant = FluxVariant.parse(variant)
    h, t = _spacings(mesh, direction)
    fields = [np.asarray(f, dtype=float) for f in (p.pe, p.q, p.alpha, p.pe_plus, p.pe_minus)]
    if direction == "y":
        fields = [f.T for f in fields]
    pa = PecletData(*fields)
    inner = select_stencil(variant, pa[1:-1], diffusion, h)
    bnd = stencil_pwc(pa[[0, -1]], diffusion, 0.5 * h)
    if np.any(np.asarray(bnd.log_scale) != 0.0):
        raise SchemePolicyError("boundary edge stencil out of float range")
    shape = fields[0].shape
    hl, hr, wl, wr, ls = (np.zeros(shape) for _ in range(5))
    hl[1:-1], hr[1:-1] = inner.a_left, inner.a_right
    wl[1:-1], wr[1:-1] = inner.b_left, inner.b_right
    ls[1:-1] = inner.log_scale
    hl[[0, -1]], hr[[0, -1]] = bnd.a_left, bnd.a_right
    # both source values on a boundary edge are the cell's own s~
    bsum = np.asarray(bnd.b_left) + np.asarray(bnd.b_right)
    wr[0] = bsum[0]
    wl[-1] = bsum[1]
    out = [t * a for a in (hl, hr, wl, wr)]
    return EdgeFluxStencil(*(_restore(a, direction) for a in out), _restore(ls, direction))


def _boundary_values(bc, mesh: Mesh2D):
    """c at boundary-edge midpoints: west, east (length ny), south, north (length nx)."""
    if bc is None:
        return np.zeros(mesh.ny), np.zeros(mesh.ny), np.zeros(mesh.nx), np.zeros(mesh.nx)
    if callable(bc):
        w = bc(np.zeros(mesh.ny), mesh.yc)
        e = bc(np.full(mesh.ny, mesh.lx), mesh.yc)
        s = bc(mesh.xc, np.zeros(mesh.nx))
        n = bc(mesh.xc, np.full(mesh.nx, mesh.ly))
    else:
        w, e, s, n = bc
    return tuple(np.asarray(a, dtype=float) * np.ones(m) for a, m in
                 zip((w, e, s, n), (mesh.ny, mesh.ny, mesh.nx, mesh.nx)))


def _total_source_axis1(s, idx, trans: EdgeFluxStencil, low_bc, high_bc, area):
    """Total source for the direction normal to axis 0; transverse edges along axis 1.

    Arrays are in a (A, B) layout with transverse edges of shape (A, B + 1).
    """
    hl, hr, ls = trans.h_left, trans.h_right, trans.log_scale
    const = np.array(s, dtype=float)
    # F_north = e^ls (hl c_K + hr c_above), F_south = e^ls (hl c_below + hr c_K)
    n_hl, n_hr, n_ls = hl[:, 1:], hr[:, 1:], ls[:, 1:]
    s_hl, s_hr, s_ls = hl[:, :-1], hr[:, :-1], ls[:, :-1]
    above = np.full(idx.shape, -1)
    above[:, :-1] = idx[:, 1:]
    below = np.full(idx.shape, -1)
    below[:, 1:] = idx[:, :-1]
    n_nbr_coef = -n_hr / area
    s_nbr_coef = s_hl / area
    # known boundary values move into the constant (boundary stencils are unscaled)
    const[:, -1] += n_nbr_coef[:, -1] * high_bc
    const[:, 0] += s_nbr_coef[:, 0] * low_bc
    n_nbr_coef = n_nbr_coef.copy()
    s_nbr_coef = s_nbr_coef.copy()
    n_nbr_coef[:, -1] = 0.0
    s_nbr_coef[:, 0] = 0.0
    parts = [
        (idx, -n_hl / area, n_ls),
        (above, n_nbr_coef, n_ls),
        (below, s_nbr_coef, s_ls),
        (idx, s_hr / area, s_ls),
    ]
    return const, parts


def total_sources(source, trans: EdgeFluxStencil, mesh: Mesh2D, direction, bc=None) -> TotalSource:
    """Total sources s~ for fluxes normal to ``direction``.

    ``trans`` is the integrated stencil on the transverse edges (the
    horizontal edges when ``direction == "x"``); only its homogeneous
    part is used. ``bc`` gives c on the boundary (callable or tuple of
    west, east, south, north arrays).
    """
    s = np.asarray(source, dtype=float)
    if s.shape != (mesh.nx, mesh.ny):
        raise ConfigurationError(f"source must have shape {(mesh.nx, mesh.ny)}")
    west, east, south, north = _boundary_values(bc, mesh)
    idx = np.arange(mesh.n_cells).reshape(mesh.nx, mesh.ny)
    area = mesh.cell_area
    if direction == "x":
        const, parts = _total_source_axis1(s, idx, trans, south, north, area)
        return TotalSource(const, parts)
    if direction == "y":
        tt = EdgeFluxStencil(trans.h_left.T, trans.h_right.T, trans.w_left.T, trans.w_right.T,
                             trans.log_scale.T)
        const, parts = _total_source_axis1(s.T, idx.T, tt, west, east, area)
        return TotalSource(const.T, [(c.T, k.T, l.T) for c, k, l in parts])
    raise ConfigurationError(f"direction must be 'x' or 'y', got {direction!r}")


class _Accumulator:
    """COO entries (row, col, val, log scale); col = -1 marks a known constant."""

    def __init__(self):
        self.rows, self.cols, self.vals, self.lss = [], [], [], []

    def add(self, rows, cols, vals, lss):
        rows, cols, vals, lss = np.broadcast_arrays(rows, cols, vals, lss)
        keep = (rows >= 0) & (vals != 0.0)
        self.rows.append(rows[keep])
        self.cols.append(cols[keep])
        self.vals.append(vals[keep])
        self.lss.append(lss[keep])

    def build(self, n, rhs_base):
        rows = np.concatenate(self.rows).astype(np.int64)
        cols = np.concatenate(self.cols).astype(np.int64)
        vals = np.concatenate(self.vals)
        lss = np.concatenate(self.lss)
        lrow = np.zeros(n)
        np.maximum.at(lrow, rows, lss)
        with np.errstate(under="ignore"):
            scaled = vals * np.exp(lss - lrow[rows])
            rhs = rhs_base * np.exp(-lrow)
        known = cols < 0
        np.add.at(rhs, rows[known], -scaled[known])
        mat = sp.csr_matrix((scaled[~known], (rows[~known], cols[~known])), shape=(n, n))
        return mat, rhs, lrow


def _emit_edges(acc, st: EdgeFluxStencil, tsrc: TotalSource, idx, bc_low, bc_high):
    """Add the edge fluxes normal to axis 0 of the (A, B) layout to the balances.

    Edge i lies between cells i-1 (left) and i (right); edges 0 and A are
    boundary edges with known values ``bc_low``/``bc_high`` (length B).
    """
    a, b = idx.shape
    left = np.full((a + 1, b), -1)
    left[1:] = idx
    right = np.full((a + 1, b), -1)
    right[:-1] = idx
    ls = st.log_scale

    # homogeneous part; a boundary side is a known value
    left_col = np.where(left >= 0, left, -1)
    right_col = np.where(right >= 0, right, -1)
    hl = st.h_left.copy()
    hr = st.h_right.copy()
    hl_known = np.zeros_like(hl)
    hr_known = np.zeros_like(hr)
    hl_known[0] = hl[0] * bc_low
    hr_known[-1] = hr[-1] * bc_high
    hl[0] = 0.0
    hr[-1] = 0.0

    terms = [(left_col, hl, ls), (right_col, hr, ls), (np.full((a + 1, b), -1), hl_known + hr_known, ls)]
    # source part: w_left s~_left + w_right s~_right, each an affine form
    pad_const = np.zeros((a + 2, b))
    pad_const[1:-1] = tsrc.const
    terms.append((np.full((a + 1, b), -1), st.w_left * pad_const[:-1][:a + 1], ls))
    terms.append((np.full((a + 1, b), -1), st.w_right * pad_const[1:][:a + 1], ls))
    for col, coef, pls in tsrc.parts:
        for w, offset in ((st.w_left, 0), (st.w_right, 1)):
            pc = np.full((a + 2, b), -1)
            pc[1:-1] = col
            pk = np.zeros((a + 2, b))
            pk[1:-1] = coef
            pl = np.zeros((a + 2, b))
            pl[1:-1] = pls
            sl = slice(offset, offset + a + 1)
            terms.append((pc[sl], w * pk[sl], ls + pl[sl]))

    terms = _extrapolate_boundary(terms)
    # left cell gains +F (its east/north face), right cell -F
    for col, val, lsv in terms:
        acc.add(left, col, val, lsv)
        acc.add(right, col, -val, lsv)


def _extrapolate_boundary(terms):
    """Boundary rows of each edge term become (4 F_mid - F_opposite) / 3."""
    out = []
    for col, val, lsv in terms:
        val = val.copy()
        ecol = np.full_like(col, -1)
        eval_ = np.zeros_like(val)
        els = np.zeros_like(lsv)
        for end, nbr in ((0, 1), (-1, -2)):
            ecol[end], eval_[end], els[end] = col[nbr], -val[nbr] / 3.0, lsv[nbr]
            val[end] = val[end] * (4.0 / 3.0)
        out.append((col, val, lsv))
        out.append((ecol, eval_, els))
    return out


def _oriented(st: EdgeFluxStencil, tsrc: TotalSource, idx, direction):
    if direction == "x":
        return st, tsrc, idx
    st_t = EdgeFluxStencil(st.h_left.T, st.h_right.T, st.w_left.T, st.w_right.T, st.log_scale.T)
    ts_t = TotalSource(tsrc.const.T, [(c.T, k.T, l.T) for c, k, l in tsrc.parts])
    return st_t, ts_t, idx.T


def edge_stencils_2d(mesh: Mesh2D, vel: InterfaceVelocityField2D, variant, mu, diffusion):
    """Integrated stencils on vertical ("x") and horizontal ("y") edges."""
    if not diffusion > 0:
        raise ConfigurationError(f"diffusion must be positive, got {diffusion!r}")
    out = {}
    for d in ("x", "y"):
        p = edge_peclet_2d(vel, d, mu, diffusion, mesh)
        try:
            out[d] = integrated_flux_stencil(d, p, variant, diffusion, mesh)
        except SchemePolicyError as exc:
            raise SchemePolicyError(f"{d}-normal edges: {exc}") from exc
    return out


def assemble_2d(mesh: Mesh2D, vel: InterfaceVelocityField2D, source, bc, variant, mu, diffusion) -> SparseSystem2D:
    """Sparse system of the cell balances sum_edges F = dx dy s_K.

    Rows are divided by e^{L}, L the largest log scale among their
    entries (or zero).
    """
    s = np.asarray(source, dtype=float)
    if s.shape != (mesh.nx, mesh.ny):
        raise ConfigurationError(f"source must have shape {(mesh.nx, mesh.ny)}")
    _check_velocity(vel, mesh)
    st = edge_stencils_2d(mesh, vel, variant, mu, diffusion)
    west, east, south, north = _boundary_values(bc, mesh)
    tx = total_sources(s, st["y"], mesh, "x", (west, east, south, north))
    ty = total_sources(s, st["x"], mesh, "y", (west, east, south, north))
    idx = np.arange(mesh.n_cells).reshape(mesh.nx, mesh.ny)
    acc = _Accumulator()
    _emit_edges(acc, *_oriented(st["x"], tx, idx, "x"), west, east)
    _emit_edges(acc, *_oriented(st["y"], ty, idx, "y"), south, north)
    mat, rhs, lrow = acc.build(mesh.n_cells, mesh.cell_area * s.ravel())
    return SparseSystem2D(mat, rhs, lrow)


def _check_velocity(vel, mesh):
    shapes = {"vx": (mesh.nx + 1, mesh.ny), "dvx": (mesh.nx + 1, mesh.ny),
              "vy": (mesh.nx, mesh.ny + 1), "dvy": (mesh.nx, mesh.ny + 1)}
    for name, shape in shapes.items():
        if np.shape(getattr(vel, name)) != shape:
            raise ConfigurationError(f"{name} must have shape {shape}")


def solve_sparse(system: SparseSystem2D, tol=1e-10) -> tuple:
    """Direct sparse solve; returns (x, relative residual)."""
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(system.matrix.tocsc(), system.rhs)
        except spla.MatrixRankWarning:
            raise SolverError("2D transport matrix is singular in floating point") from None
    if not np.all(np.isfinite(x)):
        raise SolverError("2D transport solve produced non-finite values")
    bnorm = np.linalg.norm(system.rhs)
    res = np.linalg.norm(system.matrix @ x - system.rhs) / (bnorm if bnorm > 0 else 1.0)
    if res > tol:
        raise SolverError(f"2D transport solve: relative residual {res:.3g} > {tol:g}", residual=res)
    return x, float(res)


def solve_transport_2d(mesh: Mesh2D, vel: InterfaceVelocityField2D, source, bc, variant, mu,
                       diffusion) -> DiscreteSolution2D:
    system = assemble_2d(mesh, vel, source, bc, variant, mu, diffusion)
    x, res = solve_sparse(system)
    return DiscreteSolution2D(mesh, x.reshape(mesh.nx, mesh.ny), res)
