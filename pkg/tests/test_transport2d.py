import numpy as np
import pytest

from fluxcf.errors import ConfigurationError
from fluxcf.flux1d import peclet_data, select_stencil, stencil_pwc, stencil_upwind_plus
from fluxcf.mesh import build_mesh_1d, build_mesh_2d
from fluxcf.poisson import InterfaceVelocityField1D, InterfaceVelocityField2D
from fluxcf.solver1d import solve_transport_1d
from fluxcf.transport2d import (assemble_2d, edge_peclet_2d, edge_stencils_2d, integrated_flux_stencil,
                                solve_transport_2d, total_sources)

MU = 1.0


def _random_velocity(mesh, rng, speed=1.0, grad=1.0):
    def field(shape):
        sign = rng.choice([-1.0, 1.0], size=shape)
        return sign * speed * rng.uniform(0.8, 1.2, size=shape), grad * rng.uniform(-1, 1, size=shape)
    vx, dvx = field((mesh.nx + 1, mesh.ny))
    vy, dvy = field((mesh.nx, mesh.ny + 1))
    return InterfaceVelocityField2D(vx, dvx, vy, dvy)


def _edge_coeffs(v, dv, h, t, D, variant, boundary):
    """Integrated (a_l, a_r, b_l, b_r) for one edge, from scalar 1D stencils."""
    if boundary:
        p = peclet_data(v, dv, 0.5 * h, MU, D, small_pe_threshold=np.inf)
        s = stencil_pwc(p, D, 0.5 * h)
    else:
        p = peclet_data(v, dv, h, MU, D)
        s = select_stencil(variant, p, D, h)
    return tuple(t * float(c) for c in s.unscaled())


def _dense_oracle(mesh, vel, src, g, variant, D):
    """Cell balances built edge by edge with explicit linear forms.

    A linear form is a vector of length n + 1: coefficients of c, then a constant.
    """
    nx, ny, hx, hy = mesh.nx, mesh.ny, mesh.dx, mesh.dy
    n = nx * ny
    area = hx * hy

    def cform(j, k):
        # value of c at cell (j, k), or the boundary datum at the adjacent edge midpoint
        f = np.zeros(n + 1)
        if 0 <= j < nx and 0 <= k < ny:
            f[j * ny + k] = 1.0
        elif j < 0:
            f[n] = g(0.0, (k + 0.5) * hy)
        elif j >= nx:
            f[n] = g(mesh.lx, (k + 0.5) * hy)
        elif k < 0:
            f[n] = g((j + 0.5) * hx, 0.0)
        else:
            f[n] = g((j + 0.5) * hx, mesh.ly)
        return f

    def coeff_x(i, k):  # vertical edge i between cells i-1 and i
        return _edge_coeffs(vel.vx[i, k], vel.dvx[i, k], hx, hy, D, variant, i in (0, nx))

    def coeff_y(j, k):  # horizontal edge k between cells k-1 and k
        return _edge_coeffs(vel.vy[j, k], vel.dvy[j, k], hy, hx, D, variant, k in (0, ny))

    def homog_y(j, k):
        a_l, a_r, _, _ = coeff_y(j, k)
        return a_l * cform(j, k - 1) + a_r * cform(j, k)

    def homog_x(i, k):
        a_l, a_r, _, _ = coeff_x(i, k)
        return a_l * cform(i - 1, k) + a_r * cform(i, k)

    def stx(j, k):  # total source for x-normal fluxes: transverse (y) homogeneous divergence removed
        f = np.zeros(n + 1)
        f[n] = src[j, k]
        return f - (homog_y(j, k + 1) - homog_y(j, k)) / area

    def sty(j, k):
        f = np.zeros(n + 1)
        f[n] = src[j, k]
        return f - (homog_x(j + 1, k) - homog_x(j, k)) / area

    def flux_x(i, k):
        a_l, a_r, b_l, b_r = coeff_x(i, k)
        f = a_l * cform(i - 1, k) + a_r * cform(i, k)
        # half interval: the flux at its midpoint, extrapolated to the edge
        if i == 0:
            return (4 * (f + (b_l + b_r) * stx(0, k)) - flux_x(1, k)) / 3
        if i == nx:
            return (4 * (f + (b_l + b_r) * stx(nx - 1, k)) - flux_x(nx - 1, k)) / 3
        return f + b_l * stx(i - 1, k) + b_r * stx(i, k)

    def flux_y(j, k):
        a_l, a_r, b_l, b_r = coeff_y(j, k)
        f = a_l * cform(j, k - 1) + a_r * cform(j, k)
        if k == 0:
            return (4 * (f + (b_l + b_r) * sty(j, 0)) - flux_y(j, 1)) / 3
        if k == ny:
            return (4 * (f + (b_l + b_r) * sty(j, ny - 1)) - flux_y(j, ny - 1)) / 3
        return f + b_l * sty(j, k - 1) + b_r * sty(j, k)

    a = np.zeros((n, n))
    rhs = np.zeros(n)
    for j in range(nx):
        for k in range(ny):
            bal = flux_x(j + 1, k) - flux_x(j, k) + flux_y(j, k + 1) - flux_y(j, k)
            r = j * ny + k
            a[r] = bal[:n]
            rhs[r] = area * src[j, k] - bal[n]
    return a, rhs


def _g(x, y):
    return 1.0 + 0.5 * np.sin(3 * x) - y ** 2


@pytest.mark.property
@pytest.mark.parametrize("variant", ["pwc", "upwind", "downwind", "auto"])
@pytest.mark.parametrize("D, grad", [(1.0, 1.0), (0.01, 1.0)])
def test_assembly_matches_dense_oracle(variant, D, grad):
    mesh = build_mesh_2d(3, 3)
    rng = np.random.default_rng(11)
    vel = _random_velocity(mesh, rng, grad=grad)
    src = rng.normal(size=(3, 3))
    system = assemble_2d(mesh, vel, src, _g, variant, MU, D)
    assert np.all(system.row_log_scale == 0.0)
    a, rhs = _dense_oracle(mesh, vel, src, _g, variant, D)
    scale = np.max(np.abs(a))
    np.testing.assert_allclose(system.matrix.toarray(), a, rtol=1e-12, atol=1e-13 * scale)
    np.testing.assert_allclose(system.rhs, rhs, rtol=1e-12, atol=1e-13 * np.max(np.abs(rhs)))


def test_adjusted_families_active_in_oracle_setup():
    mesh = build_mesh_2d(3, 3)
    vel = _random_velocity(mesh, np.random.default_rng(11))
    p = edge_peclet_2d(vel, "x", MU, 0.01, mesh)
    assert np.all(p.alpha[1:-1] > 0)
    assert np.all(p.alpha[[0, -1]] == 0)


@pytest.mark.property
def test_nonsquare_assembly_matches_dense_oracle():
    mesh = build_mesh_2d(4, 3, 1.0, 0.6)
    rng = np.random.default_rng(5)
    vel = _random_velocity(mesh, rng)
    src = rng.normal(size=(4, 3))
    system = assemble_2d(mesh, vel, src, _g, "upwind", MU, 0.01)
    a, rhs = _dense_oracle(mesh, vel, src, _g, "upwind", 0.01)
    np.testing.assert_allclose(system.matrix.toarray(), a, rtol=1e-12, atol=1e-13 * np.max(np.abs(a)))
    np.testing.assert_allclose(system.rhs, rhs, rtol=1e-12, atol=1e-13 * np.max(np.abs(rhs)))


def test_boundary_edges_use_half_interval_stencil():
    # constant velocity on (0, h/2): F = D/(h/2) (B(-pe) c_l - B(pe) c_r), pe = mu v (h/2) / D
    mesh = build_mesh_2d(4, 3, 1.0, 0.6)
    D = 0.05
    vel = InterfaceVelocityField2D(np.full((5, 3), 0.7), np.full((5, 3), 2.0),
                                   np.full((4, 4), -0.4), np.full((4, 4), 1.5))
    for d, v, h, t in (("x", 0.7, mesh.dx, mesh.dy), ("y", -0.4, mesh.dy, mesh.dx)):
        st = integrated_flux_stencil(d, edge_peclet_2d(vel, d, MU, D, mesh), "upwind", D, mesh)
        pe = MU * v * 0.5 * h / D
        b = lambda z: z / np.expm1(z)
        hl = st.h_left if d == "x" else st.h_left.T
        hr = st.h_right if d == "x" else st.h_right.T
        for end in (0, -1):
            np.testing.assert_allclose(hl[end], t * D / (0.5 * h) * b(-pe), rtol=1e-13)
            np.testing.assert_allclose(hr[end], -t * D / (0.5 * h) * b(pe), rtol=1e-13)


def test_zero_gradient_interior_is_scaled_1d_pwc():
    mesh = build_mesh_2d(4, 3, 1.0, 0.6)
    D = 0.01
    vel = InterfaceVelocityField2D(np.full((5, 3), 0.9), np.zeros((5, 3)),
                                   np.full((4, 4), -0.8), np.zeros((4, 4)))
    st = edge_stencils_2d(mesh, vel, "upwind", MU, D)["x"]
    ref = stencil_pwc(peclet_data(0.9, 0.0, mesh.dx, MU, D), D, mesh.dx).unscaled()
    for got, want in zip((st.h_left, st.h_right, st.w_left, st.w_right), ref):
        np.testing.assert_allclose(got[1:-1], mesh.dy * float(want), rtol=1e-14)


def test_positive_peclet_uses_plus_family():
    mesh = build_mesh_2d(4, 3)
    D = 0.01
    vel = InterfaceVelocityField2D(np.full((5, 3), 1.0), np.full((5, 3), 3.0),
                                   np.full((4, 4), 1.0), np.zeros((4, 4)))
    st = edge_stencils_2d(mesh, vel, "upwind", MU, D)["x"]
    p = peclet_data(1.0, 3.0, mesh.dx, MU, D)
    assert p.pe > 10 and p.alpha * p.q != 0
    ref = stencil_upwind_plus(p, D, mesh.dx).unscaled()
    for got, want in zip((st.h_left, st.h_right, st.w_left, st.w_right), ref):
        np.testing.assert_allclose(got[1:-1], mesh.dy * float(want), rtol=1e-13)


def test_total_source_brute_force():
    mesh = build_mesh_2d(4, 3)
    rng = np.random.default_rng(2)
    vel = _random_velocity(mesh, rng)
    src = rng.normal(size=(4, 3))
    c = rng.normal(size=(4, 3))
    D = 0.05
    st = edge_stencils_2d(mesh, vel, "upwind", MU, D)
    bc = tuple(rng.normal(size=m) for m in (3, 3, 4, 4))  # west, east, south, north
    ts = total_sources(src, st["y"], mesh, "x", bc).evaluate(c)
    hy = st["y"]
    area = mesh.cell_area
    ref = np.empty((4, 3))
    for j in range(4):
        for k in range(3):
            below = bc[2][j] if k == 0 else c[j, k - 1]
            above = bc[3][j] if k == 2 else c[j, k + 1]
            fs = np.exp(hy.log_scale[j, k]) * (hy.h_left[j, k] * below + hy.h_right[j, k] * c[j, k])
            fn = np.exp(hy.log_scale[j, k + 1]) * (hy.h_left[j, k + 1] * c[j, k] + hy.h_right[j, k + 1] * above)
            ref[j, k] = src[j, k] - (fn - fs) / area
    np.testing.assert_allclose(ts, ref, rtol=1e-13, atol=1e-13)


def _edge_fluxes(mesh, vel, src, bc, variant, D, c):
    """Integrated fluxes on all edges from a cell field c."""
    st = edge_stencils_2d(mesh, vel, variant, MU, D)
    west, east, south, north = bc
    tx = total_sources(src, st["y"], mesh, "x", bc).evaluate(c)
    ty = total_sources(src, st["x"], mesh, "y", bc).evaluate(c)
    sx, sy = st["x"], st["y"]
    cl = np.vstack([west[None, :], c])
    cr = np.vstack([c, east[None, :]])
    tl = np.vstack([np.zeros((1, mesh.ny)), tx])
    tr = np.vstack([tx, np.zeros((1, mesh.ny))])
    fx = np.exp(sx.log_scale) * (sx.h_left * cl + sx.h_right * cr + sx.w_left * tl + sx.w_right * tr)
    cb = np.hstack([south[:, None], c])
    ca = np.hstack([c, north[:, None]])
    tb = np.hstack([np.zeros((mesh.nx, 1)), ty])
    ta = np.hstack([ty, np.zeros((mesh.nx, 1))])
    fy = np.exp(sy.log_scale) * (sy.h_left * cb + sy.h_right * ca + sy.w_left * tb + sy.w_right * ta)
    for f in (fx, fy.T):
        f[0], f[-1] = (4 * f[0] - f[1]) / 3, (4 * f[-1] - f[-2]) / 3
    return fx, fy


@pytest.mark.property
@pytest.mark.parametrize("variant, D", [("pwc", 1.0), ("upwind", 0.01), ("upwind", 1e-3)])
def test_discrete_conservation_2d(variant, D):
    mesh = build_mesh_2d(6, 5)
    rng = np.random.default_rng(8)
    vel = _random_velocity(mesh, rng)
    src = rng.normal(size=(6, 5))
    bc = tuple(rng.normal(size=m) for m in (5, 5, 6, 6))
    sol = solve_transport_2d(mesh, vel, src, bc, variant, MU, D)
    fx, fy = _edge_fluxes(mesh, vel, src, bc, variant, D, sol.values)
    balance = np.diff(fx, axis=0) + np.diff(fy, axis=1)
    scale = np.max(np.abs(fx)) + np.max(np.abs(fy))
    np.testing.assert_allclose(balance, mesh.cell_area * src, rtol=0, atol=1e-9 * scale)
    # interior edges cancel: the boundary fluxes carry the total source
    boundary = fx[-1].sum() - fx[0].sum() + fy[:, -1].sum() - fy[:, 0].sum()
    assert boundary == pytest.approx(mesh.cell_area * src.sum(), abs=1e-8 * scale)


def _x_only_velocity(mesh, v):
    return InterfaceVelocityField2D(np.full((mesh.nx + 1, mesh.ny), v), np.zeros((mesh.nx + 1, mesh.ny)),
                                    np.zeros((mesh.nx, mesh.ny + 1)), np.zeros((mesh.nx, mesh.ny + 1)))


@pytest.mark.property
@pytest.mark.parametrize("v, D, s0", [(1.0, 0.05, 0.0), (-2.0, 0.1, 0.0), (1.0, 0.05, 3.0), (0.5, 1e-3, -2.0)])
def test_dimensional_reduction(v, D, s0):
    """x-only data: every row of the 2D solution equals the 1D solution at the centres."""
    nx, ny = 8, 5
    mesh = build_mesh_2d(nx, ny)
    lam = MU * v / D

    def exact(x):
        # (mu v c - D c')' = s0 with c(0) = 1, c(1) = 2
        p = s0 * x / (MU * v)
        a_, b_ = 1.0, 2.0 - s0 / (MU * v)
        if lam > 0:
            shape = np.exp(lam * (x - 1)) * -np.expm1(-lam * x) / -np.expm1(-lam)
        else:
            shape = np.expm1(lam * x) / np.expm1(lam)
        return a_ + (b_ - a_) * shape + p

    g = lambda x, y: exact(x) * np.ones_like(y)
    sol2 = solve_transport_2d(mesh, _x_only_velocity(mesh, v), np.full((nx, ny), s0), g, "upwind", MU, D)
    # 1D mesh whose nodes are the cell centres
    m1 = build_mesh_1d(nx - 1, (nx - 1) * mesh.dx)
    centres = mesh.xc
    vel1 = InterfaceVelocityField1D(np.full(nx - 1, v), np.zeros(nx - 1))
    sol1 = solve_transport_1d(m1, vel1, np.full(nx, s0), (exact(centres[0]), exact(centres[-1])),
                              "upwind", MU, D)
    scale = np.max(np.abs(sol1.values))
    for k in range(ny):
        np.testing.assert_allclose(sol2.values[:, k], sol1.values, rtol=0, atol=1e-10 * scale)


def test_zero_data_gives_zero_solution():
    mesh = build_mesh_2d(5, 5)
    vel = _random_velocity(mesh, np.random.default_rng(1))
    sol = solve_transport_2d(mesh, vel, np.zeros((5, 5)), None, "upwind", MU, 0.01)
    assert np.all(sol.values == 0.0)


def test_zero_gradient_upwind_equals_pwc():
    mesh = build_mesh_2d(5, 4)
    rng = np.random.default_rng(4)
    vel = _random_velocity(mesh, rng, grad=0.0)
    src = rng.normal(size=(5, 4))
    a = solve_transport_2d(mesh, vel, src, _g, "upwind", MU, 0.01)
    b = solve_transport_2d(mesh, vel, src, _g, "pwc", MU, 0.01)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-13, atol=1e-14)


def test_shape_checks():
    mesh = build_mesh_2d(3, 3)
    vel = _random_velocity(mesh, np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        assemble_2d(mesh, vel, np.zeros((3, 2)), None, "pwc", MU, 1.0)
    bad = InterfaceVelocityField2D(vel.vx[:-1], vel.dvx[:-1], vel.vy, vel.dvy)
    with pytest.raises(ConfigurationError):
        assemble_2d(mesh, bad, np.zeros((3, 3)), None, "pwc", MU, 1.0)
    with pytest.raises(ConfigurationError):
        edge_stencils_2d(mesh, vel, "pwc", MU, 0.0)
