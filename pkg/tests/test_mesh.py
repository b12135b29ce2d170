import numpy as np
import pytest

from fluxcf.errors import ConfigurationError
from fluxcf.mesh import Mesh1D, Mesh2D, build_mesh_1d, build_mesh_2d


def test_mesh1d_layout():
    m = build_mesh_1d(4)
    assert m.dx == 0.25
    np.testing.assert_array_equal(m.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(m.interfaces, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_array_equal(m.interior, [0.25, 0.5, 0.75])
    assert m.n_interior == 3


def test_mesh1d_endpoint_exact():
    m = Mesh1D(3, 0.7)
    assert m.nodes[-1] == 0.7


@pytest.mark.parametrize("n, length", [(1, 1.0), (0, 1.0), (2.5, 1.0), (4, 0.0), (4, -1.0), (4, np.inf)])
def test_mesh1d_rejects(n, length):
    with pytest.raises(ConfigurationError):
        Mesh1D(n, length)


def test_mesh2d_layout():
    m = build_mesh_2d(4, 2, 2.0, 1.0)
    assert (m.dx, m.dy, m.n_cells, m.cell_area) == (0.5, 0.5, 8, 0.25)
    np.testing.assert_allclose(m.xc, [0.25, 0.75, 1.25, 1.75])
    np.testing.assert_allclose(m.yf, [0.0, 0.5, 1.0])
    x, y = m.centers()
    assert x.shape == (4, 2)
    assert m.index(2, 1) == 5
    assert x.ravel()[5] == 1.25 and y.ravel()[5] == 0.75
    xv, yv = m.vertical_edge_midpoints()
    assert xv.shape == (5, 2) and xv[-1, 0] == 2.0
    xh, yh = m.horizontal_edge_midpoints()
    assert yh.shape == (4, 3) and yh[0, -1] == 1.0


@pytest.mark.parametrize("args", [(1, 4), (4, 1), (4, 4, 0.0, 1.0), (4, 4, 1.0, np.nan)])
def test_mesh2d_rejects(args):
    with pytest.raises(ConfigurationError):
        Mesh2D(*args)
