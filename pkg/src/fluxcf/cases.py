"""Manufactured-solution test problems.

Case 1: V = 1 - 0.95 sin(pi x), boundary layer at x = 1.
Case 2: steep Poisson source near both ends, c* = sin(pi x).
Case 3: 2D, c* = sin(pi x) sin(pi y), V = -grad(phi) pointing inward
from the upper right corner.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy import pi

from .errors import ConfigurationError


@dataclass(frozen=True)
class CaseDefinition:
    """A manufactured problem.

    Attributes
    ----------
    case_id : int
    dimension : int
    diffusion, mu, amp : float
    exact : callable
        c*(x) or c*(x, y).
    poisson_source : callable
        s_P(x) or s_P(x, y).
    potential_bc : tuple or callable
        (phi(0), phi(1)) in 1D, phi(x, y) on the boundary in 2D.
    source_policy : str
        ``"analytic"``: ``advdiff_source(x[, y])``; ``"discrete-velocity"``:
        ``advdiff_source(x, v_nodes)`` with nodal velocities.
    velocity : callable, optional
        Analytic V(x) or (V1, V2)(x, y) when known.
    """

    case_id: int
    dimension: int
    diffusion: float
    mu: float
    amp: Optional[float]
    exact: Callable
    poisson_source: Callable
    potential_bc: object
    advdiff_source: Callable
    source_policy: str = "analytic"
    velocity: Optional[Callable] = None
    exact_derivatives: Optional[Callable] = None

    def boundary_values(self):
        """c* at x = 0 and x = 1 (1D only)."""
        return float(self.exact(0.0)), float(self.exact(1.0))


def _check_diffusion(diffusion):
    if not np.isfinite(diffusion) or diffusion <= 0:
        raise ConfigurationError(f"diffusion must be positive, got {diffusion!r}")
    return float(diffusion)


def case1(diffusion, mu=1.0) -> CaseDefinition:
    """Boundary-layer problem with c*(x) = 0.2 sin(pi x) + (e^{(x-1)/D} - e^{-1/D}) / (1 - e^{-1/D})."""
    d = _check_diffusion(diffusion)
    tail = np.exp(-1.0 / d)
    denom = -np.expm1(-1.0 / d)

    def layer(x):
        return (np.exp((np.asarray(x, dtype=float) - 1.0) / d) - tail) / denom

    def exact(x):
        return 0.2 * np.sin(pi * np.asarray(x, dtype=float)) + layer(x)

    def velocity(x):
        return 1.0 - 0.95 * np.sin(pi * np.asarray(x, dtype=float))

    def poisson_source(x):
        return -0.95 * pi * np.cos(pi * np.asarray(x, dtype=float))

    def derivatives(x):
        x = np.asarray(x, dtype=float)
        g = np.exp((x - 1.0) / d) / denom
        return (0.2 * pi * np.cos(pi * x) + g / d, -0.2 * pi ** 2 * np.sin(pi * x) + g / d ** 2)

    def source(x):
        # mu (c V)' - D c'', with the layer terms grouped to avoid cancellation
        x = np.asarray(x, dtype=float)
        v = velocity(x)
        g = np.exp((x - 1.0) / d) / denom
        return (mu * (0.2 * pi * np.cos(pi * x) * v + exact(x) * poisson_source(x))
                + d * 0.2 * pi ** 2 * np.sin(pi * x) + (g / d) * (mu * v - 1.0))

    # phi = -x - 0.95 cos(pi x) / pi
    bc = (-0.95 / pi, -1.0 + 0.95 / pi)
    return CaseDefinition(1, 1, d, mu, None, exact, poisson_source, bc, source,
                          "analytic", velocity, derivatives)


def nodal_velocity(phi, dx):
    """-phi' at the nodes: central inside, second-order one-sided at the ends."""
    p = np.asarray(phi, dtype=float)
    v = np.empty_like(p)
    v[1:-1] = -(p[2:] - p[:-2]) / (2 * dx)
    v[0] = -(-3 * p[0] + 4 * p[1] - p[2]) / (2 * dx)
    v[-1] = -(3 * p[-1] - 4 * p[-2] + p[-3]) / (2 * dx)
    return v


def case2(amp, diffusion, mu=1.0) -> CaseDefinition:
    """c* = sin(pi x) with s_P = -A (e^{-1000 x^2} - e^{-1000 (1-x)^2}), phi(0) = -300, phi(1) = 0."""
    d = _check_diffusion(diffusion)
    if not np.isfinite(amp):
        raise ConfigurationError(f"amp must be finite, got {amp!r}")
    a = float(amp)

    def exact(x):
        return np.sin(pi * np.asarray(x, dtype=float))

    def poisson_source(x):
        x = np.asarray(x, dtype=float)
        return -a * (np.exp(-1000.0 * x ** 2) - np.exp(-1000.0 * (1.0 - x) ** 2))

    def derivatives(x):
        x = np.asarray(x, dtype=float)
        return pi * np.cos(pi * x), -pi ** 2 * np.sin(pi * x)

    def source(x, v_nodes):
        # V' = s_P exactly
        x = np.asarray(x, dtype=float)
        return mu * (pi * np.cos(pi * x) * v_nodes + exact(x) * poisson_source(x)) + d * pi ** 2 * exact(x)

    return CaseDefinition(2, 1, d, mu, a, exact, poisson_source, (-300.0, 0.0), source,
                          "discrete-velocity", None, derivatives)


def case3(diffusion, mu=1.0) -> CaseDefinition:
    """2D problem, c* = sin(pi x) sin(pi y), phi = sin(pi x) sin(pi y) + sin(2 pi x) sin(2 pi y) + 9x + 9y."""
    d = _check_diffusion(diffusion)

    def exact(x, y):
        return np.sin(pi * x) * np.sin(pi * y)

    def potential(x, y):
        return np.sin(pi * x) * np.sin(pi * y) + np.sin(2 * pi * x) * np.sin(2 * pi * y) + 9 * x + 9 * y

    def velocity(x, y):
        v1 = -(pi * np.cos(pi * x) * np.sin(pi * y) + 2 * pi * np.cos(2 * pi * x) * np.sin(2 * pi * y) + 9)
        v2 = -(pi * np.sin(pi * x) * np.cos(pi * y) + 2 * pi * np.sin(2 * pi * x) * np.cos(2 * pi * y) + 9)
        return v1, v2

    def poisson_source(x, y):
        return (2 * pi ** 2 * np.sin(pi * x) * np.sin(pi * y)
                + 8 * pi ** 2 * np.sin(2 * pi * x) * np.sin(2 * pi * y))

    def derivatives(x, y):
        cx = pi * np.cos(pi * x) * np.sin(pi * y)
        cy = pi * np.sin(pi * x) * np.cos(pi * y)
        return cx, cy, -2 * pi ** 2 * exact(x, y)

    def source(x, y):
        v1, v2 = velocity(x, y)
        cx, cy, lap = derivatives(x, y)
        return mu * (v1 * cx + v2 * cy + exact(x, y) * poisson_source(x, y)) - d * lap

    return CaseDefinition(3, 2, d, mu, None, exact, poisson_source, potential, source,
                          "analytic", velocity, derivatives)


def get_case(case_id, diffusion, amp=None, mu=1.0) -> CaseDefinition:
    if case_id == 1:
        return case1(diffusion, mu)
    if case_id == 2:
        return case2(10.0 if amp is None else amp, diffusion, mu)
    if case_id == 3:
        return case3(diffusion, mu)
    raise ConfigurationError(f"unknown case {case_id!r}; choose 1, 2 or 3")
