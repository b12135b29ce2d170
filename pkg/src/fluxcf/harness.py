"""Error metrics, convergence studies and CSV output."""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .cases import CaseDefinition, nodal_velocity
from .errors import ConfigurationError, FluxCFError, MetricError
from .flux1d import FluxVariant
from .mesh import Mesh1D, Mesh2D, build_mesh_1d, build_mesh_2d
from .poisson import (reconstruct_velocity_1d, reconstruct_velocity_2d, solve_poisson_1d,
                      solve_poisson_2d)
from .solver1d import solve_transport_1d
from .transport2d import solve_transport_2d

log = logging.getLogger(__name__)

DEFAULT_LEVELS_1D = (40, 80, 160, 320, 640, 1280)
DEFAULT_LEVELS_2D = (16, 32, 64, 128, 256)


def l2_relative_error(numeric, exact, weights=None) -> float:
    """sqrt(sum w (exact - numeric)^2) / sqrt(sum w exact^2).

    On a uniform mesh the control-volume weights cancel, so ``weights``
    defaults to ones.

    Raises
    ------
    MetricError
        If the exact samples have zero norm.
    """
    u = np.asarray(numeric, dtype=float)
    e = np.asarray(exact, dtype=float)
    if u.shape != e.shape:
        raise ConfigurationError(f"shape mismatch {u.shape} vs {e.shape}")
    w = np.ones_like(e) if weights is None else np.broadcast_to(weights, e.shape)
    den = np.sum(w * e * e)
    if not den > 0:
        raise MetricError("exact solution has zero norm; relative error undefined")
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sqrt(np.sum(w * (e - u) ** 2) / den))


@dataclass
class LevelResult:
    """One mesh level: the numeric field at unknown locations plus the exact samples."""

    n: int
    error: float
    coords: tuple
    numeric: np.ndarray
    exact: np.ndarray


def solve_level(case: CaseDefinition, variant, n) -> LevelResult:
    """Poisson solve, velocity reconstruction, transport solve and error at one level."""
    variant = FluxVariant.parse(variant)
    if case.dimension == 1:
        mesh = build_mesh_1d(n)
        x = mesh.nodes
        sp = case.poisson_source(x)
        phi = solve_poisson_1d(mesh, sp, case.potential_bc)
        vel = reconstruct_velocity_1d(phi, sp)
        if case.source_policy == "analytic":
            s = case.advdiff_source(x)
        else:
            s = case.advdiff_source(x, nodal_velocity(phi.phi, mesh.dx))
        sol = solve_transport_1d(mesh, vel, s, case.boundary_values(), variant, case.mu, case.diffusion)
        xi = mesh.interior
        numeric = sol.values[1:-1]
        exact = case.exact(xi)
        err = l2_relative_error(numeric, exact, mesh.dx)
        return LevelResult(n, err, (xi,), numeric, exact)
    mesh = build_mesh_2d(n, n)
    xc, yc = mesh.centers()
    sp = case.poisson_source(xc, yc)
    phi = solve_poisson_2d(mesh, sp, case.potential_bc)
    vel = reconstruct_velocity_2d(phi, mesh)
    s = case.advdiff_source(xc, yc)
    sol = solve_transport_2d(mesh, vel, s, case.exact, variant, case.mu, case.diffusion)
    exact = case.exact(xc, yc)
    err = l2_relative_error(sol.values, exact, mesh.cell_area)
    return LevelResult(n, err, (xc.ravel(), yc.ravel()), sol.values.ravel(), exact.ravel())


@dataclass
class ConvergenceReport:
    """Rows of (N, relative L2 error, observed order); order is None on the first row."""

    case_id: int
    variant: str
    diffusion: float
    mu: float
    amp: Optional[float] = None
    rows: List[tuple] = field(default_factory=list)

    @property
    def levels(self):
        return [r[0] for r in self.rows]

    @property
    def errors(self):
        return [r[1] for r in self.rows]

    @property
    def orders(self):
        return [r[2] for r in self.rows]

    def add(self, n, error):
        order = None
        if self.rows:
            prev_n, prev_e, _ = self.rows[-1]
            with np.errstate(all="ignore"):
                order = float(np.log(prev_e / error) / np.log(n / prev_n))
        self.rows.append((n, error, order))


def _check_levels(levels):
    levels = [int(v) for v in levels]
    if not levels:
        raise ConfigurationError("at least one level is required")
    for a, b in zip(levels, levels[1:]):
        if b != 2 * a:
            raise ConfigurationError(f"levels must double: {a} -> {b}")
    return levels


def run_convergence(case: CaseDefinition, variant, levels=None) -> ConvergenceReport:
    """Solve at each level and record errors and observed orders.

    Raises
    ------
    FluxCFError
        From any level, re-raised with the level attached; the study stops.
    """
    variant = FluxVariant.parse(variant)
    if levels is None:
        levels = DEFAULT_LEVELS_1D if case.dimension == 1 else DEFAULT_LEVELS_2D
    levels = _check_levels(levels)
    report = ConvergenceReport(case.case_id, variant.value, case.diffusion, case.mu, case.amp)
    log.info("case=%d variant=%s D=%g mu=%g amp=%s", case.case_id, variant.value,
             case.diffusion, case.mu, case.amp)
    for n in levels:
        try:
            res = solve_level(case, variant, n)
        except FluxCFError as exc:
            raise type(exc)(f"level N={n}: {exc}") from exc
        report.add(n, res.error)
        log.info("N=%d error=%.6e", n, res.error)
    return report


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{v:.10g}"


def _write_rows(destination, header, rows):
    if hasattr(destination, "write"):
        w = csv.writer(destination, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    try:
        with open(destination, "w", newline="") as fh:
            _write_rows(fh, header, rows)
    except OSError as exc:
        raise OSError(f"cannot write {destination}: {exc}") from exc


def emit_csv(report: ConvergenceReport, destination) -> None:
    """Write ``N,l2_error,order`` rows to a path or text stream; the first order field is empty."""
    rows = [[n, _fmt(err), _fmt(order)] for n, err, order in report.rows]
    _write_rows(destination, ["N", "l2_error", "order"], rows)


def emit_solution(result: LevelResult, destination) -> None:
    """Write ``x[,y],c_numeric,c_exact`` at the unknown locations."""
    names = ["x"] if len(result.coords) == 1 else ["x", "y"]
    rows = [[_fmt(float(v)) for v in row] for row in zip(*result.coords, result.numeric, result.exact)]
    _write_rows(destination, names + ["c_numeric", "c_exact"], rows)
