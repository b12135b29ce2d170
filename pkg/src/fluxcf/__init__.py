"""Complete flux finite-volume scheme for advection-diffusion coupled to Poisson."""

from .errors import (ConfigurationError, DomainError, FluxCFError, MetricError, SchemePolicyError,
                     SolverError)
from .flux1d import (FluxStencil, FluxVariant, PecletData, peclet_data, select_stencil,
                     stencil_exact_ibp, stencil_pwc, stencil_upwind_minus, stencil_upwind_plus)
from .mesh import Mesh1D, Mesh2D, build_mesh_1d, build_mesh_2d
from .specfun import bernoulli, w_tilde, w_weight

__version__ = "0.1.0"
