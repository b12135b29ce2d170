"""Interface flux stencils of the complete flux scheme in one dimension.

Each stencil expresses the flux at x_{j+1/2} as

    f = a_left c_j + a_right c_{j+1} + b_left s_j + b_right s_{j+1}.

All functions are vectorised: a :class:`PecletData` may hold one value
per interface, in which case every stencil entry is an array.

Coefficients can exceed the float range on the downwind-adjusted arm at
tiny diffusion (factors like e^{-alpha q} with alpha q ~ -1e5). Such
stencils carry a ``log_scale`` L: the true coefficients are the stored
ones times e^L. L is zero unless some coefficient's log-magnitude
exceeds :data:`LOG_SCALE_LIMIT`.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, SchemePolicyError
from .specfun import W_TILDE_GUARD, bernoulli, log_bernoulli, w_tilde_split

#: |pe| below which alpha is forced to zero.
SMALL_PE_THRESHOLD = 10.0

#: Log-magnitude above which a stencil is stored in scaled form.
LOG_SCALE_LIMIT = 600.0

#: Smallest admissible |denominator| in the integration-by-parts stencils.
IBP_DENOMINATOR_GUARD = 1e-12


class FluxVariant(Enum):
    PWC = "pwc"
    UPWIND = "upwind"
    DOWNWIND = "downwind"
    AUTO = "auto"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            choices = ", ".join(v.value for v in cls)
            raise ConfigurationError(f"unknown flux variant {name!r}; choose from {choices}") from None


@dataclass(frozen=True)
class PecletData:
    """Péclet number, velocity-gradient correction and limiter per interface.

    Attributes
    ----------
    pe : float or ndarray
        (mu / D) v dx.
    q : float or ndarray
        (mu / D) dv/dx dx^2 / 2.
    alpha : float or ndarray
        Slope limiter in [0, 1].
    pe_plus, pe_minus : float or ndarray
        pe -/+ alpha q.
    """

    pe: object
    q: object
    alpha: object
    pe_plus: object
    pe_minus: object

    @property
    def m(self):
        """The applied correction alpha * q."""
        return self.alpha * self.q

    def __getitem__(self, idx):
        return PecletData(*(np.asarray(f)[idx] for f in
                            (self.pe, self.q, self.alpha, self.pe_plus, self.pe_minus)))


@dataclass(frozen=True)
class FluxStencil:
    """Linear-form flux coefficients, possibly stored with a log scale.

    The represented coefficients are ``exp(log_scale) * a_left`` and so on.
    """

    a_left: object
    a_right: object
    b_left: object
    b_right: object
    log_scale: object = 0.0

    def unscaled(self):
        """Return (a_left, a_right, b_left, b_right) with the scale applied."""
        with np.errstate(over="ignore", invalid="ignore"):
            f = np.exp(self.log_scale)
            return tuple(f * np.asarray(c) for c in
                         (self.a_left, self.a_right, self.b_left, self.b_right))

    def flux(self, c_left, c_right, s_left=0.0, s_right=0.0):
        """Evaluate the flux for given nodal values and sources."""
        with np.errstate(over="ignore", invalid="ignore"):
            inner = (self.a_left * c_left + self.a_right * c_right
                     + self.b_left * s_left + self.b_right * s_right)
            return inner * np.exp(self.log_scale)

    def __getitem__(self, idx):
        return FluxStencil(*(np.broadcast_to(f, np.shape(self.a_left))[idx] for f in
                             (self.a_left, self.a_right, self.b_left, self.b_right, self.log_scale)))


def _scalar_or_array(x, scalar):
    return float(x) if scalar else x


def peclet_data(v, dvdx, dx, mu, diffusion, limiter_on=True,
                small_pe_threshold=SMALL_PE_THRESHOLD) -> PecletData:
    """Péclet data at one or more interfaces.

    alpha is zero where |pe| < ``small_pe_threshold``. Elsewhere it is
    min(1, |pe/q|) with the limiter on and 1 otherwise (also 1 when q = 0).
    """
    if not diffusion > 0:
        raise ConfigurationError(f"diffusion must be positive, got {diffusion!r}")
    if not dx > 0:
        raise ConfigurationError(f"dx must be positive, got {dx!r}")
    scalar = np.ndim(v) == 0 and np.ndim(dvdx) == 0
    v, dvdx = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(dvdx, dtype=float))
    k = mu / diffusion
    pe = k * v * dx
    q = k * dvdx * dx * dx / 2.0
    alpha = np.ones_like(pe)
    if limiter_on:
        nz = q != 0.0
        with np.errstate(over="ignore"):
            alpha[nz] = np.minimum(1.0, np.abs(pe[nz] / q[nz]))
    alpha[np.abs(pe) < small_pe_threshold] = 0.0
    m = alpha * q
    pe_plus, pe_minus = pe - m, pe + m
    # when the limiter binds, alpha q can miss pe by one ulp; keep the sign
    if limiter_on:
        pe_plus = np.where(pe > 0, np.maximum(pe_plus, 0.0), pe_plus)
        pe_minus = np.where(pe < 0, np.minimum(pe_minus, 0.0), pe_minus)
    vals = (pe, q, alpha, pe_plus, pe_minus)
    return PecletData(*(_scalar_or_array(a, scalar) for a in vals))


def _combine(direct, terms):
    """Pick direct values, or rescaled sums where magnitudes overflow.

    ``direct`` holds the four coefficients computed plainly. ``terms``
    holds, per coefficient, a list of (sign, log|term|) whose signed
    exponentials sum to that coefficient.
    """
    logs = [np.where(s != 0.0, lg, -np.inf) for t in terms for s, lg in t]
    maxlog = np.maximum.reduce(np.broadcast_arrays(*logs))
    scaled = maxlog > LOG_SCALE_LIMIT
    if not np.any(scaled):
        return direct, np.zeros_like(maxlog)
    ls = np.where(scaled, maxlog, 0.0)
    out = []
    with np.errstate(under="ignore"):
        for d, t in zip(direct, terms):
            acc = sum(np.where(s != 0.0, s * np.exp(np.where(s != 0.0, lg, 0.0) - ls), 0.0)
                      for s, lg in t)
            out.append(np.where(scaled, acc, d))
    return out, ls


def _wt_parts(z, q):
    """W~(z, q) plainly and as (sign, log) terms."""
    w, sgn, le = w_tilde_split(z, q)
    with np.errstate(over="ignore", divide="ignore"):
        direct = w + np.where(sgn != 0.0, sgn * np.exp(le), 0.0)
        terms = [(np.ones_like(w), np.log(w)), (sgn, le)]
    return direct, terms


def _fitted(z, m_left, m_right, q_left, q_right, diffusion, dx):
    """Shared body of all asymptotic stencils.

    a_left  =  (D/dx) e^{-m_left}  B(-z),  b_left  =  dx W~(-z, q_left)
    a_right = -(D/dx) e^{-m_right} B(z),   b_right = -dx W~(z, q_right)
    """
    shape = np.broadcast(z, m_left, m_right).shape
    z = np.broadcast_to(np.asarray(z, dtype=float), shape)
    k = diffusion / dx
    lk, ldx = np.log(k), np.log(dx)

    def a_coef(arg, m):
        lb = log_bernoulli(arg)
        lb = np.broadcast_to(lb, shape)
        m = np.broadcast_to(np.asarray(m, dtype=float), shape)
        with np.errstate(over="ignore", invalid="ignore"):
            d = np.where(np.abs(m) < 700.0, np.exp(m * -1.0) * bernoulli(arg), np.exp(lb - m))
        return k * d, lk + lb - m

    al, al_log = a_coef(-z, m_left)
    ar, ar_log = a_coef(z, m_right)
    bl, bl_terms = _wt_parts(-z, np.broadcast_to(q_left, shape))
    br, br_terms = _wt_parts(z, np.broadcast_to(q_right, shape))
    one = np.ones(shape)
    direct = [al, -ar, dx * bl, -dx * br]
    terms = [[(one, al_log)], [(-one, ar_log)],
             [(s, lg + ldx) for s, lg in bl_terms],
             [(-s, lg + ldx) for s, lg in br_terms]]
    with np.errstate(divide="ignore"):
        vals, ls = _combine(direct, terms)
    if shape == ():
        return FluxStencil(*(float(np.asarray(v).reshape(())) for v in vals), float(np.asarray(ls).reshape(())))
    return FluxStencil(*vals, ls)


def _check_dx(dx, diffusion):
    if not dx > 0:
        raise ConfigurationError(f"dx must be positive, got {dx!r}")
    if not diffusion > 0:
        raise ConfigurationError(f"diffusion must be positive, got {diffusion!r}")


def stencil_pwc(p: PecletData, diffusion, dx) -> FluxStencil:
    """Complete flux stencil for a piecewise constant velocity."""
    _check_dx(dx, diffusion)
    zero = np.zeros(np.shape(p.pe))
    return _fitted(np.asarray(p.pe, dtype=float), zero, zero, zero, zero, diffusion, dx)


def stencil_upwind_plus(p: PecletData, diffusion, dx) -> FluxStencil:
    """Stencil adjusted with the velocity at the left end (the upwind end for pe > 0).

    Raises
    ------
    SchemePolicyError
        If alpha q != 0 while |pe_plus| is below the W~ guard.
    """
    _check_dx(dx, diffusion)
    m = np.asarray(p.m, dtype=float)
    zero = np.zeros_like(m)
    return _fitted(np.asarray(p.pe_plus, dtype=float), zero, m, 0.25 * m, -0.75 * m,
                   diffusion, dx)


def stencil_upwind_minus(p: PecletData, diffusion, dx) -> FluxStencil:
    """Stencil adjusted with the velocity at the right end (upwind for pe < 0)."""
    _check_dx(dx, diffusion)
    m = np.asarray(p.m, dtype=float)
    zero = np.zeros_like(m)
    return _fitted(np.asarray(p.pe_minus, dtype=float), m, zero, -1.25 * m, -0.25 * m,
                   diffusion, dx)


def _guard(den, what):
    bad = np.abs(den) < IBP_DENOMINATOR_GUARD
    if np.any(bad):
        raise SchemePolicyError(
            f"degenerate {what} stencil: |denominator| = {np.min(np.abs(den)):.3g} "
            f"< {IBP_DENOMINATOR_GUARD}")


def stencil_exact_ibp(p: PecletData, diffusion, dx, side="plus") -> FluxStencil:
    """Non-asymptotic integration-by-parts stencils, for verification.

    Where alpha q = 0 both sides reduce to :func:`stencil_pwc`, whose
    entries are returned. Elsewhere the closed forms are evaluated
    directly, with ``P = pe/2 - alpha q / 4``.

    Raises
    ------
    SchemePolicyError
        If a denominator falls below :data:`IBP_DENOMINATOR_GUARD`.
    """
    if side not in ("plus", "minus"):
        raise ConfigurationError(f"side must be 'plus' or 'minus', got {side!r}")
    base = stencil_pwc(p, diffusion, dx)
    pe = np.asarray(p.pe, dtype=float)
    m = np.asarray(p.m, dtype=float)
    mod = m != 0.0
    if not np.any(mod):
        return base
    k = diffusion / dx
    pe_m, m_m = pe[mod] if pe.ndim else pe, m[mod] if m.ndim else m
    big_p = 0.5 * pe_m - 0.25 * m_m
    with np.errstate(over="ignore", invalid="ignore"):
        if side == "plus":
            z = pe_m - m_m
            e = np.exp(-pe_m)
            den = 1.0 - (1.0 + m_m) * e
            _guard(den, "plus homogeneous")
            al = k * z / den
            ar = -k * e * z / den
            d = z * ((1.0 + m_m) * e - 1.0)
            _guard(d, "plus inhomogeneous")
            ep = np.exp(-big_p)
            n1 = 1.0 - 0.5 * z - (1.0 + 0.5 * m_m) * ep
            n2 = (1.0 + 0.5 * z) * (1.0 + m_m) * e - (1.0 - 0.5 * m_m) * ep
            bl = dx * n1 / d
            br = -dx * n2 / d
        else:
            z = pe_m + m_m
            e = np.exp(pe_m)
            den = (1.0 + m_m) * e - 1.0
            _guard(den, "minus homogeneous")
            _guard(z * den, "minus inhomogeneous")
            al = k * e * z / den
            ar = -k * z / den
            ep = np.exp(big_p)
            bl = -dx * ((1.0 - 0.5 * z) * (1.0 + m_m) * e - (1.0 - 0.5 * m_m) * ep) / (z * den)
            br = -dx * ((1.0 + 0.5 * m_m) * ep - (1.0 + 0.5 * z)) / (z * den)
    if not all(np.all(np.isfinite(c)) for c in (al, ar, bl, br)):
        raise SchemePolicyError("exact integration-by-parts stencil overflows; use the asymptotic forms")
    if pe.ndim == 0:
        return FluxStencil(float(al), float(ar), float(bl), float(br))
    out = [np.array(c, dtype=float) for c in (base.a_left, base.a_right, base.b_left, base.b_right)]
    for arr, val in zip(out, (al, ar, bl, br)):
        arr[mod] = val
    return FluxStencil(*out, np.where(mod, 0.0, base.log_scale))


def _family_masks(variant, pe):
    pe = np.asarray(pe, dtype=float)
    if variant is FluxVariant.PWC:
        return np.zeros(pe.shape, bool), np.zeros(pe.shape, bool)
    if variant in (FluxVariant.UPWIND, FluxVariant.AUTO):
        return pe > 0, pe < 0
    return pe < 0, pe > 0


def select_stencil(variant, p: PecletData, diffusion, dx) -> FluxStencil:
    """Dispatch to the stencil family chosen by ``variant``, per interface.

    UPWIND and AUTO take the plus family where pe > 0 and the minus family
    where pe < 0; DOWNWIND takes the opposite ones. pe = 0 always gives
    the piecewise constant stencil.
    """
    variant = FluxVariant.parse(variant)
    plus, minus = _family_masks(variant, p.pe)
    if np.ndim(p.pe) == 0:
        if plus:
            return stencil_upwind_plus(p, diffusion, dx)
        if minus:
            return stencil_upwind_minus(p, diffusion, dx)
        return stencil_pwc(p, diffusion, dx)
    m = np.asarray(p.m, dtype=float)
    zero = np.zeros_like(m)
    # one evaluation with per-interface arguments; equivalent to the three families
    z = np.where(plus, p.pe_plus, np.where(minus, p.pe_minus, p.pe))
    m_left = np.where(minus, m, 0.0)
    m_right = np.where(plus, m, 0.0)
    q_left = np.where(plus, 0.25 * m, np.where(minus, -1.25 * m, zero))
    q_right = np.where(plus, -0.75 * m, np.where(minus, -0.25 * m, zero))
    _check_dx(dx, diffusion)
    try:
        return _fitted(z, m_left, m_right, q_left, q_right, diffusion, dx)
    except SchemePolicyError as exc:
        bad = np.flatnonzero((np.abs(z) < W_TILDE_GUARD) & ((q_left != 0) | (q_right != 0)))
        raise SchemePolicyError(f"{exc} (interface index {int(bad[0])})") from exc
