"""Special functions behind the exponentially fitted flux stencils.

All functions accept scalars or arrays and return the same kind.

``bernoulli(z)``  B(z) = z / (e^z - 1)
``w_weight(z)``   W(z) = (e^{z/2} - 1 - z/2) / (z (e^z - 1))
``w_tilde(z, q)`` W~(z, q) = (e^{z/2 + q} - 1 - z/2) / (z (e^z - 1))

W~ is evaluated through the identity

    W~(z, q) = W(z) + expm1(q) / (2 z sinh(z/2)),

which is exact, reduces to W(z) bit-for-bit at q = 0, and isolates the
1/z^2 singularity of the q-term. The ``log_*`` helpers give the same
quantities in log-magnitude form so the stencil code can rescale rows
whose coefficients would overflow.
"""

import numpy as np

from .errors import DomainError, SchemePolicyError

#: |z| beyond which B switches to its asymptotic forms.
OVERFLOW_THRESHOLD = 700.0

#: |z| below which W is evaluated from its Taylor series.
SERIES_THRESHOLD = 1e-3

#: W~(z, q) with q != 0 is rejected for |z| below this value.
W_TILDE_GUARD = 10.0

# W(z) = sum_k c_k z^k about z = 0
_W_SERIES = (1 / 8, -1 / 24, 1 / 384, 1 / 1440, -1 / 15360, -1 / 60480)


def _checked(z, name="z"):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def bernoulli(z):
    """Bernoulli function B(z) = z/(e^z - 1), with B(0) = 1.

    Uses ``expm1`` on the bulk of the range; for z > 700 returns
    z e^{-z} and for z < -700 returns -z.
    """
    z = _checked(z)
    zz = np.atleast_1d(z)
    out = np.ones_like(zz)
    big = zz > OVERFLOW_THRESHOLD
    small = zz < -OVERFLOW_THRESHOLD
    mid = (zz != 0.0) & ~big & ~small
    out[mid] = zz[mid] / np.expm1(zz[mid])
    out[big] = zz[big] * np.exp(-zz[big])
    out[small] = -zz[small]
    return _out(out.reshape(z.shape), z)


def log_bernoulli(z):
    """Natural log of B(z), finite for every finite z."""
    z = _checked(z)
    zz = np.atleast_1d(z)
    out = np.empty_like(zz)
    core = np.abs(zz) <= 1.0
    pos = zz > 1.0
    neg = zz < -1.0
    out[core] = np.log(bernoulli(zz[core]))
    zp = zz[pos]
    out[pos] = np.log(zp) - zp - np.log1p(-np.exp(-zp))
    zn = zz[neg]
    out[neg] = np.log(-zn) - np.log1p(-np.exp(zn))
    return _out(out.reshape(z.shape), z)


def w_weight(z):
    """Inhomogeneous flux weight W(z); W(0) = 1/8 and W(z) -> 0 as z -> inf."""
    z = _checked(z)
    zz = np.atleast_1d(z)
    out = np.empty_like(zz)
    ser = np.abs(zz) < SERIES_THRESHOLD
    pos = zz > 1.0
    rest = ~ser & ~pos

    zs = zz[ser]
    acc = np.zeros_like(zs)
    for c in reversed(_W_SERIES):
        acc = acc * zs + c
    out[ser] = acc

    # e^{-z} form keeps both numerator and denominator finite
    zp = zz[pos]
    with np.errstate(under="ignore"):
        num = np.exp(-0.5 * zp) - (1.0 + 0.5 * zp) * np.exp(-zp)
    out[pos] = num / (zp * -np.expm1(-zp))

    zr = zz[rest]
    out[rest] = (np.expm1(0.5 * zr) - 0.5 * zr) / (zr * np.expm1(zr))
    return _out(out.reshape(z.shape), z)


def _log_abs_expm1(q):
    q = np.asarray(q, dtype=float)
    out = np.full_like(q, -np.inf)
    big = q > 1.0
    nz = (q != 0.0) & ~big
    out[big] = q[big] + np.log1p(-np.exp(-q[big]))
    out[nz] = np.log(np.abs(np.expm1(q[nz])))
    return out


def _log_z_sinh(z):
    """log(2 z sinh(z/2)), an even function of z, for z != 0."""
    a = np.abs(np.asarray(z, dtype=float))
    out = np.empty_like(a)
    big = a > 1.0
    ab = a[big]
    out[big] = np.log(ab) + 0.5 * ab + np.log1p(-np.exp(-ab))
    out[~big] = np.log(2.0 * a[~big] * np.sinh(0.5 * a[~big]))
    return out


def w_tilde_split(z, q, guard=W_TILDE_GUARD):
    """Decompose W~(z, q) = w + sign * exp(log_excess).

    Returns ``(w, sign, log_excess)`` as arrays, with ``w = W(z)``.
    ``log_excess`` is ``-inf`` where q == 0.

    Raises
    ------
    SchemePolicyError
        If any entry has |z| < guard and q != 0.
    """
    z = np.atleast_1d(_checked(z))
    q = np.atleast_1d(_checked(q, "q"))
    z, q = np.broadcast_arrays(z, q)
    bad = (np.abs(z) < guard) & (q != 0.0)
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        raise SchemePolicyError(
            f"W~(z, q) requested with |z| = {abs(z.ravel()[i]):.3g} < {guard} "
            f"and q = {q.ravel()[i]:.3g} != 0; use alpha = 0 at small Peclet numbers"
        )
    w = np.asarray(w_weight(z), dtype=float).reshape(z.shape)
    sign = np.sign(q)
    log_excess = np.full(z.shape, -np.inf)
    nz = q != 0.0
    log_excess[nz] = _log_abs_expm1(q[nz]) - _log_z_sinh(z[nz])
    return w, sign, log_excess


def w_tilde(z, q, guard=W_TILDE_GUARD):
    """Modified weight W~(z, q) = (e^{z/2+q} - 1 - z/2) / (z (e^z - 1)).

    Equals ``w_weight(z)`` exactly when q == 0. Raises
    :class:`SchemePolicyError` when |z| < ``guard`` and q != 0, where the
    weight is dominated by the expm1(q)/z^2 singularity.
    """
    shape = np.broadcast(np.asarray(z), np.asarray(q)).shape
    w, sign, log_excess = w_tilde_split(z, q, guard)
    with np.errstate(over="ignore"):
        out = w + np.where(sign != 0.0, sign * np.exp(log_excess), 0.0)
    return float(out.ravel()[0]) if shape == () else out.reshape(shape)
