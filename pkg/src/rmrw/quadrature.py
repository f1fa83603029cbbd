"""Deterministic quadrature for Gaussian expectations of logcosh-type integrands.

Everything the population-level potential needs reduces to one-dimensional
expectations E f(m + r Z) with Z ~ N(0, 1), where f is logcosh, tanh, sech^2,
or one of those times a polynomial in Z.  Plain Gauss-Hermite converges
poorly here: logcosh has a near-kink at the origin of its argument, which
sits at z* = -m/r, well inside the Gaussian bulk whenever |m| << r.  We
therefore integrate over a fixed panel decomposition of [-zmax, zmax] with a
panel boundary pinned at z* and geometric refinement around it.  The layout
has a fixed shape (33 edges, 32 panels, 16 Gauss-Legendre nodes per panel),
so batches of (m, r) pairs vectorise; degenerate zero-width panels simply
get zero weight.

Measured accuracy is ~1e-15 relative across regimes from (m, r) = (0, 20)
to (100, 0.01); see tests/test_potential.py for the mpmath cross-checks.
"""

from functools import lru_cache

import numpy as np

__all__ = [
    "gauss_mean_nodes",
    "e_logcosh",
    "logcosh_moments",
    "hermgauss_standard",
]

_GL_NODES = 16
_ZMAX = 10.5
_BASE_EDGES = 22  # 21 unit-width panels spanning [-zmax, zmax]
_KINK_OFFSETS = np.array([-4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0])


@lru_cache(maxsize=8)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=8)
def hermgauss_standard(nodes: int):
    """Nodes/weights (z, w) with E f(Z) ~ sum w_i f(z_i) for Z ~ N(0,1).

    Classical Gauss-Hermite, rescaled to the standard normal.  Adequate when
    the integrand is smooth on the scale of the Gaussian; kept for oracle
    cross-checks at configurable order.
    """
    x, w = np.polynomial.hermite.hermgauss(nodes)
    return x * np.sqrt(2.0), w / np.sqrt(np.pi)


def gauss_mean_nodes(m, r):
    """Quadrature rule for E f(m + r Z), Z ~ N(0,1), batched over (m, r).

    Parameters
    ----------
    m, r : array_like, shape (K,)
        Means and scales of the integrand argument; r >= 0.

    Returns
    -------
    z, w : ndarray, shape (K, Q)
        Evaluation points (in Z space) and weights including the Gaussian
        density, so that E f(m + r Z) ~ sum_j w[k, j] f(m[k] + r[k] z[k, j]).
    """
    m = np.atleast_1d(np.asarray(m, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if m.shape != r.shape or m.ndim != 1:
        raise ValueError("m and r must be 1-D arrays of equal length")
    K = m.shape[0]

    glx, glw = _leggauss(_GL_NODES)
    base = np.linspace(-_ZMAX, _ZMAX, _BASE_EDGES)
    rr = np.maximum(r, 1e-12)
    zstar = np.clip(-m / rr, -_ZMAX, _ZMAX)
    scale = 1.0 / np.maximum(rr, 1.0)
    kink = np.clip(zstar[:, None] + _KINK_OFFSETS[None, :] * scale[:, None], -_ZMAX, _ZMAX)
    edges = np.concatenate([np.broadcast_to(base, (K, _BASE_EDGES)), kink], axis=1)
    edges.sort(axis=1)

    half = 0.5 * (edges[:, 1:] - edges[:, :-1])
    mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
    z = mid[:, :, None] + half[:, :, None] * glx[None, None, :]
    w = half[:, :, None] * glw[None, None, :] * np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    return z.reshape(K, -1), w.reshape(K, -1)


def logcosh(t):
    """Numerically stable log cosh, valid for |t| up to overflow scale."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


def e_logcosh(m, r):
    """E logcosh(m + r Z) for Z ~ N(0,1), batched; exact at r = 0."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(m)
    degenerate = r <= 1e-300
    if degenerate.any():
        out[degenerate] = logcosh(m[degenerate])
    live = ~degenerate
    if live.any():
        z, w = gauss_mean_nodes(m[live], r[live])
        t = m[live, None] + r[live, None] * z
        out[live] = np.sum(w * logcosh(t), axis=1)
    return out


def logcosh_moments(m, r):
    """First and second derivative moments of E logcosh(m + r Z).

    Returns (T0, T1, S0, S1, S2) with

        T0 = E tanh(m + r Z)          T1 = E Z tanh(m + r Z)
        S0 = E sech^2(m + r Z)        S1 = E Z sech^2(m + r Z)
        S2 = E Z^2 sech^2(m + r Z)

    which are the partial derivatives of G(m, r) = E logcosh(m + r Z):
    G_m = T0, G_r = T1, G_mm = S0, G_mr = S1, G_rr = S2.
    """
    m = np.atleast_1d(np.asarray(m, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z, w = gauss_mean_nodes(m, r)
    t = m[:, None] + r[:, None] * z
    th = np.tanh(t)
    sech2 = np.square(1.0 / np.cosh(np.clip(t, -350, 350)))
    T0 = np.sum(w * th, axis=1)
    T1 = np.sum(w * z * th, axis=1)
    S0 = np.sum(w * sech2, axis=1)
    S1 = np.sum(w * z * sech2, axis=1)
    S2 = np.sum(w * z * z * sech2, axis=1)
    return T0, T1, S0, S1, S2
