"""Gauss-Legendre quadrature with order doubling, and the sin^2 substitution
used for integrals with inverse-square-root endpoint singularities."""

from functools import lru_cache

import numpy as np

from .errors import ToleranceNotMet

MIN_ORDER = 8
MAX_ORDER = 1024


@lru_cache(maxsize=None)
def _leggauss(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_legendre(f, a, b, tol, min_order=MIN_ORDER, max_order=MAX_ORDER):
    """Integrate a vectorized ``f`` over ``[a, b]``, doubling the order until
    two successive estimates differ by less than ``tol``.

    Returns ``(value, err_est, order)``.
    """
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    prev = None
    err = np.inf
    n = min_order
    while n <= max_order:
        t, w = _leggauss(n)
        vals = np.asarray(f(mid + half * t), dtype=float)
        est = half * float(np.dot(w, np.broadcast_to(vals, t.shape)))
        if not np.isfinite(est):
            raise ToleranceNotMet(f"non-finite quadrature estimate at order {n}")
        if prev is not None:
            err = abs(est - prev)
            if err < tol:
                return est, err, n
        prev = est
        n *= 2
    raise ToleranceNotMet(
        f"quadrature did not converge to {tol:g} by order {max_order} "
        f"(last difference {err:.3e})"
    )


def endpoint_singular(f, a, b, tol, min_order=MIN_ORDER, max_order=MAX_ORDER):
    """Integrate ``f`` over ``[a, b]`` where ``f`` blows up like an inverse
    square root at both ends.

    Substitutes ``x = a + (b - a) sin^2(theta)``; the Jacobian
    ``2 (b - a) sin cos`` cancels both singularities. ``f`` is called as
    ``f(x, left, right)`` with ``left = x - a`` and ``right = b - x``
    computed without cancellation.
    """
    width = b - a

    def integrand(theta):
        s = np.sin(theta)
        c = np.cos(theta)
        left = width * s * s
        right = width * c * c
        x = a + left
        return f(x, left, right) * (2.0 * width * s * c)

    return gauss_legendre(integrand, 0.0, 0.5 * np.pi, tol, min_order, max_order)


def abel_kernel(g, base, upper, tol, min_order=MIN_ORDER, max_order=MAX_ORDER):
    """Integrate ``g(w) / sqrt(upper - w)`` over ``[base, upper]``.

    With ``w = base + (upper - base) sin^2(theta)`` the integral becomes
    ``2 sqrt(upper - base) * int_0^{pi/2} g(w) sin(theta) dtheta``.
    ``g`` receives ``(w, w - base)``.
    """
    span = upper - base
    if span == 0.0:
        return 0.0, 0.0, 0
    root = np.sqrt(span)

    def integrand(theta):
        s = np.sin(theta)
        offset = span * s * s
        return g(base + offset, offset) * s

    val, err, n = gauss_legendre(integrand, 0.0, 0.5 * np.pi, tol / (2.0 * root), min_order, max_order)
    return 2.0 * root * val, 2.0 * root * err, n


def graded_singular(f, a, b, breaks, tol, min_order=MIN_ORDER, max_order=MAX_ORDER):
    """Like :func:`endpoint_singular`, split at interior ``breaks``.

    The first and last segments use ``x = a + h u**2`` and ``x = b - h u**2``
    to absorb the endpoint singularities; inner segments are plain
    Gauss-Legendre. Meant for wells whose integrand varies on a scale much
    smaller than ``b - a`` near one end.
    """
    pts = [a, *breaks, b]
    nseg = len(pts) - 1
    seg_tol = tol / nseg
    total, err_total, order = 0.0, 0.0, 0

    def first(u):
        h = pts[1] - a
        left = h * u * u
        return f(a + left, left, b - (a + left)) * (2.0 * h * u)

    def last(u):
        h = b - pts[-2]
        right = h * u * u
        return f(b - right, (b - right) - a, right) * (2.0 * h * u)

    def inner(x):
        return f(x, x - a, b - x)

    for i in range(nseg):
        if i == 0:
            val, err, n = gauss_legendre(first, 0.0, 1.0, seg_tol, min_order, max_order)
        elif i == nseg - 1:
            val, err, n = gauss_legendre(last, 0.0, 1.0, seg_tol, min_order, max_order)
        else:
            val, err, n = gauss_legendre(inner, pts[i], pts[i + 1], seg_tol, min_order, max_order)
        total += val
        err_total += err
        order = max(order, n)
    return total, err_total, order
