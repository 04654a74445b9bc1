"""Closed-form integrals of plane-wave products and Gauss quadrature on
segments, triangles and star-shaped polygons."""

from functools import lru_cache
import math

import numpy as np

from . import kernels


def _sinc(beta):
    beta = np.asarray(beta, dtype=float)
    small = np.abs(beta) < 1e-8
    b2 = beta * beta
    safe = np.where(small, 1.0, beta)
    return np.where(small, 1.0 - b2 / 6.0 + b2 * b2 / 120.0, np.sin(safe) / safe)


def edge_osc_integral(a, b, v, kappa):
    """``int_e exp(i kappa v . x) ds`` over the segment ``a -> b``.

    ``v`` may be a single 2-vector or an ``(n, 2)`` stack; the result has the
    matching shape. Exact up to rounding.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    e = b - a
    h = math.hypot(e[0], e[1])
    mid = 0.5 * (a + b)
    beta = 0.5 * kappa * (v @ e)
    return h * np.exp(1j * kappa * (v @ mid)) * _sinc(beta)


def polygon_osc_integral(verts, v, kappa):
    """``int_K exp(i kappa v . x) dx`` over a simple CCW polygon.

    Divergence theorem: ``(1 / (i kappa |v|^2)) sum_e (v . n_e) int_e exp(i kappa v . x) ds``.
    For ``|v| <= 1e-12 kappa`` the polygon area is returned. Accepts a single
    ``v`` or an ``(n, 2)`` stack.
    """
    verts = np.ascontiguousarray(verts, dtype=float)
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    vecs = np.ascontiguousarray(np.atleast_2d(v))
    out = kernels.polygon_osc_integrals(verts, vecs, float(kappa))
    return out[0] if single else out


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def edge_rule(a, b, n_points):
    """Gauss-Legendre points (n, 2) and weights (n,) on the segment ``a -> b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t, w = gauss_legendre(n_points)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    return pts, w * float(np.hypot(*(b - a)))


def edge_quadrature(a, b, f, n_points):
    """Gauss-Legendre approximation of ``int_e f ds``; ``f`` maps ``(n, 2)`` points to values."""
    pts, w = edge_rule(a, b, n_points)
    return np.sum(w * f(pts))


def default_edge_points(kappa, h_e):
    return max(20, int(math.ceil(3.0 * kappa * h_e)))


@lru_cache(maxsize=None)
def triangle_rule(order):
    """Collapsed (Duffy) Gauss rule on the reference triangle (0,0), (1,0), (0,1).

    Integrates polynomials of total degree ``order`` exactly. Returns
    reference points ``(n, 2)`` and weights summing to 1/2.
    """
    n = max(1, (order + 3) // 2)
    x, wx = gauss_legendre(n)
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(wx, wx, indexing="ij")
    # (u, v) in the unit square -> (u, (1-u) v) in the triangle
    pts = np.column_stack([u.ravel(), ((1.0 - u) * v).ravel()])
    w = (wu * wv * (1.0 - u)).ravel()
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


def default_triangle_order(kappa, h):
    """At least ten Gauss points per wavelength across a triangle of size ``h``."""
    n = int(math.ceil(10.0 * kappa * h / (2.0 * math.pi)))
    return max(10, 2 * n)


def polygon_rule(verts, star_center, order):
    """Fan-triangulate about ``star_center`` and map the triangle rule onto each piece.

    Zero-area triangles are skipped. Returns points ``(n, 2)`` and weights.
    """
    verts = np.asarray(verts, dtype=float)
    c = np.asarray(star_center, dtype=float)
    ref, wref = triangle_rule(order)
    pts_all, w_all = [], []
    m = len(verts)
    for i in range(m):
        a = verts[i] - c
        b = verts[(i + 1) % m] - c
        jac = a[0] * b[1] - a[1] * b[0]
        if jac == 0.0:
            continue
        pts_all.append(c + ref[:, :1] * a + ref[:, 1:] * b)
        w_all.append(wref * jac)
    if not pts_all:
        return np.zeros((0, 2)), np.zeros(0)
    return np.concatenate(pts_all), np.concatenate(w_all)


def polygon_quadrature(verts, star_center, f, order):
    """Approximate ``int_K f dx`` for ``K`` star-shaped about ``star_center``."""
    pts, w = polygon_rule(verts, star_center, order)
    return np.sum(w * f(pts))
