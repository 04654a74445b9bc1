"""Pure-numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_numba.py``.
The numpy versions are the reference path: they are used when numba is
missing or disabled, and the test suite checks both paths against each
other.
"""

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_CUTOFF = 12.0
N_SERIES = 48
N_ASYMPTOTIC = 24


def clip_halfplane(poly, normal, offset):
    """Clip a convex polygon to ``{x : normal . x <= offset}``.

    ``poly`` is an ``(m, 2)`` array of CCW vertices. Returns the clipped
    polygon, possibly with zero rows.
    """
    m = poly.shape[0]
    if m == 0:
        return poly
    s = poly @ normal - offset
    inside = s <= 0.0
    if inside.all():
        return poly
    if not inside.any():
        return poly[:0]
    out = []
    for i in range(m):
        j = (i + 1) % m
        if inside[i]:
            out.append(poly[i])
        if inside[i] != inside[j]:
            t = s[i] / (s[i] - s[j])
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.asarray(out)


def voronoi_cells(seeds, rect):
    """Voronoi cells of ``seeds`` clipped to ``rect = (x0, x1, y0, y1)``.

    Returns ``(vertices, offsets)``: the vertices of cell ``i`` are
    ``vertices[offsets[i]:offsets[i+1]]`` in CCW order.
    """
    x0, x1, y0, y1 = rect
    box = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)
    n = seeds.shape[0]
    cells = []
    for i in range(n):
        si = seeds[i]
        d2 = np.sum((seeds - si) ** 2, axis=1)
        order = np.argsort(d2, kind="stable")
        cell = box
        for j in order:
            if j == i:
                continue
            reach = np.max(np.sum((cell - si) ** 2, axis=1))
            # bisector lies beyond every current vertex: no further cuts possible
            if d2[j] > 4.0 * reach:
                break
            normal = seeds[j] - si
            offset = 0.5 * (normal @ (seeds[j] + si))
            cell = clip_halfplane(cell, normal, offset)
            if cell.shape[0] == 0:
                break
        cells.append(cell)
    offsets = np.zeros(n + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([c.shape[0] for c in cells])
    verts = np.concatenate(cells) if n else np.zeros((0, 2))
    return verts, offsets


def polygon_osc_integrals(verts, vecs, kappa):
    """``int_K exp(i kappa v . x) dx`` for every row ``v`` of ``vecs``.

    Uses the divergence theorem edge by edge; rows with ``|v| <= 1e-12 kappa``
    return the polygon area.
    """
    a = verts
    b = np.roll(verts, -1, axis=0)
    e = b - a  # (m, 2) edge vectors, length h_e
    mid = 0.5 * (a + b)
    area = 0.5 * np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1])
    v2 = np.sum(vecs**2, axis=1)
    tol = 1e-12 * kappa
    small = v2 <= tol * tol
    # (n, m) tables
    flux = vecs[:, 0:1] * e[None, :, 1] - vecs[:, 1:2] * e[None, :, 0]
    beta = 0.5 * kappa * (vecs @ e.T)
    phase = np.exp(1j * kappa * (vecs @ mid.T))
    edge_int = phase * np.sinc(beta / np.pi)
    total = np.sum(flux * edge_int, axis=1)
    safe = np.where(small, 1.0, v2)
    out = total / (1j * kappa * safe)
    out[small] = area
    return out


def _series(x):
    y = 0.25 * x * x
    term0 = np.ones_like(x)  # y^k / (k!)^2
    term1 = np.ones_like(x)  # y^k / (k! (k+1)!)
    j0 = np.zeros_like(x)
    j1s = np.zeros_like(x)
    y0s = np.zeros_like(x)
    y1s = np.zeros_like(x)
    hk = 0.0
    sign = 1.0
    for k in range(N_SERIES):
        if k > 0:
            term0 = term0 * y / (k * k)
            term1 = term1 * y / (k * (k + 1))
        hk1 = hk + 1.0 / (k + 1)
        j0 += sign * term0
        j1s += sign * term1
        y0s -= sign * hk * term0
        y1s += sign * (hk + hk1) * term1
        hk = hk1
        sign = -sign
    half = 0.5 * x
    j1 = half * j1s
    lg = np.log(half) + EULER_GAMMA
    y0 = (2.0 / np.pi) * (lg * j0 + y0s)
    y1 = (2.0 / np.pi) * lg * j1 - 2.0 / (np.pi * x) - half * y1s / np.pi
    return j0, y0, j1, y1


def _asymptotic(x):
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        p = np.ones_like(x)
        q = np.zeros_like(x)
        term = np.ones_like(x)
        for k in range(1, N_ASYMPTOTIC):
            term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
            if k % 4 == 1:
                q += term
            elif k % 4 == 2:
                p -= term
            elif k % 4 == 3:
                q -= term
            else:
                p += term
        chi = x - (0.5 * nu + 0.25) * np.pi
        amp = np.sqrt(2.0 / (np.pi * x))
        c, s = np.cos(chi), np.sin(chi)
        out.append(amp * (p * c - q * s))
        out.append(amp * (p * s + q * c))
    return out[0], out[1], out[2], out[3]


def bessel_j0y0j1y1(x):
    """Return ``(J0, Y0, J1, Y1)`` at positive real ``x`` (array)."""
    x = np.asarray(x, dtype=float)
    j0 = np.empty_like(x)
    y0 = np.empty_like(x)
    j1 = np.empty_like(x)
    y1 = np.empty_like(x)
    lo = x < SERIES_CUTOFF
    for mask, fn in ((lo, _series), (~lo, _asymptotic)):
        if mask.any():
            vals = fn(x[mask])
            j0[mask], y0[mask], j1[mask], y1[mask] = vals
    return j0, y0, j1, y1

