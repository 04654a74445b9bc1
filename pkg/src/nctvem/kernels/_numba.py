"""Numba-compiled twins of the kernels in ``_numpy.py``.

Same signatures and return conventions. Importing this module requires
numba; compilation is lazy and cached on disk.
"""

import math

import numpy as np
from numba import njit

from ._numpy import EULER_GAMMA, N_ASYMPTOTIC, N_SERIES, SERIES_CUTOFF


@njit(cache=True)
def clip_halfplane(poly, normal, offset):
    m = poly.shape[0]
    out = np.empty((2 * m, 2))
    if m == 0:
        return out[:0]
    s = np.empty(m)
    n_in = 0
    for i in range(m):
        s[i] = poly[i, 0] * normal[0] + poly[i, 1] * normal[1] - offset
        if s[i] <= 0.0:
            n_in += 1
    if n_in == m:
        return poly.copy()
    if n_in == 0:
        return out[:0]
    k = 0
    for i in range(m):
        j = (i + 1) % m
        in_i = s[i] <= 0.0
        if in_i:
            out[k, 0] = poly[i, 0]
            out[k, 1] = poly[i, 1]
            k += 1
        if in_i != (s[j] <= 0.0):
            t = s[i] / (s[i] - s[j])
            out[k, 0] = poly[i, 0] + t * (poly[j, 0] - poly[i, 0])
            out[k, 1] = poly[i, 1] + t * (poly[j, 1] - poly[i, 1])
            k += 1
    return out[:k].copy()


@njit(cache=True)
def _cell(seeds, i, box):
    n = seeds.shape[0]
    d2 = np.empty(n)
    for j in range(n):
        dx = seeds[j, 0] - seeds[i, 0]
        dy = seeds[j, 1] - seeds[i, 1]
        d2[j] = dx * dx + dy * dy
    order = np.argsort(d2, kind="mergesort")
    cell = box.copy()
    normal = np.empty(2)
    for jj in range(n):
        j = order[jj]
        if j == i:
            continue
        reach = 0.0
        for v in range(cell.shape[0]):
            dx = cell[v, 0] - seeds[i, 0]
            dy = cell[v, 1] - seeds[i, 1]
            reach = max(reach, dx * dx + dy * dy)
        if d2[j] > 4.0 * reach:
            break
        normal[0] = seeds[j, 0] - seeds[i, 0]
        normal[1] = seeds[j, 1] - seeds[i, 1]
        offset = 0.5 * (normal[0] * (seeds[j, 0] + seeds[i, 0])
                        + normal[1] * (seeds[j, 1] + seeds[i, 1]))
        cell = clip_halfplane(cell, normal, offset)
        if cell.shape[0] == 0:
            break
    return cell


@njit(cache=True)
def voronoi_cells(seeds, rect):
    x0, x1, y0, y1 = rect[0], rect[1], rect[2], rect[3]
    box = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    n = seeds.shape[0]
    cells = []
    offsets = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        c = _cell(seeds, i, box)
        cells.append(c)
        offsets[i + 1] = offsets[i] + c.shape[0]
    verts = np.empty((offsets[n], 2))
    for i in range(n):
        verts[offsets[i]:offsets[i + 1]] = cells[i]
    return verts, offsets


@njit(cache=True)
def polygon_osc_integrals(verts, vecs, kappa):
    m = verts.shape[0]
    n = vecs.shape[0]
    area = 0.0
    for e in range(m):
        f = (e + 1) % m
        area += verts[e, 0] * verts[f, 1] - verts[f, 0] * verts[e, 1]
    area *= 0.5
    tol = 1e-12 * kappa
    out = np.empty(n, dtype=np.complex128)
    for r in range(n):
        vx = vecs[r, 0]
        vy = vecs[r, 1]
        v2 = vx * vx + vy * vy
        if v2 <= tol * tol:
            out[r] = area
            continue
        total = 0.0j
        for e in range(m):
            f = (e + 1) % m
            ex = verts[f, 0] - verts[e, 0]
            ey = verts[f, 1] - verts[e, 1]
            mx = 0.5 * (verts[f, 0] + verts[e, 0])
            my = 0.5 * (verts[f, 1] + verts[e, 1])
            beta = 0.5 * kappa * (vx * ex + vy * ey)
            if abs(beta) < 1e-8:
                sinc = 1.0 - beta * beta / 6.0
            else:
                sinc = math.sin(beta) / beta
            arg = kappa * (vx * mx + vy * my)
            total += (vx * ey - vy * ex) * sinc * complex(math.cos(arg), math.sin(arg))
        out[r] = total / (1j * kappa * v2)
    return out


@njit(cache=True)
def _bessel_scalar(x):
    if x < SERIES_CUTOFF:
        y = 0.25 * x * x
        term0 = 1.0
        term1 = 1.0
        j0 = 0.0
        j1s = 0.0
        y0s = 0.0
        y1s = 0.0
        hk = 0.0
        sign = 1.0
        for k in range(N_SERIES):
            if k > 0:
                term0 *= y / (k * k)
                term1 *= y / (k * (k + 1))
            hk1 = hk + 1.0 / (k + 1)
            j0 += sign * term0
            j1s += sign * term1
            y0s -= sign * hk * term0
            y1s += sign * (hk + hk1) * term1
            hk = hk1
            sign = -sign
        half = 0.5 * x
        j1 = half * j1s
        lg = math.log(half) + EULER_GAMMA
        y0 = (2.0 / math.pi) * (lg * j0 + y0s)
        y1 = (2.0 / math.pi) * lg * j1 - 2.0 / (math.pi * x) - half * y1s / math.pi
        return j0, y0, j1, y1
    res = np.empty(4)
    amp = math.sqrt(2.0 / (math.pi * x))
    for nu in range(2):
        mu = 4.0 * nu * nu
        p = 1.0
        q = 0.0
        term = 1.0
        for k in range(1, N_ASYMPTOTIC):
            term *= (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
            r = k % 4
            if r == 1:
                q += term
            elif r == 2:
                p -= term
            elif r == 3:
                q -= term
            else:
                p += term
        chi = x - (0.5 * nu + 0.25) * math.pi
        c = math.cos(chi)
        s = math.sin(chi)
        res[2 * nu] = amp * (p * c - q * s)
        res[2 * nu + 1] = amp * (p * s + q * c)
    return res[0], res[1], res[2], res[3]


@njit(cache=True)
def _bessel_flat(x):
    n = x.shape[0]
    j0 = np.empty(n)
    y0 = np.empty(n)
    j1 = np.empty(n)
    y1 = np.empty(n)
    for i in range(n):
        j0[i], y0[i], j1[i], y1[i] = _bessel_scalar(x[i])
    return j0, y0, j1, y1


def bessel_j0y0j1y1(x):
    x = np.asarray(x, dtype=float)
    j0, y0, j1, y1 = _bessel_flat(np.ascontiguousarray(x).ravel())
    shape = x.shape
    return j0.reshape(shape), y0.reshape(shape), j1.reshape(shape), y1.reshape(shape)
