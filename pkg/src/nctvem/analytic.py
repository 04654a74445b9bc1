"""Reference solutions of the homogeneous Helmholtz equation and their
impedance data.

Bessel functions J0, Y0, J1, Y1 use the power series below x = 12 and the
Hankel asymptotic expansion above; absolute accuracy is about 1e-12 on
(0, 500].
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import kernels

DEFAULT_SOURCE = (-0.25, 0.0)


def bessel_j0y0j1y1(x):
    """Return ``(J0(x), Y0(x), J1(x), Y1(x))`` for real ``x > 0`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0.0):
        raise ValueError("Bessel functions of the second kind need x > 0")
    out = kernels.bessel_j0y0j1y1(xa)
    if xa.ndim == 0:
        return tuple(float(v) for v in out)
    return out


def hankel1_01(x):
    """``(H0^(1)(x), H1^(1)(x))`` for real positive ``x``."""
    j0, y0, j1, y1 = bessel_j0y0j1y1(x)
    return np.asarray(j0) + 1j * np.asarray(y0), np.asarray(j1) + 1j * np.asarray(y1)


@dataclass(frozen=True)
class ExactSolution:
    """Either a point-source field ``H0^(1)(kappa |x - source|)`` or a plane wave ``exp(i kappa d . x)``."""

    kind: str
    kappa: float
    source: Tuple[float, float] = DEFAULT_SOURCE
    direction: Tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("hankel", "planewave"):
            raise ValueError(f"unknown exact solution kind {self.kind!r}")
        if self.kind == "planewave" and abs(np.hypot(*self.direction) - 1.0) > 1e-14:
            raise ValueError("plane-wave direction must be a unit vector")

    @classmethod
    def hankel(cls, kappa, source=DEFAULT_SOURCE):
        return cls("hankel", float(kappa), source=tuple(map(float, source)))

    @classmethod
    def planewave(cls, kappa, direction):
        return cls("planewave", float(kappa), direction=tuple(map(float, direction)))

    def value(self, x):
        return eval_exact(self, x)[0]


def eval_exact(sol: ExactSolution, x):
    """Value and gradient at ``x`` (a 2-vector or an ``(n, 2)`` array).

    Returns ``(value, grad)`` with ``grad`` of shape ``(..., 2)``.
    """
    x = np.asarray(x, dtype=float)
    k = sol.kappa
    if sol.kind == "planewave":
        d = np.asarray(sol.direction)
        u = np.exp(1j * k * (x @ d))
        return u, 1j * k * u[..., None] * d
    rvec = x - np.asarray(sol.source)
    r = np.hypot(rvec[..., 0], rvec[..., 1])
    if np.any(r == 0.0):
        raise ValueError("cannot evaluate the point-source field at its source")
    h0, h1 = hankel1_01(k * r)
    grad = (-k * h1 / r)[..., None] * rvec
    return h0, grad


def impedance_data(sol: ExactSolution, x, normal):
    """``g = grad u . n + i kappa u`` at boundary point(s) ``x`` with outward ``normal``."""
    u, grad = eval_exact(sol, x)
    return grad @ np.asarray(normal, dtype=float) + 1j * sol.kappa * u


def impedance_function(sol: ExactSolution, normal):
    """Bind ``normal`` to get a vectorized ``g(points)`` for one straight boundary edge."""
    n = np.asarray(normal, dtype=float)

    def g(points):
        return impedance_data(sol, points, n)

    return g
