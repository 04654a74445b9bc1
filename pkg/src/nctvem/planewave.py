"""Plane-wave direction sets, bulk plane waves and filtered edge trace bases.

Indices are 0-based throughout: directions are ``0 .. p-1`` and the
synthetic constant edge function, when present, carries index ``p``.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

DEFAULT_TOL_ORTH = 1e-12


@dataclass(frozen=True)
class DirectionSet:
    """Unit plane-wave directions.

    ``delta`` is the minimum pairwise angle divided by ``2 pi / p``.
    ``q`` is ``None`` for hand-built sets whose size is not of the form
    ``2q + 1``.
    """

    directions: np.ndarray
    q: Optional[int]
    delta: float

    @property
    def p(self) -> int:
        return len(self.directions)

    @property
    def angles(self):
        return np.mod(np.arctan2(self.directions[:, 1], self.directions[:, 0]), 2.0 * np.pi)

    def __len__(self):
        return self.p

    @classmethod
    def from_vectors(cls, vectors, q=None, check=True):
        d = np.array(vectors, dtype=float).reshape(-1, 2)
        norms = np.hypot(d[:, 0], d[:, 1])
        if check and np.any(np.abs(norms - 1.0) > 1e-14):
            raise ValueError("directions must be unit vectors")
        ang = np.sort(np.mod(np.arctan2(d[:, 1], d[:, 0]), 2.0 * np.pi))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * np.pi]])) if len(d) > 1 else [2 * np.pi]
        delta = float(np.min(gaps)) / (2.0 * np.pi / len(d))
        if check:
            if delta <= 0.0:
                raise ValueError("directions must be pairwise distinct")
            if np.max(gaps) >= np.pi:
                raise ValueError("angle between neighbouring directions must be < pi")
        d.setflags(write=False)
        return cls(d, q, delta)


def make_directions(q, offset=0.0):
    """``p = 2q + 1`` equispaced directions at angles ``offset + 2 pi l / p``."""
    if int(q) != q or q < 2:
        raise ValueError(f"q must be an integer >= 2, got {q}")
    q = int(q)
    p = 2 * q + 1
    theta = offset + 2.0 * np.pi * np.arange(p) / p
    d = np.column_stack([np.cos(theta), np.sin(theta)])
    d.setflags(write=False)
    return DirectionSet(d, q, 1.0)


@dataclass(frozen=True)
class EdgeBasis:
    """Filtered plane-wave trace basis on one edge.

    Attributes
    ----------
    edge : int
    a, b : ndarray
        Endpoints; the tangent points from ``a`` to ``b``. The basis is
        symmetric under reversing the edge, so either orientation works.
    kept : ndarray of int
        The index set J_e: surviving direction indices in increasing order,
        followed by ``p`` when the synthetic constant is appended.
    representative : ndarray of int, shape (p,)
        For every direction, the kept direction with the same trace.
    has_constant : bool
        True when the synthetic constant (index ``p``) was appended.
    orthogonal_index : int
        Kept direction orthogonal to the edge, or -1. Exactly one of
        ``has_constant`` and ``orthogonal_index >= 0`` holds.
    transform : ndarray or None
        Optional ``(p_e, r)`` change of basis: the edge dofs are taken against
        ``psi_k = sum_m transform[m, k] w_m`` instead of the raw traces.
    """

    edge: int
    a: np.ndarray
    b: np.ndarray
    kept: np.ndarray
    representative: np.ndarray
    has_constant: bool
    orthogonal_index: int
    p: int
    transform: Optional[np.ndarray] = None

    @property
    def midpoint(self):
        return 0.5 * (self.a + self.b)

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.b - self.a)))

    @property
    def tangent(self):
        return (self.b - self.a) / self.length

    @property
    def p_e(self) -> int:
        return len(self.kept)

    @property
    def n_dofs(self) -> int:
        return self.p_e if self.transform is None else self.transform.shape[1]

    def position(self, index):
        """Position of a kept index inside ``kept``."""
        pos = np.flatnonzero(self.kept == index)
        if pos.size == 0:
            raise KeyError(f"index {index} not kept on edge {self.edge}")
        return int(pos[0])

    def frequencies(self, dirs: DirectionSet):
        """Direction vectors of the kept functions; the constant maps to 0."""
        out = np.zeros((self.p_e, 2))
        wave = self.kept < self.p
        out[wave] = dirs.directions[self.kept[wave]]
        return out

    def values(self, dirs: DirectionSet, kappa, points, raw=False):
        """Edge basis functions at ``points`` (n, 2) -> (n, n_dofs) complex."""
        f = self.frequencies(dirs)
        w = np.exp(1j * kappa * ((np.asarray(points) - self.midpoint) @ f.T))
        if raw or self.transform is None:
            return w
        return w @ self.transform


def filter_edge(a, b, dirs: DirectionSet, tol_orth=DEFAULT_TOL_ORTH, edge=-1):
    """Build the filtered trace basis on the segment ``a -> b``.

    Among directions with equal tangential component (to ``tol_orth``) only the
    lowest index survives; the constant function is appended as index ``p``
    unless some surviving direction is orthogonal to the edge.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    h = np.hypot(*(b - a))
    if not h > 0.0:
        raise ValueError(f"edge {edge} has zero length")
    t = (b - a) / h
    tc = dirs.directions @ t
    p = dirs.p
    kept = []
    rep = np.empty(p, dtype=np.int64)
    for l in range(p):
        match = [j for j in kept if abs(tc[j] - tc[l]) <= tol_orth]
        if match:
            rep[l] = match[0]
        else:
            kept.append(l)
            rep[l] = l
    ortho = [j for j in kept if abs(tc[j]) <= tol_orth]
    orth_index = ortho[0] if ortho else -1
    has_constant = not ortho
    if has_constant:
        kept.append(p)
    kept_arr = np.array(kept, dtype=np.int64)
    for arr in (a, b, kept_arr, rep):
        arr.setflags(write=False)
    return EdgeBasis(edge, a, b, kept_arr, rep, has_constant, orth_index, p)


def edge_gram(edge: EdgeBasis, dirs: DirectionSet, kappa, raw=True):
    """``M[m, n] = int_e w_n conj(w_m) ds`` in closed form.

    With ``raw=False`` and a transform present, the Gram of the transformed
    basis ``T^H M T`` is returned.
    """
    f = edge.frequencies(dirs)
    dv = f[None, :, :] - f[:, None, :]  # dv[m, n] = f_n - f_m
    beta = 0.5 * kappa * edge.length * (dv @ edge.tangent)
    M = edge.length * np.sinc(beta / np.pi) + 0j
    if raw or edge.transform is None:
        return M
    T = edge.transform
    return T.conj().T @ M @ T


def orthonormalize_edge(edge: EdgeBasis, dirs: DirectionSet, kappa, tau=1e-13):
    """Re-express the edge basis through the dominant eigenvectors of its Gram.

    Eigenpairs of ``M / h_e`` with eigenvalue below ``tau * max`` are dropped;
    the retained vectors are scaled so that the new basis is orthonormal in
    ``(1/h_e) L2(e)``.
    """
    M = edge_gram(edge, dirs, kappa) / edge.length
    lam, U = np.linalg.eigh(M)
    keep = lam > tau * lam.max()
    T = U[:, keep] / np.sqrt(lam[keep])[None, :]
    T = T[:, ::-1].copy()  # largest eigenvalue first
    T.setflags(write=False)
    return replace(edge, transform=T)


@dataclass(frozen=True)
class BulkWave:
    """``w(x) = exp(i kappa d . (x - center))`` on one element."""

    element: int
    index: int
    direction: np.ndarray
    center: np.ndarray
    kappa: float


def eval_bulk(wave: BulkWave, x):
    x = np.asarray(x, dtype=float)
    return np.exp(1j * wave.kappa * ((x - wave.center) @ wave.direction))


def trace_coefficient(wave: BulkWave, edge: EdgeBasis):
    """Write the trace of ``wave`` on ``edge`` as ``phase * w_rep^e``.

    Returns ``(rep, phase)`` where ``rep`` is the kept direction index sharing
    the trace and ``phase = exp(i kappa d . (x_e - x_K))``.
    """
    rep = int(edge.representative[wave.index])
    phase = np.exp(1j * wave.kappa * ((edge.midpoint - wave.center) @ wave.direction))
    return rep, complex(phase)
