"""Element-local Trefftz virtual element operators.

Conventions
-----------
Local dofs on a polygon are ordered edge by edge (CCW), and inside an edge
in the order of ``EdgeBasis.kept`` (or of the transformed basis). Matrices
act on coefficient column vectors:

* ``G[l, m] = a_K(w_m, w_l)`` with ``a_K(u, v) = int grad u . conj(grad v) - kappa^2 u conj(v)``.
* ``B[l, i] = a_K(phi_i, w_l)`` for the canonical basis ``phi_i`` of the local space.
* ``D[i, m] = dof_i(w_m)``.
* ``Pi[:, i]`` holds the plane-wave coefficients of the projection of ``phi_i``.
* ``Ah[i, j] = a_h(phi_j, phi_i)``, i.e. row = test function.

Plane waves are centred at ``center`` (the area centroid for convex polygons).
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as sla

from .exceptions import (DegenerateElementError, IllConditioningWarning,
                         InadmissibleElementWarning, NegativeStabilizationWarning)
from .mesh import centroid, chebyshev_radius, diameter, polygon_kernel, signed_area
from .planewave import DirectionSet, EdgeBasis, edge_gram
from .quad import default_edge_points, edge_rule, polygon_osc_integral

logger = logging.getLogger(__name__)

DIRICHLET_EIGEN_CONSTANT = 0.6197
PROJECTOR_THRESHOLD = 0.5538
RCOND_MIN = 1e-14


# -- admissibility -----------------------------------------------------------

def is_convex(verts):
    d1 = np.roll(verts, -1, axis=0) - verts
    d2 = np.roll(d1, -1, axis=0)
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return bool(np.all(cross >= -1e-14 * np.max(np.abs(d1)) ** 2))


@dataclass
class AdmissibilityCheck:
    """Mesh-size / wavenumber gates for one element.

    ``pass_A1``: k^2 is certainly below the first Dirichlet eigenvalue
    (``h_K kappa <= sqrt(c0 * 0.6197)``), so the dofs are unisolvent.
    ``pass_proj``: ``h_K kappa < 0.5538``, under which the a_K-projector is
    known to be well posed. The threshold is proven for convex elements; for
    non-convex ones it is applied anyway and ``convex`` records the caveat.
    ``rcond`` is filled in once the Gram matrix has been factorized.
    """

    hk: float
    convex: bool
    c0: float
    pass_A1: bool
    pass_proj: bool
    rcond: float = float("nan")

    @property
    def condition_estimate(self):
        return 1.0 / self.rcond if self.rcond > 0 else float("inf")


def check_admissibility(verts, kappa, c0=1.0):
    hk = diameter(np.asarray(verts, dtype=float)) * kappa
    return admissibility_from_hk(hk, convex=is_convex(np.asarray(verts, dtype=float)), c0=c0)


def admissibility_from_hk(hk, convex=True, c0=1.0):
    if not 0.0 < c0 <= 1.0:
        raise ValueError("c0 must lie in (0, 1]")
    pass_a1 = hk <= np.sqrt(c0 * DIRICHLET_EIGEN_CONSTANT)
    pass_proj = hk < PROJECTOR_THRESHOLD
    return AdmissibilityCheck(float(hk), bool(convex), c0, bool(pass_a1), bool(pass_proj))


def star_center(verts):
    """A point the polygon is star-shaped about: the centroid if convex, else the kernel's Chebyshev centre."""
    verts = np.asarray(verts, dtype=float)
    if is_convex(verts):
        return centroid(verts)
    ker = polygon_kernel(verts)
    if len(ker) >= 3 and signed_area(ker) > 0:
        c, _ = chebyshev_radius(ker)
        return np.asarray(c)
    logger.warning("polygon is not star-shaped; using its centroid")
    return centroid(verts)


# -- local operators ---------------------------------------------------------

@dataclass
class LocalDofSet:
    """Local dofs of one element as ``(edge id, basis position)`` pairs."""

    element: int
    edges: List[int]
    counts: List[int]

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.counts)]).astype(np.int64)

    @property
    def size(self) -> int:
        return int(sum(self.counts))

    @property
    def entries(self):
        return [(e, j) for e, c in zip(self.edges, self.counts) for j in range(c)]


def build_gram(verts, dirs: DirectionSet, kappa, center):
    """``G[l, m] = kappa^2 (d_m . d_l - 1) int_K exp(i kappa (d_m - d_l) . (x - x_K)) dx``.

    Only the strict upper triangle is integrated; the lower one is its
    conjugate and the diagonal is exactly zero.
    """
    d = dirs.directions
    p = dirs.p
    iu, ju = np.triu_indices(p, k=1)
    vecs = d[ju] - d[iu]
    shifted = np.asarray(verts, dtype=float) - np.asarray(center, dtype=float)
    vals = polygon_osc_integral(shifted, vecs, kappa)
    coef = kappa**2 * (np.sum(d[ju] * d[iu], axis=1) - 1.0)
    G = np.zeros((p, p), dtype=complex)
    G[iu, ju] = coef * vals
    G[ju, iu] = np.conj(G[iu, ju])
    return G


def outward_normal(edge: EdgeBasis, a_local):
    """Outward unit normal of the element side that starts at ``a_local``."""
    t = edge.tangent
    if not np.array_equal(a_local, edge.a):
        t = -t
    return np.array([t[1], -t[0]])


def edge_dof_matrix(edge: EdgeBasis, dirs: DirectionSet, kappa, center):
    """``D_e[j, m] = dof_{e,j}(w_m^K)`` for the dofs living on one edge."""
    f = edge.frequencies(dirs)
    d = dirs.directions
    beta = 0.5 * kappa * edge.length * ((d[None, :, :] - f[:, None, :]) @ edge.tangent)
    phase = np.exp(1j * kappa * (d @ (edge.midpoint - center)))
    De = phase[None, :] * np.sinc(beta / np.pi)
    if edge.transform is not None:
        De = edge.transform.conj().T @ De
    return De


def build_dof_coupling(verts, local_edges: List[EdgeBasis], dirs: DirectionSet, kappa, center):
    """Return ``(B, D)`` for one element.

    ``B[l, i] = a_K(phi_i, w_l) = sum_e int_e phi_i conj(grad w_l . n_e) ds``; since
    the normal derivative of ``w_l`` restricted to ``e`` is ``i kappa (d_l . n_e)``
    times a phase times the kept trace ``w_rep``, each row has one nonzero
    entry per edge. With a transformed edge basis the trace is expanded in
    the orthonormal functions instead.
    """
    verts = np.asarray(verts, dtype=float)
    center = np.asarray(center, dtype=float)
    d = dirs.directions
    p = dirs.p
    sizes = [e.n_dofs for e in local_edges]
    off = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    B = np.zeros((p, off[-1]), dtype=complex)
    D = np.zeros((off[-1], p), dtype=complex)
    for s, edge in enumerate(local_edges):
        n = outward_normal(edge, verts[s])
        flux = 1j * kappa * (d @ n)  # normal derivative factor of each wave
        De = edge_dof_matrix(edge, dirs, kappa, center)
        D[off[s]:off[s + 1]] = De
        if edge.transform is None:
            phase = np.exp(1j * kappa * (d @ (edge.midpoint - center)))
            cols = np.array([edge.position(r) for r in edge.representative])
            B[np.arange(p), off[s] + cols] = np.conj(flux * phase) * edge.length
        else:
            B[:, off[s]:off[s + 1]] = np.conj(flux)[:, None] * edge.length * De.conj().T
    return B, D


def _lu_with_rcond(A):
    lu, piv = sla.lu_factor(A, check_finite=True)
    anorm = np.linalg.norm(A, 1)
    if anorm == 0.0 or np.any(np.diag(lu) == 0):
        return lu, piv, 0.0
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    return lu, piv, float(rcond)


def _factored_solve(B, D):
    """``(B D)^{-1} B`` without forming ``B D``.

    With ``B^H = Q_B R_B`` and ``D = Q_D R_D`` the product is
    ``R_B^H (Q_B^H Q_D) R_D``; the ``R_B^H`` factors cancel, the middle factor
    is close to unitary and only the triangular ``R_D`` carries the plane-wave
    ill-conditioning, so the error grows like ``cond(D)`` instead of ``cond(G)``.
    """
    QB, _ = np.linalg.qr(B.conj().T)
    QD, RD = np.linalg.qr(D)
    Z = np.linalg.solve(QB.conj().T @ QD, QB.conj().T)
    return sla.solve_triangular(RD, Z)


def build_projector(G, B, check: Optional[AdmissibilityCheck] = None, element=None,
                    min_rcond=RCOND_MIN, D=None):
    """Plane-wave coefficients ``Pi`` of the projected local basis, ``G Pi = B``.

    Warns when the element is outside the proven well-posedness range but
    attempts the solve anyway. Raises :class:`DegenerateElementError` when the
    reciprocal condition estimate of ``G`` (pivoted LU) is below ``min_rcond``.

    When the dof matrix ``D`` is given (and has at least as many rows as
    there are waves) the system is solved through the factorization
    ``G = B D`` instead, which keeps ``Pi D = I`` accurate on small elements.
    """
    hk = check.hk if check is not None else float("nan")
    if check is not None and not check.pass_proj:
        warnings.warn(
            f"element {element}: h_K*kappa = {hk:.4g} >= {PROJECTOR_THRESHOLD}; "
            "projector well-posedness not guaranteed", InadmissibleElementWarning, stacklevel=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv, rcond = _lu_with_rcond(G)
    if check is not None:
        check.rcond = rcond
    if not rcond >= min_rcond:
        raise DegenerateElementError(
            f"element {element}: plane-wave Gram matrix is numerically singular "
            f"(rcond = {rcond:.3g}, h_K*kappa = {hk:.4g})", element=element, hk=hk, rcond=rcond)
    if D is not None and D.shape[0] >= D.shape[1]:
        try:
            return _factored_solve(B, D)
        except (np.linalg.LinAlgError, ValueError):
            logger.debug("element %s: factored solve failed, using LU", element)
    return sla.lu_solve((lu, piv), B)


def build_edge_projection(edge: EdgeBasis, dirs: DirectionSet, kappa):
    """Edge Gram of the dof basis and the map ``dofs -> L2(e)-projection coefficients``.

    The projection coefficients ``c`` of a function with dofs ``delta`` on this
    edge solve ``M c = h_e delta``; the returned map is ``h_e M^{-1}``.
    """
    M = edge_gram(edge, dirs, kappa, raw=False)
    if edge.transform is not None:
        # orthonormal in (1/h_e) L2(e): M = h_e I up to rounding
        return M, np.eye(edge.n_dofs, dtype=complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv, rcond = _lu_with_rcond(M)
    if not rcond >= RCOND_MIN:
        raise DegenerateElementError(
            f"edge {edge.edge}: trace Gram matrix is numerically singular (rcond = {rcond:.3g}); "
            "enable the SVD edge filter", rcond=rcond)
    P = edge.length * sla.lu_solve((lu, piv), np.eye(edge.n_dofs, dtype=complex))
    return M, P


def build_stabilization(Pi, D, G, sigma=1.0, recipe="d-recipe", element=None):
    """Diagonal stabilization weights in dof space.

    ``recipe="d-recipe"``: ``s_i = sigma * a_K(Pi phi_i, Pi phi_i)``.
    ``recipe="identity"``: ``s_i = sigma`` (plain dof-dof product).
    Returns ``S = diag(s)``.
    """
    if recipe == "d-recipe":
        s = sigma * np.real(np.einsum("mi,ml,li->i", Pi.conj(), G, Pi))
        # A synthetic-constant dof in the raw basis is invisible to every wave
        # (Pi column exactly zero); give it the dof-dof weight instead of 0.
        dead = ~np.any(Pi != 0, axis=0)
        s[dead] = sigma
        if np.any(s < 0):
            warnings.warn(f"element {element}: {int(np.sum(s < 0))} negative stabilization "
                          f"weights (min {s.min():.3g})", NegativeStabilizationWarning,
                          stacklevel=2)
    elif recipe == "identity":
        s = np.full(Pi.shape[1], float(sigma))
    else:
        raise ValueError(f"unknown stabilization recipe {recipe!r}")
    return np.diag(s).astype(complex)


def build_local_stiffness(Pi, G, S, D):
    """``Ah = Pi^H G Pi + (I - D Pi)^H S (I - D Pi)``."""
    R = np.eye(D.shape[0]) - D @ Pi
    return Pi.conj().T @ G @ Pi + R.conj().T @ S @ R


def boundary_moments(edge: EdgeBasis, dirs: DirectionSet, kappa, g, n_points=None):
    """``gamma_k = int_e g conj(psi_k) ds`` by Gauss-Legendre quadrature."""
    if n_points is None:
        n_points = default_edge_points(kappa, edge.length)
    pts, w = edge_rule(edge.a, edge.b, n_points)
    vals = edge.values(dirs, kappa, pts)
    return (w * g(pts)) @ vals.conj()


def build_boundary_terms(edge: EdgeBasis, dirs: DirectionSet, kappa, g=None, n_points=None):
    """Impedance mass block and load vector for one boundary edge.

    Mass: ``i kappa int_e Pi_e u conj(Pi_e v) ds`` over the edge dofs, equal to
    ``i kappa h_e^2 M^{-1}``. Load: ``F(phi_i) = int_e g conj(Pi_e phi_i) ds``,
    equal to ``h_e M^{-1} gamma``.
    """
    M, P = build_edge_projection(edge, dirs, kappa)
    mass = 1j * kappa * edge.length * P if edge.transform is None else \
        1j * kappa * edge.length * np.eye(edge.n_dofs)
    if g is None:
        return mass, np.zeros(edge.n_dofs, dtype=complex)
    gamma = boundary_moments(edge, dirs, kappa, g, n_points)
    rhs = P @ gamma if edge.transform is None else gamma
    return mass, rhs


@dataclass
class ElementOperators:
    element: int
    center: np.ndarray
    dofs: LocalDofSet
    check: AdmissibilityCheck
    G: np.ndarray
    B: np.ndarray
    D: np.ndarray
    Pi: np.ndarray
    S: np.ndarray
    Ah: np.ndarray
    warnings: List[str] = field(default_factory=list)

    @property
    def stabilization_weights(self):
        return np.real(np.diag(self.S))


def build_element(mesh, k, edge_bases, dirs: DirectionSet, kappa, sigma=1.0,
                  recipe="d-recipe", c0=1.0, min_rcond=RCOND_MIN):
    """All local operators for polygon ``k`` of ``mesh``."""
    verts = mesh.polygon_vertices(k)
    center = star_center(verts)
    local = [edge_bases[e] for e in mesh.polygon_edges[k]]
    dofset = LocalDofSet(k, [int(e) for e in mesh.polygon_edges[k]], [b.n_dofs for b in local])
    check = check_admissibility(verts, kappa, c0)
    G = build_gram(verts, dirs, kappa, center)
    B, D = build_dof_coupling(verts, local, dirs, kappa, center)
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        Pi = build_projector(G, B, check, element=k, min_rcond=min_rcond, D=D)
        S = build_stabilization(Pi, D, G, sigma, recipe, element=k)
    for w in caught:
        notes.append(str(w.message))
        logger.debug("%s", w.message)
        warnings.warn(w.message, w.category, stacklevel=2)
    Ah = build_local_stiffness(Pi, G, S, D)
    return ElementOperators(k, center, dofset, check, G, B, D, Pi, S, Ah, notes)
