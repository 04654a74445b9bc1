"""Global dof numbering, assembly of the impedance problem and its direct solve."""

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .element import RCOND_MIN, ElementOperators, build_boundary_terms, build_element
from .exceptions import IllConditioningWarning, SolverError
from .planewave import DEFAULT_TOL_ORTH, DirectionSet, edge_gram, filter_edge, orthonormalize_edge

logger = logging.getLogger(__name__)

DENSE_THRESHOLD = 2000
RESIDUAL_TOL = 1e-10
MAX_REFINEMENTS = 3
# Below this reciprocal condition of the raw edge Gram the inverse has lost
# about half the working digits; such edges are orthonormalized.
EDGE_GRAM_RCOND_MIN = 1e-8


def build_edge_bases(mesh, dirs: DirectionSet, kappa, tol_orth=DEFAULT_TOL_ORTH,
                     svd_filter=False, tau=1e-13, gram_rcond_min=EDGE_GRAM_RCOND_MIN):
    """Filtered trace basis for every mesh edge.

    With ``svd_filter`` every edge basis is orthonormalized and truncated at
    relative eigenvalue ``tau``. Otherwise this happens only on edges whose raw
    trace Gram matrix has reciprocal condition below ``gram_rcond_min``.
    """
    bases = []
    n_fallback = 0
    for e, (i, j) in enumerate(mesh.edges):
        eb = filter_edge(mesh.vertices[i], mesh.vertices[j], dirs, tol_orth, edge=e)
        if svd_filter:
            eb = orthonormalize_edge(eb, dirs, kappa, tau)
        else:
            M = edge_gram(eb, dirs, kappa).real  # midpoint-centred traces: real sinc Gram
            if 1.0 / np.linalg.cond(M, 1) < gram_rcond_min:
                eb = orthonormalize_edge(eb, dirs, kappa, tau)
                n_fallback += 1
        bases.append(eb)
    if n_fallback:
        logger.info("SVD edge filtering applied to %d/%d ill-conditioned edges",
                    n_fallback, mesh.n_edges)
    return bases


@dataclass
class DofMap:
    """Edge-wise global numbering: edge ``e`` owns ``offsets[e]:offsets[e+1]``."""

    offsets: np.ndarray
    element_dofs: List[np.ndarray]

    @property
    def counts(self):
        return np.diff(self.offsets)

    @property
    def n_dofs(self) -> int:
        return int(self.offsets[-1])

    def edge_slice(self, e):
        return slice(int(self.offsets[e]), int(self.offsets[e + 1]))


def build_dof_map(mesh, edge_bases):
    """Number dofs edge by edge in mesh edge order, basis functions in ``kept`` order."""
    if mesh.n_polygons == 0 or mesh.n_edges == 0:
        raise ValueError("cannot number dofs on an empty mesh")
    if len(edge_bases) != mesh.n_edges:
        raise ValueError(f"{len(edge_bases)} edge bases for {mesh.n_edges} edges")
    counts = np.array([b.n_dofs for b in edge_bases], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    gather = []
    for k in range(mesh.n_polygons):
        idx = [np.arange(offsets[e], offsets[e + 1]) for e in mesh.polygon_edges[k]]
        gather.append(np.concatenate(idx))
    return DofMap(offsets, gather)


@dataclass
class GlobalSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    boundary_mass: sp.csr_matrix
    dofmap: DofMap
    kappa: float
    solution: Optional[np.ndarray] = None
    stats: Dict[str, float] = field(default_factory=dict)
    admissibility: Dict[str, float] = field(default_factory=dict)

    @property
    def n_dofs(self):
        return self.matrix.shape[0]


def build_operators(mesh, edge_bases, dirs, kappa, sigma=1.0, recipe="d-recipe", c0=1.0,
                    min_rcond=RCOND_MIN):
    return [build_element(mesh, k, edge_bases, dirs, kappa, sigma, recipe, c0, min_rcond)
            for k in range(mesh.n_polygons)]


def boundary_normal(mesh, e):
    """Outward unit normal of boundary edge ``e``."""
    k = int(mesh.edge_adjacency[e, 0])
    poly = mesh.polygons[k]
    side = int(np.flatnonzero(mesh.polygon_edges[k] == e)[0])
    a = mesh.vertices[poly[side]]
    b = mesh.vertices[poly[(side + 1) % len(poly)]]
    t = (b - a) / np.hypot(*(b - a))
    return np.array([t[1], -t[0]])


def _triplets(rows, cols, vals, n):
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.zeros(0, dtype=complex)
    order = np.lexsort((cols, rows))
    A = sp.coo_matrix((vals[order], (rows[order], cols[order])), shape=(n, n))
    return A.tocsr()


def assemble(mesh, dofmap: DofMap, operators: List[ElementOperators], edge_bases, dirs,
             kappa, g: Optional[Callable] = None, n_points=None):
    """Scatter local stiffness matrices and add impedance boundary terms.

    ``g(points, normal)`` gives the impedance data on a boundary edge; ``None``
    means homogeneous data.
    """
    n = dofmap.n_dofs
    if len(operators) != mesh.n_polygons:
        raise ValueError(f"{len(operators)} element operators for {mesh.n_polygons} polygons")
    rows, cols, vals = [], [], []
    for k, op in enumerate(operators):
        idx = dofmap.element_dofs[k]
        if op.Ah.shape != (len(idx), len(idx)):
            raise ValueError(f"element {k}: local matrix {op.Ah.shape} does not match "
                             f"{len(idx)} gathered dofs")
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(op.Ah.ravel())
    rhs = np.zeros(n, dtype=complex)
    brows, bcols, bvals = [], [], []
    for e in mesh.boundary_edges:
        sl = dofmap.edge_slice(e)
        idx = np.arange(sl.start, sl.stop)
        normal = boundary_normal(mesh, e)
        ge = None if g is None else (lambda pts, _n=normal: g(pts, _n))
        mass, load = build_boundary_terms(edge_bases[e], dirs, kappa, ge, n_points)
        brows.append(np.repeat(idx, len(idx)))
        bcols.append(np.tile(idx, len(idx)))
        bvals.append(mass.ravel())
        rhs[sl] += load
    Mb = _triplets(brows, bcols, bvals, n)
    A = _triplets(rows + brows, cols + bcols, vals + bvals, n)
    adm = {
        "max_hk": max(op.check.hk for op in operators),
        "n_fail_A1": sum(not op.check.pass_A1 for op in operators),
        "n_fail_proj": sum(not op.check.pass_proj for op in operators),
        "min_gram_rcond": min(op.check.rcond for op in operators),
    }
    return GlobalSystem(A, rhs, Mb, dofmap, float(kappa), admissibility=adm)


def _sparse_rcond(A, lu):
    inv = spla.LinearOperator(A.shape, matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="H"),
                              dtype=complex)
    try:
        inv_norm = spla.onenormest(inv)
    except Exception:  # onenormest can fail on tiny systems
        inv_norm = np.abs(np.linalg.inv(A.toarray())).sum(axis=0).max()
    return 1.0 / (spla.norm(A, 1) * inv_norm)


def equilibrate(A):
    """Row then column max-norm scalings ``r, c`` so that ``diag(r) A diag(c)`` has unit row/column maxima.

    Returns ``None`` when ``A`` has an all-zero row or column.
    """
    A = sp.csr_matrix(A)
    absA = abs(A)
    rmax = absA.max(axis=1).toarray().ravel()
    if np.any(rmax == 0):
        return None
    r = 1.0 / rmax
    cmax = (sp.diags(r) @ absA).max(axis=0).toarray().ravel()
    if np.any(cmax == 0):
        return None
    return r, 1.0 / cmax


def solve(system: GlobalSystem, dense_threshold=DENSE_THRESHOLD, tol=RESIDUAL_TOL,
          max_refinements=MAX_REFINEMENTS):
    """Direct LU solve with up to ``max_refinements`` steps of iterative refinement.

    The matrix is row/column equilibrated first; the reported ``rcond`` refers
    to the equilibrated matrix. Dense LAPACK LU for ``N <= dense_threshold``,
    SuperLU otherwise. Stores the solution and statistics on ``system`` and
    returns the solution.
    """
    A = system.matrix
    b = system.rhs
    n = A.shape[0]
    t0 = time.perf_counter()
    bnorm = np.linalg.norm(b)
    scal = equilibrate(A)
    if scal is None:
        raise SolverError("global matrix has an all-zero row or column; "
                          f"admissibility: {system.admissibility}", rcond=0.0,
                          admissibility=system.admissibility)
    r, c = scal
    As = sp.diags(r) @ A @ sp.diags(c)
    if n <= dense_threshold:
        Ad = As.toarray()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(Ad)
        anorm = np.linalg.norm(Ad, 1)
        if np.any(np.diag(lu) == 0):
            rcond = 0.0
        else:
            rcond = float(sla.lapack.zgecon(lu, anorm, norm="1")[0])
        fill = n * n
        inv_s = lambda y: sla.lu_solve((lu, piv), y)  # noqa: E731
        method = "dense-lu"
    else:
        try:
            lu = spla.splu(As.tocsc(), permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SolverError(f"sparse LU failed: {exc}", rcond=0.0,
                              admissibility=system.admissibility) from exc
        rcond = float(_sparse_rcond(As, lu))
        fill = lu.L.nnz + lu.U.nnz
        inv_s = lu.solve
        method = "sparse-lu"
    if not rcond > np.finfo(float).eps:
        raise SolverError(
            f"global matrix is singular to working precision (rcond = {rcond:.3g}); "
            f"admissibility: {system.admissibility}", rcond=rcond,
            admissibility=system.admissibility)

    def apply_inv(rhs):
        return c * inv_s(r * rhs)

    x = apply_inv(b) if bnorm > 0 else np.zeros(n, dtype=complex)
    res = np.linalg.norm(A @ x - b) / bnorm if bnorm > 0 else 0.0
    steps = 0
    while res > tol and steps < max_refinements:
        x = x + apply_inv(b - A @ x)
        res = np.linalg.norm(A @ x - b) / bnorm
        steps += 1
    elapsed = time.perf_counter() - t0
    if res > tol:
        warnings.warn(f"relative residual {res:.3g} above {tol:g} after {steps} refinements "
                      f"(rcond = {rcond:.3g})", IllConditioningWarning, stacklevel=2)
    system.solution = x
    system.stats = {"method": method, "n": n, "nnz": A.nnz, "fill": fill, "rcond": rcond,
                    "residual": float(res), "refinements": steps, "solve_s": elapsed}
    return x


def write_matrix_market(system: GlobalSystem, path, rhs_path=None):
    """Dump the assembled matrix (complex general coordinate format) and optionally the rhs."""
    from scipy.io import mmwrite

    mmwrite(str(path), system.matrix.tocoo(), field="complex", symmetry="general")
    if rhs_path is not None:
        mmwrite(str(rhs_path), sp.coo_matrix(system.rhs.reshape(-1, 1)), field="complex",
                symmetry="general")
