"""Polygonal meshes: construction, text I/O, Voronoi-Lloyd generation and
shape-regularity auditing."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from . import kernels
from .exceptions import MeshFormatError, MeshTopologyError

logger = logging.getLogger(__name__)

Rect = Tuple[float, float, float, float]
UNIT_SQUARE: Rect = (0.0, 1.0, 0.0, 1.0)


def signed_area(verts):
    """Shoelace area, positive for counter-clockwise vertex order."""
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def centroid(verts):
    x, y = verts[:, 0], verts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    return np.array([np.sum((x + xn) * cross), np.sum((y + yn) * cross)]) / (6.0 * a)


def diameter(verts):
    d = verts[:, None, :] - verts[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _is_simple(verts):
    m = len(verts)
    for i in range(m):
        a, b = verts[i], verts[(i + 1) % m]
        for j in range(i + 2, m):
            if i == 0 and j == m - 1:
                continue
            if _segments_cross(a, b, verts[j], verts[(j + 1) % m]):
                return False
    return True


@dataclass(frozen=True)
class PolygonalMesh:
    """Immutable polygonal mesh of a planar domain.

    Edges, adjacency and boundary flags are derived from ``vertices`` and
    ``polygons`` at construction; use :meth:`from_polygons` rather than the
    raw constructor.

    Attributes
    ----------
    vertices : ndarray, shape (nv, 2)
    polygons : tuple of ndarray
        CCW vertex cycles, 0-based.
    edges : ndarray, shape (ne, 2)
        Vertex pairs with ``edges[:, 0] < edges[:, 1]``; numbered in order of
        first appearance while walking the polygons.
    edge_adjacency : ndarray, shape (ne, 2)
        Adjacent polygon ids; the second column is -1 on boundary edges.
    boundary_edges : ndarray
        Ids of edges with exactly one adjacent polygon.
    polygon_edges : tuple of ndarray
        For each polygon, the edge id of each side ``(v[i], v[i+1])``.
    """

    vertices: np.ndarray
    polygons: Tuple[np.ndarray, ...]
    edges: np.ndarray
    edge_adjacency: np.ndarray
    boundary_edges: np.ndarray
    polygon_edges: Tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def from_polygons(cls, vertices, polygons, check=True):
        verts = np.array(vertices, dtype=float).reshape(-1, 2)
        polys = tuple(np.array(p, dtype=np.int64) for p in polygons)
        nv = len(verts)
        if check:
            for k, p in enumerate(polys):
                if len(p) < 3:
                    raise MeshTopologyError(f"polygon {k} has {len(p)} vertices (need >= 3)")
                bad = p[(p < 0) | (p >= nv)]
                if bad.size:
                    raise MeshTopologyError(
                        f"polygon {k} references missing vertex {int(bad[0])} (mesh has {nv})")
                if len(np.unique(p)) != len(p):
                    raise MeshTopologyError(f"polygon {k} repeats a vertex")
                pv = verts[p]
                if signed_area(pv) <= 0.0:
                    raise MeshTopologyError(f"polygon {k} is not counter-clockwise")
                if not _is_simple(pv):
                    raise MeshTopologyError(f"polygon {k} is self-intersecting")

        edge_id = {}
        edges: List[Tuple[int, int]] = []
        adj: List[List[int]] = []
        directed = set()
        poly_edges = []
        for k, p in enumerate(polys):
            ids = np.empty(len(p), dtype=np.int64)
            for i in range(len(p)):
                a, b = int(p[i]), int(p[(i + 1) % len(p)])
                if (a, b) in directed:
                    raise MeshTopologyError(
                        f"edge ({a}, {b}) traversed in the same direction by two polygons "
                        f"(second is polygon {k})")
                directed.add((a, b))
                key = (min(a, b), max(a, b))
                e = edge_id.get(key)
                if e is None:
                    e = len(edges)
                    edge_id[key] = e
                    edges.append(key)
                    adj.append([k])
                else:
                    if len(adj[e]) == 2:
                        raise MeshTopologyError(
                            f"edge {e} {key} is shared by more than two polygons "
                            f"({adj[e][0]}, {adj[e][1]}, {k})")
                    adj[e].append(k)
                ids[i] = e
            poly_edges.append(ids)

        edges_arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
        adj_arr = np.full((len(edges), 2), -1, dtype=np.int64)
        for e, a in enumerate(adj):
            adj_arr[e, : len(a)] = a
        boundary = np.flatnonzero(adj_arr[:, 1] < 0)
        if check:
            _check_hanging_nodes(verts, edges_arr)

        for arr in (verts, edges_arr, adj_arr, boundary, *polys, *poly_edges):
            arr.setflags(write=False)
        return cls(verts, polys, edges_arr, adj_arr, boundary, tuple(poly_edges))

    # -- sizes -------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_polygons(self) -> int:
        return len(self.polygons)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def interior_edges(self):
        return np.flatnonzero(self.edge_adjacency[:, 1] >= 0)

    # -- geometry ----------------------------------------------------------
    def polygon_vertices(self, k):
        return self.vertices[self.polygons[k]]

    def area(self, k):
        return signed_area(self.polygon_vertices(k))

    def areas(self):
        return np.array([self.area(k) for k in range(self.n_polygons)])

    def diameter(self, k):
        return diameter(self.polygon_vertices(k))

    def diameters(self):
        return np.array([self.diameter(k) for k in range(self.n_polygons)])

    def mesh_size(self):
        """h = max_K diam(K)."""
        return float(self.diameters().max())

    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def is_boundary_edge(self, e):
        return self.edge_adjacency[e, 1] < 0

    def bounding_box(self) -> Rect:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return (float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))


def _check_hanging_nodes(verts, edges):
    if len(edges) == 0:
        return
    a = verts[edges[:, 0]]
    d = verts[edges[:, 1]] - a
    len2 = np.sum(d * d, axis=1)
    scale = np.sqrt(len2.max())
    tol = 1e-10 * scale
    tree = cKDTree(verts)
    mids = a + 0.5 * d
    for e in range(len(edges)):
        cand = tree.query_ball_point(mids[e], 0.5 * np.sqrt(len2[e]) + tol)
        for v in cand:
            if v in (edges[e, 0], edges[e, 1]):
                continue
            w = verts[v] - a[e]
            t = (w @ d[e]) / len2[e]
            if 0.0 < t < 1.0 and abs(w[0] * d[e, 1] - w[1] * d[e, 0]) / np.sqrt(len2[e]) < tol:
                raise MeshTopologyError(
                    f"vertex {v} lies inside edge {e} {tuple(edges[e])} (hanging node)")


# -- text format -------------------------------------------------------------

def parse_mesh(text):
    """Parse the ``nv np / x y / m i1 ... im`` text format."""
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(n, tok) for n, tok in lines if tok and not tok[0].startswith("#")]
    if not lines:
        raise MeshFormatError("empty mesh file", line=1)
    n0, head = lines[0]
    try:
        nv, npoly = int(head[0]), int(head[1])
        if len(head) != 2 or nv < 0 or npoly < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise MeshFormatError("header must be 'nv np' (two non-negative integers)", line=n0)
    if len(lines) < 1 + nv + npoly:
        last = lines[-1][0]
        raise MeshFormatError(
            f"expected {nv} vertex and {npoly} polygon records, file ends early", line=last + 1)
    verts = np.empty((nv, 2))
    for i in range(nv):
        n, tok = lines[1 + i]
        try:
            if len(tok) != 2:
                raise ValueError
            verts[i] = float(tok[0]), float(tok[1])
        except ValueError:
            raise MeshFormatError(f"vertex record must be 'x y', got {' '.join(tok)!r}", line=n)
    polys = []
    for i in range(npoly):
        n, tok = lines[1 + nv + i]
        try:
            m = int(tok[0])
            idx = [int(t) for t in tok[1:]]
        except ValueError:
            raise MeshFormatError(f"polygon record must be integers, got {' '.join(tok)!r}", line=n)
        if m != len(idx):
            raise MeshFormatError(f"polygon declares {m} vertices but lists {len(idx)}", line=n)
        polys.append(idx)
    if len(lines) > 1 + nv + npoly:
        raise MeshFormatError("trailing data after last polygon", line=lines[1 + nv + npoly][0])
    if npoly == 0:
        raise MeshTopologyError("mesh has no polygons")
    return PolygonalMesh.from_polygons(verts, polys)


def load_mesh(path):
    return parse_mesh(Path(path).read_text(encoding="utf-8"))


def format_mesh(mesh):
    out = [f"{mesh.n_vertices} {mesh.n_polygons}"]
    out += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    out += [" ".join(map(str, [len(p), *p.tolist()])) for p in mesh.polygons]
    return "\n".join(out) + "\n"


def save_mesh(mesh, path):
    Path(path).write_text(format_mesh(mesh), encoding="utf-8")


def rectangle_mesh(domain: Rect = UNIT_SQUARE, nx=1, ny=1):
    """Structured ``nx x ny`` quadrilateral mesh of a rectangle."""
    x0, x1, y0, y1 = domain
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    verts = np.column_stack([X.ravel(), Y.ravel()])
    polys = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            polys.append([a, a + 1, a + nx + 2, a + nx + 1])
    return PolygonalMesh.from_polygons(verts, polys)


# -- Voronoi-Lloyd -----------------------------------------------------------

def _cells_to_mesh(verts, offsets, domain: Rect):
    x0, x1, y0, y1 = domain
    diam = float(np.hypot(x1 - x0, y1 - y0))
    tol = 1e-9 * diam
    pts = verts.copy()
    # snap to the rectangle so boundary vertices sit exactly on it
    for col, lo, hi in ((0, x0, x1), (1, y0, y1)):
        pts[np.abs(pts[:, col] - lo) < tol, col] = lo
        pts[np.abs(pts[:, col] - hi) < tol, col] = hi
    parent = np.arange(len(pts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(cKDTree(pts).query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(pts))])
    uniq, new_index = np.unique(roots, return_inverse=True)
    new_verts = pts[uniq]
    polys = []
    for c in range(len(offsets) - 1):
        cyc = new_index[offsets[c]:offsets[c + 1]].tolist()
        out = []
        for v in cyc:
            if not out or out[-1] != v:
                out.append(v)
        while len(out) > 1 and out[0] == out[-1]:
            out.pop()
        if len(out) >= 3:
            polys.append(out)
        else:
            logger.warning("dropping collapsed Voronoi cell %d", c)
    return PolygonalMesh.from_polygons(new_verts, polys)


def voronoi_mesh(seeds, domain: Rect = UNIT_SQUARE):
    """Voronoi diagram of ``seeds`` clipped to the rectangle ``domain``."""
    seeds = np.ascontiguousarray(seeds, dtype=float).reshape(-1, 2)
    verts, offsets = kernels.voronoi_cells(seeds, np.asarray(domain, dtype=float))
    return _cells_to_mesh(verts, offsets, domain)


def lloyd_relax(seeds, iterations, domain: Rect = UNIT_SQUARE):
    """Move each seed to the centroid of its clipped Voronoi cell, ``iterations`` times."""
    seeds = np.ascontiguousarray(seeds, dtype=float).reshape(-1, 2)
    rect = np.asarray(domain, dtype=float)
    for _ in range(iterations):
        verts, offsets = kernels.voronoi_cells(seeds, rect)
        new = seeds.copy()
        for c in range(len(seeds)):
            cell = verts[offsets[c]:offsets[c + 1]]
            if len(cell) >= 3:
                new[c] = centroid(cell)
        seeds = new
    return seeds


def generate_voronoi_lloyd(n_seeds, lloyd_iters=100, rng_seed=0, domain: Rect = UNIT_SQUARE,
                           seeds: Optional[Sequence] = None):
    """Voronoi-Lloyd mesh of an axis-aligned rectangle.

    Seeds are drawn uniformly from ``domain`` with ``numpy.random.default_rng(rng_seed)``
    unless given explicitly. Every seed is then displaced by a deterministic
    perturbation of size ``1e-12 * diam(domain)`` from the same generator, which
    breaks exact cocircularity without affecting reproducibility.
    """
    x0, x1, y0, y1 = domain
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate domain {domain}")
    rng = np.random.default_rng(rng_seed)
    if seeds is None:
        if n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        pts = np.column_stack([rng.uniform(x0, x1, n_seeds), rng.uniform(y0, y1, n_seeds)])
    else:
        pts = np.array(seeds, dtype=float).reshape(-1, 2)
    diam = np.hypot(x1 - x0, y1 - y0)
    pts = pts + 1e-12 * diam * rng.standard_normal(pts.shape)
    pts[:, 0] = np.clip(pts[:, 0], x0, x1)
    pts[:, 1] = np.clip(pts[:, 1], y0, y1)
    pts = lloyd_relax(pts, lloyd_iters, domain)
    return voronoi_mesh(pts, domain)


# -- regularity audit --------------------------------------------------------

@dataclass
class RegularityReport:
    """Per-polygon shape measures and the global summary.

    ``inscribed_radius_ratio`` is the radius of the largest disc inside the
    star-shapedness kernel divided by h_K (or, where the kernel is empty, of the
    largest disc inside the polygon itself).
    """

    h_K: np.ndarray
    n_K: np.ndarray
    inscribed_radius_ratio: np.ndarray
    kernel_nonempty: np.ndarray
    min_edge_ratio: np.ndarray
    h: float
    max_edges: int
    rho0: float
    violations: List[Tuple[int, str]]

    @property
    def ok(self):
        return not self.violations


def polygon_kernel(verts):
    """Intersection of the inner half-planes of all edges of a CCW polygon."""
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    pad = 0.01 * float(np.max(hi - lo)) + 1.0e-12
    box = np.array([[lo[0] - pad, lo[1] - pad], [hi[0] + pad, lo[1] - pad],
                    [hi[0] + pad, hi[1] + pad], [lo[0] - pad, hi[1] + pad]])
    ker = box
    m = len(verts)
    for i in range(m):
        a, b = verts[i], verts[(i + 1) % m]
        n = np.array([b[1] - a[1], a[0] - b[0]])
        ker = kernels.clip_halfplane(np.ascontiguousarray(ker), n, float(n @ a))
        if len(ker) == 0:
            break
    return ker


def chebyshev_radius(verts):
    """Largest inscribed disc (center, radius) of a convex CCW polygon, via LP."""
    m = len(verts)
    b_pts = np.roll(verts, -1, axis=0)
    n = np.column_stack([b_pts[:, 1] - verts[:, 1], verts[:, 0] - b_pts[:, 0]])
    norm = np.hypot(n[:, 0], n[:, 1])
    keep = norm > 0
    n, norm, a = n[keep], norm[keep], verts[keep]
    A = np.column_stack([n, norm])
    rhs = np.sum(n * a, axis=1)
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=A, b_ub=rhs,
                  bounds=[(None, None), (None, None), (0, None)], method="highs")
    if not res.success or m < 3:
        return verts.mean(axis=0), 0.0
    return res.x[:2], float(res.x[2])


def _point_segment_dist(p, a, b):
    d = b - a
    t = np.clip(((p - a) @ d) / (d @ d), 0.0, 1.0)
    q = a + t[..., None] * d
    return np.hypot(*(p - q).T)


def points_in_polygon(points, verts):
    """Even-odd crossing test for an ``(n, 2)`` array of points."""
    x, y = points[:, 0][:, None], points[:, 1][:, None]
    xa, ya = verts[:, 0][None, :], verts[:, 1][None, :]
    xb, yb = np.roll(verts[:, 0], -1)[None, :], np.roll(verts[:, 1], -1)[None, :]
    cond = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xa + (y - ya) * (xb - xa) / (yb - ya)
    return (np.sum(cond & (x < xint), axis=1) % 2) == 1


def polygon_inradius(verts, grid=40):
    """Largest disc inside a possibly non-convex polygon (grid search + local refinement)."""
    from scipy.optimize import minimize

    lo, hi = verts.min(axis=0), verts.max(axis=0)
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], grid), np.linspace(lo[1], hi[1], grid))
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    pts = pts[points_in_polygon(pts, verts)]
    if len(pts) == 0:
        return 0.0
    segs = list(zip(verts, np.roll(verts, -1, axis=0)))

    def dist(p):
        p = np.atleast_2d(p)
        return np.min([_point_segment_dist(p, a, b) for a, b in segs], axis=0)

    d = dist(pts)
    start = pts[np.argmax(d)]

    def neg(p):
        if not points_in_polygon(np.atleast_2d(p), verts)[0]:
            return 0.0
        return -float(dist(p)[0])

    res = minimize(neg, start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
    return max(-float(res.fun), float(d.max()))


def audit_regularity(mesh: PolygonalMesh, rho0=0.05):
    """Measure star-shapedness, edge non-degeneracy and edge counts.

    Never raises on a bad mesh: offending polygons are logged and listed in
    ``violations`` as ``(polygon id, reason)``.
    """
    npoly = mesh.n_polygons
    hK = mesh.diameters()
    nK = np.array([len(p) for p in mesh.polygons])
    rho = np.empty(npoly)
    kern = np.zeros(npoly, dtype=bool)
    emin = np.empty(npoly)
    lengths = mesh.edge_lengths()
    violations = []
    for k in range(npoly):
        pv = mesh.polygon_vertices(k)
        ker = polygon_kernel(pv)
        area = signed_area(ker) if len(ker) >= 3 else 0.0
        kern[k] = area > 1e-14 * hK[k] ** 2
        if kern[k]:
            _, r = chebyshev_radius(ker)
        else:
            r = polygon_inradius(pv)
        rho[k] = r / hK[k]
        emin[k] = lengths[mesh.polygon_edges[k]].min() / hK[k]
        if not kern[k]:
            violations.append((k, "G1: not star-shaped (empty kernel)"))
        elif rho[k] < rho0:
            violations.append((k, f"G1: kernel radius ratio {rho[k]:.3g} < rho0={rho0}"))
        if emin[k] < rho0:
            violations.append((k, f"G2: min edge ratio {emin[k]:.3g} < rho0={rho0}"))
    for k, why in violations:
        logger.warning("polygon %d: %s", k, why)
    return RegularityReport(hK, nK, rho, kern, emin, float(hK.max()), int(nK.max()), rho0,
                            violations)
