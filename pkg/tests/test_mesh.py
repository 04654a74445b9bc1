import numpy as np
import pytest

from nctvem.exceptions import MeshFormatError, MeshTopologyError
from nctvem.mesh import (PolygonalMesh, audit_regularity, format_mesh, generate_voronoi_lloyd,
                         load_mesh, parse_mesh, polygon_kernel, rectangle_mesh, save_mesh,
                         signed_area, voronoi_mesh)

SQUARE_TXT = """# unit square
4 1
0 0
1 0
1 1
0 1
4 0 1 2 3
"""
TWO_TRI_TXT = "4 2\n0 0\n1 0\n1 1\n0 1\n3 0 1 2\n3 0 2 3\n"


def _interior_orientation_ok(mesh):
    for e in mesh.interior_edges:
        seen = []
        for k in mesh.edge_adjacency[e]:
            side = int(np.flatnonzero(mesh.polygon_edges[k] == e)[0])
            p = mesh.polygons[k]
            seen.append((int(p[side]), int(p[(side + 1) % len(p)])))
        if seen[0] != seen[1][::-1]:
            return False
    return True


def test_load_unit_square(tmp_path):
    path = tmp_path / "sq.mesh"
    path.write_text(SQUARE_TXT)
    m = load_mesh(path)
    assert (m.n_vertices, m.n_polygons, m.n_edges, len(m.boundary_edges)) == (4, 1, 4, 4)


def test_two_triangles_share_one_edge():
    m = parse_mesh(TWO_TRI_TXT)
    assert len(m.interior_edges) == 1 and len(m.boundary_edges) == 4
    assert tuple(m.edges[m.interior_edges[0]]) == (0, 2)
    assert _interior_orientation_ok(m)


def test_missing_vertex_is_topology_error():
    with pytest.raises(MeshTopologyError, match="missing vertex 7"):
        parse_mesh("4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 7\n")


@pytest.mark.parametrize("text, line", [
    ("4\n0 0\n", 1),
    ("3 1\n0 0\n1 x\n0 1\n3 0 1 2\n", 3),
    ("3 1\n0 0\n1 0\n0 1\n4 0 1 2\n", 5),
    ("3 1\n0 0\n1 0\n", 4),  # first missing record
    ("3 1\n0 0\n1 0\n0 1\n3 0 1 2\n1 1\n", 6),
])
def test_parse_errors_report_line(text, line):
    with pytest.raises(MeshFormatError) as exc:
        parse_mesh(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


@pytest.mark.parametrize("polys, msg", [
    ([[0, 3, 2, 1]], "counter-clockwise"),
    ([[0, 2, 1, 3]], "counter-clockwise|self-intersecting"),
    ([[0, 1, 2], [0, 1, 3]], "same direction"),
    ([[0, 1]], "need >= 3"),
])
def test_topology_errors(polys, msg):
    verts = [[0, 0], [1, 0], [1, 1], [0, 1]]
    with pytest.raises(MeshTopologyError, match=msg):
        PolygonalMesh.from_polygons(verts, polys)


def test_hanging_node_rejected():
    verts = [[0, 0], [1, 0], [1, 1], [0, 1], [2, 0], [2, 0.5], [2, 1], [1, 0.5]]
    with pytest.raises(MeshTopologyError, match="hanging node"):
        PolygonalMesh.from_polygons(verts, [[0, 1, 2, 3], [1, 4, 5, 6, 2]])


def test_format_round_trip(tmp_path):
    m = generate_voronoi_lloyd(12, lloyd_iters=3, rng_seed=4)
    save_mesh(m, tmp_path / "v.mesh")
    m2 = load_mesh(tmp_path / "v.mesh")
    np.testing.assert_array_equal(m.vertices, m2.vertices)
    assert all(np.array_equal(a, b) for a, b in zip(m.polygons, m2.polygons))
    assert format_mesh(m2) == format_mesh(m)


def test_voronoi_single_seed_is_domain():
    dom = (0.0, 2.0, -1.0, 0.5)
    m = generate_voronoi_lloyd(1, lloyd_iters=5, rng_seed=0, domain=dom)
    assert m.n_polygons == 1 and m.n_vertices == 4
    assert m.area(0) == pytest.approx(3.0, rel=1e-14)
    assert m.bounding_box() == dom


def test_voronoi_four_symmetric_seeds():
    seeds = [[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]]
    m = voronoi_mesh(seeds)
    assert m.n_polygons == 4 and m.n_vertices == 9 and len(m.interior_edges) == 4
    np.testing.assert_allclose(m.areas(), 0.25, rtol=1e-14)
    np.testing.assert_allclose(m.edge_lengths(), 0.5, rtol=1e-14)


@pytest.mark.parametrize("n", [8, 32])
def test_voronoi_cell_count(n):
    m = generate_voronoi_lloyd(n, lloyd_iters=100, rng_seed=0)
    assert m.n_polygons == n
    assert m.areas().sum() == pytest.approx(1.0, rel=1e-12)
    assert _interior_orientation_ok(m)
    assert audit_regularity(m).kernel_nonempty.all()


@pytest.mark.parametrize("seed", [0, 3, 11])
def test_area_sum_equals_domain(seed):
    dom = (-1.0, 2.0, 0.0, 0.7)
    m = generate_voronoi_lloyd(40, lloyd_iters=2, rng_seed=seed, domain=dom)
    assert m.areas().sum() == pytest.approx(3.0 * 0.7, rel=1e-12)


def test_voronoi_bit_reproducible():
    a = generate_voronoi_lloyd(30, lloyd_iters=10, rng_seed=9)
    b = generate_voronoi_lloyd(30, lloyd_iters=10, rng_seed=9)
    assert a.vertices.tobytes() == b.vertices.tobytes()
    assert format_mesh(a) == format_mesh(b)


def test_voronoi_rejects_bad_input():
    with pytest.raises(ValueError):
        generate_voronoi_lloyd(0)
    with pytest.raises(ValueError):
        generate_voronoi_lloyd(4, domain=(0, 0, 0, 1))


def test_rectangle_mesh():
    m = rectangle_mesh((0, 2, 0, 1), 4, 2)
    assert m.n_polygons == 8 and len(m.boundary_edges) == 12
    assert m.mesh_size() == pytest.approx(np.hypot(0.5, 0.5))
    assert _interior_orientation_ok(m)


def test_audit_unit_square(unit_square):
    rep = audit_regularity(unit_square)
    assert rep.kernel_nonempty[0] and rep.ok
    assert rep.inscribed_radius_ratio[0] == pytest.approx(0.5 / np.sqrt(2), rel=1e-6)
    assert rep.min_edge_ratio[0] == pytest.approx(1 / np.sqrt(2))
    assert rep.h == pytest.approx(np.sqrt(2)) and rep.max_edges == 4


def test_audit_regular_hexagon():
    t = np.arange(6) * np.pi / 3
    m = PolygonalMesh.from_polygons(np.column_stack([np.cos(t), np.sin(t)]), [range(6)])
    rep = audit_regularity(m)
    assert rep.kernel_nonempty[0] and rep.n_K[0] == 6
    # inradius sqrt(3)/2, diameter 2
    assert rep.inscribed_radius_ratio[0] == pytest.approx(np.sqrt(3) / 4, rel=1e-6)


def test_audit_l_shape():
    verts = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]
    m = PolygonalMesh.from_polygons(verts, [range(6)])
    rep = audit_regularity(m)
    assert rep.kernel_nonempty[0]
    # kernel is the unit square [0,1]^2, inscribed radius 0.5, h_K = 2 sqrt(2)
    ker = polygon_kernel(m.polygon_vertices(0))
    assert signed_area(ker) == pytest.approx(1.0, rel=1e-12)
    assert rep.inscribed_radius_ratio[0] == pytest.approx(0.5 / (2 * np.sqrt(2)), rel=1e-6)
    assert rep.inscribed_radius_ratio[0] < 0.5 / np.sqrt(2)


def test_audit_flags_non_star_shaped_without_raising():
    # comb: two deep notches leave no common visibility point
    verts = [[0, 0], [3, 0], [3, 3], [2.9, 3], [2.9, 0.1], [0.1, 0.1], [0.1, 3], [0, 3]]
    m = PolygonalMesh.from_polygons(verts, [range(8)])
    rep = audit_regularity(m)
    assert not rep.kernel_nonempty[0]
    assert any("G1" in why for _, why in rep.violations)


def test_audit_short_edge_violation():
    verts = [[0, 0], [1, 0], [1, 0.01], [1, 1], [0, 1]]
    rep = audit_regularity(PolygonalMesh.from_polygons(verts, [range(5)]), rho0=0.05)
    assert any("G2" in why for _, why in rep.violations)
