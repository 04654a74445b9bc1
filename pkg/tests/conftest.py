import numpy as np
import pytest

from nctvem.mesh import PolygonalMesh


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_convex_polygon(rng, n=None, scale=1.0, center=(0.0, 0.0)):
    """Random convex polygon: sorted angles on a perturbed circle, CCW."""
    n = n or int(rng.integers(3, 9))
    while True:
        theta = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
        gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
        if gaps.max() < np.pi * 0.9 and gaps.min() > 0.15:
            break
    pts = np.column_stack([np.cos(theta), np.sin(theta)]) * 0.5 * scale
    return pts + np.asarray(center)


@pytest.fixture
def unit_square():
    return PolygonalMesh.from_polygons([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])


def random_star_polygon(rng, n=None):
    """Random polygon star-shaped about the origin (sorted angles, random radii), CCW."""
    n = n or int(rng.integers(3, 10))
    while True:
        theta = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
        gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
        if gaps.max() < 0.9 * np.pi and gaps.min() > 0.2:
            break
    r = rng.uniform(0.5, 1.0, n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def single_element_mesh(verts, kappa=None, hk=None):
    """One-polygon mesh; with ``hk`` the polygon is rescaled so that ``diam * kappa = hk``."""
    from nctvem.mesh import diameter

    verts = np.asarray(verts, dtype=float)
    if hk is not None:
        verts = verts * (hk / (kappa * diameter(verts)))
    return PolygonalMesh.from_polygons(verts, [list(range(len(verts)))])
