import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctvem.quad import (default_triangle_order, edge_osc_integral, edge_quadrature,
                         gauss_legendre, polygon_osc_integral, polygon_quadrature, polygon_rule,
                         triangle_rule)

from conftest import random_convex_polygon

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
coord = st.floats(-2.0, 2.0, allow_nan=False)


def test_edge_integral_zero_frequency():
    assert edge_osc_integral([0, 0], [3, 4], [0.0, 0.0], 5.0) == pytest.approx(5.0)


def test_edge_integral_perpendicular_frequency():
    a, b, v, k = np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([0.0, 1.3]), 4.0
    mid = 0.5 * (a + b)
    assert edge_osc_integral(a, b, v, k) == pytest.approx(2.0 * np.exp(1j * k * v @ mid), abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(coord, coord, coord, coord, st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 30))
def test_edge_integral_matches_gauss(ax, ay, bx, by, vx, vy, k):
    a, b, v = np.array([ax, ay]), np.array([bx, by]), np.array([vx, vy])
    if np.hypot(*(b - a)) < 1e-3:
        return
    ref = edge_quadrature(a, b, lambda x: np.exp(1j * k * (x @ v)), 64)
    assert abs(edge_osc_integral(a, b, v, k) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_edge_integral_series_branch_continuous():
    a, b = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    for beta in (1e-9, 1e-8, 1.0001e-8):
        v = np.array([2 * beta, 0.0])
        exact = np.exp(1j * beta) * np.sin(beta) / beta
        assert abs(edge_osc_integral(a, b, v, 1.0) - exact) < 1e-15


def test_edge_integral_conjugate_symmetry(rng):
    a, b = rng.normal(size=2), rng.normal(size=2)
    v = rng.normal(size=2)
    assert edge_osc_integral(a, b, v, 3.0) == pytest.approx(np.conj(edge_osc_integral(a, b, -v, 3.0)))


def test_edge_quadrature_polynomial_exactness():
    # degree 2n-1 along a segment of length 2
    n = 5
    f = lambda x: x[:, 0] ** 9 + 1.0  # noqa: E731
    assert edge_quadrature([0, 0], [2, 0], f, n) == pytest.approx(2 ** 10 / 10 + 2.0, rel=1e-13)


def test_polygon_integral_square_area():
    assert polygon_osc_integral(SQUARE, [0.0, 0.0], 3.0) == pytest.approx(1.0)


def test_polygon_integral_separable():
    # int_0^1 e^{i pi x} dx = 2i/pi
    assert polygon_osc_integral(SQUARE, [1.0, 0.0], np.pi) == pytest.approx(2j / np.pi, abs=1e-15)


def test_polygon_integral_additive():
    v, k = np.array([0.3, -0.8]), 9.0
    t1 = SQUARE[[0, 1, 2]]
    t2 = SQUARE[[0, 2, 3]]
    whole = polygon_osc_integral(SQUARE, v, k)
    assert whole == pytest.approx(polygon_osc_integral(t1, v, k) + polygon_osc_integral(t2, v, k),
                                  abs=1e-14)


def test_polygon_integral_vectorized_matches_single(rng):
    vs = rng.normal(size=(7, 2))
    many = polygon_osc_integral(SQUARE, vs, 4.0)
    assert many.shape == (7,)
    for v, m in zip(vs, many):
        assert polygon_osc_integral(SQUARE, v, 4.0) == pytest.approx(m)


@pytest.mark.parametrize("seed", range(10))
def test_polygon_integral_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    poly = random_convex_polygon(rng, scale=1.0)
    k = rng.uniform(1, 20)
    v = rng.normal(size=2)
    c = poly.mean(axis=0)
    ref = polygon_quadrature(poly, c, lambda x: np.exp(1j * k * (x @ v)), 40)
    assert abs(polygon_osc_integral(poly, v, k) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_gauss_legendre_on_unit_interval():
    x, w = gauss_legendre(7)
    assert w.sum() == pytest.approx(1.0)
    assert np.all((x > 0) & (x < 1))


@pytest.mark.parametrize("order", [1, 2, 5, 8, 13])
def test_triangle_rule_exact_for_degree(order):
    pts, w = triangle_rule(order)
    assert w.sum() == pytest.approx(0.5)
    # int_T x^a y^b = a! b! / (a + b + 2)!
    from math import factorial
    for a in range(order + 1):
        b = order - a
        exact = factorial(a) * factorial(b) / factorial(a + b + 2)
        assert np.sum(w * pts[:, 0] ** a * pts[:, 1] ** b) == pytest.approx(exact, rel=1e-12)


def test_polygon_quadrature_area_and_moment():
    c = np.array([0.5, 0.5])
    assert polygon_quadrature(SQUARE, c, lambda x: np.ones(len(x)), 4) == pytest.approx(1.0, rel=1e-13)
    val = polygon_quadrature(SQUARE, c, lambda x: x[:, 0] ** 2 + x[:, 1] ** 2, 4)
    assert val == pytest.approx(2.0 / 3.0, rel=1e-13)


def test_polygon_rule_skips_degenerate_triangles():
    # star center on a vertex gives two zero-area fan triangles
    pts, w = polygon_rule(SQUARE, SQUARE[0], 4)
    assert w.sum() == pytest.approx(1.0)
    assert len(w) == 2 * len(triangle_rule(4)[1])


def test_quadrature_linear(rng):
    f = lambda x: np.sin(3 * x[:, 0]) + 1j * x[:, 1]  # noqa: E731
    g = lambda x: np.exp(x[:, 0] * x[:, 1])  # noqa: E731
    c = np.array([0.4, 0.6])
    lhs = polygon_quadrature(SQUARE, c, lambda x: 2 * f(x) - 3j * g(x), 10)
    rhs = 2 * polygon_quadrature(SQUARE, c, f, 10) - 3j * polygon_quadrature(SQUARE, c, g, 10)
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_default_triangle_order_resolves_waves():
    assert default_triangle_order(1.0, 0.1) == 10
    assert default_triangle_order(64.0, 1.0) >= 10 * 64 / (2 * np.pi)
