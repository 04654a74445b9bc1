import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctvem.planewave import (DEFAULT_TOL_ORTH, BulkWave, DirectionSet, edge_gram, eval_bulk,
                              filter_edge, make_directions, orthonormalize_edge, trace_coefficient)


def test_make_directions_q2():
    d = make_directions(2)
    assert d.p == 5 and d.q == 2 and d.delta == 1.0
    np.testing.assert_allclose(np.degrees(d.angles), [0, 72, 144, 216, 288], atol=1e-12)
    assert np.all(np.abs(np.hypot(*d.directions.T) - 1) <= 1e-14)


def test_make_directions_q4_has_nine():
    assert make_directions(4).p == 9


@pytest.mark.parametrize("q", [1, 0, 2.5])
def test_make_directions_rejects_small_q(q):
    with pytest.raises(ValueError):
        make_directions(q)


def test_direction_set_validation():
    with pytest.raises(ValueError):
        DirectionSet.from_vectors([[1, 0], [0, 2]])
    with pytest.raises(ValueError):
        DirectionSet.from_vectors([[1, 0], [1, 0], [0, 1]])
    with pytest.raises(ValueError):  # a gap of pi or more
        DirectionSet.from_vectors([[1, 0], [0, 1]])


def test_horizontal_edge_q2_merges_two_pairs():
    dirs = make_directions(2)
    eb = filter_edge([0, 0], [1, 0], dirs)
    np.testing.assert_array_equal(eb.kept, [0, 1, 2, 5])
    assert eb.p_e == 4 and eb.has_constant and eb.orthogonal_index == -1
    np.testing.assert_array_equal(eb.representative, [0, 1, 2, 2, 1])


def test_axis_directions_on_horizontal_edge():
    dirs = DirectionSet.from_vectors([[1, 0], [0, 1], [-1, 0], [0, -1]])
    eb = filter_edge([0, 0], [1, 0], dirs)
    np.testing.assert_array_equal(eb.kept, [0, 1, 2])
    assert eb.p_e == 3 and not eb.has_constant and eb.orthogonal_index == 1


def test_generic_edge_appends_constant():
    dirs = make_directions(3)
    eb = filter_edge([0, 0], [1, np.sqrt(2)], dirs)
    assert eb.p_e == dirs.p + 1 and eb.has_constant
    np.testing.assert_array_equal(eb.kept, list(range(dirs.p)) + [dirs.p])


def test_filtering_idempotent():
    dirs = make_directions(2)
    eb = filter_edge([0, 0], [1, 0], dirs)
    kept = eb.kept[eb.kept < dirs.p]
    sub = DirectionSet.from_vectors(dirs.directions[kept], check=False)
    again = filter_edge([0, 0], [1, 0], sub)
    assert again.p_e == eb.p_e
    np.testing.assert_array_equal(again.kept[again.kept < sub.p], np.arange(len(kept)))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.integers(2, 7), st.floats(0.01, 3.0))
def test_filter_invariants(angle, q, length):
    dirs = make_directions(q)
    b = length * np.array([np.cos(angle), np.sin(angle)])
    eb = filter_edge([0.0, 0.0], b, dirs)
    waves = eb.kept[eb.kept < dirs.p]
    tc = dirs.directions[waves] @ eb.tangent
    # kept tangential components are pairwise separated by more than the merge tolerance
    gaps = np.abs(tc[:, None] - tc[None, :])[np.triu_indices(len(tc), 1)]
    assert np.all(gaps > DEFAULT_TOL_ORTH)
    assert eb.p_e <= dirs.p + 1
    assert eb.has_constant != (eb.orthogonal_index >= 0)
    # each representative shares the tangential component
    tall = dirs.directions @ eb.tangent
    assert np.all(np.abs(tall - tall[eb.representative]) <= 1e-12)


def test_edge_basis_symmetric_under_reversal():
    dirs = make_directions(3)
    a, b = np.array([0.1, 0.2]), np.array([0.7, -0.3])
    e1, e2 = filter_edge(a, b, dirs), filter_edge(b, a, dirs)
    np.testing.assert_array_equal(e1.kept, e2.kept)


def test_eval_bulk_values():
    w = BulkWave(0, 0, np.array([1.0, 0.0]), np.array([0.2, 0.3]), np.pi)
    assert eval_bulk(w, [0.2, 0.3]) == 1.0
    assert eval_bulk(w, [1.2, 0.3]) == pytest.approx(-1.0)
    d = make_directions(2).directions[1]
    w = BulkWave(0, 1, d, np.zeros(2), 64.0)
    val = eval_bulk(w, [0.1, 0.2])
    assert abs(val) == pytest.approx(1.0)
    assert val == pytest.approx(np.exp(1j * 64.0 * (0.1 * d[0] + 0.2 * d[1])))


def test_trace_coefficient_reproduces_trace(rng):
    dirs = make_directions(2)
    eb = filter_edge([0.0, 0.5], [1.0, 0.5], dirs)
    center = np.array([0.4, 0.1])
    k = 11.0
    s = rng.uniform(size=20)
    pts = eb.a + s[:, None] * (eb.b - eb.a)
    vals = eb.values(dirs, k, pts)
    for l in range(dirs.p):
        w = BulkWave(0, l, dirs.directions[l], center, k)
        rep, phase = trace_coefficient(w, eb)
        assert abs(abs(phase) - 1) < 1e-15
        np.testing.assert_allclose(eval_bulk(w, pts), phase * vals[:, eb.position(rep)], atol=1e-13)
    assert trace_coefficient(BulkWave(0, 4, dirs.directions[4], center, k), eb)[0] == 1


def test_trace_coefficient_coincident_centers():
    dirs = make_directions(2)
    eb = filter_edge([0.0, 0.0], [1.0, 0.0], dirs)
    rep, phase = trace_coefficient(BulkWave(0, 3, dirs.directions[3], eb.midpoint, 5.0), eb)
    assert rep == 2 and phase == 1.0


def test_edge_gram_hermitian_and_nonsingular():
    dirs = make_directions(3)
    eb = filter_edge([0, 0], [0.3, 0.1], dirs)
    M = edge_gram(eb, dirs, 10.0)
    np.testing.assert_allclose(M, M.conj().T, atol=1e-15)
    assert np.linalg.eigvalsh(M).min() > 0


def _orthonormality_tol(eb, dirs, kappa):
    # eigenvectors of a Hermitian matrix carry absolute error ~ eps * lam_max / gap
    lam = np.linalg.eigvalsh(edge_gram(eb, dirs, kappa) / eb.length)
    kept = lam[lam > 1e-13 * lam.max()]
    return 1e3 * np.finfo(float).eps * lam.max() / kept.min()


@pytest.mark.parametrize("b, q", [([0.4, 0.3], 3), ([0.05, 0.02], 4), ([1.0, 0.2], 7)])
def test_orthonormalized_basis_is_orthonormal(b, q):
    dirs = make_directions(q)
    eb = orthonormalize_edge(filter_edge([0, 0], b, dirs), dirs, 8.0)
    Mt = edge_gram(eb, dirs, 8.0, raw=False) / eb.length
    np.testing.assert_allclose(Mt, np.eye(eb.n_dofs), atol=_orthonormality_tol(eb, dirs, 8.0))


def test_orthonormalization_truncates_short_edges():
    dirs = make_directions(4)
    eb = orthonormalize_edge(filter_edge([0, 0], [0.05, 0.02], dirs), dirs, 8.0)
    assert 0 < eb.n_dofs < eb.p_e
    lam = np.linalg.eigvalsh(edge_gram(eb, dirs, 8.0) / eb.length)
    assert eb.n_dofs == np.count_nonzero(lam > 1e-13 * lam.max())
