"""Computable error of the projected discrete solution and the interpolant's dofs."""

import numpy as np

from .analytic import ExactSolution, eval_exact
from .quad import default_edge_points, default_triangle_order, edge_rule, polygon_osc_integral, \
    polygon_rule


def projected_coefficients(op, dofmap, solution):
    """Plane-wave coefficients ``c = Pi @ u_K`` of the projected solution on one element."""
    return op.Pi @ np.asarray(solution)[dofmap.element_dofs[op.element]]


def _wave_values(dirs, kappa, center, pts):
    return np.exp(1j * kappa * ((pts - center) @ dirs.directions.T))


def _closed_form_gram(verts, dirs, kappa, center):
    # Q[l, m] = int_K w_m conj(w_l)
    d = dirs.directions
    dv = (d[None, :, :] - d[:, None, :]).reshape(-1, 2)
    shift = np.exp(-1j * kappa * (dv @ center))
    Q = (polygon_osc_integral(verts, dv, kappa) * shift).reshape(len(d), len(d))
    return Q


def element_error(mesh, op, dirs, kappa, coeffs, exact: ExactSolution, norm="l2",
                  method="quadrature", order=None):
    """Squared local error and squared local norm of the exact solution.

    ``method="quadrature"`` integrates ``|u - Pi u_h|^2`` directly with the fan
    rule, which keeps full relative accuracy for tiny errors.
    ``method="closed-form"`` expands the square, integrating ``|Pi u_h|^2`` in
    closed form and the remaining terms by quadrature.
    """
    verts = mesh.polygon_vertices(op.element)
    if order is None:
        order = default_triangle_order(kappa, mesh.diameter(op.element))
    pts, w = polygon_rule(verts, op.center, order)
    u, grad = eval_exact(exact, pts)
    W = _wave_values(dirs, kappa, op.center, pts)
    d = dirs.directions
    if norm == "l2":
        if method == "quadrature":
            diff = u - W @ coeffs
            return float(np.sum(w * np.abs(diff) ** 2)), float(np.sum(w * np.abs(u) ** 2))
        Q = _closed_form_gram(verts, dirs, kappa, op.center)
        cross = np.sum((w * u)[:, None] * W.conj(), axis=0)  # int u conj(w_l)
        uu = float(np.sum(w * np.abs(u) ** 2))
        pp = float(np.real(coeffs.conj() @ Q @ coeffs))
        err2 = pp + uu - 2.0 * float(np.real(np.vdot(coeffs, cross)))
        return max(err2, 0.0), uu
    if norm != "h1":
        raise ValueError(f"unknown norm {norm!r}")
    # grad(Pi u_h) = sum_l c_l i kappa d_l w_l
    gc = 1j * kappa * (W * coeffs[None, :]) @ d
    if method == "quadrature":
        diff = grad - gc
        return float(np.sum(w * np.sum(np.abs(diff) ** 2, axis=1))), \
            float(np.sum(w * np.sum(np.abs(grad) ** 2, axis=1)))
    Q = _closed_form_gram(verts, dirs, kappa, op.center) * (kappa ** 2 * (d @ d.T))
    # int grad u . conj(i kappa d_l w_l)
    cross = np.sum(w[:, None] * (grad @ d.T) * (-1j * kappa) * W.conj(), axis=0)
    gg = float(np.sum(w * np.sum(np.abs(grad) ** 2, axis=1)))
    pp = float(np.real(coeffs.conj() @ Q @ coeffs))
    err2 = pp + gg - 2.0 * float(np.real(np.vdot(coeffs, cross)))
    return max(err2, 0.0), gg


def projected_l2_error(mesh, operators, dofmap, solution, exact: ExactSolution, dirs, kappa,
                       norm="l2", method="quadrature", order=None):
    """Relative error ``||u - Pi u_h|| / ||u||`` over the whole mesh.

    ``norm="h1"`` switches to the H1 seminorm.
    """
    err2 = 0.0
    ref2 = 0.0
    for op in operators:
        c = projected_coefficients(op, dofmap, solution)
        e2, r2 = element_error(mesh, op, dirs, kappa, c, exact, norm, method, order)
        err2 += e2
        ref2 += r2
    return float(np.sqrt(err2 / ref2))


def interpolation_dofs(exact: ExactSolution, mesh, edge_bases, dofmap, dirs, kappa,
                       n_points=None):
    """Edge moments ``(1/h_e) int_e u conj(psi_k) ds`` of the exact solution, by Gauss quadrature."""
    out = np.zeros(dofmap.n_dofs, dtype=complex)
    for e, eb in enumerate(edge_bases):
        n = n_points or default_edge_points(kappa, eb.length)
        pts, w = edge_rule(eb.a, eb.b, max(n, 20))
        u = exact.value(pts)
        out[dofmap.edge_slice(e)] = ((w * u) @ eb.values(dirs, kappa, pts).conj()) / eb.length
    return out
