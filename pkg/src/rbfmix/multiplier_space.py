"""Discontinuous piecewise-polynomial multiplier space on the boundary mesh.

Each boundary element carries shifted Legendre polynomials in its local
coordinate t in [0,1], so element Gram matrices are diagonal and the L2
projection decouples element by element.  Global basis index j maps to
element j // (p+1) and local degree j % (p+1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_rule

MAX_DEGREE = 3


def shifted_legendre(degree, t):
    """Legendre polynomial of the given degree evaluated at 2t - 1."""
    coeffs = np.zeros(degree + 1)
    coeffs[degree] = 1.0
    return np.polynomial.legendre.legval(2.0 * np.asarray(t, dtype=float) - 1.0, coeffs)


@dataclass(frozen=True, eq=False)
class MultiplierSpace:
    """Piecewise polynomials of degree p on a boundary mesh, discontinuous
    across elements."""

    mesh: "BoundaryMesh"  # noqa: F821 - geometry.BoundaryMesh
    degree: int

    def __post_init__(self):
        if int(self.degree) != self.degree or not 0 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"multiplier degree must be an integer in [0, {MAX_DEGREE}]")

    @property
    def dim(self):
        return self.mesh.n_elements * (self.degree + 1)

    def split_index(self, global_index):
        if not 0 <= global_index < self.dim:
            raise ValueError(f"basis index {global_index} out of range [0, {self.dim})")
        return divmod(int(global_index), self.degree + 1)

    def local_basis_matrix(self, t):
        """All local polynomials at local coordinates t, shape (p+1, len(t))."""
        return np.vstack([shifted_legendre(n, t) for n in range(self.degree + 1)])

    def gram_matrix(self):
        """Exact L2(boundary) Gram of the global basis (diagonal by orthogonality)."""
        degrees = np.arange(self.degree + 1)
        per_element = 1.0 / (2.0 * degrees + 1.0)
        diag = np.concatenate([e.length * per_element for e in self.mesh.elements])
        return np.diag(diag)


def eval_basis(space, global_index, s):
    """Value of one global basis function at arc length s (0 off its element)."""
    element_idx, local_degree = space.split_index(global_index)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    perimeter = space.mesh.polygon.perimeter
    if np.any(s_arr < -1e-12) or np.any(s_arr > perimeter * (1 + 1e-12)):
        raise ValueError("arc length outside [0, perimeter]")
    owner = space.mesh.element_index_at(np.clip(s_arr, 0.0, perimeter))
    element = space.mesh.elements[element_idx]
    t = (s_arr - element.s_start) / element.length
    values = np.where(owner == element_idx,
                      shifted_legendre(local_degree, np.clip(t, 0.0, 1.0)), 0.0)
    return values if np.asarray(s).ndim else float(values[0])


def evaluate(space, coeffs, s):
    """Evaluate a member sum_j coeffs_j mu_j at arc lengths s."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (space.dim,):
        raise ValueError(f"expected {space.dim} coefficients")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    perimeter = space.mesh.polygon.perimeter
    owner = space.mesh.element_index_at(np.clip(s_arr, 0.0, perimeter))
    starts = space.mesh.element_starts[owner]
    lengths = space.mesh.element_lengths[owner]
    t = np.clip((s_arr - starts) / lengths, 0.0, 1.0)
    p1 = space.degree + 1
    values = np.zeros_like(s_arr)
    local = space.local_basis_matrix(t)  # (p+1, n)
    for n in range(p1):
        values += coeffs[owner * p1 + n] * local[n]
    return values if np.asarray(s).ndim else float(values[0])


def project_l2(space, g, quad_order=16):
    """Best L2(boundary) approximation of g by the multiplier space.

    Parameters
    ----------
    space : MultiplierSpace
    g : callable
        Function of arc length, vectorized over 1-d arrays.
    quad_order : int
        Gauss order per element; must be at least p + 1 so the diagonal
        normal equations are integrated exactly for polynomial g.
    """
    if quad_order < space.degree + 1:
        raise ValueError("quad_order must be at least degree + 1")
    rule = gauss_rule(quad_order)
    local = space.local_basis_matrix(rule.nodes)  # (p+1, n)
    degrees = np.arange(space.degree + 1)
    # element Gram is diagonal: integral of L_n^2 over [0,1] is 1/(2n+1)
    inverse_gram = 2.0 * degrees + 1.0
    coeffs = np.empty(space.dim)
    p1 = space.degree + 1
    for e, element in enumerate(space.mesh.elements):
        s = element.s_start + rule.nodes * element.length
        gvals = np.asarray(g(s), dtype=float)
        moments = local @ (rule.weights * gvals)
        coeffs[e * p1:(e + 1) * p1] = inverse_gram * moments
    return coeffs
