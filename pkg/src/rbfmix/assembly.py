"""Assembly of the saddle-point blocks A, B and load vectors F, G.

The stiffness/mass block A couples kernels with overlapping supports only, so
its sparsity pattern is harvested first by a fixed-radius neighbor search and
values are then accumulated cell by cell from the domain quadrature: each cell
contributes a dense local block over the kernels active there, which keeps the
inner loops in matrix products.  Entries for pairs with |x_i - x_j| >= 2r are
provably zero (no quadrature node lies in both supports) and are never stored.

A brute-force dense assembler without any neighbor search is kept alongside as
the verification oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.spatial import cKDTree

from . import kernels as kern
from .errors import NumericalError
from .quadrature import restrict_support


@dataclass(frozen=True)
class ParameterRecord:
    """Discretization parameters attached to systems, solutions and errors."""

    h_X: float
    k: float
    r: float
    tau: float
    p: int
    N: int
    M: int

    def to_dict(self):
        return {"h_X": self.h_X, "k": self.k, "r": self.r, "tau": self.tau,
                "p": self.p, "N": self.N, "M": self.M}


@dataclass(frozen=True, eq=False)
class SaddleSystem:
    """Assembled block system [[A, B], [B^T, 0]] with loads F, G.

    A is N x N symmetric sparse, B is N x M sparse; ``params`` records the
    discretization (h_X, k, r, tau, p, N, M).
    """

    A: scipy.sparse.csr_matrix
    B: scipy.sparse.csr_matrix
    F: np.ndarray
    G: np.ndarray
    kappa: float
    params: ParameterRecord


def neighbor_pairs(centers, radius):
    """All unordered index pairs (i, j), i <= j, with |x_i - x_j| < radius.

    Uses a uniform spatial hash with cell size equal to the radius, so only
    the 3x3 cell neighborhood of each point is examined.  Diagonal pairs are
    always included.  Returns an (n_pairs, 2) integer array sorted
    lexicographically.
    """
    pts = np.atleast_2d(np.asarray(getattr(centers, "points", centers), dtype=float))
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    n = len(pts)
    keys = np.floor(pts / radius).astype(np.int64)
    cells = {}
    for i in range(n):
        cells.setdefault((int(keys[i, 0]), int(keys[i, 1])), []).append(i)
    cells = {c: np.asarray(m, dtype=np.intp) for c, m in cells.items()}

    r2 = radius * radius
    out_i, out_j = [], []
    for cell in sorted(cells):
        members = cells[cell]
        # within-cell pairs, including the diagonal
        a, b = np.triu_indices(len(members))
        ii, jj = members[a], members[b]
        d2 = np.sum((pts[ii] - pts[jj]) ** 2, axis=1)
        keep = d2 < r2
        out_i.append(ii[keep])
        out_j.append(jj[keep])
        # forward half of the 3x3 neighborhood so each cell pair is visited once
        for dx, dy in ((1, -1), (1, 0), (1, 1), (0, 1)):
            other = cells.get((cell[0] + dx, cell[1] + dy))
            if other is None:
                continue
            ii = np.repeat(members, len(other))
            jj = np.tile(other, len(members))
            d2 = np.sum((pts[ii] - pts[jj]) ** 2, axis=1)
            keep = d2 < r2
            ii, jj = ii[keep], jj[keep]
            out_i.append(np.minimum(ii, jj))
            out_j.append(np.maximum(ii, jj))
    i = np.concatenate(out_i) if out_i else np.empty(0, dtype=np.intp)
    j = np.concatenate(out_j) if out_j else np.empty(0, dtype=np.intp)
    order = np.lexsort((j, i))
    return np.column_stack([i[order], j[order]])


def _active_centers_per_cell(points, quad, radius):
    """For each quadrature cell, indices of centers whose support can reach it."""
    tree = cKDTree(points)
    query_radii = quad.cell_radii + radius
    found = tree.query_ball_point(quad.cell_centers, query_radii)
    return [np.sort(np.asarray(f, dtype=np.intp)) for f in found]


def assemble_A(centers, kernel, kappa, quad):
    """Stiffness(+mass) block A_ij = integral of grad Phi_i . grad Phi_j + kappa Phi_i Phi_j.

    Only pairs with |x_i - x_j| < 2r are stored (neighbor search); the upper
    triangle is computed and mirrored, so A is exactly symmetric.
    """
    if kappa < 0.0:
        raise ValueError("kappa must be nonnegative")
    pts = centers.points
    n = len(pts)
    r = kernel.scale
    pairs = neighbor_pairs(centers, 2.0 * r)
    acc = np.zeros((n, n))
    active = _active_centers_per_cell(pts, quad, r)
    for c, (start, stop) in enumerate(quad.cell_slices):
        idx = active[c]
        if idx.size == 0:
            continue
        nodes = quad.nodes[start:stop]
        w = quad.weights[start:stop]
        gx, gy = kern.pairwise_gradients(kernel, pts[idx], nodes)
        block = (gx * w) @ gx.T + (gy * w) @ gy.T
        if kappa != 0.0:
            v = kern.pairwise_values(kernel, pts[idx], nodes)
            block += kappa * ((v * w) @ v.T)
        if not np.all(np.isfinite(block)):
            flat = int(np.argmax(~np.isfinite(block)))
            bi, bj = divmod(flat, block.shape[1])
            raise NumericalError(
                f"non-finite stiffness contribution at A[{idx[bi]}, {idx[bj]}]")
        acc[np.ix_(idx, idx)] += block
    i, j = pairs[:, 0], pairs[:, 1]
    vals = acc[i, j]
    off = i != j
    rows = np.concatenate([i, j[off]])
    cols = np.concatenate([j, i[off]])
    data = np.concatenate([vals, vals[off]])
    return scipy.sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def assemble_A_dense(centers, kernel, kappa, quad):
    """Brute-force oracle: dense A over all pairs, no neighbor search or blocking."""
    pts = np.atleast_2d(np.asarray(getattr(centers, "points", centers), dtype=float))
    n = len(pts)
    acc = np.zeros((n, n))
    chunk = max(1, (1 << 22) // max(n, 1))
    for start in range(0, quad.n_nodes, chunk):
        nodes = quad.nodes[start:start + chunk]
        w = quad.weights[start:start + chunk]
        gx, gy = kern.pairwise_gradients(kernel, pts, nodes)
        acc += (gx * w) @ gx.T + (gy * w) @ gy.T
        if kappa != 0.0:
            v = kern.pairwise_values(kernel, pts, nodes)
            acc += kappa * ((v * w) @ v.T)
    return acc


def assemble_B(centers, kernel, space, rule):
    """Coupling block B_ij = integral over the boundary of Phi_i mu_j.

    Rows for centers whose support misses the boundary stay identically zero.
    """
    if rule.order < space.degree + 3:
        raise ValueError("boundary rule order must be at least degree + 3")
    pts = centers.points
    n = len(pts)
    r = kernel.scale
    p1 = space.degree + 1
    local = space.local_basis_matrix(rule.nodes)  # (p+1, q)
    tree = cKDTree(pts)
    rows, cols, data = [], [], []
    for e, element in enumerate(space.mesh.elements):
        mid = 0.5 * (element.p_start + element.p_end)
        idx = np.sort(np.asarray(
            tree.query_ball_point(mid, r + 0.5 * element.length), dtype=np.intp))
        if idx.size == 0:
            continue
        bdry_pts = element.points_at(rule.nodes)
        traces = kern.pairwise_values(kernel, pts[idx], bdry_pts)  # (na, q)
        block = (traces * (rule.weights * element.length)) @ local.T  # (na, p+1)
        if not np.all(np.isfinite(block)):
            raise NumericalError(f"non-finite coupling contribution on element {e}")
        rows.append(np.repeat(idx, p1))
        cols.append(np.tile(e * p1 + np.arange(p1), idx.size))
        data.append(block.ravel())
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        data = np.concatenate(data)
    return scipy.sparse.coo_matrix(
        (data, (rows, cols)), shape=(n, space.dim)).tocsr()


def assemble_F(centers, kernel, f, quad):
    """Load vector F_i = integral of f Phi_i over the domain."""
    pts = centers.points
    r = kernel.scale
    fvals = np.asarray(f(quad.nodes), dtype=float)
    bad = ~np.isfinite(fvals)
    if bad.any():
        where = quad.nodes[np.argmax(bad)]
        raise NumericalError(f"non-finite source value at node ({where[0]}, {where[1]})")
    weighted = quad.weights * fvals
    out = np.zeros(len(pts))
    for i, x in enumerate(pts):
        idx = restrict_support(quad, x, r)
        if idx.size == 0:
            continue
        phi = kern.pairwise_values(kernel, x[None, :], quad.nodes[idx])[0]
        out[i] = float(np.dot(weighted[idx], phi))
    return out


def assemble_G(space, g, rule):
    """Load vector G_j = integral of g mu_j over the boundary."""
    local = space.local_basis_matrix(rule.nodes)
    p1 = space.degree + 1
    out = np.empty(space.dim)
    for e, element in enumerate(space.mesh.elements):
        s = element.s_start + rule.nodes * element.length
        gvals = np.asarray(g(s), dtype=float)
        bad = ~np.isfinite(gvals)
        if bad.any():
            raise NumericalError(
                f"non-finite boundary value at arc length {s[np.argmax(bad)]}")
        out[e * p1:(e + 1) * p1] = element.length * (local @ (rule.weights * gvals))
    return out


def assemble_system(centers, kernel, kappa, space, quad, rule, f, g):
    """Assemble all four blocks and attach the parameter record."""
    params = ParameterRecord(
        h_X=centers.fill_distance, k=space.mesh.mesh_size, r=kernel.scale,
        tau=kernel.tau, p=space.degree, N=centers.count, M=space.dim)
    return SaddleSystem(
        A=assemble_A(centers, kernel, kappa, quad),
        B=assemble_B(centers, kernel, space, rule),
        F=assemble_F(centers, kernel, f, quad),
        G=assemble_G(space, g, rule),
        kappa=kappa,
        params=params,
    )


def dump_system(system, path):
    """Write the system in coordinate text format with a JSON header line."""
    header = {"N": system.params.N, "M": system.params.M, "kappa": system.kappa}
    header.update(system.params.to_dict())
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        a = system.A.tocoo()
        for i, j, v in zip(a.row, a.col, a.data):
            fh.write(f"A {i} {j} {v:.17g}\n")
        b = system.B.tocoo()
        for i, j, v in zip(b.row, b.col, b.data):
            fh.write(f"B {i} {j} {v:.17g}\n")
        for i, v in enumerate(system.F):
            fh.write(f"F {i} {v:.17g}\n")
        for j, v in enumerate(system.G):
            fh.write(f"G {j} {v:.17g}\n")
