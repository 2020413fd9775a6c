"""Gauss-Legendre quadrature on boundary elements and tensor cells over the domain.

All integrals (bilinear forms, load functionals, error norms) run through the
rules here at deliberately high resolution, so quadrature error stays far
below discretization error.  Cells are axis-aligned; on the unit square they
tile the domain exactly, on other polygons straddling cells are subdivided a
fixed number of times and classified by midpoint (best effort).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import NumericalError

_SUBDIVISION_DEPTH = 3


@dataclass(frozen=True, eq=False)
class QuadRule1D:
    """Gauss-Legendre rule on the reference interval [0, 1].

    Attributes
    ----------
    order : int
        Number of nodes n; the rule is exact for polynomials of degree 2n-1.
    nodes, weights : ndarray
        Positive weights summing to one.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(order):
    """Gauss-Legendre rule with ``order`` nodes mapped from [-1,1] to [0,1]."""
    if int(order) != order or order < 1:
        raise ValueError("quadrature order must be a positive integer")
    x, w = np.polynomial.legendre.leggauss(int(order))
    return QuadRule1D(order=int(order), nodes=0.5 * (x + 1.0), weights=0.5 * w)


def _rect_overlaps_segment(x0, y0, x1, y1, a, b):
    """True if segment [a,b] meets the closed rectangle (Liang-Barsky clip)."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, a[0] - x0), (dx, x1 - a[0]),
        (-dy, a[1] - y0), (dy, y1 - a[1]),
    ):
        if p == 0.0:
            if q < 0.0:
                return False
            continue
        t = q / p
        if p < 0.0:
            if t > t1:
                return False
            t0 = max(t0, t)
        else:
            if t < t0:
                return False
            t1 = min(t1, t)
    return t0 <= t1


class DomainQuadrature:
    """Tensor-product Gauss rule on a cell grid clipped to a polygon.

    Parameters
    ----------
    polygon : Polygon
        Integration domain.
    cell_size : float
        Requested cell edge length; the bounding box is tiled with the nearest
        integer number of cells so an exactly-dividing size is kept exactly.
    points_per_cell : int
        Gauss nodes per direction in each cell (5 means a 5x5 tensor rule).
    """

    def __init__(self, polygon, cell_size, points_per_cell=5):
        if not cell_size > 0.0:
            raise ValueError("cell_size must be positive")
        if int(points_per_cell) != points_per_cell or points_per_cell < 1:
            raise ValueError("points_per_cell must be a positive integer")
        self.polygon = polygon
        self.points_per_cell = int(points_per_cell)
        rule = gauss_rule(self.points_per_cell)
        tx, ty = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
        tw = np.outer(rule.weights, rule.weights).ravel()
        self._ref_nodes = np.column_stack([tx.ravel(), ty.ravel()])
        self._ref_weights = tw

        x0, y0, x1, y1 = polygon.bounding_box
        nx = self._cell_count(x1 - x0, cell_size)
        ny = self._cell_count(y1 - y0, cell_size)
        self.cell_size = ((x1 - x0) / nx, (y1 - y0) / ny)

        rectangular = (
            len(polygon.vertices) == 4
            and abs(polygon.area - (x1 - x0) * (y1 - y0)) <= 1e-14 * polygon.area
        )
        nodes, weights, origins, sizes, slices = [], [], [], [], []
        count = 0
        cw, ch = self.cell_size
        for i in range(nx):
            for j in range(ny):
                ox, oy = x0 + i * cw, y0 + j * ch
                cells = ([(ox, oy, cw, ch)] if rectangular
                         else self._clip_cell(ox, oy, cw, ch, 0))
                cell_nodes, cell_weights = [], []
                for (cx, cy, w, h) in cells:
                    pts = np.column_stack([
                        cx + self._ref_nodes[:, 0] * w,
                        cy + self._ref_nodes[:, 1] * h,
                    ])
                    wts = self._ref_weights * (w * h)
                    if (w, h) != (cw, ch):
                        # midpoint-classified subcell: drop stray outside nodes
                        keep = polygon.contains(pts)
                        pts, wts = pts[keep], wts[keep]
                    cell_nodes.append(pts)
                    cell_weights.append(wts)
                if not cell_nodes:
                    continue
                pts = np.concatenate(cell_nodes)
                if len(pts) == 0:
                    continue
                nodes.append(pts)
                weights.append(np.concatenate(cell_weights))
                origins.append((ox, oy))
                sizes.append((cw, ch))
                slices.append((count, count + len(pts)))
                count += len(pts)
        if not nodes:
            raise ValueError("quadrature grid produced no nodes inside the polygon")
        self.nodes = np.concatenate(nodes)
        self.weights = np.concatenate(weights)
        self.cell_origins = np.array(origins)
        self.cell_sizes = np.array(sizes)
        self.cell_slices = slices
        self._node_tree = None

    @staticmethod
    def _cell_count(extent, cell_size):
        ratio = extent / cell_size
        if abs(ratio - round(ratio)) < 1e-9:
            return max(1, int(round(ratio)))
        return max(1, int(math.ceil(ratio)))

    def _clip_cell(self, ox, oy, w, h, depth):
        """Classify one cell against the polygon, subdividing straddlers."""
        poly = self.polygon
        corners = np.array([[ox, oy], [ox + w, oy], [ox + w, oy + h], [ox, oy + h]])
        mid = np.array([ox + 0.5 * w, oy + 0.5 * h])
        corners_in = poly.contains(corners)
        boundary_hit = any(
            _rect_overlaps_segment(ox, oy, ox + w, oy + h, a, b)
            for a, b in zip(poly.vertices, np.roll(poly.vertices, -1, axis=0))
        )
        if corners_in.all() and not boundary_hit:
            return [(ox, oy, w, h)]
        if not corners_in.any() and not boundary_hit and not poly.contains(mid):
            return []
        if depth >= _SUBDIVISION_DEPTH:
            return [(ox, oy, w, h)] if poly.contains(mid) else []
        out = []
        hw, hh = 0.5 * w, 0.5 * h
        for dx in (0.0, hw):
            for dy in (0.0, hh):
                out.extend(self._clip_cell(ox + dx, oy + dy, hw, hh, depth + 1))
        return out

    @property
    def n_cells(self):
        return len(self.cell_slices)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def cell_centers(self):
        return self.cell_origins + 0.5 * self.cell_sizes

    @property
    def cell_radii(self):
        """Circumradius of each cell, for conservative activity queries."""
        return 0.5 * np.linalg.norm(self.cell_sizes, axis=1)

    def node_tree(self):
        if self._node_tree is None:
            self._node_tree = cKDTree(self.nodes)
        return self._node_tree

    def refined(self, factor):
        """Same polygon and per-cell rule with cells ``factor`` times smaller."""
        return DomainQuadrature(
            self.polygon,
            cell_size=min(self.cell_size) / factor,
            points_per_cell=self.points_per_cell,
        )


def integrate_domain(quad, f, subset=None):
    """Weighted sum of f over the domain nodes (or a node-index subset).

    ``f`` receives an (n, 2) array of points and must return n values; any
    non-finite value aborts with the offending node location.
    """
    if subset is None:
        nodes, weights = quad.nodes, quad.weights
    else:
        nodes, weights = quad.nodes[subset], quad.weights[subset]
    values = np.asarray(f(nodes), dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        where = nodes[np.argmax(bad)]
        raise NumericalError(f"non-finite integrand value at node ({where[0]}, {where[1]})")
    return float(np.dot(weights, values))


def integrate_boundary(rule, mesh, f):
    """Per-element Gauss sums of f (a function of arc length) over the boundary."""
    total = 0.0
    for element in mesh.elements:
        s = element.s_start + rule.nodes * element.length
        values = np.asarray(f(s), dtype=float)
        bad = ~np.isfinite(values)
        if bad.any():
            raise NumericalError(
                f"non-finite boundary integrand at arc length {s[np.argmax(bad)]}")
        total += element.length * float(np.dot(rule.weights, values))
    return total


def restrict_support(quad, center, radius):
    """Indices of all quadrature nodes within ``radius`` of ``center``.

    The closed ball is used, so every node where a kernel of that support
    radius is nonzero is guaranteed to be included.
    """
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    idx = quad.node_tree().query_ball_point(np.asarray(center, dtype=float), radius)
    return np.sort(np.asarray(idx, dtype=np.intp))
