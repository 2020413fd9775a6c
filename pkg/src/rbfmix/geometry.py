"""Polygonal domains, quasi-uniform center sets, and boundary partitions.

The domain is a simple polygon with counter-clockwise vertices.  Center sets
carry the two mesh parameters of the method: the fill distance h_X (radius of
the largest center-free ball) and the separation radius q_X (half the minimal
pairwise distance).  The boundary is partitioned into straight elements that
never straddle a polygon vertex, so multiplier polynomials stay polynomial in
arc length on every element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigurationError

# Absolute tolerance of the point-in-polygon test: points this close to the
# boundary count as inside the closed polygon.
POINT_IN_POLYGON_TOL = 1e-12

# Probe points per unit length used when measuring the fill distance.
DEFAULT_PROBE_RESOLUTION = 512


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_intersect(p1, p2, q1, q2):
    """True if closed segments [p1,p2] and [q1,q2] share at least one point."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0:
        return True

    def on_segment(a, b, c):
        return (_cross(a, b, c) == 0
                and min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    return (on_segment(q1, q2, p1) or on_segment(q1, q2, p2)
            or on_segment(p1, p2, q1) or on_segment(p1, p2, q2))


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple closed polygon with counter-clockwise vertices.

    Parameters
    ----------
    vertices : ndarray of shape (n, 2)
        Vertex coordinates in order; the closing edge from the last vertex
        back to the first is implied.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 two-dimensional vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        nxt = np.roll(v, -1, axis=0)
        if np.any(np.all(v == nxt, axis=1)):
            raise ValueError("consecutive polygon vertices must be distinct")
        object.__setattr__(self, "vertices", v)
        if self.area <= 0.0:
            raise ValueError("polygon vertices must be ordered counter-clockwise")
        self._check_simple()

    def _check_simple(self):
        v, n = self.vertices, len(self.vertices)
        for i in range(n):
            a1, a2 = v[i], v[(i + 1) % n]
            for j in range(i + 1, n):
                # skip the edge itself and the two edges sharing a vertex
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                if _segments_intersect(a1, a2, v[j], v[(j + 1) % n]):
                    raise ValueError("polygon must be simple (non-self-intersecting)")

    @cached_property
    def area(self):
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))

    @cached_property
    def edge_vectors(self):
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @cached_property
    def edge_lengths(self):
        return np.linalg.norm(self.edge_vectors, axis=1)

    @cached_property
    def perimeter(self):
        return float(np.sum(self.edge_lengths))

    @cached_property
    def cumulative_lengths(self):
        """Arc length at the start of each edge, plus the total perimeter."""
        return np.concatenate([[0.0], np.cumsum(self.edge_lengths)])

    @cached_property
    def outward_normals(self):
        # CCW orientation: rotating the unit tangent by -90 degrees points out.
        t = self.edge_vectors / self.edge_lengths[:, None]
        return np.column_stack([t[:, 1], -t[:, 0]])

    @cached_property
    def bounding_box(self):
        v = self.vertices
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    @cached_property
    def diameter(self):
        v = self.vertices
        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
        return math.sqrt(float(d2.max()))

    def boundary_distance(self, points):
        """Distance from each point to the nearest boundary edge."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        best = np.full(len(pts), np.inf)
        for a, e, length in zip(self.vertices, self.edge_vectors, self.edge_lengths):
            rel = pts - a
            t = np.clip((rel @ e) / (length * length), 0.0, 1.0)
            foot = a + t[:, None] * e
            best = np.minimum(best, np.linalg.norm(pts - foot, axis=1))
        return best

    def contains(self, points, tol=POINT_IN_POLYGON_TOL):
        """Even-odd test for the closed polygon.

        Points within ``tol`` of the boundary count as inside, which makes the
        test deterministic for grid points sitting exactly on edges or corners.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        inside = np.zeros(len(pts), dtype=bool)
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        for (x1, y1), (x2, y2) in zip(v, nxt):
            straddles = (y1 > y) != (y2 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= straddles & (x < x_cross)
        near = self.boundary_distance(pts) <= tol
        result = inside | near
        return result if np.asarray(points).ndim == 2 else bool(result[0])

    def edge_index_at(self, s):
        """Index of the edge owning arc length s (half-open per edge)."""
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.cumulative_lengths, s, side="right") - 1
        return np.clip(idx, 0, len(self.vertices) - 1)

    def point_at(self, s):
        """Map arc length (from vertex 0, counter-clockwise) to a boundary point."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s_arr < -1e-12) or np.any(s_arr > self.perimeter * (1 + 1e-12)):
            raise ValueError("arc length outside [0, perimeter]")
        idx = self.edge_index_at(np.clip(s_arr, 0.0, self.perimeter))
        local = np.clip(s_arr, 0.0, self.perimeter) - self.cumulative_lengths[idx]
        frac = local / self.edge_lengths[idx]
        pts = self.vertices[idx] + frac[:, None] * self.edge_vectors[idx]
        return pts if np.asarray(s).ndim else pts[0]

    def outward_normal_at(self, s):
        """Outward unit normal at arc length s (edge-owning convention at corners)."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        idx = self.edge_index_at(np.clip(s_arr, 0.0, self.perimeter))
        normals = self.outward_normals[idx]
        return normals if np.asarray(s).ndim else normals[0]


_UNIT_SQUARE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
_L_SHAPE_VERTICES = np.array(
    [[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 0.5], [0.5, 1.0], [0.0, 1.0]]
)


def unit_square():
    return Polygon(_UNIT_SQUARE_VERTICES.copy())


def l_shape():
    return Polygon(_L_SHAPE_VERTICES.copy())


POLYGON_PRESETS = {"unit_square": unit_square, "l_shape": l_shape}


def is_unit_square(polygon):
    return (polygon.vertices.shape == (4, 2)
            and np.array_equal(polygon.vertices, _UNIT_SQUARE_VERTICES))


@dataclass(frozen=True, eq=False)
class CenterSet:
    """Quasi-uniform kernel centers with their mesh parameters.

    ``fill_distance`` is the probe-grid estimate of h_X and ``separation`` is
    q_X, half the minimal pairwise distance.
    """

    points: np.ndarray
    fill_distance: float
    separation: float

    @property
    def count(self):
        return len(self.points)


def _probe_grid(polygon, probe_resolution):
    x0, y0, x1, y1 = polygon.bounding_box
    nx = int(math.ceil((x1 - x0) * probe_resolution)) + 1
    ny = int(math.ceil((y1 - y0) * probe_resolution)) + 1
    gx = np.linspace(x0, x1, nx)
    gy = np.linspace(y0, y1, ny)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    probes = np.column_stack([xx.ravel(), yy.ravel()])
    return probes[polygon.contains(probes)]


def fill_distance(centers, polygon, probe_resolution=DEFAULT_PROBE_RESOLUTION):
    """Probe-grid estimate of h_X = sup over the domain of the nearest-center distance.

    Parameters
    ----------
    centers : ndarray of shape (N, 2)
        Center coordinates (a CenterSet's ``points`` attribute also works).
    polygon : Polygon
        Domain restricting the probe grid.
    probe_resolution : int
        Probe points per unit length, at least 100; the estimate errs by at
        most one probe-cell diameter and never overestimates.
    """
    pts = np.atleast_2d(np.asarray(getattr(centers, "points", centers), dtype=float))
    if len(pts) == 0:
        raise ValueError("fill_distance needs at least one center")
    if probe_resolution < 100:
        raise ValueError("probe_resolution must be at least 100 per unit length")
    probes = _probe_grid(polygon, probe_resolution)
    # chunked nearest-center scan; exact reduction, no spatial pruning
    worst = 0.0
    chunk = max(1, (1 << 22) // max(len(pts), 1))
    cx, cy = pts[:, 0], pts[:, 1]
    for start in range(0, len(probes), chunk):
        block = probes[start:start + chunk]
        d2 = (block[:, 0:1] - cx) ** 2 + (block[:, 1:2] - cy) ** 2
        worst = max(worst, float(d2.min(axis=1).max()))
    return math.sqrt(worst)


def separation_distance(points):
    """q_X: half the minimal pairwise distance; inf for a single point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) < 2:
        return np.inf
    dist, _ = cKDTree(pts).query(pts, k=2)
    return 0.5 * float(dist[:, 1].min())


def make_center_set(points, polygon, probe_resolution=DEFAULT_PROBE_RESOLUTION):
    """Validate points against the closed polygon and attach h_X and q_X."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
        raise ValueError("centers must be a nonempty (N, 2) array")
    if not np.all(polygon.contains(pts)):
        raise ValueError("all centers must lie in the closed polygon")
    q = separation_distance(pts)
    if q <= 0.0:
        raise ValueError("duplicate centers are not allowed")
    h = fill_distance(pts, polygon, probe_resolution)
    return CenterSet(points=pts, fill_distance=h, separation=q)


def generate_grid_centers(polygon, n_per_side, probe_resolution=DEFAULT_PROBE_RESOLUTION):
    """Tensor grid of n_per_side² centers on the closed unit square.

    Only the unit square preset supports this generator; other polygons go
    through :func:`generate_interior_centers`.
    """
    if not is_unit_square(polygon):
        raise ConfigurationError("grid centers are only defined on the unit_square preset")
    if int(n_per_side) != n_per_side or n_per_side < 2:
        raise ValueError("n_per_side must be an integer >= 2")
    coords = np.linspace(0.0, 1.0, int(n_per_side))
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    points = np.column_stack([xx.ravel(), yy.ravel()])
    return make_center_set(points, polygon, probe_resolution)


def generate_interior_centers(polygon, target_spacing,
                              probe_resolution=DEFAULT_PROBE_RESOLUTION):
    """Axis-aligned grid of the given spacing clipped to the closed polygon."""
    if not (0.0 < target_spacing < polygon.diameter):
        raise ConfigurationError(
            f"target_spacing {target_spacing} must lie in (0, diameter="
            f"{polygon.diameter:.6g})")
    x0, y0, x1, y1 = polygon.bounding_box
    gx = np.arange(x0, x1 + 0.5 * target_spacing, target_spacing)
    gy = np.arange(y0, y1 + 0.5 * target_spacing, target_spacing)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    points = np.column_stack([xx.ravel(), yy.ravel()])
    points = points[polygon.contains(points)]
    if len(points) == 0:
        raise ConfigurationError("spacing produced no points inside the polygon")
    return make_center_set(points, polygon, probe_resolution)


@dataclass(frozen=True, eq=False)
class BoundaryElement:
    """Straight boundary segment between two arc-length parameters on one edge."""

    edge_index: int
    s_start: float
    s_end: float
    p_start: np.ndarray
    p_end: np.ndarray

    @property
    def length(self):
        return self.s_end - self.s_start

    def points_at(self, t):
        """Map local coordinates t in [0,1] to points on the element."""
        t = np.asarray(t, dtype=float)
        return self.p_start + t[..., None] * (self.p_end - self.p_start)


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    """Quasi-uniform partition of the polygon boundary into straight elements.

    Elements are ordered by arc length, cover the boundary exactly, and never
    straddle a polygon vertex.  ``mesh_size`` is k, the largest element length.
    """

    polygon: Polygon
    elements: tuple
    mesh_size: float

    def __post_init__(self):
        lengths = np.array([e.length for e in self.elements])
        total = float(lengths.sum())
        if abs(total - self.polygon.perimeter) > 1e-12 * self.polygon.perimeter:
            raise ValueError("boundary elements must cover the perimeter exactly")
        if lengths.max() / lengths.min() > 2.0 + 1e-12:
            raise ValueError("boundary partition must be quasi-uniform (ratio <= 2)")

    @property
    def n_elements(self):
        return len(self.elements)

    @cached_property
    def element_starts(self):
        return np.array([e.s_start for e in self.elements])

    @cached_property
    def element_lengths(self):
        return np.array([e.length for e in self.elements])

    def element_index_at(self, s):
        """Element owning arc length s; half-open ownership [start, end), the
        final element also owning the closing endpoint."""
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.element_starts, s, side="right") - 1
        return np.clip(idx, 0, self.n_elements - 1)


def partition_boundary(polygon, target_k):
    """Split every edge into ceil(edge_length / target_k) equal elements.

    ``target_k`` must not exceed the shortest edge, otherwise an element would
    have to straddle a vertex.
    """
    shortest = float(polygon.edge_lengths.min())
    if not (0.0 < target_k <= shortest):
        raise ConfigurationError(
            f"target_k {target_k} must lie in (0, shortest edge = {shortest:.6g}]")
    elements = []
    for edge, (a, vec, length, offset) in enumerate(
            zip(polygon.vertices, polygon.edge_vectors, polygon.edge_lengths,
                polygon.cumulative_lengths)):
        m = int(math.ceil(length / target_k - 1e-12))
        for j in range(m):
            f0, f1 = j / m, (j + 1) / m
            elements.append(BoundaryElement(
                edge_index=edge,
                s_start=offset + length * f0,
                s_end=offset + length * f1,
                p_start=a + f0 * vec,
                p_end=a + f1 * vec,
            ))
    mesh_size = max(e.length for e in elements)
    return BoundaryMesh(polygon=polygon, elements=tuple(elements), mesh_size=mesh_size)
