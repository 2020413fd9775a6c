"""Error measurement, convergence-rate fitting, native-space interpolation
studies, and an inf-sup estimate.

Errors are measured in unscaled norms: full H1(Omega) for the solution and
L2(Gamma) for the multiplier.  Rates are least-squares slopes in log-log
coordinates over a tail window of a run record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import kernels as kern
from .errors import ConditioningError, ConfigurationError
from .geometry import generate_grid_centers, unit_square
from .quadrature import DomainQuadrature
from .solver import expansion_on_quadrature

CSV_HEADER = "N,M,h_X,k,r,tau,p,h1_error,l2_lambda_error,cond_estimate,runtime_s"
INTERP_RESIDUAL_TOL = 1e-10
FLOOR_ERROR = 1e-10


# ---------------------------------------------------------------------------
# manufactured exact solutions


@dataclass(frozen=True, eq=False)
class ExactSolution:
    """Closed-form solution of -lap(u) + kappa*u = f with its boundary data.

    ``u``, ``grad_u`` and ``f`` act on (n, 2) point arrays; ``g`` and ``flux``
    act on boundary arc lengths of ``polygon``.  ``delta`` tags the Sobolev
    regularity order driving the expected rates (in (1, 2]).
    """

    name: str
    polygon: Polygon
    kappa: float
    delta: float
    u: Callable
    grad_u: Callable
    f: Callable

    def g(self, s):
        """Dirichlet trace at arc length s."""
        return self.u(self.polygon.point_at(s))

    def flux(self, s):
        """Outward normal derivative at arc length s."""
        s = np.asarray(s, dtype=float)
        grads = self.grad_u(self.polygon.point_at(s))
        normals = self.polygon.outward_normal_at(s)
        return np.sum(grads * normals, axis=-1)


def _quadratic(polygon):
    def u(pts):
        pts = np.asarray(pts, dtype=float)
        return pts[..., 0] ** 2 + pts[..., 1] ** 2

    def grad_u(pts):
        return 2.0 * np.asarray(pts, dtype=float)

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        return np.full(pts.shape[:-1], -4.0)

    return ExactSolution(name="quadratic", polygon=polygon, kappa=0.0, delta=2.0,
                         u=u, grad_u=grad_u, f=f)


def _trig(polygon):
    scale = 1.0 / math.sinh(math.pi)

    def u(pts):
        pts = np.asarray(pts, dtype=float)
        return np.sin(np.pi * pts[..., 0]) * np.sinh(np.pi * pts[..., 1]) * scale

    def grad_u(pts):
        pts = np.asarray(pts, dtype=float)
        gx = np.pi * np.cos(np.pi * pts[..., 0]) * np.sinh(np.pi * pts[..., 1]) * scale
        gy = np.pi * np.sin(np.pi * pts[..., 0]) * np.cosh(np.pi * pts[..., 1]) * scale
        return np.stack([gx, gy], axis=-1)

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        return np.zeros(pts.shape[:-1])

    return ExactSolution(name="trig", polygon=polygon, kappa=0.0, delta=2.0,
                         u=u, grad_u=grad_u, f=f)


EXACT_SOLUTIONS = {"quadratic": _quadratic, "trig": _trig}


def with_kappa(exact, kappa):
    """Same u with the reaction coefficient changed; f is adjusted so that
    -lap(u) + kappa*u = f still holds."""
    if kappa == exact.kappa:
        return exact
    shift = kappa - exact.kappa
    base_f, base_u = exact.f, exact.u

    def f(pts):
        return base_f(pts) + shift * base_u(pts)

    return ExactSolution(name=exact.name, polygon=exact.polygon, kappa=kappa,
                         delta=exact.delta, u=exact.u, grad_u=exact.grad_u, f=f)


def _sine2d(pts):
    pts = np.asarray(pts, dtype=float)
    return np.sin(np.pi * pts[..., 0]) * np.sin(np.pi * pts[..., 1])


def _quadratic_values(pts):
    pts = np.asarray(pts, dtype=float)
    return pts[..., 0] ** 2 + pts[..., 1] ** 2


INTERP_TARGETS = {"sine2d": _sine2d, "quadratic": _quadratic_values}


def get_exact_solution(name, polygon):
    if name not in EXACT_SOLUTIONS:
        raise ConfigurationError(
            f"unknown exact solution {name!r}; available: {sorted(EXACT_SOLUTIONS)}")
    return EXACT_SOLUTIONS[name](polygon)


def check_consistency(exact, n_points=100, seed=0, tol=1e-5, step=1e-4):
    """Spot-check f = -lap(u) + kappa*u, g = u on the boundary, flux = grad(u).n
    at random points with central finite differences.

    Returns the maximum deviations; raises ValueError if any exceeds tol.
    """
    rng = np.random.default_rng(seed)
    poly = exact.polygon
    xmin, ymin, xmax, ymax = poly.bounding_box
    interior = []
    while len(interior) < n_points:
        cand = rng.uniform((xmin, ymin), (xmax, ymax), size=(4 * n_points, 2))
        for p in cand:
            if poly.contains(p) and poly.boundary_distance(p) > 2 * step:
                interior.append(p)
                if len(interior) == n_points:
                    break
    pts = np.asarray(interior)
    h = step
    e1 = np.array([h, 0.0])
    e2 = np.array([0.0, h])
    lap = (exact.u(pts + e1) + exact.u(pts - e1) + exact.u(pts + e2)
           + exact.u(pts - e2) - 4.0 * exact.u(pts)) / h ** 2
    pde_dev = np.max(np.abs(-lap + exact.kappa * exact.u(pts) - exact.f(pts)))
    fd_grad = np.stack([(exact.u(pts + e1) - exact.u(pts - e1)) / (2 * h),
                        (exact.u(pts + e2) - exact.u(pts - e2)) / (2 * h)], axis=-1)
    grad_dev = np.max(np.abs(fd_grad - exact.grad_u(pts)))
    s = rng.uniform(0.0, poly.perimeter, size=n_points)
    bpts = poly.point_at(s)
    trace_dev = np.max(np.abs(exact.g(s) - exact.u(bpts)))
    fd_bgrad = np.stack([(exact.u(bpts + e1) - exact.u(bpts - e1)) / (2 * h),
                         (exact.u(bpts + e2) - exact.u(bpts - e2)) / (2 * h)], axis=-1)
    flux_dev = np.max(np.abs(np.sum(fd_bgrad * poly.outward_normal_at(s), axis=-1)
                             - exact.flux(s)))
    devs = {"pde": float(pde_dev), "gradient": float(grad_dev),
            "trace": float(trace_dev), "flux": float(flux_dev)}
    bad = {k: v for k, v in devs.items() if not v <= tol}
    if bad:
        raise ValueError(f"exact solution {exact.name!r} inconsistent: {bad}")
    return devs


# ---------------------------------------------------------------------------
# run records


@dataclass(frozen=True)
class RunRow:
    N: int
    M: int
    h_X: float
    k: float
    r: float
    tau: float
    p: int
    h1_error: float
    l2_lambda_error: float
    cond_estimate: float
    runtime_s: float

    def to_csv_line(self):
        return ",".join([str(self.N), str(self.M), f"{self.h_X:.17g}",
                         f"{self.k:.17g}", f"{self.r:.17g}", f"{self.tau:.17g}",
                         str(self.p), f"{self.h1_error:.17g}",
                         f"{self.l2_lambda_error:.17g}",
                         f"{self.cond_estimate:.17g}", f"{self.runtime_s:.17g}"])

    @classmethod
    def from_csv_line(cls, line):
        parts = line.strip().split(",")
        if len(parts) != 11:
            raise ValueError(f"expected 11 columns, got {len(parts)}: {line!r}")
        return cls(N=int(parts[0]), M=int(parts[1]), h_X=float(parts[2]),
                   k=float(parts[3]), r=float(parts[4]), tau=float(parts[5]),
                   p=int(parts[6]), h1_error=float(parts[7]),
                   l2_lambda_error=float(parts[8]), cond_estimate=float(parts[9]),
                   runtime_s=float(parts[10]))


@dataclass(frozen=True, eq=False)
class ConvergenceRecord:
    """Rows of a refinement study, ordered by decreasing fill distance."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        h = [row.h_X for row in rows]
        if any(not math.isfinite(v) for v in h):
            raise ValueError("every row needs a finite h_X")
        if any(h[i] < h[i + 1] for i in range(len(h) - 1)):
            raise ValueError("rows must be sorted by h_X descending")

    def column(self, name):
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in self.rows:
                fh.write(row.to_csv_line() + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip()
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {header!r}")
            return cls(rows=tuple(RunRow.from_csv_line(line)
                                  for line in fh if line.strip()))

    def rate(self, column, parameter, window=3):
        return fit_rate(self, column, parameter, window=window)


def fit_rate(record, column, parameter, window=3):
    """Least-squares slope of log(record.column) vs log(record.parameter)
    over the last ``window`` rows (default 3).

    Requires at least 3 rows and strictly positive values in both columns.
    """
    if parameter not in ("h_X", "k"):
        raise ValueError(f"parameter must be 'h_X' or 'k', got {parameter!r}")
    if len(record.rows) < 3:
        raise ValueError("rate fitting needs at least 3 rows")
    if window < 2:
        raise ValueError("window must span at least 2 rows")
    errs = record.column(column)[-window:]
    params = record.column(parameter)[-window:]
    if np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise ValueError(f"column {column!r} must be positive and finite to fit a rate")
    if np.any(params <= 0):
        raise ValueError(f"parameter {parameter!r} must be positive to fit a rate")
    slope = np.polyfit(np.log(params), np.log(errs), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# error norms


def h1_norm_of_difference(quad, values_a, grads_a, values_b, grads_b):
    """Full H1 norm of the difference of two sampled functions."""
    dv = np.asarray(values_a) - np.asarray(values_b)
    dg = np.asarray(grads_a) - np.asarray(grads_b)
    w = quad.weights
    return float(np.sqrt(np.dot(w, dv ** 2) + np.dot(w, np.sum(dg ** 2, axis=1))))


def h1_error(solution, exact, quad):
    """H1(Omega) error of the discrete solution against a manufactured one.

    Accuracy is limited by the supplied quadrature; pass an overkill rule.
    """
    vals, grads = expansion_on_quadrature(solution.u_coeffs, solution.centers,
                                          solution.kernel, quad, gradients=True)
    exact_vals = exact.u(quad.nodes)
    exact_grads = exact.grad_u(quad.nodes)
    return h1_norm_of_difference(quad, vals, grads, exact_vals, exact_grads)


def l2_boundary_error(solution, exact, rule):
    """L2(Gamma) error of the multiplier against the exact outward flux."""
    space = solution.multipliers
    if space is None:
        raise ValueError("solution carries no multipliers reference for evaluation")
    mesh = space.mesh
    total = 0.0
    for e, element in enumerate(mesh.elements):
        length = element.length
        s = mesh.element_starts[e] + rule.nodes * length
        local = space.local_basis_matrix(rule.nodes)
        block = solution.lambda_coeffs[e * (space.degree + 1):(e + 1) * (space.degree + 1)]
        approx = block @ local
        diff = approx - exact.flux(s)
        total += length * np.dot(rule.weights, diff ** 2)
    return float(np.sqrt(total))


def l2_norm_on_quadrature(quad, values):
    return float(np.sqrt(np.dot(quad.weights, np.asarray(values) ** 2)))


# ---------------------------------------------------------------------------
# native-space interpolation


def interpolate_native(v, centers, kernel):
    """Coefficients of the kernel interpolant matching v at every center.

    The interpolation matrix K_ij = Phi_r(x_i - x_j) is symmetric positive
    definite for distinct centers; it is factorized by Cholesky with one step
    of iterative refinement.  Severe ill-conditioning (scale much larger than
    the separation distance) surfaces as ConditioningError carrying q_X / r.
    """
    pts = centers.points
    target = np.asarray(v(pts), dtype=float)
    if target.shape != (len(pts),):
        raise ValueError("v must map (n, 2) points to n values")
    K = kern.pairwise_values(kernel, pts, pts)
    ratio = centers.separation / kernel.scale
    try:
        factor = scipy.linalg.cho_factor(K)
    except scipy.linalg.LinAlgError as exc:
        raise ConditioningError(
            f"interpolation matrix factorization failed at q_X/r = {ratio:.3e}",
            separation_ratio=ratio) from exc
    coeffs = scipy.linalg.cho_solve(factor, target)
    coeffs += scipy.linalg.cho_solve(factor, target - K @ coeffs)
    residual = np.linalg.norm(target - K @ coeffs) / (np.linalg.norm(target) + 1.0)
    if not residual <= INTERP_RESIDUAL_TOL:
        raise ConditioningError(
            f"interpolation residual {residual:.3e} exceeds {INTERP_RESIDUAL_TOL:.0e} "
            f"at q_X/r = {ratio:.3e}", separation_ratio=ratio)
    return coeffs


def interpolation_rate_study(v, smoothness, scale, grid_sizes, polygon=None,
                             quad=None):
    """L2(Omega) interpolation errors of v over a sequence of grids at fixed
    kernel scale.

    Rows reuse the run-record layout: the L2 error lands in the h1_error
    column, M = 0 and p = -1 mark the absence of a multiplier space, and the
    boundary-error column is NaN.
    """
    polygon = polygon if polygon is not None else unit_square()
    kernel = kern.WendlandKernel(smoothness=smoothness, scale=scale)
    if quad is None:
        quad = DomainQuadrature(polygon, cell_size=scale / 8.0)
    exact_vals = np.asarray(v(quad.nodes), dtype=float)
    rows = []
    for n in grid_sizes:
        centers = generate_grid_centers(polygon, n)
        coeffs = interpolate_native(v, centers, kernel)
        approx = expansion_on_quadrature(coeffs, centers, kernel, quad)
        err = l2_norm_on_quadrature(quad, approx - exact_vals)
        rows.append(RunRow(N=centers.count, M=0, h_X=centers.fill_distance,
                           k=float("nan"), r=scale, tau=kernel.tau, p=-1,
                           h1_error=err, l2_lambda_error=float("nan"),
                           cond_estimate=float("nan"), runtime_s=0.0))
    return ConvergenceRecord(rows=tuple(rows))


def is_floor_limited(record, floor=FLOOR_ERROR):
    """True when every error in a study sits at the quadrature/conditioning
    floor, making a fitted rate meaningless."""
    errs = record.column("h1_error")
    return bool(np.all(errs <= floor))


# ---------------------------------------------------------------------------
# inf-sup estimate


def _dense(mat):
    if hasattr(mat, "toarray"):
        return mat.toarray()
    return np.asarray(mat, dtype=float)


def estimate_infsup(system, h1_gram, boundary_l2_gram):
    """Smallest generalized singular value of the coupling block.

    beta^2 is the smallest eigenvalue of B^T G1^{-1} B against the weighted
    boundary Gram W = k * boundary_l2_gram; the k-weighting is the discrete
    surrogate for the H^{-1/2}(Gamma) norm on a quasi-uniform partition.
    Intended for trend detection across refinements, not absolute values.
    """
    B = _dense(system.B)
    G1 = _dense(h1_gram)
    W = system.params.k * _dense(boundary_l2_gram)
    try:
        factor = scipy.linalg.cho_factor(G1)
    except scipy.linalg.LinAlgError as exc:
        raise ConditioningError("h1_gram is not positive definite") from exc
    S = B.T @ scipy.linalg.cho_solve(factor, B)
    S = 0.5 * (S + S.T)
    try:
        smallest = scipy.linalg.eigh(S, W, eigvals_only=True,
                                     subset_by_index=[0, 0])[0]
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise ConditioningError("boundary_l2_gram is not positive definite") from exc
    return float(np.sqrt(max(smallest, 0.0)))
