"""Direct solution of the saddle-point system and evaluation of the result.

The full (N+M) x (N+M) indefinite block matrix is factorized with partial
pivoting; small pivots and oversized residuals surface as errors carrying the
parameter record, so stability failures of a parameter combination are
observable rather than silently absorbed.

Sign convention: integrating the first Galerkin equation by parts shows the
raw multiplier unknown of the block system converges to the negative outward
normal derivative of the solution.  The stored ``lambda_coeffs`` are the
negated raw coefficients, so evaluate_lambda approximates the outward flux
du/dn itself.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack
from scipy.spatial import cKDTree

from . import kernels as kern
from . import multiplier_space as mspace
from .assembly import ParameterRecord
from .errors import SingularSystemError
from .quadrature import restrict_support

RESIDUAL_TOL = 1e-8
PIVOT_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class MixedSolution:
    """Coefficients of the discrete solution and multiplier.

    ``lambda_coeffs`` hold the outward-flux approximation (see module note on
    the sign convention).  The space references are optional and only needed
    for evaluation.
    """

    u_coeffs: np.ndarray
    lambda_coeffs: np.ndarray
    residual_norm: float
    cond_estimate: float
    params: ParameterRecord
    centers: object = None
    kernel: object = None
    multipliers: object = None
    _center_tree: object = field(default=None, repr=False)

    def center_tree(self):
        if self._center_tree is None:
            object.__setattr__(self, "_center_tree", cKDTree(self.centers.points))
        return self._center_tree


def block_residual(system, u, raw_multiplier):
    """Scaled residual of [[A,B],[B^T,0]] [u; nu] = [F; G]."""
    r1 = system.A.dot(u) + system.B.dot(raw_multiplier) - system.F
    r2 = system.B.T.dot(u) - system.G
    num = np.linalg.norm(np.concatenate([r1, r2]))
    return num / (np.linalg.norm(system.F) + np.linalg.norm(system.G) + 1.0)


def solve(system, centers=None, kernel=None, multipliers=None):
    """Factorize and solve the assembled saddle-point system.

    Parameters
    ----------
    system : SaddleSystem
    centers, kernel, multipliers : optional
        Space references attached to the returned solution for evaluation.

    Raises
    ------
    SingularSystemError
        If a pivot falls below ``1e-14 * max|entry|``, the factorization
        fails, or the block residual exceeds the solve tolerance.
    """
    n, m = system.params.N, system.params.M
    if n < 1 or m < 1:
        raise ValueError("system must have N >= 1 and M >= 1")
    K = np.zeros((n + m, n + m))
    K[:n, :n] = system.A.toarray()
    K[:n, n:] = system.B.toarray()
    K[n:, :n] = K[:n, n:].T
    rhs = np.concatenate([system.F, system.G])

    max_entry = float(np.abs(K).max())
    one_norm = float(np.abs(K).sum(axis=0).max())
    try:
        with np.errstate(all="ignore"), warnings.catch_warnings():
            # exactly-zero pivots are caught by the check below; the scipy
            # warning on that path would only add noise
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(K, check_finite=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(f"factorization failed: {exc}", system.params) from exc
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= PIVOT_TOL * max_entry:
        raise SingularSystemError(
            f"numerically singular saddle matrix: pivot {pivots.min():.3e} below "
            f"{PIVOT_TOL:.0e} * max entry {max_entry:.3e}", system.params)
    rcond, info = lapack.dgecon(lu, one_norm, norm="1")
    cond_estimate = np.inf if rcond == 0.0 else 1.0 / float(rcond)
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    u, raw = x[:n], x[n:]
    residual = block_residual(system, u, raw)
    if not residual <= RESIDUAL_TOL:
        raise SingularSystemError(
            f"solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}; the "
            "discretization is unstable for these parameters", system.params)
    return MixedSolution(
        u_coeffs=u, lambda_coeffs=-raw, residual_norm=residual,
        cond_estimate=cond_estimate, params=system.params,
        centers=centers, kernel=kernel, multipliers=multipliers)


def _require_spaces(solution, *names):
    for name in names:
        if getattr(solution, name) is None:
            raise ValueError(f"solution carries no {name} reference for evaluation")


def evaluate_u(solution, x):
    """Discrete solution at one point or an (n, 2) array of points.

    Only kernels whose support contains the point are touched (fixed-radius
    neighbor query on the centers).
    """
    _require_spaces(solution, "centers", "kernel")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    tree = solution.center_tree()
    r = solution.kernel.scale
    out = np.zeros(len(pts))
    for row, p in enumerate(pts):
        idx = tree.query_ball_point(p, r)
        if not idx:
            continue
        idx = np.sort(np.asarray(idx, dtype=np.intp))
        phi = kern.pairwise_values(solution.kernel, solution.centers.points[idx],
                                   p[None, :])[:, 0]
        out[row] = float(np.dot(solution.u_coeffs[idx], phi))
    return out if np.asarray(x).ndim > 1 else float(out[0])


def evaluate_grad_u(solution, x):
    """Gradient of the discrete solution at one point or an array of points."""
    _require_spaces(solution, "centers", "kernel")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    tree = solution.center_tree()
    r = solution.kernel.scale
    out = np.zeros((len(pts), 2))
    for row, p in enumerate(pts):
        idx = tree.query_ball_point(p, r)
        if not idx:
            continue
        idx = np.sort(np.asarray(idx, dtype=np.intp))
        gx, gy = kern.pairwise_gradients(solution.kernel, solution.centers.points[idx],
                                         p[None, :])
        out[row, 0] = float(np.dot(solution.u_coeffs[idx], gx[:, 0]))
        out[row, 1] = float(np.dot(solution.u_coeffs[idx], gy[:, 0]))
    return out if np.asarray(x).ndim > 1 else out[0]


def evaluate_lambda(solution, s):
    """Multiplier (outward-flux approximation) at arc lengths s."""
    _require_spaces(solution, "multipliers")
    return mspace.evaluate(solution.multipliers, solution.lambda_coeffs, s)


def expansion_on_quadrature(coeffs, centers, kernel, quad, gradients=False):
    """Values (and optionally gradients) of a kernel expansion at all nodes.

    Accumulates center by center over the support-restricted node subsets, so
    the cost is proportional to the total number of (center, node) pairs with
    overlapping support.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    values = np.zeros(quad.n_nodes)
    grads = np.zeros((quad.n_nodes, 2)) if gradients else None
    r = kernel.scale
    for i, x in enumerate(centers.points):
        c = coeffs[i]
        if c == 0.0:
            continue
        idx = restrict_support(quad, x, r)
        if idx.size == 0:
            continue
        nodes = quad.nodes[idx]
        values[idx] += c * kern.pairwise_values(kernel, x[None, :], nodes)[0]
        if gradients:
            gx, gy = kern.pairwise_gradients(kernel, x[None, :], nodes)
            grads[idx, 0] += c * gx[0]
            grads[idx, 1] += c * gy[0]
    return (values, grads) if gradients else values


def save_solution(solution, path):
    """Text dump: JSON header line, then one coefficient per line."""
    header = {"format": "solution", "residual_norm": solution.residual_norm,
              "cond_estimate": solution.cond_estimate}
    header.update(solution.params.to_dict())
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for i, v in enumerate(solution.u_coeffs):
            fh.write(f"u {i} {v:.17g}\n")
        for j, v in enumerate(solution.lambda_coeffs):
            fh.write(f"lambda {j} {v:.17g}\n")


def load_solution(path, centers=None, kernel=None, multipliers=None):
    """Reload a dumped solution; space references must be rebuilt by the caller."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        u = np.empty(header["N"])
        lam = np.empty(header["M"])
        for line in fh:
            tag, idx, val = line.split()
            if tag == "u":
                u[int(idx)] = float(val)
            elif tag == "lambda":
                lam[int(idx)] = float(val)
            else:
                raise ValueError(f"unrecognized dump line tag {tag!r}")
    params = ParameterRecord(h_X=header["h_X"], k=header["k"], r=header["r"],
                             tau=header["tau"], p=header["p"], N=header["N"],
                             M=header["M"])
    return MixedSolution(
        u_coeffs=u, lambda_coeffs=lam, residual_norm=header["residual_norm"],
        cond_estimate=header["cond_estimate"], params=params,
        centers=centers, kernel=kernel, multipliers=multipliers)
