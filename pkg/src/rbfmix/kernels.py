"""Scaled compactly supported Wendland-type radial kernels in two dimensions.

Two families are provided, named by their smoothness class: the C0 profile
phi(rho) = (1-rho)^2 and the C2 profile phi(rho) = (1-rho)^4 (4 rho + 1), both
truncated at rho = 1.  A kernel of scale r evaluates as r^(-2) phi(|x-c|/r),
so its support is the disk of radius r around the center c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TAU = {"C0": 1.5, "C2": 2.5}
_CONFIG_NAMES = {"wendland_c0": "C0", "wendland_c2": "C2"}
KERNEL_NAMES = tuple(sorted(_CONFIG_NAMES))


@dataclass(frozen=True)
class WendlandKernel:
    """Compactly supported radial kernel with smoothness "C0" or "C2" and scale r > 0."""

    smoothness: str
    scale: float

    def __post_init__(self):
        if self.smoothness not in _TAU:
            raise ValueError(f"unknown smoothness {self.smoothness!r}; use 'C0' or 'C2'")
        if not self.scale > 0.0:
            raise ValueError("kernel scale must be positive")

    @property
    def tau(self):
        """Fourier decay exponent: 1.5 for C0, 2.5 for C2."""
        return _TAU[self.smoothness]

    dim = 2


def make_kernel(name, scale):
    """Build a kernel from its config name 'wendland_c0' or 'wendland_c2'."""
    if name not in _CONFIG_NAMES:
        raise ValueError(f"unknown kernel name {name!r}")
    return WendlandKernel(smoothness=_CONFIG_NAMES[name], scale=scale)


def eval_univariate(kernel, rho):
    """phi(rho) for rho >= 0; zero beyond the support boundary rho = 1."""
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr < 0.0):
        raise ValueError("rho must be nonnegative")
    w = np.maximum(1.0 - rho_arr, 0.0)
    if kernel.smoothness == "C0":
        out = w * w
    else:
        out = w ** 4 * (4.0 * rho_arr + 1.0)
    return out if rho_arr.ndim else float(out)


def _phi_prime(kernel, rho):
    """phi'(rho), zero beyond the support; one-sided value at rho = 0 for C0."""
    w = np.maximum(1.0 - rho, 0.0)
    if kernel.smoothness == "C0":
        return -2.0 * w
    return -20.0 * rho * w ** 3


def eval(kernel, x, center):  # noqa: A001 - keep the short public name
    """Phi_r(x - center) = r^(-2) phi(|x - center| / r)."""
    x_arr = np.asarray(x, dtype=float)
    diff = x_arr - np.asarray(center, dtype=float)
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    r = kernel.scale
    out = eval_univariate(kernel, dist / r) / (r * r)
    return out if x_arr.ndim > 1 else float(out)


def grad(kernel, x, center):
    """Gradient of Phi_r(. - center) at x.

    Returns r^(-3) phi'(|x-center|/r) (x-center)/|x-center|, with the zero
    vector both outside the support and at x = center; for the C0 profile the
    center value is a convention at the cone point, for C2 it is the true
    derivative.
    """
    x_arr = np.asarray(x, dtype=float)
    diff = np.atleast_2d(x_arr) - np.asarray(center, dtype=float)
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    r = kernel.scale
    rho = dist / r
    scale = np.zeros_like(dist)
    mask = (dist > 0.0) & (rho < 1.0)
    scale[mask] = _phi_prime(kernel, rho[mask]) / (r ** 3 * dist[mask])
    out = scale[..., None] * diff
    return out if x_arr.ndim > 1 else out[0]


def pairwise_values(kernel, centers, points):
    """Kernel values Phi_r(points - center) for every center, shape (n_centers, n_points)."""
    diff = points[None, :, :] - centers[:, None, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    r = kernel.scale
    w = np.maximum(1.0 - dist / r, 0.0)
    if kernel.smoothness == "C0":
        vals = w * w
    else:
        vals = w ** 4 * (4.0 * dist / r + 1.0)
    return vals / (r * r)


def pairwise_gradients(kernel, centers, points):
    """Kernel gradients for every (center, point) pair.

    Returns (gx, gy), each of shape (n_centers, n_points); rows follow the
    same zero conventions as :func:`grad`.
    """
    diff = points[None, :, :] - centers[:, None, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    r = kernel.scale
    rho = dist / r
    scale = np.zeros_like(dist)
    mask = (dist > 0.0) & (rho < 1.0)
    scale[mask] = _phi_prime(kernel, rho[mask]) / (r ** 3 * dist[mask])
    return scale * diff[:, :, 0], scale * diff[:, :, 1]
