"""Run configuration: a flat TOML file of `key = value` lines mapped onto a
frozen dataclass with eager validation.

Every invalid field raises ConfigurationError naming the offending key, before
any numerical work starts.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigurationError
from .geometry import POLYGON_PRESETS, Polygon
from .kernels import KERNEL_NAMES, make_kernel
from .multiplier_space import MAX_DEGREE

MODES = ("solve", "sweep", "interpolation_study", "infsup_probe")


@dataclass(frozen=True)
class RunConfig:
    """Everything a batch run needs; defaults reproduce the shipped presets."""

    mode: str
    polygon: object = "unit_square"     # preset name or list of [x, y] vertices
    kernel: str = "wendland_c2"
    r: float = 0.2
    kappa: float = 0.0
    exact: str = "quadratic"
    grids: tuple = (9,)                 # centers per side, one entry per run
    degree: int = 0                     # multiplier polynomial degree p
    k_rule: object = "hx_over_r"        # or explicit list of k values per grid
    quad_points_per_cell: int = 5
    quad_cell_factor: float = 2.0       # quadrature cell = min(h_X, r) / factor
    boundary_quad_order: int = 16
    out_dir: str = "out"
    threads: int = 1

    def build_polygon(self):
        if isinstance(self.polygon, str):
            return POLYGON_PRESETS[self.polygon]()
        return Polygon(vertices=np.asarray(self.polygon, dtype=float))

    def build_kernel(self):
        return make_kernel(self.kernel, self.r)


def _fail(key, detail):
    raise ConfigurationError(f"config key {key!r}: {detail}")


def validate_config(config):
    """Check every invariant; returns the config for chaining."""
    if config.mode not in MODES:
        _fail("mode", f"must be one of {MODES}, got {config.mode!r}")
    if isinstance(config.polygon, str):
        if config.polygon not in POLYGON_PRESETS:
            _fail("polygon", f"unknown preset {config.polygon!r}; "
                             f"available: {sorted(POLYGON_PRESETS)}")
    else:
        try:
            config.build_polygon()
        except (ValueError, TypeError) as exc:
            _fail("polygon", f"invalid vertex list: {exc}")
    if config.kernel not in KERNEL_NAMES:
        _fail("kernel", f"unknown kernel {config.kernel!r}; available: {KERNEL_NAMES}")
    if not (isinstance(config.r, (int, float)) and config.r > 0):
        _fail("r", f"must be a positive scale, got {config.r!r}")
    if not (isinstance(config.kappa, (int, float)) and config.kappa >= 0):
        _fail("kappa", f"must be nonnegative, got {config.kappa!r}")
    if config.mode == "interpolation_study":
        from .analysis import INTERP_TARGETS
        if config.exact not in INTERP_TARGETS:
            _fail("exact", f"unknown interpolation target {config.exact!r}; "
                           f"available: {sorted(INTERP_TARGETS)}")
    else:
        from .analysis import EXACT_SOLUTIONS
        if config.exact not in EXACT_SOLUTIONS:
            _fail("exact", f"unknown exact solution {config.exact!r}; "
                           f"available: {sorted(EXACT_SOLUTIONS)}")
    grids = config.grids
    if not grids or not all(isinstance(n, int) and n >= 2 for n in grids):
        _fail("grids", f"need integers >= 2, got {grids!r}")
    if config.mode in ("sweep", "interpolation_study", "infsup_probe"):
        if any(grids[i] >= grids[i + 1] for i in range(len(grids) - 1)):
            _fail("grids", "must be strictly increasing in sweep modes")
    if not (isinstance(config.degree, int) and 0 <= config.degree <= MAX_DEGREE):
        _fail("degree", f"must be an integer in [0, {MAX_DEGREE}], got {config.degree!r}")
    if isinstance(config.k_rule, str):
        if config.k_rule != "hx_over_r":
            _fail("k_rule", f"unknown rule {config.k_rule!r}; use 'hx_over_r' "
                            "or an explicit list of k values")
    else:
        ks = config.k_rule
        if len(ks) != len(grids):
            _fail("k_rule", f"explicit list needs one k per grid "
                            f"({len(grids)}), got {len(ks)}")
        if not all(isinstance(k, (int, float)) and k > 0 for k in ks):
            _fail("k_rule", f"k values must be positive, got {ks!r}")
    if not (isinstance(config.quad_points_per_cell, int)
            and config.quad_points_per_cell >= 1):
        _fail("quad_points_per_cell", f"must be a positive integer, "
                                      f"got {config.quad_points_per_cell!r}")
    if not (isinstance(config.quad_cell_factor, (int, float))
            and config.quad_cell_factor > 0):
        _fail("quad_cell_factor", f"must be positive, got {config.quad_cell_factor!r}")
    if not (isinstance(config.boundary_quad_order, int)
            and config.boundary_quad_order >= config.degree + 3):
        _fail("boundary_quad_order", "must be an integer >= degree + 3, "
                                     f"got {config.boundary_quad_order!r}")
    if not (isinstance(config.threads, int) and config.threads >= 1):
        _fail("threads", f"must be a positive integer, got {config.threads!r}")
    return config


def config_from_mapping(data):
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "mode" not in data:
        raise ConfigurationError("config key 'mode' is required")
    data = dict(data)
    for key in ("grids", "k_rule", "polygon"):
        if key in data and isinstance(data[key], list):
            data[key] = tuple(tuple(v) if isinstance(v, list) else v
                              for v in data[key])
    for key in ("r", "kappa", "quad_cell_factor"):
        if key in data and isinstance(data[key], int):
            data[key] = float(data[key])
    return validate_config(RunConfig(**data))


def load_config(path):
    """Parse and validate a TOML run configuration."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid TOML: {exc}") from exc
    return config_from_mapping(data)
