"""Batch front-end: single solves, refinement sweeps, interpolation studies,
and inf-sup probes driven by a TOML config.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
sweeps where every row fails), 4 partial sweep failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import analysis
from .assembly import assemble_A, assemble_system
from .config import load_config, validate_config
from .errors import ConfigurationError, NumericalError
from .geometry import (generate_grid_centers, generate_interior_centers,
                       is_unit_square, partition_boundary)
from .multiplier_space import MultiplierSpace
from .quadrature import DomainQuadrature, gauss_rule
from .solver import save_solution, solve

_COMMAND_MODES = {"solve": "solve", "sweep": "sweep",
                  "interp-study": "interpolation_study", "infsup": "infsup_probe"}


def k_from_rule(h, r):
    """Partition target k = h/r, snapped so that a unit side length holds an
    integer number >= 1 of elements."""
    target = h / r
    m = max(1, int(round(1.0 / target)))
    return 1.0 / m


@dataclass(frozen=True, eq=False)
class Case:
    """All spaces and rules for one (grid, k) run."""

    polygon: object
    kernel: object
    centers: object
    mesh: object
    space: object
    quad: object
    rule: object
    exact: object


def build_case(config, n, explicit_k=None):
    polygon = config.build_polygon()
    kernel = config.build_kernel()
    if is_unit_square(polygon):
        centers = generate_grid_centers(polygon, n)
    else:
        centers = generate_interior_centers(polygon, 1.0 / (n - 1))
    h = centers.fill_distance
    target_k = explicit_k if explicit_k is not None else k_from_rule(h, kernel.scale)
    mesh = partition_boundary(polygon, target_k)
    space = MultiplierSpace(mesh=mesh, degree=config.degree)
    cell = min(h, kernel.scale) / config.quad_cell_factor
    if is_unit_square(polygon):
        # snap so cells subdivide the center spacing: kernel-center kinks of
        # the C0 family then sit on cell corners, never on Gauss nodes
        spacing = 1.0 / (n - 1)
        cell = spacing / math.ceil(spacing / cell - 1e-12)
    quad = DomainQuadrature(polygon, cell_size=cell,
                            points_per_cell=config.quad_points_per_cell)
    rule = gauss_rule(config.boundary_quad_order)
    exact = analysis.with_kappa(
        analysis.get_exact_solution(config.exact, polygon), config.kappa)
    return Case(polygon=polygon, kernel=kernel, centers=centers, mesh=mesh,
                space=space, quad=quad, rule=rule, exact=exact)


def run_case(config, n, explicit_k=None):
    """Assemble, solve and measure one grid; returns (row, case, system, solution)."""
    start = time.perf_counter()
    case = build_case(config, n, explicit_k)
    system = assemble_system(case.centers, case.kernel, config.kappa, case.space,
                             case.quad, case.rule, case.exact.f, case.exact.g)
    solution = solve(system, centers=case.centers, kernel=case.kernel,
                     multipliers=case.space)
    h1 = analysis.h1_error(solution, case.exact, case.quad)
    l2 = analysis.l2_boundary_error(solution, case.exact, case.rule)
    runtime = time.perf_counter() - start
    row = analysis.RunRow(
        N=system.params.N, M=system.params.M, h_X=system.params.h_X,
        k=system.params.k, r=system.params.r, tau=system.params.tau,
        p=system.params.p, h1_error=h1, l2_lambda_error=l2,
        cond_estimate=solution.cond_estimate, runtime_s=runtime)
    return row, case, system, solution


def _explicit_ks(config):
    if isinstance(config.k_rule, str):
        return [None] * len(config.grids)
    return list(config.k_rule)


def _out_dir(config):
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_row(row):
    print(f"N={row.N} M={row.M} h_X={row.h_X:.6g} k={row.k:.6g} "
          f"h1={row.h1_error:.6g} l2_lambda={row.l2_lambda_error:.6g} "
          f"cond~{row.cond_estimate:.3g} t={row.runtime_s:.2f}s")


def write_plot_data(record, path):
    """Plot-ready table: unknowns, both errors, and the reference curves
    10*h_X and 10*sqrt(k)."""
    with open(path, "w") as fh:
        fh.write("# unknowns h1_error l2_lambda_error ref_10h ref_10sqrtk\n")
        for row in record.rows:
            unknowns = row.N + row.M
            fh.write(f"{unknowns} {row.h1_error:.17g} {row.l2_lambda_error:.17g} "
                     f"{10.0 * row.h_X:.17g} {10.0 * np.sqrt(row.k):.17g}\n")


def run_single(config):
    out = _out_dir(config)
    row, case, system, solution = run_case(config, config.grids[0],
                                           _explicit_ks(config)[0])
    save_solution(solution, out / "solution.txt")
    analysis.ConvergenceRecord(rows=(row,)).to_csv(out / "single.csv")
    print(f"N={row.N} M={row.M} h_X={row.h_X:.6g} k={row.k:.6g} r={row.r:.6g} "
          f"tau={row.tau:.2g} p={row.p}")
    print(f"h1_error={row.h1_error:.10g}")
    print(f"l2_lambda_error={row.l2_lambda_error:.10g}")
    print(f"cond_estimate={row.cond_estimate:.6g}")
    print(f"residual_norm={solution.residual_norm:.6g}")
    print(f"wrote {out / 'solution.txt'} and {out / 'single.csv'}")
    return 0


def run_sweep(config):
    out = _out_dir(config)
    ks = _explicit_ks(config)

    def work(i):
        try:
            row, *_ = run_case(config, config.grids[i], ks[i])
            return i, row, None
        except (NumericalError, ConfigurationError, ValueError) as exc:
            return i, None, exc

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        results = sorted(pool.map(work, range(len(config.grids))))
    rows, failures = [], []
    for i, row, exc in results:
        if row is not None:
            rows.append(row)
        else:
            failures.append((config.grids[i], exc))
    record = analysis.ConvergenceRecord(rows=tuple(rows))
    record.to_csv(out / "sweep.csv")
    write_plot_data(record, out / "sweep_plot.dat")
    for row in rows:
        _print_row(row)
    if len(rows) >= 3:
        print(f"fitted h1 rate vs h_X: {record.rate('h1_error', 'h_X'):.4f}")
        print(f"fitted l2_lambda rate vs k: {record.rate('l2_lambda_error', 'k'):.4f}")
    if failures:
        with open(out / "failures.txt", "w") as fh:
            for n, exc in failures:
                fh.write(f"grid {n}: {type(exc).__name__}: {exc}\n")
        for n, exc in failures:
            print(f"grid {n} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3 if not rows else 4
    print(f"wrote {out / 'sweep.csv'} and {out / 'sweep_plot.dat'}")
    return 0


def run_interpolation_study(config):
    out = _out_dir(config)
    v = analysis.INTERP_TARGETS[config.exact]
    kernel = config.build_kernel()
    record = analysis.interpolation_rate_study(
        v, kernel.smoothness, kernel.scale, config.grids,
        polygon=config.build_polygon())
    record.to_csv(out / "interp.csv")
    for row in record.rows:
        print(f"N={row.N} h_X={row.h_X:.6g} l2_error={row.h1_error:.6g}")
    if analysis.is_floor_limited(record):
        message = "errors at the quadrature/conditioning floor; rate meaningless"
    elif len(record.rows) >= 3:
        message = f"fitted L2 rate vs h_X: {record.rate('h1_error', 'h_X'):.4f}"
    else:
        message = "fewer than 3 grids; no rate fitted"
    (out / "interp_rate.txt").write_text(message + "\n")
    print(message)
    print(f"wrote {out / 'interp.csv'} and {out / 'interp_rate.txt'}")
    return 0


def run_infsup_probe(config):
    out = _out_dir(config)
    ks = _explicit_ks(config)
    entries = []
    for n, explicit_k in zip(config.grids, ks):
        case = build_case(config, n, explicit_k)
        system = assemble_system(case.centers, case.kernel, config.kappa,
                                 case.space, case.quad, case.rule,
                                 case.exact.f, case.exact.g)
        h1_gram = assemble_A(case.centers, case.kernel, 1.0, case.quad)
        beta = analysis.estimate_infsup(system, h1_gram, case.space.gram_matrix())
        entries.append((system.params, beta))
        print(f"N={system.params.N} M={system.params.M} "
              f"h_X={system.params.h_X:.6g} k={system.params.k:.6g} beta={beta:.8g}")
    with open(out / "infsup.csv", "w") as fh:
        fh.write("N,M,h_X,k,beta\n")
        for params, beta in entries:
            fh.write(f"{params.N},{params.M},{params.h_X:.17g},{params.k:.17g},"
                     f"{beta:.17g}\n")
    if len(entries) >= 3:
        hs = np.array([p.h_X for p, _ in entries])
        betas = np.array([b for _, b in entries])
        slope = float(np.polyfit(np.log(hs), np.log(betas), 1)[0])
        print(f"log-log slope of beta vs h_X: {slope:.4f}")
    print(f"wrote {out / 'infsup.csv'}")
    return 0


_RUNNERS = {"solve": run_single, "sweep": run_sweep,
            "interpolation_study": run_interpolation_study,
            "infsup_probe": run_infsup_probe}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rbfmix",
        description="Kernel-based solver for -lap(u) + kappa*u = f with "
                    "weakly enforced Dirichlet data")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMAND_MODES:
        p = sub.add_parser(command)
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="override worker thread count")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        expected = _COMMAND_MODES[args.command]
        if config.mode != expected:
            raise ConfigurationError(
                f"command {args.command!r} needs mode = {expected!r}, "
                f"config has {config.mode!r}")
        if args.out is not None:
            config = replace(config, out_dir=args.out)
        if args.threads is not None:
            config = replace(config, threads=args.threads)
        validate_config(config)
        return _RUNNERS[config.mode](config)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


def console_main():
    sys.exit(main())
