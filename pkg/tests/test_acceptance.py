"""End-to-end acceptance criteria for the mixed kernel/multiplier solver.

Each test prints one `ACCEPTANCE n: PASS|FAIL` line with the measured
quantities.  The convergence sweeps run once per session directly from the
shipped preset configurations and are shared across criteria.

Criteria 2 and 3 assert the literal multiplier-rate bracket [0.35, 1.1].  On
the shipped quadratic problem the exact boundary flux is piecewise constant
and corner-aligned boundary elements represent it exactly, so the measured
multiplier error superconverges well above the bracket; the trig preset,
whose flux is not representable, lands inside it.  See the README section on
multiplier rates for the analysis.  The tests are left honest rather than
widened.
"""
import math
from pathlib import Path

import numpy as np
import pytest

from rbfmix import analysis, kernels
from rbfmix.analysis import ConvergenceRecord, estimate_infsup, interpolation_rate_study
from rbfmix.assembly import assemble_A, assemble_A_dense
from rbfmix.cli import run_case
from rbfmix.config import load_config
from rbfmix.geometry import generate_grid_centers, partition_boundary, unit_square
from rbfmix.kernels import WendlandKernel
from rbfmix.multiplier_space import MultiplierSpace
from rbfmix.quadrature import DomainQuadrature, gauss_rule, integrate_domain
from rbfmix.solver import RESIDUAL_TOL, solve

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

H1_RATE_FLOOR = 0.8
LAMBDA_RATE_LOW = 0.35
LAMBDA_RATE_HIGH = 1.1


def report(number, ok, detail):
    print(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def run_sweep_preset(name, keep=False):
    config = load_config(CONFIG_DIR / name)
    rows, extras = [], []
    for n in config.grids:
        row, case, system, solution = run_case(config, n)
        rows.append(row)
        extras.append((case, system, solution) if keep else solution.residual_norm)
    return ConvergenceRecord(rows=tuple(rows)), extras, config


@pytest.fixture(scope="module")
def primary_sweep():
    """C2 kernel, r = 0.2, quadratic data: the headline configuration."""
    return run_sweep_preset("sweep_r02_c2.toml", keep=True)


@pytest.fixture(scope="module")
def alternate_sweeps():
    """The remaining kernel-family / scale combinations of the same study."""
    out = {}
    for name in ("sweep_r02_c0.toml", "sweep_r01_c2.toml", "sweep_r01_c0.toml"):
        record, residuals, config = run_sweep_preset(name)
        out[f"{config.kernel} r={config.r}"] = (record, residuals)
    return out


@pytest.fixture(scope="module")
def trig_sweep():
    record, residuals, _ = run_sweep_preset("sweep_trig_c2.toml")
    return record, residuals


def test_criterion_1_h1_rate(primary_sweep):
    record, _, _ = primary_sweep
    rate = record.rate("h1_error", "h_X")
    errs = record.column("h1_error")
    total_runtime = record.column("runtime_s").sum()
    ok = rate >= H1_RATE_FLOOR and np.all(np.diff(errs) < 0) and total_runtime < 120.0
    assert report(
        1, ok,
        f"h1 rate vs h_X {rate:.4f} (floor {H1_RATE_FLOOR}), errors "
        f"{' > '.join(f'{e:.4g}' for e in errs)}, sweep runtime {total_runtime:.1f}s",
    )


def test_criterion_2_multiplier_rate(primary_sweep, trig_sweep):
    record, _, _ = primary_sweep
    rate = record.rate("l2_lambda_error", "k")
    trig_record, _ = trig_sweep
    trig_rate = trig_record.rate("l2_lambda_error", "k")
    ok = LAMBDA_RATE_LOW <= rate <= LAMBDA_RATE_HIGH
    assert report(
        2, ok,
        f"multiplier rate vs k {rate:.4f} outside [{LAMBDA_RATE_LOW}, {LAMBDA_RATE_HIGH}]: "
        f"the quadratic flux is exactly representable by corner-aligned constant "
        f"elements, so the multiplier error superconverges; the non-representable "
        f"trig preset fits the bracket at {trig_rate:.4f} (see README)"
        if not ok
        else f"multiplier rate vs k {rate:.4f} within [{LAMBDA_RATE_LOW}, {LAMBDA_RATE_HIGH}]",
    )


def test_criterion_3_kernel_families(primary_sweep, alternate_sweeps):
    record, _, config = primary_sweep
    results = {f"{config.kernel} r={config.r}": record}
    results.update({name: rec for name, (rec, _) in alternate_sweeps.items()})
    parts, ok = [], True
    for name, rec in results.items():
        h1_rate = rec.rate("h1_error", "h_X")
        lam_rate = rec.rate("l2_lambda_error", "k")
        good = h1_rate >= H1_RATE_FLOOR and LAMBDA_RATE_LOW <= lam_rate <= LAMBDA_RATE_HIGH
        ok = ok and good
        parts.append(f"{name}: h1 {h1_rate:.3f}, lambda {lam_rate:.3f}"
                     + ("" if good else " [lambda outside bracket]"))
    assert report(
        3, ok,
        "; ".join(parts)
        + ("" if ok else " - representable-flux superconvergence, same cause as "
                         "criterion 2 (see README)"),
    )


def test_criterion_4_dense_assembly_oracle(square):
    centers = generate_grid_centers(square, 5)
    kernel = WendlandKernel(smoothness="C2", scale=0.3)
    quad = DomainQuadrature(square, cell_size=0.025, points_per_cell=5)
    sparse = assemble_A(centers, kernel, 0.0, quad).toarray()
    dense = assemble_A_dense(centers, kernel, 0.0, quad.refined(10))
    rel = np.abs(dense - sparse).max() / np.abs(dense).max()
    ok = rel <= 1e-8
    assert report(4, ok, f"dense 10x-refined vs sparse assembly: entrywise {rel:.3e} "
                         f"relative (tolerance 1e-08)")


def test_criterion_5_solver_contracts(primary_sweep, alternate_sweeps, trig_sweep):
    record, extras, config = primary_sweep
    residuals = [sol.residual_norm for _, _, sol in extras]
    for _, sweep_residuals in alternate_sweeps.values():
        residuals.extend(sweep_residuals)
    residuals.extend(trig_sweep[1])
    single_config = load_config(CONFIG_DIR / "single_quadratic.toml")
    _, _, _, single_solution = run_case(single_config, single_config.grids[0])
    residuals.append(single_solution.residual_norm)

    system = extras[0][1]
    again_a = solve(system)
    again_b = solve(system)
    bitwise = np.array_equal(again_a.u_coeffs, again_b.u_coeffs) and np.array_equal(
        again_a.lambda_coeffs, again_b.lambda_coeffs)

    worst = max(residuals)
    ok = worst <= RESIDUAL_TOL and bitwise
    assert report(
        5, ok,
        f"worst scaled residual {worst:.3e} over {len(residuals)} preset solves "
        f"(tolerance {RESIDUAL_TOL:.0e}); repeated solves bit-identical: {bitwise}",
    )


def test_criterion_6_interpolation_rates(square):
    v = lambda p: np.sin(np.pi * np.asarray(p)[..., 0]) * np.sin(np.pi * np.asarray(p)[..., 1])
    study = interpolation_rate_study(v, "C0", 0.2, (9, 17, 33))
    rate = study.rate("h1_error", "h_X")

    centers = generate_grid_centers(square, 33)
    kernel = WendlandKernel(smoothness="C0", scale=0.2)
    coeffs = analysis.interpolate_native(v, centers, kernel)
    K = kernels.pairwise_values(kernel, centers.points, centers.points)
    defect = np.abs(K @ coeffs - v(centers.points)).max()

    ok = rate >= 2.0 and defect <= 1e-10
    assert report(
        6, ok,
        f"L2 interpolation rate {rate:.4f} (floor 2.0), worst interpolation "
        f"defect at centers {defect:.3e} (tolerance 1e-10)",
    )


def test_criterion_7_infsup_trend(primary_sweep):
    record, extras, _ = primary_sweep
    betas, hs = [], []
    for (case, system, _), row in zip(extras, record.rows):
        h1_gram = assemble_A(case.centers, case.kernel, 1.0, case.quad)
        beta = estimate_infsup(system, h1_gram, case.space.gram_matrix())
        betas.append(beta)
        hs.append(row.h_X)
    slope = float(np.polyfit(np.log(hs), np.log(betas), 1)[0])
    ok = slope >= -0.2 and all(b > 0 for b in betas)
    assert report(
        7, ok,
        f"inf-sup estimates {', '.join(f'{b:.4f}' for b in betas)}; "
        f"log-log slope vs h_X {slope:.4f} (floor -0.2)",
    )


def test_criterion_8_quadrature_overkill(primary_sweep):
    from dataclasses import replace

    record, _, config = primary_sweep
    finest = config.grids[-1]
    base_row = record.rows[-1]
    doubled_config = replace(config, quad_cell_factor=2.0 * config.quad_cell_factor)
    doubled_row, *_ = run_case(doubled_config, finest)
    rel_change = abs(doubled_row.h1_error - base_row.h1_error) / base_row.h1_error
    ok = rel_change < 1e-3
    assert report(
        8, ok,
        f"h1 error {base_row.h1_error:.10g} -> {doubled_row.h1_error:.10g} at doubled "
        f"quadrature resolution: {rel_change:.3e} relative change (tolerance 1e-3)",
    )


def test_criterion_9_unit_property_suite(square):
    """Representative re-assertions of the frozen oracles; the full enforcement
    is the rest of this test suite."""
    checks = []

    c0 = WendlandKernel(smoothness="C0", scale=1.0)
    c2 = WendlandKernel(smoothness="C2", scale=1.0)
    checks.append(("profile values",
                   kernels.eval_univariate(c0, 0.5) == 0.25
                   and kernels.eval_univariate(c2, 0.5) == 0.1875))

    fd_ok = True
    for kernel in (WendlandKernel(smoothness="C0", scale=0.2),
                   WendlandKernel(smoothness="C2", scale=0.2)):
        c = np.array([0.4, 0.6])
        x = c + np.array([0.042, -0.028])
        g = kernels.grad(kernel, x, c)
        step = 1e-6 * kernel.scale
        fd = np.array([
            (kernels.eval(kernel, x + [step, 0.0], c) - kernels.eval(kernel, x - [step, 0.0], c)),
            (kernels.eval(kernel, x + [0.0, step], c) - kernels.eval(kernel, x - [0.0, step], c)),
        ]) / (2.0 * step)
        fd_ok = fd_ok and np.abs(g - fd).max() <= 1e-6 / kernel.scale**2
    checks.append(("gradient finite differences at 1e-6", fd_ok))

    quad = DomainQuadrature(square, cell_size=0.05, points_per_cell=5)
    area = integrate_domain(quad, lambda p: np.ones(len(p)))
    moment = integrate_domain(quad, lambda p: p[:, 0] * p[:, 1])
    checks.append(("quadrature exactness", abs(area - 1.0) < 1e-12 and abs(moment - 0.25) < 1e-12))

    centers = generate_grid_centers(square, 5)
    kernel = WendlandKernel(smoothness="C2", scale=0.3)
    space = MultiplierSpace(mesh=partition_boundary(square, 0.5), degree=0)
    from rbfmix.assembly import ParameterRecord, SaddleSystem
    from rbfmix.solver import MixedSolution
    import scipy.sparse

    zero = MixedSolution(
        u_coeffs=np.zeros(25), lambda_coeffs=np.zeros(8), residual_norm=0.0,
        cond_estimate=1.0,
        params=ParameterRecord(h_X=centers.fill_distance, k=0.5, r=0.3, tau=2.5,
                               p=0, N=25, M=8),
        centers=centers, kernel=kernel, multipliers=space)
    exact = analysis.get_exact_solution("quadratic", square)
    h1_zero = analysis.h1_error(zero, exact, quad)
    l2_zero = analysis.l2_boundary_error(zero, exact, gauss_rule(16))
    checks.append(("zero-solution norms",
                   abs(h1_zero - math.sqrt(148.0 / 45.0)) < 1e-12
                   and abs(l2_zero - 2.0 * math.sqrt(2.0)) < 1e-13))

    toy = SaddleSystem(
        A=scipy.sparse.csr_matrix(np.array([[2.0, 0.0], [0.0, 2.0]])),
        B=scipy.sparse.csr_matrix(np.array([[1.0], [0.0]])),
        F=np.array([1.0, 0.0]), G=np.array([0.5]), kappa=0.0,
        params=ParameterRecord(h_X=1.0, k=1.0, r=1.0, tau=1.5, p=0, N=2, M=1))
    sol = solve(toy)
    checks.append(("hand-checkable saddle solve",
                   np.allclose(sol.u_coeffs, [0.5, 0.0], atol=1e-15)
                   and abs(sol.lambda_coeffs[0]) < 1e-15))

    target = centers.points[12]
    v = lambda p: kernels.eval(kernel, np.atleast_2d(p), target)
    coeffs = analysis.interpolate_native(v, centers, kernel)
    e12 = np.zeros(25)
    e12[12] = 1.0
    checks.append(("interpolation reproduces a space member",
                   np.abs(coeffs - e12).max() < 1e-10))

    failed = [name for name, good in checks if not good]
    ok = not failed
    assert report(
        9, ok,
        f"{len(checks)} representative oracle groups re-verified"
        + ("" if ok else f"; failing: {failed}"),
    )
