"""Acceptance suite: the ten exit criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  The heavy ensemble harness (criterion 5) runs the full default
ensembles at N = 32 and N = 64.
"""

import time

import numpy as np
import pytest

import lplab as lp
from lplab.grid import Grid, SpectrumProfile
from lplab.field import l2_norm_spectral
from lplab.paley import DyadicPartition, build_partition, check_partition, phi_profile
from lplab.nonlinear import advect, besov_block_commutator, lambda_commutator
from lplab.ineq import EnsembleSpec, check_scalar_lemma, run_inequality
from lplab.dynamics import (
    OdeParams,
    bound_formula,
    calibrate_h32_constant,
    check_h32_inequality,
    energy_balance,
    ns_simulate,
    ode_integrate,
    stokes_mode,
    taylor_green,
    weak_blowup_scenario,
)
from oracles import (
    centered_spectrum,
    oracle_advect,
    oracle_block_commutator,
    oracle_lambda_commutator,
)


def report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


@pytest.fixture(scope="module")
def taylor_green_run():
    grid = Grid(3, 32)
    t0 = time.perf_counter()
    traj = ns_simulate(taylor_green(grid), nu=1.0, dt=1e-3, t_end=0.5, record_every=1, field_every=10)
    return traj, time.perf_counter() - t0


def test_criterion_01_partition_of_unity():
    t0 = time.perf_counter()
    grid = Grid(3, 64)
    rep = check_partition(build_partition(grid), grid)
    elapsed = time.perf_counter() - t0
    ok = rep.max_violation < 1e-12 and elapsed < 5.0
    report(1, ok, f"max violation {rep.max_violation:.2e}, {elapsed:.2f}s")


def test_criterion_02_product_reconstruction():
    t0 = time.perf_counter()
    spec = EnsembleSpec(
        grid_sizes=(32,), alphas=(2.0,), band_fractions=((0.0, 1.0 / 3.0),),
        samples_per_cell=16, base_seed=11,
    )
    stats = run_inequality("bony-identity", spec)
    elapsed = time.perf_counter() - t0
    ok = (
        stats.sample_count == 16
        and stats.degenerate_count == 0
        and stats.violations == 0
        and stats.max_ratio < 1e-10
        and elapsed < 30.0
    )
    report(2, ok, f"16/16 samples, worst residual/scale {stats.max_ratio:.2e}, {elapsed:.1f}s")


def test_criterion_03_pointwise_power_bound():
    t0 = time.perf_counter()
    stats = check_scalar_lemma(1_000_000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = stats.violations == 0 and elapsed < 10.0
    report(3, ok, f"violations {stats.violations}/1e6, max ratio {stats.max_ratio:.4f}, {elapsed:.1f}s")


def test_criterion_04_dense_oracle_equivalence():
    t0 = time.perf_counter()
    grid = Grid(3, 8)
    worst = 0.0
    for seed in range(8):
        u = lp.random_solenoidal(grid, SpectrumProfile(2.0, 1, 2), seed=seed)
        B = lp.random_solenoidal(grid, SpectrumProfile(2.0, 1, 2), seed=seed, role=1)
        ucubes, bcubes = list(centered_spectrum(u)), list(centered_spectrum(B))

        pairs = [
            (centered_spectrum(advect(u, u)), oracle_advect(ucubes, ucubes, 8)),
            (
                centered_spectrum(lambda_commutator(u, B, 1.5)),
                oracle_lambda_commutator(ucubes, bcubes, 8, 1.5),
            ),
            (
                centered_spectrum(besov_block_commutator(u, 1)),
                oracle_block_commutator(ucubes, 8, 1),
            ),
        ]
        for got, expected in pairs:
            scale = max(max(np.max(np.abs(e)) for e in expected), 1e-300)
            err = max(np.max(np.abs(g - e)) for g, e in zip(got, expected))
            worst = max(worst, err / scale)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 60.0
    report(4, ok, f"worst relative deviation {worst:.2e} over 8 samples x 3 operations, {elapsed:.1f}s")


def test_criterion_05_inequality_harness():
    t0 = time.perf_counter()
    spec = EnsembleSpec()  # the default ensembles: N in {32, 64}, 6 cells, 32 samples
    ids = ("prop-5.1", "whatwewant", "prop-6.6", "bony-T", "bony-R", "lemma-6.5", "prop-6.1", "prop-6.2")
    failures = []
    for ineq_id in ids:
        stats = run_inequality(ineq_id, spec)
        drift = stats.resolution_stability["drift"]
        line = (
            f"    {ineq_id:12s} c_emp={stats.c_emp:11.5g} violations={stats.violations} "
            f"drift={drift:.4f}"
        )
        print(line)
        if stats.violations != 0 or not drift < 2.0:
            failures.append(ineq_id)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 15 * 60
    report(5, ok, f"{len(ids)} inequalities, failures {failures or 'none'}, {elapsed / 60:.1f} min")


def test_criterion_06_block_commutator_decomposition():
    spec = EnsembleSpec(
        grid_sizes=(16,), alphas=(2.0,), band_fractions=((0.0, 1.0 / 3.0),),
        samples_per_cell=8, base_seed=5,
    )
    stats = run_inequality("decomp-t1t2t3t4", spec)
    ok = stats.violations == 0 and stats.max_ratio < 1e-9 and stats.sample_count >= 8
    report(6, ok, f"8/8 samples, worst residual/scale {stats.max_ratio:.2e}")


def test_criterion_07_ode_comparison():
    p = OdeParams(c=1.0, gamma=2.0, x0=1.0)
    rep = ode_integrate(p, dt=1e-3)
    t_ok = abs(rep.t_blowup_estimate - 0.5) / 0.5 < 5e-3
    bound_ok = rep.min_ratio >= 1.0 - 1e-12
    form = bound_formula(1.0)
    form_ok = form == "1/(c*(T-t))"
    ok = t_ok and bound_ok and form_ok
    report(
        7,
        ok,
        f"T {rep.t_blowup_estimate:.6f} (err {abs(rep.t_blowup_estimate - 0.5) / 0.5:.1e}), "
        f"min X/bound {rep.min_ratio:.12f}, gamma=1 bound '{form}'",
    )


def test_criterion_08_weak_blowup_scenario():
    rep = weak_blowup_scenario(0.1, 1.0, 1.0, 0.0)
    ok = rep.z_max_step_increase <= 1e-10 and rep.exponent_rel_err <= 0.02
    report(
        8,
        ok,
        f"max Z step increase {rep.z_max_step_increase:.2e}, fitted exponent "
        f"{rep.fitted_exponent:.5f} vs {rep.sigma:.5f} ({rep.exponent_rel_err * 100:.2f}%)",
    )


def test_criterion_09_flow_validation(taylor_green_run):
    traj, sim_seconds = taylor_green_run

    grid16 = Grid(3, 16)
    stokes = ns_simulate(stokes_mode(grid16), nu=1.0, dt=1e-3, t_end=0.1, record_every=10, field_every=0)
    exact = stokes.norms["L2"][0] * np.exp(-stokes.times)
    stokes_err = float(np.max(np.abs(stokes.norms["L2"] - exact) / exact[0]))

    energy0 = traj.norms["L2"][0] ** 2
    eb = energy_balance(traj)
    div_ok = True
    for u in traj.checkpoint_fields:
        div_ok &= l2_norm_spectral(lp.divergence(u)) <= 1e-10 * lp.sobolev_norm(u, 1.0)
    c_cal = calibrate_h32_constant(traj)
    h32 = check_h32_inequality(traj, c_cal * (1.0 + 1e-9))

    ok = (
        stokes_err < 1e-8
        and eb.max_residual < 1e-4 * energy0
        and div_ok
        and h32.violations == 0
        and traj.complete
        and sim_seconds < 5 * 60
    )
    report(
        9,
        ok,
        f"shear-mode decay err {stokes_err:.1e}, energy residual {eb.max_residual:.2e} "
        f"(< {1e-4 * energy0:.2e}), h32 violations {h32.violations} at c={c_cal:.3e}, "
        f"{sim_seconds:.0f}s",
    )


def test_criterion_10_negative_controls(taylor_green_run):
    traj, _ = taylor_green_run
    c_cal = calibrate_h32_constant(traj)
    halved = check_h32_inequality(traj, 0.5 * c_cal)

    grid = Grid(3, 64)
    part = build_partition(grid)
    perturbed = DyadicPartition(part.j_min, part.j_max, phi=lambda r: 1.01 * phi_profile(r))
    rep = check_partition(perturbed, grid)

    ok = halved.violations > 0 and not rep.passes() and rep.block_sum > 5e-3
    report(
        10,
        ok,
        f"halved constant -> {halved.violations} violations; perturbed profile -> "
        f"partition deviation {rep.block_sum:.4f}",
    )
