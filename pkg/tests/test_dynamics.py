"""Flow integration, trajectory checks, and the scalar comparison dynamics."""

import numpy as np
import pytest

import lplab as lp
from lplab.errors import DomainError, PreconditionError
from lplab.field import l2_norm_spectral
from lplab.grid import Grid, SpectrumProfile
from lplab.dynamics import (
    OdeParams,
    calibrate_h32_constant,
    check_besov_block_evolution,
    check_h32_inequality,
    energy_balance,
    ns_simulate,
    ode_integrate,
    ode_lower_bound,
    bound_formula,
    stokes_mode,
    taylor_green,
    weak_blowup_scenario,
)


@pytest.fixture(scope="module")
def tg_run():
    grid = Grid(3, 16)
    return ns_simulate(taylor_green(grid), nu=1.0, dt=1e-3, t_end=0.2, record_every=1, field_every=20)


class TestSimulate:
    def test_stokes_matches_exact_decay(self):
        grid = Grid(3, 16)
        u0 = stokes_mode(grid)
        traj = ns_simulate(u0, nu=1.0, dt=1e-3, t_end=0.1, record_every=10, field_every=0)
        assert traj.complete
        exact = traj.norms["L2"][0] * np.exp(-1.0 * traj.times)
        assert np.max(np.abs(traj.norms["L2"] - exact) / exact[0]) < 1e-8

    def test_taylor_green_initial_energy(self):
        grid = Grid(3, 16)
        u0 = taylor_green(grid)
        assert lp.sobolev_norm(u0, 0.0) ** 2 == pytest.approx(2 * np.pi**3, rel=1e-12)

    def test_overdamped_norms_decrease(self, tg_run):
        for key in ("L2", "H1", "H32", "H52", "B52_21"):
            series = tg_run.norms[key]
            assert np.all(np.diff(series) <= 1e-12 * series[0])

    def test_energy_inequality(self, tg_run):
        L2 = tg_run.norms["L2"]
        assert np.all(L2[1:] <= L2[:-1] * (1 + 1e-8))

    def test_incompressibility_preserved(self, tg_run):
        for u in tg_run.checkpoint_fields:
            assert l2_norm_spectral(lp.divergence(u)) <= 1e-10 * lp.sobolev_norm(u, 1.0)

    def test_cfl_abort_flags_partial(self):
        grid = Grid(3, 16)
        u0 = 50.0 * taylor_green(grid)
        traj = ns_simulate(u0, nu=1.0, dt=1e-2, t_end=0.1, record_every=1)
        assert traj.aborted == "cfl"
        assert not traj.complete
        assert len(traj.times) >= 1  # partial trajectory retained

    def test_preconditions(self):
        grid = Grid(3, 16)
        not_solenoidal = lp.gradient(lp.mode_field(grid, (1, 1, 0)))
        with pytest.raises(PreconditionError):
            ns_simulate(not_solenoidal, 1.0, 1e-3, 0.01)
        beyond_cutoff = lp.mode_field(grid, (7, 0, 0), m=3, component=1)
        with pytest.raises(PreconditionError):
            ns_simulate(beyond_cutoff, 1.0, 1e-3, 0.01)
        with pytest.raises(DomainError):
            ns_simulate(stokes_mode(grid), 1.0, -1e-3, 0.01)


class TestEnergyBalance:
    def test_stokes_relative_residual(self):
        grid = Grid(3, 16)
        traj = ns_simulate(stokes_mode(grid), nu=1.0, dt=1e-4, t_end=0.02, record_every=1, field_every=0)
        eb = energy_balance(traj)
        assert eb.max_relative < 1e-8

    def test_taylor_green_residual_and_refinement(self):
        grid = Grid(3, 16)
        u0 = taylor_green(grid)
        coarse = ns_simulate(u0, 1.0, 2e-3, 0.1, record_every=1, field_every=0)
        fine = ns_simulate(u0, 1.0, 1e-3, 0.1, record_every=1, field_every=0)
        r_coarse = energy_balance(coarse).max_residual
        r_fine = energy_balance(fine).max_residual
        assert r_coarse < 1e-4 * u0.grid.volume  # scale of |u0|^2
        assert r_coarse / r_fine >= 2.0  # second-order differencing dominates

    def test_needs_enough_records(self, tg_run):
        short = ns_simulate(stokes_mode(Grid(3, 16)), 1.0, 1e-3, 2e-3, record_every=2)
        with pytest.raises(DomainError):
            energy_balance(short)


class TestCriticalNormInequality:
    def test_zero_violations_with_calibrated_constant(self, tg_run):
        c = calibrate_h32_constant(tg_run)
        rep = check_h32_inequality(tg_run, c * (1 + 1e-9))
        assert rep.violations == 0
        assert rep.young_violations == 0

    def test_halved_constant_produces_violations(self, tg_run):
        c = calibrate_h32_constant(tg_run)
        rep = check_h32_inequality(tg_run, 0.5 * c)
        assert rep.violations > 0

    def test_stokes_mode_trivially_holds(self):
        grid = Grid(3, 16)
        traj = ns_simulate(stokes_mode(grid), 1.0, 1e-3, 0.05, record_every=1, field_every=0)
        rep = check_h32_inequality(traj, 1e-6)
        assert rep.violations == 0  # the dissipative term dominates


class TestBlockEvolution:
    def test_holds_along_taylor_green(self, tg_run):
        rep = check_besov_block_evolution(tg_run)
        assert rep.per_block_violations == 0
        assert rep.summed_violations == 0
        assert rep.dk_max_deviation < 1e-10

    def test_zero_field_all_residuals_zero(self):
        grid = Grid(3, 16)
        traj = ns_simulate(lp.VectorField.zeros(grid, 3), 1.0, 1e-3, 0.05, record_every=1, field_every=10)
        rep = check_besov_block_evolution(traj)
        assert rep.per_block_violations == 0 and rep.summed_violations == 0

    def test_single_block_initial_data(self):
        grid = Grid(3, 32)
        u0 = lp.random_solenoidal(grid, SpectrumProfile(2.0, 6, 6), seed=4)
        u0 = 0.1 * u0
        traj = ns_simulate(u0, 1.0, 1e-3, 0.05, record_every=1, field_every=5)
        rep = check_besov_block_evolution(traj)
        assert rep.per_block_violations == 0

    def test_needs_fields(self, tg_run):
        traj = ns_simulate(stokes_mode(Grid(3, 16)), 1.0, 1e-3, 0.05, record_every=1, field_every=0)
        with pytest.raises(DomainError):
            check_besov_block_evolution(traj)


class TestNormOrdering:
    def test_interpolation_between_l2_and_high_norm(self, tg_run):
        # the critical norm interpolates: H^(3/2) <= L2^(2/5) H^(5/2)^(3/5)
        L2, H32, H52 = tg_run.norms["L2"], tg_run.norms["H32"], tg_run.norms["H52"]
        assert np.all(H32 <= L2 ** 0.4 * H52 ** 0.6 * (1 + 1e-10))

    def test_two_dim_cellular_flow_decays_exactly(self):
        # in two dimensions the cellular vortex advection is a pure gradient,
        # so the viscous decay is exact
        grid = Grid(2, 32)
        traj = ns_simulate(taylor_green(grid), nu=0.5, dt=1e-3, t_end=0.1, record_every=10, field_every=0)
        exact = traj.norms["L2"][0] * np.exp(-0.5 * 2.0 * traj.times)
        assert np.max(np.abs(traj.norms["L2"] - exact) / exact[0]) < 1e-8


class TestOdeComparison:
    def test_equality_case_saturates(self):
        p = OdeParams(c=1.0, gamma=2.0, x0=1.0)
        # X(t) = (1 - 2t)^(-1/2) saturates the bound for every t
        for t in (0.0, 0.2, 0.4, 0.49):
            assert ode_lower_bound(p, t) == pytest.approx((1 - 2 * t) ** -0.5, rel=1e-12)

    def test_gamma_one_reciprocal_form(self):
        p = OdeParams(c=4.0, gamma=1.0, x0=1.0)
        t = 0.1
        assert ode_lower_bound(p, t) == pytest.approx(1.0 / (4.0 * (p.T - t)), rel=1e-12)
        assert bound_formula(1.0) == "1/(c*(T-t))"

    def test_domain_validation(self):
        p = OdeParams(c=1.0, gamma=2.0, x0=1.0)
        with pytest.raises(DomainError):
            ode_lower_bound(p, p.T)
        with pytest.raises(DomainError):
            ode_lower_bound(p, -0.1)
        with pytest.raises(DomainError):
            OdeParams(c=-1.0, gamma=1.0, x0=1.0)

    def test_monotone_toward_horizon(self):
        p = OdeParams(c=1.0, gamma=2.0, x0=1.0)
        ts = np.linspace(0, p.T * 0.999, 50)
        vals = [ode_lower_bound(p, t) for t in ts]
        assert np.all(np.diff(vals) > 0)

    def test_integration_recovers_horizon(self):
        p = OdeParams(c=1.0, gamma=2.0, x0=1.0)
        rep = ode_integrate(p, dt=1e-3)
        assert abs(rep.t_blowup_estimate - 0.5) / 0.5 < 5e-3
        assert rep.min_ratio >= 1.0 - 1e-12  # X(t) >= bound at every step
        sel = rep.values <= 1e3
        assert np.max(rep.bound_ratios[sel]) <= 1.0 + 1e-3

    def test_larger_c_blows_up_earlier(self):
        t1 = ode_integrate(OdeParams(c=1.0, gamma=2.0, x0=1.0), 1e-3).t_blowup_estimate
        t2 = ode_integrate(OdeParams(c=2.0, gamma=2.0, x0=1.0), 1e-3).t_blowup_estimate
        assert t2 < t1


class TestWeakBlowupScenario:
    def test_z_monotone_and_exponent(self):
        rep = weak_blowup_scenario(0.1, 1.0, 1.0, 0.0)
        assert rep.z_monotone
        assert rep.z_max_step_increase <= 1e-10
        assert rep.exponent_rel_err <= 0.02
        assert rep.fitted_exponent == pytest.approx(0.2, rel=0.02)

    def test_contradiction_crossing_reported(self):
        rep = weak_blowup_scenario(0.1, 1.0, 1.0, 0.0)
        assert rep.contradiction_found
        assert 0.0 < rep.crossing_time < 1.0

    def test_boundary_rejected(self):
        with pytest.raises(DomainError):
            weak_blowup_scenario(0.6, 1.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            weak_blowup_scenario(0.5, 1.0, 1.0, 0.0)  # 2 c eps = 1 exactly
        with pytest.raises(DomainError):
            weak_blowup_scenario(0.1, 1.0, 1.0, tau=1.5)

    def test_horizon_note_present(self):
        rep = weak_blowup_scenario(0.2, 1.0, 2.0, 0.5)
        assert any("horizon" in note for note in rep.notes)
