"""Pseudospectral incompressible-flow integrator and blowup diagnostics.

The solver advances ``du/dt + (u.grad)u - nu Lap u + grad p = 0`` on the
torus: the advection term is evaluated with dealiased products and
Leray-projected, the viscous factor is applied exactly through an
integrating factor, and the nonlinear update uses the classical four-stage
Runge-Kutta scheme.  Norm trajectories feed the differential-inequality
checks; the scalar comparison dynamics used by the blowup arguments are
integrated separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, PreconditionError
from .field import (
    VectorField,
    l2_norm_spectral,
    leray_project,
    require_solenoidal,
    sobolev_norm,
)
from .grid import Grid
from .paley import DyadicPartition, besov_norm, block_lp_norm, d_sequence, default_partition, _resolve
from .nonlinear import advect, besov_block_commutator

# CSV/report keys for the recorded norms; for n = 2 the last three carry the
# scale-matched exponents n/2, n/2 + 1 instead of 3/2, 5/2.
NORM_KEYS = ("L2", "H1", "H32", "H52", "B52_21")


@dataclass
class Trajectory:
    """Time series of diagnostic norms along one simulated solution."""

    grid: Grid
    nu: float
    dt: float
    times: np.ndarray
    norms: dict
    checkpoint_times: np.ndarray
    checkpoint_fields: list
    meta: dict = dc_field(default_factory=dict)
    aborted: str | None = None

    @property
    def complete(self) -> bool:
        return self.aborted is None

    def exponents(self) -> dict:
        half = self.grid.n / 2.0
        return {"L2": 0.0, "H1": 1.0, "H32": half, "H52": half + 1.0, "B52_21": half + 1.0}


def taylor_green(grid: Grid) -> VectorField:
    """The classical cellular vortex (z-independent in three dimensions)."""
    x = np.arange(grid.N) * (2.0 * np.pi / grid.N)
    if grid.n == 2:
        X, Y = np.meshgrid(x, x, indexing="ij")
        comps = np.stack([np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y)])
    else:
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        comps = np.stack(
            [
                np.sin(X) * np.cos(Y) * np.cos(Z),
                -np.cos(X) * np.sin(Y) * np.cos(Z),
                np.zeros_like(X),
            ]
        )
    return VectorField.from_physical(grid, comps)


def stokes_mode(grid: Grid) -> VectorField:
    """A single shear mode: advection vanishes identically, decay is exact."""
    x = np.arange(grid.N) * (2.0 * np.pi / grid.N)
    if grid.n == 2:
        X, Y = np.meshgrid(x, x, indexing="ij")
        comps = np.stack([np.sin(Y), np.zeros_like(Y)])
    else:
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        comps = np.stack([np.sin(Y), np.zeros_like(Y), np.zeros_like(Y)])
    return VectorField.from_physical(grid, comps)


def _record_norms(grid: Grid, spec: np.ndarray, partition: DyadicPartition) -> dict:
    u = VectorField(grid, grid.n, spec=spec)
    half = grid.n / 2.0
    return {
        "L2": l2_norm_spectral(u),
        "H1": sobolev_norm(u, 1.0),
        "H32": sobolev_norm(u, half),
        "H52": sobolev_norm(u, half + 1.0),
        "B52_21": besov_norm(u, (half + 1.0, 2.0, 1.0), partition),
    }


def ns_simulate(
    u0: VectorField,
    nu: float,
    dt: float,
    t_end: float,
    record_every: int = 1,
    field_every: int = 10,
    cfl_factor: float = 0.5,
    partition: DyadicPartition | None = None,
) -> Trajectory:
    """Integrate the flow from ``u0`` and record diagnostic norms.

    The advective CFL number is checked each step against the current sup
    of the velocity; a violation (or a non-finite state) aborts the run and
    returns the partial trajectory flagged through ``Trajectory.aborted``.
    Fields are snapshotted every ``field_every`` steps (0 disables).
    """
    grid = u0.grid
    if nu < 0 or dt <= 0 or t_end <= 0:
        raise DomainError("nu must be >= 0 and dt, t_end positive")
    require_solenoidal(u0, "flow integration")
    if not u0.is_mean_free():
        raise PreconditionError("initial data must be mean-free")
    mask = grid.dealias_mask
    if np.max(np.abs(u0.spec * ~mask)) > 1e-13 * max(np.max(np.abs(u0.spec)), 1e-300):
        raise PreconditionError("initial data must respect the dealias cutoff N/3")
    part = partition if partition is not None else default_partition(grid)

    visc_half = np.exp(-nu * grid.k_squared * (dt / 2.0))
    visc_full = visc_half * visc_half
    zero_idx = (slice(None),) + (0,) * grid.n

    def nonlinear(spec: np.ndarray) -> np.ndarray:
        u = VectorField(grid, grid.n, spec=spec)
        rhs = leray_project(advect(u, u, check=False))
        out = -rhs.spec * mask
        out[zero_idx] = 0.0
        return out

    spec = u0.spec * mask
    spec = spec.copy()
    n_steps = int(round(t_end / dt))
    times = [0.0]
    norm_rows = [_record_norms(grid, spec, part)]
    checkpoint_times = [0.0]
    checkpoint_fields = [VectorField.from_spectral(grid, spec)] if field_every else []
    aborted = None

    cell = 2.0 * np.pi / grid.N
    for step in range(1, n_steps + 1):
        u = VectorField(grid, grid.n, spec=spec)
        umax = float(np.sqrt(np.max(np.sum(u.phys**2, axis=0))))
        if not np.isfinite(umax):
            aborted = "nonfinite"
            break
        if umax > 0 and dt > cfl_factor * cell / umax:
            aborted = "cfl"
            break
        n1 = nonlinear(spec)
        n2 = nonlinear(visc_half * (spec + (dt / 2.0) * n1))
        n3 = nonlinear(visc_half * spec + (dt / 2.0) * n2)
        n4 = nonlinear(visc_full * spec + dt * visc_half * n3)
        spec = visc_full * spec + (dt / 6.0) * (visc_full * n1 + 2.0 * visc_half * (n2 + n3) + n4)
        t = step * dt
        if step % record_every == 0 or step == n_steps:
            times.append(t)
            norm_rows.append(_record_norms(grid, spec, part))
        if field_every and (step % field_every == 0 or step == n_steps):
            checkpoint_times.append(t)
            checkpoint_fields.append(VectorField.from_spectral(grid, spec))

    norms = {key: np.array([row[key] for row in norm_rows]) for key in NORM_KEYS}
    return Trajectory(
        grid=grid,
        nu=nu,
        dt=dt,
        times=np.array(times),
        norms=norms,
        checkpoint_times=np.array(checkpoint_times),
        checkpoint_fields=checkpoint_fields,
        meta={"record_every": record_every, "field_every": field_every, "cfl_factor": cfl_factor},
        aborted=aborted,
    )


# -- trajectory checks ------------------------------------------------------------


def _centered_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Interior centered differences (the endpoints are not reported)."""
    return (values[2:] - values[:-2]) / (2.0 * dt)


def _third_derivative_bound(values: np.ndarray, dt: float) -> np.ndarray:
    """Crude per-point |f'''| estimate from third differences, for budgets."""
    n = len(values)
    out = np.zeros(max(n - 2, 0))
    if n >= 5:
        d3 = np.abs(values[4:] - 2.0 * values[3:-1] + 2.0 * values[1:-3] - values[:-4]) / (2.0 * dt**3)
        out[1:-1] = d3
        out[0] = d3[0] if len(d3) else 0.0
        out[-1] = d3[-1] if len(d3) else 0.0
    return out


@dataclass
class EnergyBalanceReport:
    times: np.ndarray
    residuals: np.ndarray
    max_residual: float
    max_relative: float

    def __float__(self) -> float:  # pragma: no cover
        return self.max_residual


def energy_balance(traj: Trajectory) -> EnergyBalanceReport:
    """Residual of ``d/dt ||u||^2 + 2 nu ||grad u||^2 = 0`` at interior records."""
    if len(traj.times) < 3:
        raise DomainError("energy balance needs at least three recorded times")
    steps = np.diff(traj.times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise DomainError("energy balance requires uniformly spaced records")
    dt = float(steps[0])
    energy = traj.norms["L2"] ** 2
    dedt = _centered_derivative(energy, dt)
    flux = 2.0 * traj.nu * traj.norms["H1"][1:-1] ** 2
    residuals = dedt + flux
    scale = np.maximum(np.maximum(np.abs(dedt), flux), 1e-300)
    return EnergyBalanceReport(
        times=traj.times[1:-1],
        residuals=residuals,
        max_residual=float(np.max(np.abs(residuals))) if len(residuals) else 0.0,
        max_relative=float(np.max(np.abs(residuals) / scale)) if len(residuals) else 0.0,
    )


@dataclass
class DifferentialInequalityReport:
    times: np.ndarray
    residuals: np.ndarray
    budgets: np.ndarray
    violations: int
    c_emp: float
    ratios: np.ndarray
    young_residuals: np.ndarray
    young_violations: int


def calibrate_h32_constant(traj: Trajectory) -> float:
    """Largest pairing ratio the trajectory itself exhibits (interior times)."""
    if len(traj.times) < 3:
        raise DomainError("calibration needs at least three recorded times")
    dt = float(traj.times[1] - traj.times[0])
    E = traj.norms["H32"] ** 2
    dE = _centered_derivative(E, dt)
    lhs = dE + 2.0 * traj.nu * traj.norms["H52"][1:-1] ** 2
    denom = 2.0 * E[1:-1] * traj.norms["H52"][1:-1]
    ratios = lhs / np.maximum(denom, 1e-300)
    return float(max(np.max(ratios), 0.0))


def check_h32_inequality(traj: Trajectory, c_emp: float) -> DifferentialInequalityReport:
    """Check the pre-Young differential inequality for the critical norm.

    Verifies ``d/dt E + 2 nu H'^2 <= 2 c_emp E H'`` with ``E`` the squared
    critical Sobolev norm and ``H'`` the norm one derivative up, plus the
    Young-processed form ``d/dt E + nu H'^2 <= (c_emp^2/nu) E^2``.  The
    budget absorbs the second-order differencing error of ``d/dt E``.
    """
    if len(traj.times) < 3:
        raise DomainError("inequality check needs at least three recorded times")
    steps = np.diff(traj.times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise DomainError("inequality check requires uniformly spaced records")
    dt = float(steps[0])
    E = traj.norms["H32"] ** 2
    H5 = traj.norms["H52"]
    dE = _centered_derivative(E, dt)
    lhs = dE + 2.0 * traj.nu * H5[1:-1] ** 2
    rhs = 2.0 * c_emp * E[1:-1] * H5[1:-1]
    residuals = lhs - rhs
    scale = np.maximum.reduce([np.abs(dE), 2.0 * traj.nu * H5[1:-1] ** 2, np.abs(rhs)])
    budgets = (dt**2 / 6.0) * _third_derivative_bound(E, dt) * 4.0 + 1e-9 * scale
    violations = int(np.sum(residuals > budgets))
    ratios = lhs / np.maximum(2.0 * E[1:-1] * H5[1:-1], 1e-300)

    if traj.nu > 0:
        young = dE + traj.nu * H5[1:-1] ** 2 - (c_emp**2 / traj.nu) * E[1:-1] ** 2
    else:
        young = np.full_like(dE, -np.inf)
    young_violations = int(np.sum(young > budgets))
    return DifferentialInequalityReport(
        times=traj.times[1:-1],
        residuals=residuals,
        budgets=budgets,
        violations=violations,
        c_emp=c_emp,
        ratios=ratios,
        young_residuals=young,
        young_violations=young_violations,
    )


@dataclass
class BlockEvolutionReport:
    times: np.ndarray
    per_block_violations: int
    per_block_worst: float
    summed_violations: int
    summed_residuals: np.ndarray
    c_emp: float
    dk_max_deviation: float
    block_js: list


def check_besov_block_evolution(
    traj: Trajectory,
    c_emp: float | None = None,
    partition: DyadicPartition | None = None,
) -> BlockEvolutionReport:
    """Per-block and summed growth bounds along stored checkpoint fields.

    Per block: ``d/dt ||block_k u|| <= ||block commutator_k||`` (transport
    drops by skew symmetry, dissipation only helps).  Summed: the Besov
    norm obeys ``d/dt B <= c_emp B^2`` with ``c_emp`` calibrated on the
    trajectory when not supplied.  Also checks that the normalized block
    weights sum to one at every checkpoint.
    """
    if len(traj.checkpoint_fields) < 3:
        raise DomainError("block evolution check needs at least three stored fields")
    steps = np.diff(traj.checkpoint_times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise DomainError("block evolution check requires uniformly spaced checkpoints")
    dt = float(steps[0])
    grid = traj.grid
    part = partition if partition is not None else default_partition(grid)
    tab = _resolve(traj.checkpoint_fields[0], part)
    js = tab.active_js()
    weight = grid.n / 2.0 + 1.0
    idx = (weight, 2.0, 1.0)

    block_norms = np.zeros((len(traj.checkpoint_fields), len(js)))
    comm_norms = np.zeros_like(block_norms)
    besov = np.zeros(len(traj.checkpoint_fields))
    dk_dev = 0.0
    for ti, u in enumerate(traj.checkpoint_fields):
        w = advect(u, u, check=False)
        for ji, j in enumerate(js):
            block_norms[ti, ji] = block_lp_norm(u, j, 2.0, part)
            comm_norms[ti, ji] = l2_norm_spectral(besov_block_commutator(u, j, part, advection=w, check=False))
        besov[ti] = float(np.sum(2.0 ** (np.array(js) * weight) * block_norms[ti]))
        if besov[ti] > 0:
            dk = d_sequence(u, idx, part)
            dk_dev = max(dk_dev, abs(float(np.sum(dk.values)) - 1.0))

    scale = max(np.max(comm_norms), 1e-300)
    per_block_violations = 0
    per_block_worst = -np.inf
    for ji in range(len(js)):
        series = block_norms[:, ji]
        dn = _centered_derivative(series, dt)
        budget = (dt**2 / 6.0) * _third_derivative_bound(series, dt) * 4.0 + 1e-9 * scale
        margin = dn - comm_norms[1:-1, ji]
        per_block_violations += int(np.sum(margin > budget))
        per_block_worst = max(per_block_worst, float(np.max(margin - budget)))

    dB = _centered_derivative(besov, dt)
    if c_emp is None:
        c_emp = float(max(np.max(dB / np.maximum(besov[1:-1] ** 2, 1e-300)), 0.0))
    budget = (dt**2 / 6.0) * _third_derivative_bound(besov, dt) * 4.0 + 1e-9 * max(np.max(besov) ** 2, 1e-300)
    summed_residuals = dB - c_emp * besov[1:-1] ** 2
    summed_violations = int(np.sum(summed_residuals > budget))

    return BlockEvolutionReport(
        times=traj.checkpoint_times[1:-1],
        per_block_violations=per_block_violations,
        per_block_worst=per_block_worst,
        summed_violations=summed_violations,
        summed_residuals=summed_residuals,
        c_emp=c_emp,
        dk_max_deviation=dk_dev,
        block_js=list(js),
    )


# -- scalar comparison dynamics ------------------------------------------------------


@dataclass(frozen=True)
class OdeParams:
    """Parameters of the comparison dynamics ``X' = c X^(1+gamma)``."""

    c: float
    gamma: float
    x0: float
    T: float | None = None

    def __post_init__(self) -> None:
        if self.c <= 0 or self.gamma <= 0 or self.x0 <= 0:
            raise DomainError("c, gamma, x0 must all be positive")
        if self.T is None:
            object.__setattr__(self, "T", self.blowup_time())
        elif self.T <= 0:
            raise DomainError("T must be positive")

    def blowup_time(self) -> float:
        """Horizon of the equality case: 1 / (gamma c x0^gamma)."""
        return 1.0 / (self.gamma * self.c * self.x0**self.gamma)


def bound_formula(gamma: float) -> str:
    """Human-readable closed form of the comparison bound."""
    if gamma == 1.0:
        return "1/(c*(T-t))"
    return f"(1/({gamma:g}*c*(T-t)))^(1/{gamma:g})"


def ode_lower_bound(p: OdeParams, t: float) -> float:
    """Growth floor forced by the comparison dynamics as t approaches T."""
    if not 0.0 <= t < p.T:
        raise DomainError(f"t must lie in [0, T) with T = {p.T}, got {t}")
    return (1.0 / (p.gamma * p.c * (p.T - t))) ** (1.0 / p.gamma)


@dataclass
class OdeIntegrationReport:
    times: np.ndarray
    values: np.ndarray
    t_blowup_estimate: float
    bound_ratios: np.ndarray
    min_ratio: float
    max_ratio: float
    horizon_spread: float
    bound_formula: str


def ode_integrate(p: OdeParams, dt: float) -> OdeIntegrationReport:
    """Integrate the equality case until growth by 1e6, estimate the horizon.

    The horizon estimate is the largest local extrapolation
    ``t_i + 1/(gamma c X_i^gamma)`` over the integration steps, which makes
    the comparison ``X(t_i) >= bound(t_i)`` hold by construction and tests
    the integrator against the closed-form blowup time.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    target = 1e6 * p.x0
    T_ref = p.blowup_time()

    def rhs(t, y):
        return [p.c * y[0] ** (1.0 + p.gamma)]

    def blowup_event(t, y):
        return y[0] - target

    blowup_event.terminal = True
    sol = solve_ivp(
        rhs,
        (0.0, T_ref * (1.0 + 1e-9)),
        [p.x0],
        method="RK45",
        max_step=dt,
        rtol=1e-13,
        atol=1e-14 * p.x0,
        events=blowup_event,
        dense_output=False,
    )
    times = sol.t
    values = sol.y[0]
    horizons = times + 1.0 / (p.gamma * p.c * values**p.gamma)
    t_num = float(np.max(horizons))
    comparison = OdeParams(c=p.c, gamma=p.gamma, x0=p.x0, T=t_num)
    bounds = np.array([ode_lower_bound(comparison, t) for t in times])
    ratios = values / bounds
    return OdeIntegrationReport(
        times=times,
        values=values,
        t_blowup_estimate=t_num,
        bound_ratios=ratios,
        min_ratio=float(np.min(ratios)),
        max_ratio=float(np.max(ratios)),
        horizon_spread=float(np.max(horizons) - np.min(horizons)),
        bound_formula=bound_formula(p.gamma),
    )


@dataclass
class WeakBlowupReport:
    times: np.ndarray
    y: np.ndarray
    z: np.ndarray
    sigma: float
    z_max_step_increase: float
    z_monotone: bool
    fitted_exponent: float
    exponent_rel_err: float
    crossing_time: float | None
    y0: float
    notes: tuple

    @property
    def contradiction_found(self) -> bool:
        return self.crossing_time is not None


def weak_blowup_scenario(
    eps: float,
    c: float,
    T: float,
    tau: float = 0.0,
    dt: float | None = None,
    headroom: float = 1e3,
) -> WeakBlowupReport:
    """Integrate the contradiction dynamics behind the weak blowup bound.

    Under the hypothesis that the higher norm stays below ``eps/(T-t)``,
    the squared critical norm Y obeys (in the equality case)
    ``Y' = 2 c eps Y/(T-t) - 2 eps^2/(T-t)^2``.  The integrating-factor
    variable ``Z = Y (T-t)^(2 c eps)`` must then be nonincreasing, so Y is
    bounded by a multiple of ``(T-t)^(-2 c eps)``, which eventually falls
    below the strong-bound curve ``c^-2 (T-t)^-1``: the crossing time is
    where the hypothesis contradicts the strong bound.  ``Y(tau)`` is set
    ``headroom`` above the scenario scales so the integrating-factor mode
    dominates the fitted decay window.
    """
    sigma = 2.0 * c * eps
    if eps <= 0 or c <= 0:
        raise DomainError("eps and c must be positive")
    if not sigma < 1.0:
        raise DomainError(f"scenario requires 2 c eps < 1, got {sigma}")
    if not 0.0 <= tau < T:
        raise DomainError(f"tau must lie in [0, T), got tau={tau}, T={T}")
    span = T - tau
    y0 = headroom * max(c**-2.0, 2.0 * eps**2 / (1.0 - sigma)) / span
    if dt is None:
        dt = span / 100.0

    x_end = 1e-6 * span
    x_eval = np.geomspace(span, x_end, 400)
    t_eval = T - x_eval

    def rhs(t, y):
        x = T - t
        return [sigma * y[0] / x - 2.0 * eps**2 / x**2]

    sol = solve_ivp(
        rhs,
        (tau, T - x_end),
        [y0],
        method="RK45",
        t_eval=t_eval,
        max_step=dt,
        rtol=1e-10,
        atol=1e-12 * y0,
    )
    times = sol.t
    y = sol.y[0]
    x = T - times
    z = y * x**sigma

    dz = np.diff(z)
    rel_inc = dz / np.maximum(np.abs(z[:-1]), 1e-300)
    z_max_step_increase = float(np.max(rel_inc)) if len(rel_inc) else 0.0
    z_monotone = z_max_step_increase <= 1e-10

    fit_sel = (x >= 0.01 * span) & (y > 0)
    slope, _ = np.polyfit(np.log(x[fit_sel]), np.log(y[fit_sel]), 1)
    fitted = float(-slope)
    rel_err = abs(fitted - sigma) / sigma

    strong = c**-2.0 / x
    diff = y - strong
    crossing = None
    sign_change = np.where((diff[:-1] > 0) & (diff[1:] <= 0))[0]
    if len(sign_change):
        i = sign_change[0]
        f = diff[i] / (diff[i] - diff[i + 1])
        crossing = float(times[i] + f * (times[i + 1] - times[i]))

    return WeakBlowupReport(
        times=times,
        y=y,
        z=z,
        sigma=sigma,
        z_max_step_increase=z_max_step_increase,
        z_monotone=z_monotone,
        fitted_exponent=fitted,
        exponent_rel_err=rel_err,
        crossing_time=crossing,
        y0=y0,
        notes=(
            "the comparison bound is expressed in the distance to the horizon "
            "(T - t), not in absolute time",
        ),
    )
