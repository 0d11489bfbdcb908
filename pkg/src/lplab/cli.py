"""Batch command-line front end: field generation, verification, simulation.

Exit codes are a stable contract: 0 success, 1 I/O or config error,
2 validation error, 3 numerical abort.  Configuration precedence is
defaults < JSON config file < command-line flags, and every emitted JSON
report embeds the resolved configuration, the seed, and the version.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import LplabError
from .field import sobolev_norm
from .grid import Grid, SpectrumProfile
from .random_fields import random_solenoidal
from .paley import besov_norm
from .ineq import EnsembleSpec, RatioStats, known_inequalities, run_inequality, worker_count
from .dynamics import (
    OdeParams,
    Trajectory,
    calibrate_h32_constant,
    check_besov_block_evolution,
    check_h32_inequality,
    energy_balance,
    ns_simulate,
    ode_integrate,
    stokes_mode,
    taylor_green,
    weak_blowup_scenario,
)
from .snapshot import write_field

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _parse_band(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi)


def _float_or_inf(text: str) -> float:
    return float("inf") if text in ("inf", "Inf", "INF") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lplab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=int)

    g = sub.add_parser("gen-field", parents=[common], help="write a random solenoidal field snapshot")
    g.add_argument("--n", type=int)
    g.add_argument("--N", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--band", type=str, help="shell band lo:hi")
    g.add_argument("--amplitude", type=float)
    g.add_argument("--name", type=str)

    v = sub.add_parser("verify", parents=[common], help="run inequality/identity verification")
    v.add_argument("--id", dest="ineq_id", type=str, help="inequality id (see --list)")
    v.add_argument("--all", action="store_true", help="run every registered inequality")
    v.add_argument("--list", action="store_true", help="list known inequality ids")
    v.add_argument("--n", type=int)
    v.add_argument("--N", dest="grids", type=int, action="append", help="grid size (repeatable)")
    v.add_argument("--samples", type=int, help="samples per cell (or total for pointwise checks)")
    v.add_argument("--margin", type=float)
    v.add_argument("--svg", action="store_true")
    for name in ("s", "s1", "s2", "t", "sigma"):
        v.add_argument(f"--{name}", type=float)
    for name in ("p", "q", "p1", "p2", "r", "r1", "r2"):
        v.add_argument(f"--{name}", type=_float_or_inf)
    v.add_argument("--k", type=int)

    s = sub.add_parser("simulate", parents=[common], help="integrate the flow and check inequalities")
    s.add_argument("--init", choices=("taylor-green", "stokes-mode", "random"))
    s.add_argument("--n", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--nu", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--t-end", dest="t_end", type=float)
    s.add_argument("--record-every", dest="record_every", type=int)
    s.add_argument("--field-every", dest="field_every", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--band", type=str)
    s.add_argument("--check", type=str, help="comma-separated: energy,h32,besov")
    s.add_argument("--c-emp", dest="c_emp", type=float, help="override the calibrated constant")
    s.add_argument("--ode-overlay", dest="ode_overlay", type=str, help="c,gamma,T reference curve")
    s.add_argument("--svg", action="store_true")

    o = sub.add_parser("ode", parents=[common], help="comparison dynamics and blowup scenarios")
    o.add_argument("--scenario", choices=("equality", "weak"))
    o.add_argument("--c", type=float)
    o.add_argument("--gamma", type=float)
    o.add_argument("--x0", type=float)
    o.add_argument("--dt", type=float)
    o.add_argument("--eps", type=float)
    o.add_argument("--T", dest="T", type=float)
    o.add_argument("--tau", type=float)
    o.add_argument("--svg", action="store_true")

    r = sub.add_parser("report", parents=[common], help="merge verification reports in a directory")
    r.add_argument("--in", dest="in_dir", type=Path)

    return parser


DEFAULTS: dict[str, dict] = {
    "gen-field": {
        "n": 3,
        "N": 32,
        "alpha": 3.0,
        "band": None,
        "amplitude": 1.0,
        "seed": 0,
        "name": "field",
        "out": "lplab-out",
    },
    "verify": {
        "ineq_id": None,
        "all": False,
        "n": 3,
        "grids": None,
        "samples": None,
        "margin": 2.0,
        "seed": 2025,
        "svg": False,
        "out": "lplab-out",
    },
    "simulate": {
        "init": "taylor-green",
        "n": 3,
        "N": 32,
        "nu": 1.0,
        "dt": 1e-3,
        "t_end": 0.5,
        "record_every": 1,
        "field_every": 10,
        "alpha": 3.0,
        "band": None,
        "seed": 0,
        "check": "energy,h32,besov",
        "c_emp": None,
        "ode_overlay": None,
        "svg": False,
        "out": "lplab-out",
    },
    "ode": {
        "scenario": "equality",
        "c": 1.0,
        "gamma": 2.0,
        "x0": 1.0,
        "dt": 1e-3,
        "eps": 0.1,
        "T": 1.0,
        "tau": 0.0,
        "seed": 0,
        "svg": False,
        "out": "lplab-out",
    },
    "report": {"in_dir": "lplab-out", "out": "lplab-out", "seed": 0},
}

# overrides that make each stock initial condition meaningful out of the box
_SIM_INIT_TWEAKS = {"stokes-mode": {"dt": 1e-4, "t_end": 0.1, "field_every": 0, "check": "energy"}}


def resolve_config(args: argparse.Namespace) -> dict:
    """defaults < JSON config file < explicit command-line flags."""
    cfg = dict(DEFAULTS[args.command])
    flags = {
        k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None and v is not False
    }
    if args.command == "simulate":
        init = flags.get("init")
        if init is None and args.config is not None:
            try:
                init = json.loads(Path(args.config).read_text()).get("init")
            except (OSError, json.JSONDecodeError):
                init = None
        cfg.update(_SIM_INIT_TWEAKS.get(init or cfg["init"], {}))
    if args.config is not None:
        loaded = json.loads(Path(args.config).read_text())
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise LplabError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update(flags)
    return cfg


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit_json(path: Path, command: str, cfg: dict, results: dict) -> None:
    payload = {
        "version": __version__,
        "command": command,
        "config": {k: (str(v) if isinstance(v, Path) else v) for k, v in cfg.items()},
        "results": results,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and np.isinf(obj):
        return "inf"
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _profile_from(cfg: dict, grid: Grid) -> SpectrumProfile:
    if cfg.get("band"):
        lo, hi = _parse_band(cfg["band"]) if isinstance(cfg["band"], str) else cfg["band"]
    else:
        lo, hi = 1, grid.dealias_cutoff
    return SpectrumProfile(alpha=cfg["alpha"], k_lo=lo, k_hi=hi, amplitude=cfg["amplitude"])


# -- commands --------------------------------------------------------------------


def cmd_gen_field(cfg: dict) -> int:
    grid = Grid(cfg["n"], cfg["N"])
    profile = _profile_from(cfg, grid)
    profile.validate_for(grid)
    u = random_solenoidal(grid, profile, cfg["seed"])
    out = _out_dir(cfg)
    half = grid.n / 2.0
    h_crit = sobolev_norm(u, half)
    b_high = besov_norm(u, (half + 1.0, 2.0, 1.0))
    meta = {
        "version": __version__,
        "seed": cfg["seed"],
        "profile": {"alpha": profile.alpha, "band": [profile.k_lo, profile.k_hi], "amplitude": profile.amplitude},
        "grid": {"n": grid.n, "N": grid.N},
        "norms": {"H_crit": h_crit, "B_high_21": b_high},
    }
    path = write_field(out / f"{cfg['name']}.fld", u, metadata=meta)
    print(f"wrote {path}")
    print(f"|u|_H^{half:g} = {h_crit:.6g}   |u|_B^{half + 1:g}_2,1 = {b_high:.6g}")
    return EXIT_OK


def _ensemble_from(cfg: dict) -> EnsembleSpec:
    kwargs: dict = {"n": cfg["n"], "base_seed": cfg["seed"]}
    if cfg.get("grids"):
        kwargs["grid_sizes"] = tuple(cfg["grids"])
    if cfg.get("samples"):
        kwargs["samples_per_cell"] = max(2, int(cfg["samples"]))
    return EnsembleSpec(**kwargs)


def _inequality_params(cfg: dict) -> dict:
    fields = ("s", "s1", "s2", "t", "sigma", "p", "q", "p1", "p2", "r", "r1", "r2", "k")
    params = {k: cfg[k] for k in fields if cfg.get(k) is not None}
    if cfg.get("samples") is not None:
        params["samples"] = cfg["samples"]
    return params


def cmd_verify(cfg: dict) -> int:
    if cfg.get("list"):
        print("\n".join(known_inequalities()))
        return EXIT_OK
    ids = known_inequalities() if cfg.get("all") else [cfg.get("ineq_id")]
    if not ids or ids[0] is None:
        raise LplabError("verify needs --id, --all, or --list")
    spec = _ensemble_from(cfg)
    out = _out_dir(cfg)
    params = _inequality_params(cfg)
    all_pass = True
    for ineq_id in ids:
        stats = run_inequality(ineq_id, spec, params or None, margin=cfg["margin"], threads=worker_count())
        all_pass &= stats.passed
        _emit_json(out / f"verify-{ineq_id}.json", "verify", cfg, stats.to_dict())
        print(
            f"{ineq_id}: c_emp={stats.c_emp:.6g} max_ratio={stats.max_ratio:.6g} "
            f"violations={stats.violations} drift={stats.resolution_stability.get('drift', 1.0):.3f} "
            f"{'PASS' if stats.passed else 'FAIL'}"
        )
        if cfg.get("svg"):
            _ratio_svg(stats, out / f"verify-{ineq_id}.svg")
    return EXIT_OK if all_pass else EXIT_VALIDATION


def _ratio_svg(stats: RatioStats, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 3.5))
    cells = list(stats.per_cell)
    ax.bar(range(len(cells)), [stats.per_cell[c] for c in cells])
    ax.axhline(stats.c_emp, color="k", ls="--", lw=1, label="c_emp")
    ax.set_xticks(range(len(cells)), cells, rotation=60, fontsize=6, ha="right")
    ax.set_ylabel("max ratio")
    ax.set_title(stats.inequality_id)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _initial_field(cfg: dict, grid: Grid):
    if cfg["init"] == "taylor-green":
        return taylor_green(grid)
    if cfg["init"] == "stokes-mode":
        return stokes_mode(grid)
    profile = _profile_from({**cfg, "amplitude": 1.0}, grid)
    profile.validate_for(grid)
    return random_solenoidal(grid, profile, cfg["seed"])


def _write_trajectory_csv(path: Path, traj: Trajectory, res_h32: dict, res_besov: dict) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "L2", "H1", "H32", "H52", "B52_21", "res_h32", "res_besov"])
        for i, t in enumerate(traj.times):
            writer.writerow(
                [
                    f"{t:.12g}",
                    *(f"{traj.norms[key][i]:.12g}" for key in ("L2", "H1", "H32", "H52", "B52_21")),
                    f"{res_h32.get(round(float(t), 12), float('nan')):.12g}",
                    f"{res_besov.get(round(float(t), 12), float('nan')):.12g}",
                ]
            )


def _norms_svg(traj: Trajectory, path: Path, overlay: str | None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for key in ("L2", "H1", "H32", "H52", "B52_21"):
        ax.plot(traj.times, traj.norms[key], label=key)
    if overlay:
        c, gamma, T = (float(x) for x in overlay.split(","))
        ts = traj.times[traj.times < T]
        ref = [(1.0 / (gamma * c * (T - t))) ** (1.0 / gamma) for t in ts]
        ax.plot(ts, ref, "k--", label="comparison bound")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_simulate(cfg: dict) -> int:
    grid = Grid(cfg["n"], cfg["N"])
    u0 = _initial_field(cfg, grid)
    checks = [c.strip() for c in (cfg["check"] or "").split(",") if c.strip()]
    field_every = cfg["field_every"] if "besov" not in checks else max(cfg["field_every"], 1)
    traj = ns_simulate(
        u0,
        nu=cfg["nu"],
        dt=cfg["dt"],
        t_end=cfg["t_end"],
        record_every=cfg["record_every"],
        field_every=field_every,
    )
    out = _out_dir(cfg)
    results: dict = {
        "aborted": traj.aborted,
        "seed": cfg["seed"],
        "final_time": float(traj.times[-1]),
        "norm_exponents": traj.exponents(),
    }

    res_h32: dict = {}
    res_besov: dict = {}
    if traj.complete:
        if "energy" in checks:
            eb = energy_balance(traj)
            results["energy_balance"] = {"max_residual": eb.max_residual, "max_relative": eb.max_relative}
        if "h32" in checks:
            c_emp = cfg["c_emp"] if cfg.get("c_emp") else calibrate_h32_constant(traj)
            rep = check_h32_inequality(traj, c_emp)
            res_h32 = {round(float(t), 12): float(r) for t, r in zip(rep.times, rep.residuals)}
            results["h32_check"] = {
                "c_emp": rep.c_emp,
                "violations": rep.violations,
                "young_violations": rep.young_violations,
                "max_ratio": float(np.max(rep.ratios)),
            }
        if "besov" in checks and traj.checkpoint_fields:
            c_emp = cfg["c_emp"] if cfg.get("c_emp") else None
            rep = check_besov_block_evolution(traj, c_emp)
            res_besov = {round(float(t), 12): float(r) for t, r in zip(rep.times, rep.summed_residuals)}
            results["besov_check"] = {
                "c_emp": rep.c_emp,
                "per_block_violations": rep.per_block_violations,
                "summed_violations": rep.summed_violations,
                "dk_max_deviation": rep.dk_max_deviation,
            }

    _write_trajectory_csv(out / "trajectory.csv", traj, res_h32, res_besov)
    for t, f in zip(traj.checkpoint_times, traj.checkpoint_fields):
        write_field(out / f"checkpoint-{t:08.4f}.fld", f, metadata={"t": float(t), "seed": cfg["seed"]})
    if cfg.get("svg"):
        _norms_svg(traj, out / "norms.svg", cfg.get("ode_overlay"))
    _emit_json(out / "simulate.json", "simulate", cfg, results)

    if not traj.complete:
        print(f"aborted: {traj.aborted} (partial outputs in {out})", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"simulated to t={traj.times[-1]:g}; outputs in {out}")
    return EXIT_OK


def cmd_ode(cfg: dict) -> int:
    out = _out_dir(cfg)
    if cfg["scenario"] == "weak":
        rep = weak_blowup_scenario(cfg["eps"], cfg["c"], cfg["T"], cfg["tau"], cfg["dt"])
        results = {
            "sigma": rep.sigma,
            "z_monotone": rep.z_monotone,
            "z_max_step_increase": rep.z_max_step_increase,
            "fitted_exponent": rep.fitted_exponent,
            "exponent_rel_err": rep.exponent_rel_err,
            "crossing_time": rep.crossing_time,
            "contradiction_found": rep.contradiction_found,
            "notes": list(rep.notes),
        }
        print(f"Z nonincreasing: {rep.z_monotone}; fitted exponent {rep.fitted_exponent:.4f} "
              f"(target {rep.sigma:.4f}); crossing at t={rep.crossing_time}")
        curves = {"t": rep.times, "Y": rep.y, "Z": rep.z}
    else:
        params = OdeParams(c=cfg["c"], gamma=cfg["gamma"], x0=cfg["x0"])
        rep = ode_integrate(params, cfg["dt"])
        results = {
            "T_exact": params.T,
            "T_estimate": rep.t_blowup_estimate,
            "relative_error": abs(rep.t_blowup_estimate - params.T) / params.T,
            "min_bound_ratio": rep.min_ratio,
            "max_bound_ratio": rep.max_ratio,
            "horizon_spread": rep.horizon_spread,
            "bound_formula": rep.bound_formula,
            "saturates_bound": rep.min_ratio >= 1.0 - 1e-12,
        }
        print(f"T_estimate = {rep.t_blowup_estimate:.6f} (exact {params.T:.6f}); "
              f"bound saturated: {results['saturates_bound']}")
        curves = {"t": rep.times, "X": rep.values}
    _emit_json(out / "ode.json", "ode", cfg, results)
    if cfg.get("svg"):
        _ode_svg(curves, out / "ode.svg")
    return EXIT_OK


def _ode_svg(curves: dict, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    t = curves.pop("t")
    for label, series in curves.items():
        ax.plot(t, series, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_report(cfg: dict) -> int:
    in_dir = Path(cfg["in_dir"])
    if not in_dir.is_dir():
        raise FileNotFoundError(f"report input directory {in_dir} does not exist")
    merged = {}
    for path in sorted(in_dir.glob("verify-*.json")):
        payload = json.loads(path.read_text())
        res = payload.get("results", {})
        merged[res.get("inequality_id", path.stem)] = {
            "passed": res.get("passed"),
            "c_emp": res.get("c_emp"),
            "violations": res.get("violations"),
            "max_ratio": res.get("max_ratio"),
        }
    out = _out_dir(cfg)
    _emit_json(out / "summary.json", "report", cfg, merged)
    for name, row in merged.items():
        print(f"{name:20s} {'PASS' if row['passed'] else 'FAIL'}  c_emp={row['c_emp']}")
    if not merged:
        print("no verification reports found", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "gen-field": cmd_gen_field,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "ode": cmd_ode,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except LplabError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
