"""Configuration-driven command line: certify, sweep, graphcheck, simulate.

One INI-style config file per run with named sections (model, multiplier,
noise, bisection, sweep, simulation, output); ``--workers``, ``--seed`` and
``--out`` override the file.  Exit codes: 0 success, 1 error, 2 infeasible
certification, 3 non-converged simulation.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import certify as ct
from . import field as fd
from . import sim as sm
from .statespace import augment_with_filter, double_integrator_plant, load_model

BUILTIN_MODELS = ("double-integrator", "friction-vehicle")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _load_config(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(f"config file not found: {path}")
    return cp


def _build_plant(cp: configparser.ConfigParser, k_d: float | None = None):
    model = cp["model"] if "model" in cp else {}
    name = model.get("name", "")
    k_p = float(model.get("k_p", 1.0))
    k_d = float(model.get("k_d", 9.0)) if k_d is None else k_d
    if k_p <= 0 or k_d <= 0:
        raise ValueError("filter gains must be positive")
    if name == "double-integrator":
        d = int(model.get("d", 1))
        return double_integrator_plant(k_p, k_d, d), None
    if name == "friction-vehicle":
        vehicle = sm.FrictionVehicle(
            m_v=float(model.get("m_v", 1.0)),
            b_v=float(model.get("b_v", 1.0)),
            k_x=float(model.get("k_x", 4.0)),
            k_v=float(model.get("k_v", 4.0)),
            rho_max=float(model.get("rho_max", 5.0)),
            grid_density=int(model.get("grid_density", 11)),
        )
        return vehicle.plant(k_p, k_d), vehicle
    if "file" in model:
        base = load_model(model["file"])
        return augment_with_filter(base, k_p, k_d), None
    raise ValueError(f"model must name one of {BUILTIN_MODELS} or give file=<path>")


def _multiplier_params(cp):
    sec = cp["multiplier"] if "multiplier" in cp else {}
    return int(sec.get("nu", 1)), float(sec.get("m", 1.0)), float(sec.get("L", 10.0))


def _bisection_params(cp, plant):
    sec = cp["bisection"] if "bisection" in cp else {}
    alpha_lo = float(sec.get("alpha_lo", ct.DEFAULT_TOL))
    alpha_hi = float(sec["alpha_hi"]) if "alpha_hi" in sec else ct.default_alpha_hi(plant)
    tol = float(sec.get("tol", ct.DEFAULT_TOL))
    if tol <= 0:
        raise ValueError("bisection tolerance must be positive")
    return alpha_lo, alpha_hi, tol


def _out_dir(cp, override: str | None) -> Path:
    out = Path(override) if override else Path(cp["output"]["dir"] if "output" in cp and "dir" in cp["output"] else ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_certify(args) -> int:
    cp = _load_config(args.config)
    plant, _ = _build_plant(cp)
    nu, m, L = _multiplier_params(cp)
    delta = float(cp["noise"].get("delta", 0.0)) if "noise" in cp else 0.0
    alpha_lo, alpha_hi, tol = _bisection_params(cp, plant)
    out = _out_dir(cp, args.out)
    cert = ct.bisect_alpha(plant, nu, m, L, delta, alpha_lo, alpha_hi, tol)
    path = out / "certificate.txt"
    ct.save_certificate(cert, path)
    if cert.feasible:
        print(f"certified alpha_star = {cert.alpha_star:.12g} ({len(cert.trace)} probes) -> {path}")
        return 0
    print(f"infeasible at alpha_lo = {alpha_lo:.12g} -> {path}")
    return 2


def cmd_sweep(args) -> int:
    cp = _load_config(args.config)
    sec = cp["sweep"] if "sweep" in cp else {}
    nu, m, _ = _multiplier_params(cp)
    k_d_list = _floats(sec.get("k_d_list", str(cp["model"].get("k_d", "9")) if "model" in cp else "9"))
    delta_list = _floats(sec.get("delta_list", "0"))
    L_list = _floats(sec.get("L_list", str(_multiplier_params(cp)[2])))
    if not k_d_list or not delta_list or not L_list:
        raise ValueError("sweep ranges must be non-empty")
    cells = []
    for k_d in k_d_list:
        plant, _ = _build_plant(cp, k_d=k_d)
        alpha_lo, alpha_hi, tol = _bisection_params(cp, plant)
        for delta in delta_list:
            for L in L_list:
                cells.append(ct.SweepCell(
                    k_d=k_d, delta=delta, m=m, L=L, nu=nu, plant=plant,
                    alpha_lo=alpha_lo, alpha_hi=alpha_hi, tol=tol,
                ))
    rows = ct.sweep(cells, workers=args.workers)
    out = _out_dir(cp, args.out)
    path = out / "sweep.csv"
    ct.write_sweep_csv(rows, path)
    print(f"{len(rows)} sweep rows -> {path}")
    return 0


def cmd_graphcheck(args) -> int:
    cp = _load_config(args.config)
    scenario_path = cp["model"]["scenario"] if "model" in cp and "scenario" in cp["model"] else None
    if scenario_path is None and "simulation" in cp:
        scenario_path = cp["simulation"].get("scenario")
    if scenario_path is None:
        raise ValueError("graphcheck needs a scenario file (model.scenario)")
    fg, _ = fd.load_scenario(scenario_path)
    connected = fd.check_path_to_informed(fg)
    Ls, Lb = fd.grounded_laplacians(fg)
    lam_min = float(np.linalg.eigvalsh(Ls)[0])
    lam_max = float(np.linalg.eigvalsh(Lb)[-1])
    print(f"informed reachability: {'yes' if connected else 'no'}")
    print(f"lambda_min(L_s) = {lam_min:.12g}")
    print(f"lambda_max(L_b) = {lam_max:.12g}")
    if connected:
        print(f"certified sector: ({lam_min:.12g}, {lam_max:.12g})")
    return 0 if connected else 2


def _draw_initials(rng, fg, plant, vehicle, cert, sim_sec):
    """Initial conditions: inside the certificate ball when one is supplied,
    else uniformly in the configured output box around the minimizer."""
    y_star = fd.minimize_f(fg)
    eta_star = sm.stacked_equilibrium(plant, fg, y_star)
    if cert is not None and cert.feasible and vehicle is not None:
        X0 = cert.variables["X0"]  # full storage block; stacking keeps its spectrum
        eigs = np.linalg.eigvalsh(0.5 * (X0 + X0.T))
        radius = vehicle.initial_ball_radius() / np.sqrt(eigs[-1] / eigs[0])
        direction = rng.standard_normal(eta_star.size)
        direction /= np.linalg.norm(direction)
        eta0 = eta_star + 0.5 * radius * rng.uniform(0.2, 1.0) * direction
        return eta0, eta_star, y_star
    half_width = float(sim_sec.get("init_halfwidth", 1.0))
    eta0 = eta_star + rng.uniform(-half_width, half_width, eta_star.size)
    return eta0, eta_star, y_star


def cmd_simulate(args) -> int:
    cp = _load_config(args.config)
    sim_sec = cp["simulation"] if "simulation" in cp else {}
    if "scenario" not in sim_sec:
        raise ValueError("simulation needs scenario=<path>")
    fg, extras = fd.load_scenario(sim_sec["scenario"])
    merged = dict(extras.get("simulation", {}))
    merged.update({k: sim_sec[k] for k in sim_sec})
    plant, vehicle = _build_plant(cp)
    dt = float(merged.get("dt", sm.DEFAULT_DT))
    T = float(merged.get("t", merged.get("T", sm.DEFAULT_T)))
    mode = merged.get("noise_mode", "none")
    delta = float(merged.get("delta", 0.0))
    seeds = [int(s) for s in merged.get("seeds", str(args.seed)).split()]
    cert = None
    if "certificate" in merged:
        cert = ct.load_certificate(merged["certificate"])
    out = _out_dir(cp, args.out)
    rng = np.random.default_rng(args.seed)
    scheduling = sm.FrictionVehicle.scheduling if vehicle is not None else None

    worst_gap = None
    exit_code = 0
    for seed in seeds:
        policy = sm.NoisePolicy(mode=mode, delta=delta, resample_period=float(merged.get("resample_period", 0.1)), seed=seed)
        eta0, eta_star, y_star = _draw_initials(rng, fg, plant, vehicle, cert, merged)
        scenario = sm.SimScenario(fg=fg, plant=plant, noise=policy, eta0=eta0, T=T, dt=dt, scheduling=scheduling)
        traj = sm.simulate(scenario)
        stem = out / f"trajectory_seed{seed}"
        sm.write_trajectory_csv(traj, stem.with_suffix(".csv"), stem.with_suffix(".meta"))
        if traj.left_param_set:
            print(f"seed {seed}: left parameter set (flagged)")
        try:
            est = sm.estimate_decay_rate(traj, y_star)
        except ValueError as exc:
            print(f"seed {seed}: not converged ({exc})")
            exit_code = 3
            continue
        line = f"seed {seed}: alpha_hat = {est.alpha_hat:.6g} (R^2 = {est.r_squared:.4f})"
        if cert is not None and cert.feasible:
            ok = est.alpha_hat >= cert.alpha_star - 0.01
            gap = est.alpha_hat - cert.alpha_star
            worst_gap = gap if worst_gap is None else min(worst_gap, gap)
            line += f"  certificate alpha_star = {cert.alpha_star:.6g}: {'pass' if ok else 'FAIL'}"
            if not ok:
                exit_code = exit_code or 3
        print(line)
    if worst_gap is not None:
        print(f"worst alpha_hat - alpha_star gap: {worst_gap:.6g}")
    return exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="seekcert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("certify", cmd_certify),
        ("sweep", cmd_sweep),
        ("graphcheck", cmd_graphcheck),
        ("simulate", cmd_simulate),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
