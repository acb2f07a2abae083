"""Fixed-step closed-loop simulation of the multi-agent seeking dynamics.

Agents run identical augmented plants; the applied input is the team-objective
gradient corrupted by norm-bounded multiplicative noise.  Velocity-scheduled
plants re-evaluate their realization along the trajectory by exact linear
interpolation in the scheduling parameter.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .field import FieldGraph, laplacian, minimize_f
from .integrate import rk4_path
from .statespace import AugmentedPlant, equilibrium_state, friction_vehicle_base

DEFAULT_DT = 1e-3
DEFAULT_T = 50.0
ERROR_FLOOR = 1e-12


@dataclass(frozen=True)
class FrictionVehicle:
    """Nonlinear friction vehicle behind its proportional tracking loop.

    Scheduling reads the velocity state: rho = |v|, valid on [0, rho_max].
    """

    m_v: float = 1.0
    b_v: float = 1.0
    k_x: float = 4.0
    k_v: float = 4.0
    rho_max: float = 5.0
    grid_density: int = 11

    def base(self):
        return friction_vehicle_base(self.m_v, self.b_v, self.k_x, self.k_v, self.rho_max, self.grid_density)

    def plant(self, k_p: float, k_d: float) -> AugmentedPlant:
        from .statespace import augment_with_filter

        return augment_with_filter(self.base(), k_p, k_d)

    @staticmethod
    def scheduling(eta: np.ndarray) -> float:
        """rho = |v| for one agent's augmented state [x, v, q, p]."""
        return abs(float(eta[1]))

    def initial_ball_radius(self) -> float:
        """Largest ball radius around an equilibrium keeping |v| <= rho_max."""
        return self.rho_max


@dataclass(frozen=True)
class NoisePolicy:
    """Deterministic norm-bounded gradient corruption: ||e|| <= delta ||u||."""

    mode: str = "none"  # none | opposing | piecewise-random
    delta: float = 0.0
    resample_period: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("none", "opposing", "piecewise-random"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.delta < 0:
            raise ValueError("noise level delta must be >= 0")
        if self.resample_period <= 0:
            raise ValueError("resample period must be positive")


def _unit_direction(seed: int, period_index: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng([seed, period_index])
    v = rng.standard_normal(dim)
    n = np.linalg.norm(v)
    while n < 1e-12:
        v = rng.standard_normal(dim)
        n = np.linalg.norm(v)
    return v / n


def sample_noise(policy: NoisePolicy, gradient: np.ndarray, t: float) -> np.ndarray:
    """Noise sample honoring the multiplicative bound at time t.

    Opposing mode sits on the bound against the gradient (the adversarial
    boundary case); piecewise-random mode holds a random unit direction fixed
    over each resample period.
    """
    gradient = np.asarray(gradient, dtype=float)
    if policy.mode == "none" or policy.delta == 0.0:
        return np.zeros_like(gradient)
    if policy.mode == "opposing":
        return -policy.delta * gradient
    k = int(np.floor(t / policy.resample_period + 1e-12))
    direction = _unit_direction(policy.seed, k, gradient.size)
    return policy.delta * float(np.linalg.norm(gradient)) * direction


@dataclass(frozen=True)
class SimScenario:
    """Everything a run needs: graph+field, plant template, noise, initials."""

    fg: FieldGraph
    plant: AugmentedPlant
    noise: NoisePolicy
    eta0: np.ndarray
    T: float = DEFAULT_T
    dt: float = DEFAULT_DT
    scheduling: object | None = None  # per-agent state -> rho (qLPV only)
    rho_box: tuple[float, float] | None = None

    def hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.eta0, dtype=float).tobytes())
        h.update(str((self.fg.n_agents, self.fg.edges, self.fg.informed)).encode())
        h.update(np.asarray(self.fg.r, dtype=float).tobytes())
        h.update(str((self.plant.k_p, self.plant.k_d, self.noise.mode, self.noise.delta,
                      self.noise.seed, self.T, self.dt)).encode())
        return h.hexdigest()[:16]


@dataclass
class SimTrajectory:
    """Sampled closed-loop run with per-sample bookkeeping."""

    t: np.ndarray                 # (n,)
    states: np.ndarray            # (n, N*n_eta)
    outputs: np.ndarray           # (n, N*d)
    gradients: np.ndarray         # (n, N*d)   u = grad f(y)
    noise: np.ndarray             # (n, N*d)   e
    applied: np.ndarray           # (n, N*d)   u_n = u + e
    rho: np.ndarray               # (n, N)     scheduling values (0 for LTI)
    left_param_set: bool
    blown_up: bool
    metadata: dict

    @property
    def n_agents(self) -> int:
        return self.rho.shape[1]


class _Dynamics:
    """Precompiled stacked closed-loop evaluator.

    LTI plants collapse to fixed block matrices; one-parameter scheduled
    plants interpolate their realization per agent (exact for affine
    parameter dependence).  Field gradients go through the batched path.
    """

    def __init__(self, scenario: SimScenario):
        fg, plant, policy = scenario.fg, scenario.plant, scenario.noise
        self.fg, self.policy = fg, policy
        self.N, self.d, self.n_eta = fg.n_agents, fg.d, plant.aug.n_x
        if fg.d != plant.d:
            raise ValueError("field dimension and plant dimension differ")
        grid = plant.aug.grid
        self.scheduled = not (grid.dim == 0 or len(grid.points) == 1)
        As = np.stack([r.A for r in plant.aug.realizations])
        Bs = np.stack([r.B for r in plant.aug.realizations])
        Cs = np.stack([r.C for r in plant.aug.realizations])
        self.left_param_set = False
        d = self.d
        Lap = laplacian(fg)
        self._lap_d = Lap if d == 1 else np.kron(Lap, np.eye(d))
        self._informed = np.array(fg.informed, dtype=int)
        if not self.scheduled:
            from scipy.linalg import block_diag

            self._A_big = block_diag(*([As[0]] * self.N))
            self._B_big = block_diag(*([Bs[0]] * self.N))
            self._C_big = block_diag(*([Cs[0]] * self.N))
            self.scheduling = None
            return
        if grid.dim != 1:
            raise ValueError("scheduling interpolation supports one parameter axis")
        if scenario.scheduling is None:
            raise ValueError("gridded plant requires a scheduling map")
        self.scheduling = scenario.scheduling
        knots = np.array([p[0] for p in grid.points])
        order = np.argsort(knots)
        self._knots = knots[order]
        self._As, self._Bs, self._Cs = As[order], Bs[order], Cs[order]
        self._B_const = all(np.array_equal(Bs[0], B) for B in Bs)
        self._C_const = all(np.array_equal(Cs[0], C) for C in Cs)
        if scenario.rho_box is not None:
            self._rho_lo, self._rho_hi = scenario.rho_box
        else:
            self._rho_lo, self._rho_hi = grid.lower[0], grid.upper[0]

    def rho_of(self, eta: np.ndarray) -> np.ndarray:
        eta_mat = eta.reshape(self.N, self.n_eta)
        rhos = np.array([float(self.scheduling(row)) for row in eta_mat])
        if np.any(rhos < self._rho_lo - 1e-12) or np.any(rhos > self._rho_hi + 1e-12):
            self.left_param_set = True
        return np.clip(rhos, self._rho_lo, self._rho_hi)

    def _batch(self, stack: np.ndarray, rhos: np.ndarray) -> np.ndarray:
        knots = self._knots
        idx = np.clip(np.searchsorted(knots, rhos), 1, knots.size - 1)
        w = (rhos - knots[idx - 1]) / (knots[idx] - knots[idx - 1])
        return stack[idx - 1] * (1.0 - w)[:, None, None] + stack[idx] * w[:, None, None]

    def outputs(self, eta: np.ndarray) -> np.ndarray:
        if not self.scheduled:
            return self._C_big @ eta
        eta_mat = eta.reshape(self.N, self.n_eta)
        if self._C_const:
            return (eta_mat @ self._Cs[0].T).ravel()
        C = self._batch(self._Cs, self.rho_of(eta))
        return np.einsum("nij,nj->ni", C, eta_mat).ravel()

    def gradient(self, y: np.ndarray) -> np.ndarray:
        g = self._lap_d @ (y - self.fg.r)
        pts = y.reshape(self.N, self.d)[self._informed]
        g_field = self.fg.field.grad_many(pts)
        g = g.reshape(self.N, self.d)
        g[self._informed] += g_field
        return g.ravel()

    def deriv(self, t: float, eta: np.ndarray) -> np.ndarray:
        y = self.outputs(eta)
        u = self.gradient(y)
        un = u + sample_noise(self.policy, u, t)
        if not self.scheduled:
            return self._A_big @ eta + self._B_big @ un
        eta_mat = eta.reshape(self.N, self.n_eta)
        un_mat = un.reshape(self.N, self.d)
        A = self._batch(self._As, self.rho_of(eta))
        deta = np.einsum("nij,nj->ni", A, eta_mat)
        if self._B_const:
            deta += un_mat @ self._Bs[0].T
        else:
            B = self._batch(self._Bs, self.rho_of(eta))
            deta += np.einsum("nij,nj->ni", B, un_mat)
        return deta.ravel()


def simulate(scenario: SimScenario) -> SimTrajectory:
    """Fixed-step RK4 on the stacked closed loop, deterministic per seed."""
    fg, policy = scenario.fg, scenario.noise
    N, d = fg.n_agents, fg.d
    dyn = _Dynamics(scenario)
    eta0 = np.asarray(scenario.eta0, dtype=float).reshape(N * dyn.n_eta)

    n_steps = int(round(scenario.T / scenario.dt))
    ts = scenario.dt * np.arange(n_steps + 1)
    states = rk4_path(dyn.deriv, eta0, ts)
    blown_up = bool(np.any(~np.isfinite(states)))
    if blown_up:
        valid = np.all(np.isfinite(states), axis=1)
        last = int(np.nonzero(valid)[0][-1]) + 1
        ts, states = ts[:last], states[:last]

    n = ts.size
    outputs = np.zeros((n, N * d))
    gradients = np.zeros((n, N * d))
    noise = np.zeros((n, N * d))
    rho_log = np.zeros((n, N))
    for k in range(n):
        outputs[k] = dyn.outputs(states[k])
        if dyn.scheduled:
            rho_log[k] = dyn.rho_of(states[k])
        gradients[k] = dyn.gradient(outputs[k])
        noise[k] = sample_noise(policy, gradients[k], ts[k])
    applied = gradients + noise

    return SimTrajectory(
        t=ts,
        states=states,
        outputs=outputs,
        gradients=gradients,
        noise=noise,
        applied=applied,
        rho=rho_log,
        left_param_set=dyn.left_param_set,
        blown_up=blown_up,
        metadata={
            "scenario_hash": scenario.hash(),
            "seed": policy.seed,
            "dt": scenario.dt,
            "T": scenario.T,
            "noise_mode": policy.mode,
            "delta": policy.delta,
        },
    )


def stacked_equilibrium(plant: AugmentedPlant, fg: FieldGraph, y_star: np.ndarray | None = None) -> np.ndarray:
    """Stacked equilibrium state matching the team-objective minimizer."""
    y_star = minimize_f(fg) if y_star is None else np.asarray(y_star, dtype=float).reshape(-1)
    d = plant.d
    parts = [equilibrium_state(plant, y_star[i * d:(i + 1) * d]) for i in range(fg.n_agents)]
    return np.concatenate(parts)


@dataclass(frozen=True)
class DecayEstimate:
    alpha_hat: float
    r_squared: float
    window: tuple[float, float]
    n_samples: int


def estimate_decay_rate(traj: SimTrajectory, y_star: np.ndarray) -> DecayEstimate:
    """Least-squares decay exponent of the output error over [0.1 T, 0.8 T].

    Requires a converged run (final error below 1e-3 of the initial error);
    samples below the numerical floor are excluded from the fit.
    """
    y_star = np.asarray(y_star, dtype=float).reshape(-1)
    err = np.linalg.norm(traj.outputs - y_star[None, :], axis=1)
    if traj.blown_up:
        raise ValueError("trajectory blew up; no decay rate to estimate")
    if err[0] <= 0 or err[-1] >= 1e-3 * err[0]:
        raise ValueError("trajectory not converged; decay estimate would be meaningless")
    T = traj.t[-1]
    mask = (traj.t >= 0.1 * T) & (traj.t <= 0.8 * T) & (err > ERROR_FLOOR)
    if int(mask.sum()) < 8:
        raise ValueError("too few usable samples in the fit window")
    ts = traj.t[mask]
    logs = np.log(err[mask])
    A = np.vstack([ts, np.ones_like(ts)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, logs, rcond=None)
    fitted = A @ np.array([slope, intercept])
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayEstimate(
        alpha_hat=-float(slope),
        r_squared=r2,
        window=(float(ts[0]), float(ts[-1])),
        n_samples=int(mask.sum()),
    )


def check_initial_ball(radius_c: float, X0: np.ndarray, eta0: np.ndarray, eta_star: np.ndarray) -> bool:
    """Initial-condition test for scheduled plants: the state must start
    within c / sqrt(cond(X0)) of the equilibrium.

    ``radius_c`` is the largest ball radius keeping the scheduling parameter
    inside its box (infinite for LTI plants; the condition number is
    unchanged by stacking identical storage blocks).
    """
    if not np.isfinite(radius_c):
        return True
    X0 = np.asarray(X0, dtype=float)
    eigs = np.linalg.eigvalsh(0.5 * (X0 + X0.T))
    if eigs[0] <= 0:
        raise ValueError("storage matrix must be positive definite")
    cond = float(eigs[-1] / eigs[0])
    dist = float(np.linalg.norm(np.asarray(eta0, dtype=float) - np.asarray(eta_star, dtype=float)))
    return dist < radius_c / np.sqrt(cond)


# -- trajectory CSV ------------------------------------------------------------

def write_trajectory_csv(traj: SimTrajectory, path, sidecar_path=None) -> None:
    """One row per (sample, agent): t, agent, states, y, u, e_norm, grad_norm, rho."""
    import csv

    N = traj.n_agents
    n_eta = traj.states.shape[1] // N
    d = traj.outputs.shape[1] // N
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t", "agent"] + [f"state{k}" for k in range(n_eta)] + ["y", "u", "e_norm", "grad_norm", "rho"]
        writer.writerow(header)
        for k in range(traj.t.size):
            for i in range(N):
                eta_i = traj.states[k, i * n_eta:(i + 1) * n_eta]
                y_i = traj.outputs[k, i * d:(i + 1) * d]
                u_i = traj.applied[k, i * d:(i + 1) * d]
                e_norm = float(np.linalg.norm(traj.noise[k, i * d:(i + 1) * d]))
                g_norm = float(np.linalg.norm(traj.gradients[k, i * d:(i + 1) * d]))
                row = [format(traj.t[k], ".12g"), i]
                row += [format(v, ".12g") for v in eta_i]
                row += [" ".join(format(v, ".12g") for v in y_i)]
                row += [" ".join(format(v, ".12g") for v in u_i)]
                row += [format(e_norm, ".12g"), format(g_norm, ".12g"), format(traj.rho[k, i], ".12g")]
                writer.writerow(row)
    if sidecar_path is not None:
        with open(sidecar_path, "w") as fh:
            for key in ("scenario_hash", "seed", "dt", "T", "noise_mode", "delta"):
                fh.write(f"{key} {traj.metadata[key]}\n")
            fh.write(f"left_param_set {int(traj.left_param_set)}\n")
            fh.write(f"blown_up {int(traj.blown_up)}\n")
