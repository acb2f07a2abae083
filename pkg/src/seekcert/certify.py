"""Robust-performance LMI assembly, feasibility certification, and sweeps.

The decomposed single-agent LMI couples the augmented vehicle model with the
multiplier bank and a multiplicative-noise quadratic; feasibility at a rate
alpha certifies exponential convergence with that rate for every admissible
field, graph, and noise trajectory.  A bisection over alpha extracts the best
certifiable rate.
"""

from __future__ import annotations

import csv
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .sdp import (
    FEASIBLE,
    INFEASIBLE,
    NUMERICAL_FAILURE,
    LinearConstraint,
    MatrixConstraint,
    SdpBackend,
    SdpReport,
    SdpRequest,
    default_backend,
)
from .statespace import AugmentedPlant, ParamStateSpace, StateSpace, check_equilibrium_family
from .zf import ZfMultiplier, ZfVariableSet, build_multiplier, build_variable_constraints

# Margin factor realizing strict inequalities; scaled by the largest absolute
# entry of the constraint's constant term, floored at 1.
EPSILON_FACTOR = 1e-7

# Bisection lattice quantum; certified rates are multiples of this tolerance.
DEFAULT_TOL = 2.0 ** -13

# Sentinel recorded when the LMI is infeasible already at the smallest rate.
INFEASIBLE_SENTINEL = -1.0

MAX_FULL_AGENTS = 4


def constraint_margin(constant: np.ndarray) -> float:
    """Strictness margin for a constraint with the given constant term."""
    scale = float(np.max(np.abs(constant))) if constant.size else 0.0
    return EPSILON_FACTOR * max(scale, 1.0)


# -- flat variable layout -----------------------------------------------------

def _sym_dim(n: int) -> int:
    return n * (n + 1) // 2


def _sym_basis(n: int, k: int) -> np.ndarray:
    """k-th symmetric basis matrix (upper-triangle order, row-major)."""
    i, j = _sym_coords(n)[k]
    E = np.zeros((n, n))
    E[i, j] = 1.0
    E[j, i] = 1.0
    return E


def _sym_coords(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


@dataclass(frozen=True)
class VariableLayout:
    """Named blocks packed into one flat decision vector.

    Symmetric matrix blocks store the upper triangle (row-major); vector and
    scalar blocks are stored verbatim.
    """

    blocks: tuple[tuple[str, str, int], ...]  # (name, kind in {sym, vec, scalar}, n)

    def size_of(self, name: str) -> int:
        for bname, kind, n in self.blocks:
            if bname == name:
                return {"sym": _sym_dim(n), "vec": n, "scalar": 1}[kind]
        raise KeyError(name)

    @property
    def n_vars(self) -> int:
        return sum(self.size_of(name) for name, _, _ in self.blocks)

    def offset_of(self, name: str) -> int:
        off = 0
        for bname, kind, n in self.blocks:
            if bname == name:
                return off
            off += {"sym": _sym_dim(n), "vec": n, "scalar": 1}[kind]
        raise KeyError(name)

    def indices(self, name: str) -> np.ndarray:
        off = self.offset_of(name)
        return np.arange(off, off + self.size_of(name))

    def unpack(self, x: np.ndarray) -> dict[str, np.ndarray]:
        """Flat vector -> named values (symmetric blocks as full matrices)."""
        out: dict[str, np.ndarray] = {}
        for name, kind, n in self.blocks:
            chunk = np.asarray(x)[self.indices(name)]
            if kind == "sym":
                M = np.zeros((n, n))
                for val, (i, j) in zip(chunk, _sym_coords(n)):
                    M[i, j] = val
                    M[j, i] = val
                out[name] = M
            elif kind == "vec":
                out[name] = chunk.copy()
            else:
                out[name] = chunk.copy()
        return out

    def pack(self, values: dict[str, np.ndarray]) -> np.ndarray:
        x = np.zeros(self.n_vars)
        for name, kind, n in self.blocks:
            v = np.asarray(values[name], dtype=float)
            if kind == "sym":
                x[self.indices(name)] = [v[i, j] for i, j in _sym_coords(n)]
            else:
                x[self.indices(name)] = np.atleast_1d(v).ravel()
        return x


def certification_layout(n_storage: int, nu: int) -> VariableLayout:
    blocks: list[tuple[str, str, int]] = [
        ("X0", "sym", n_storage),
        ("H", "scalar", 1),
        ("P1", "vec", nu),
        ("P3", "vec", nu),
    ]
    if nu >= 2:
        blocks += [("X1", "sym", nu - 1), ("X3", "sym", nu - 1)]
    blocks += [("lam", "scalar", 1)]
    return VariableLayout(blocks=tuple(blocks))


# -- LMI assembly --------------------------------------------------------------

def series_interconnection(realization: StateSpace, mult: ZfMultiplier):
    """Matrices of the multiplier/noise channel stack around one plant
    realization: state [eta; x_bank], inputs [u; e], outputs [z; e; u]."""
    d = mult.d
    AG, BG, CG = realization.A, realization.B, realization.C
    Api, Bpi, Cpi, Dpi = mult.sys.A, mult.sys.B, mult.sys.C, mult.sys.D
    nG, npi = AG.shape[0], Api.shape[0]
    B1, B2 = Bpi[:, :d], Bpi[:, d:]
    D1, D2 = Dpi[:, :d], Dpi[:, d:]
    A = np.block([[AG, np.zeros((nG, npi))], [B1 @ CG, Api]])
    B = np.block([[BG, BG], [B2, np.zeros((npi, d))]])
    C1 = np.hstack([D1 @ CG, Cpi])
    D1s = np.hstack([D2, np.zeros((Dpi.shape[0], d))])
    C2 = np.zeros((2 * d, nG + npi))
    D2s = np.block([[np.zeros((d, d)), np.eye(d)], [np.eye(d), np.zeros((d, d))]])
    return A, B, C1, D1s, C2, D2s


@dataclass(frozen=True)
class CertificationProblem:
    """One rate-certification feasibility problem, compiled for a backend."""

    realizations: tuple[StateSpace, ...]
    grid_points: tuple[tuple[float, ...], ...]
    d: int
    nu: int
    m: float
    L: float
    delta: float
    alpha: float
    layout: VariableLayout
    request: SdpRequest
    series: tuple[tuple[np.ndarray, ...], ...]

    @property
    def epsilon(self) -> float:
        return self.request.min_margin


def _compile_matrix_constraint(name, layout, var_names, build, margin) -> MatrixConstraint:
    """Affine data of ``build(values) >= margin*I`` by unit-vector evaluation."""
    constant = build(_zero_values(layout))
    idx_list, basis_list = [], []
    for vname in var_names:
        for k in range(layout.size_of(vname)):
            values = _zero_values(layout)
            _set_flat_entry(layout, values, vname, k)
            basis = build(values) - constant
            if np.any(basis):
                idx_list.append(layout.offset_of(vname) + k)
                basis_list.append(0.5 * (basis + basis.T))
    constant = 0.5 * (constant + constant.T)
    return MatrixConstraint(
        name=name,
        constant=constant,
        var_idx=np.array(idx_list, dtype=int),
        basis=np.array(basis_list) if basis_list else np.zeros((0, *constant.shape)),
        margin=margin,
    )


def _zero_values(layout: VariableLayout) -> dict[str, np.ndarray]:
    out = {}
    for name, kind, n in layout.blocks:
        if kind == "sym":
            out[name] = np.zeros((n, n))
        elif kind == "vec":
            out[name] = np.zeros(n)
        else:
            out[name] = np.zeros(())
    return out


def _set_flat_entry(layout: VariableLayout, values: dict, name: str, k: int) -> None:
    for bname, kind, n in layout.blocks:
        if bname != name:
            continue
        if kind == "sym":
            i, j = _sym_coords(n)[k]
            values[name][i, j] = 1.0
            values[name][j, i] = 1.0
        elif kind == "vec":
            values[name][k] = 1.0
        else:
            values[name] = np.asarray(1.0)
        return
    raise KeyError(name)


def _assemble(realizations, grid_points, d, nu, m, L, delta, alpha) -> CertificationProblem:
    if delta < 0:
        raise ValueError("noise level delta must be >= 0")
    if alpha < 0:
        raise ValueError("rate alpha must be >= 0")
    mult = build_multiplier(nu, alpha, m, L, d)
    varset = build_variable_constraints(nu)
    nG = realizations[0].A.shape[0]
    n_storage = nG + mult.n_states
    layout = certification_layout(n_storage, nu)
    M = np.array([[-1.0, 0.0], [0.0, delta**2]])
    Id = np.eye(d)
    Md = np.kron(M, Id)

    series = []
    matrix_constraints = []
    # one LMI block per grid point, shared variables
    for gi, real in enumerate(realizations):
        A, B, C1, D1, C2, D2 = series_interconnection(real, mult)
        series.append((A, B, C1, D1, C2, D2))
        CD1 = np.hstack([C1, D1])
        CD2 = np.hstack([C2, D2])
        n_outer = n_storage + 2 * d

        def build_lmi(values, A=A, B=B, CD1=CD1, CD2=CD2, n_outer=n_outer):
            X0 = values["X0"]
            lam = float(values["lam"])
            P = varset.p_matrix(float(values["H"]), values["P1"], values["P3"])
            top = np.block([
                [A.T @ X0 + X0 @ A + 2.0 * alpha * X0, X0 @ B],
                [B.T @ X0, np.zeros((2 * d, 2 * d))],
            ])
            G = top + CD1.T @ np.kron(P, Id) @ CD1 + lam * (CD2.T @ Md @ CD2)
            return -G  # constraint is G <= -margin*I

        margin = constraint_margin(np.zeros((n_outer, n_outer)))
        matrix_constraints.append(
            _compile_matrix_constraint(f"lmi[{gi}]", layout, ("X0", "H", "P1", "P3", "lam"), build_lmi, margin)
        )

    # storage positivity
    def build_x0(values):
        return values["X0"]

    matrix_constraints.append(
        _compile_matrix_constraint("X0", layout, ("X0",), build_x0, constraint_margin(np.zeros((n_storage, n_storage))))
    )

    # multiplier variable set: bank positivity
    if nu == 1:
        for pname in ("P1", "P3"):
            def build_p(values, pname=pname):
                return np.diag(np.atleast_1d(values[pname]))

            matrix_constraints.append(
                _compile_matrix_constraint(f"{pname}>0", layout, (pname,), build_p, constraint_margin(np.zeros((nu, nu))))
            )
    else:
        for pname, xname in (("P1", "X1"), ("P3", "X3")):
            def build_pos(values, pname=pname, xname=xname):
                return varset.positivity_block(values[xname], values[pname])

            dim = varset.x_dim + 1
            matrix_constraints.append(
                _compile_matrix_constraint(
                    f"bank[{pname}]", layout, (pname, xname), build_pos, constraint_margin(np.zeros((dim, dim)))
                )
            )

    # scalar rows: the multiplier l1 row and lam >= 0
    linear_constraints = (
        LinearConstraint(
            name="l1-row",
            var_idx=np.concatenate([layout.indices("H"), layout.indices("P1"), layout.indices("P3")]),
            coeffs=np.concatenate([[1.0], varset.a_inv_b, varset.a_inv_b]),
            offset=0.0,
        ),
        LinearConstraint(name="lam>=0", var_idx=layout.indices("lam"), coeffs=np.array([1.0]), offset=0.0),
    )

    request = SdpRequest(
        n_vars=layout.n_vars,
        matrix_constraints=tuple(matrix_constraints),
        linear_constraints=linear_constraints,
    )
    return CertificationProblem(
        realizations=tuple(realizations),
        grid_points=tuple(grid_points),
        d=d,
        nu=nu,
        m=float(m),
        L=float(L),
        delta=float(delta),
        alpha=float(alpha),
        layout=layout,
        request=request,
        series=tuple(series),
    )


def assemble_single_agent_lmi(
    plant: AugmentedPlant,
    nu: int,
    m: float,
    L: float,
    delta: float,
    alpha: float,
    *,
    check_equilibrium: bool = True,
) -> CertificationProblem:
    """Network-size-independent LMI over the plant's parameter grid."""
    if check_equilibrium and not check_equilibrium_family(plant).ok:
        raise ValueError("plant fails the equilibrium-family requirement")
    return _assemble(
        plant.aug.realizations,
        plant.aug.grid.points,
        plant.aug.d,
        nu,
        m,
        L,
        delta,
        alpha,
    )


def assemble_full_lmi(
    stacked: ParamStateSpace,
    n_agents: int,
    nu: int,
    m: float,
    L: float,
    delta: float,
    alpha: float,
) -> CertificationProblem:
    """Full network LMI with an unstructured storage matrix.

    Desk-scale validation of the decomposition only; guarded to small N.
    """
    if n_agents > MAX_FULL_AGENTS:
        raise ValueError(f"full LMI guarded to N <= {MAX_FULL_AGENTS}")
    if stacked.d % n_agents:
        raise ValueError("stacked model dimension inconsistent with agent count")
    return _assemble(
        stacked.realizations,
        stacked.grid.points,
        stacked.d,
        nu,
        m,
        L,
        delta,
        alpha,
    )


def solve_feasibility(problem: CertificationProblem, backend: SdpBackend | None = None) -> SdpReport:
    """Solve and classify; near-boundary points are numerical failures.

    A solver-claimed feasible point is accepted only when its worst margin
    shortfall is at most epsilon/10; shortfalls in (epsilon/10, epsilon] (and
    beyond) are classified as numerical failures rather than trusted.
    """
    backend = backend or default_backend()
    report = backend.solve(problem.request)
    if report.status != FEASIBLE:
        return report
    eps = problem.epsilon
    if report.max_violation > eps / 10.0:
        return replace(
            report,
            status=NUMERICAL_FAILURE,
            message=f"near-boundary point: violation {report.max_violation:.3e} > eps/10",
        )
    return report


# -- bisection ----------------------------------------------------------------

@dataclass(frozen=True)
class BisectionResult:
    alpha_star: float
    feasible_at_lo: bool
    trace: tuple[tuple[float, str], ...]
    warning: str = ""

    @property
    def probes(self) -> int:
        return len(self.trace)


def bisect_feasible(probe, alpha_lo: float, alpha_hi: float, tol: float = DEFAULT_TOL) -> BisectionResult:
    """Largest alpha on the bisection lattice for which ``probe`` holds.

    ``probe(alpha)`` returns a status string; anything but feasible counts as
    infeasible (conservative).  The first probe is at ``alpha_lo``; when it
    fails the sentinel is returned without further probes.
    """
    if alpha_hi <= alpha_lo:
        raise ValueError("alpha_hi must exceed alpha_lo")
    if tol <= 0:
        raise ValueError("tol must be positive")
    trace: list[tuple[float, str]] = []
    status = probe(alpha_lo)
    trace.append((alpha_lo, status))
    if status != FEASIBLE:
        return BisectionResult(INFEASIBLE_SENTINEL, False, tuple(trace))
    lo, hi = alpha_lo, alpha_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        status = probe(mid)
        trace.append((mid, status))
        if status == FEASIBLE:
            lo = mid
        else:
            hi = mid
    # Pure bisection produces a monotone trace by construction; this safety
    # net resolves solver flakiness conservatively (largest feasible prefix).
    warning = ""
    ordered = sorted(trace, key=lambda t: t[0])
    statuses = [s for _, s in ordered]
    first_bad = next((i for i, s in enumerate(statuses) if s != FEASIBLE), len(statuses))
    if any(s == FEASIBLE for s in statuses[first_bad:]):
        warning = "non-monotone feasibility pattern; kept the largest feasible prefix"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
        lo = ordered[first_bad - 1][0]
    return BisectionResult(lo, True, tuple(trace), warning)


@dataclass(frozen=True)
class RateCertificate:
    """Certified rate with the solver payload needed for replay."""

    alpha_star: float
    feasible: bool
    inputs: dict
    variables: dict[str, np.ndarray] | None
    trace: tuple[tuple[float, str], ...]
    epsilon: float
    replay_violation: float
    warning: str = ""


def default_alpha_hi(plant: AugmentedPlant) -> float:
    """Cheap safe upper bracket: five times the least-damped nonzero mode
    at the nominal (first) grid point."""
    A = plant.aug.realizations[0].A
    re = np.abs(np.real(np.linalg.eigvals(A)))
    nonzero = re[re > 1e-9]
    if nonzero.size == 0:
        return 1.0
    return 5.0 * float(np.min(nonzero))


def bisect_alpha(
    plant: AugmentedPlant,
    nu: int,
    m: float,
    L: float,
    delta: float,
    alpha_lo: float = DEFAULT_TOL,
    alpha_hi: float | None = None,
    tol: float = DEFAULT_TOL,
    backend: SdpBackend | None = None,
) -> RateCertificate:
    """Bisection over the certification LMI; returns the rate certificate.

    When the LMI is infeasible already at ``alpha_lo`` the certificate
    carries the -1 sentinel.  Numerical failures during probing count as
    infeasible and are flagged in the trace.
    """
    backend = backend or default_backend()
    if alpha_hi is None:
        alpha_hi = default_alpha_hi(plant)
    if not check_equilibrium_family(plant).ok:
        raise ValueError("plant fails the equilibrium-family requirement")

    solutions: dict[float, tuple[CertificationProblem, SdpReport]] = {}

    def probe(alpha: float) -> str:
        problem = assemble_single_agent_lmi(plant, nu, m, L, delta, alpha, check_equilibrium=False)
        report = solve_feasibility(problem, backend)
        if report.status == FEASIBLE:
            solutions[alpha] = (problem, report)
        return report.status

    result = bisect_feasible(probe, alpha_lo, alpha_hi, tol)
    inputs = {
        "k_p": plant.k_p,
        "k_d": plant.k_d,
        "nu": nu,
        "m": m,
        "L": L,
        "delta": delta,
        "d": plant.d,
        "alpha_lo": alpha_lo,
        "alpha_hi": alpha_hi,
        "tol": tol,
        "grid_points": plant.aug.grid.points,
    }
    if not result.feasible_at_lo:
        return RateCertificate(
            alpha_star=INFEASIBLE_SENTINEL,
            feasible=False,
            inputs=inputs,
            variables=None,
            trace=result.trace,
            epsilon=EPSILON_FACTOR,
            replay_violation=math.inf,
            warning=result.warning,
        )
    problem, report = solutions[result.alpha_star]
    variables = problem.layout.unpack(report.x)
    return RateCertificate(
        alpha_star=result.alpha_star,
        feasible=True,
        inputs=inputs,
        variables=variables,
        trace=result.trace,
        epsilon=problem.epsilon,
        replay_violation=report.max_violation,
        warning=result.warning,
    )


def replay_violation(cert: RateCertificate, plant: AugmentedPlant, alpha: float | None = None) -> float:
    """Re-evaluate the certificate variables against the LMI at a given rate."""
    if not cert.feasible:
        raise ValueError("cannot replay an infeasible certificate")
    alpha = cert.alpha_star if alpha is None else alpha
    problem = assemble_single_agent_lmi(
        plant,
        cert.inputs["nu"],
        cert.inputs["m"],
        cert.inputs["L"],
        cert.inputs["delta"],
        alpha,
        check_equilibrium=False,
    )
    x = problem.layout.pack(cert.variables)
    return problem.request.max_violation(x)


# -- certificate file ----------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_certificate(cert: RateCertificate, path) -> None:
    lines = ["seekcert-certificate 1"]
    lines.append(f"alpha_star {_fmt(cert.alpha_star)}")
    lines.append(f"feasible {int(cert.feasible)}")
    lines.append(f"epsilon {_fmt(cert.epsilon)}")
    lines.append(f"replay_violation {_fmt(cert.replay_violation)}")
    for key in ("k_p", "k_d", "nu", "m", "L", "delta", "d", "alpha_lo", "alpha_hi", "tol"):
        lines.append(f"input {key} {_fmt(cert.inputs[key])}")
    for point in cert.inputs["grid_points"]:
        lines.append("grid_point " + " ".join(_fmt(v) for v in point))
    if cert.variables is not None:
        for name, value in cert.variables.items():
            arr = np.atleast_1d(np.asarray(value, dtype=float))
            shape = "x".join(str(s) for s in arr.shape)
            lines.append(f"var {name} {shape} " + " ".join(_fmt(v) for v in arr.ravel()))
    for alpha, status in cert.trace:
        lines.append(f"probe {_fmt(alpha)} {status}")
    if cert.warning:
        lines.append(f"warning {cert.warning}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_certificate(path) -> RateCertificate:
    inputs: dict = {}
    variables: dict[str, np.ndarray] = {}
    trace: list[tuple[float, str]] = []
    grid_points: list[tuple[float, ...]] = []
    fields: dict = {}
    warning = ""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if lines[0].split() != ["seekcert-certificate", "1"]:
        raise ValueError("not a seekcert certificate file")
    for ln in lines[1:]:
        tok = ln.split()
        if tok[0] in ("alpha_star", "epsilon", "replay_violation"):
            fields[tok[0]] = float(tok[1])
        elif tok[0] == "feasible":
            fields["feasible"] = bool(int(tok[1]))
        elif tok[0] == "input":
            key = tok[1]
            val = float(tok[2])
            inputs[key] = int(val) if key in ("nu", "d") else val
        elif tok[0] == "grid_point":
            grid_points.append(tuple(float(v) for v in tok[1:]))
        elif tok[0] == "var":
            shape = tuple(int(s) for s in tok[2].split("x"))
            arr = np.array([float(v) for v in tok[3:]]).reshape(shape)
            variables[tok[1]] = arr
        elif tok[0] == "probe":
            trace.append((float(tok[1]), tok[2]))
        elif tok[0] == "warning":
            warning = ln.split(None, 1)[1]
    inputs["grid_points"] = tuple(grid_points)
    return RateCertificate(
        alpha_star=fields["alpha_star"],
        feasible=fields["feasible"],
        inputs=inputs,
        variables=variables or None,
        trace=tuple(trace),
        epsilon=fields["epsilon"],
        replay_violation=fields["replay_violation"],
        warning=warning,
    )


# -- parameter sweeps ----------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    k_d: float
    delta: float
    m: float
    L: float
    nu: int
    plant: AugmentedPlant
    alpha_lo: float = DEFAULT_TOL
    alpha_hi: float | None = None
    tol: float = DEFAULT_TOL


@dataclass(frozen=True)
class SweepRow:
    k_d: float
    delta: float
    m: float
    L: float
    nu: int
    alpha_star: float
    status: str
    solve_ms: float


def _run_cell(cell: SweepCell) -> SweepRow:
    t0 = time.perf_counter()
    try:
        cert = bisect_alpha(
            cell.plant,
            cell.nu,
            cell.m,
            cell.L,
            cell.delta,
            alpha_lo=cell.alpha_lo,
            alpha_hi=cell.alpha_hi,
            tol=cell.tol,
        )
        alpha_star = cert.alpha_star
        status = "certified" if cert.feasible else "infeasible"
    except Exception as exc:
        alpha_star, status = INFEASIBLE_SENTINEL, f"error: {exc}"
    return SweepRow(
        k_d=cell.k_d,
        delta=cell.delta,
        m=cell.m,
        L=cell.L,
        nu=cell.nu,
        alpha_star=alpha_star,
        status=status,
        solve_ms=(time.perf_counter() - t0) * 1e3,
    )


def sweep(cells, workers: int = 1) -> list[SweepRow]:
    """Run the cells (embarrassingly parallel); rows sorted by (k_d, delta, L).

    Individual cell failures land in the status column and never abort the
    sweep.
    """
    cells = list(cells)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    rows.sort(key=lambda r: (r.k_d, r.delta, r.L, r.nu))
    return rows


def write_sweep_csv(rows, path) -> None:
    """CSV with 12-significant-digit rates; -1 sentinel marks infeasible rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k_d", "delta", "m", "L", "nu", "alpha_star", "status", "solve_ms"])
        for r in rows:
            writer.writerow([
                format(r.k_d, ".12g"),
                format(r.delta, ".12g"),
                format(r.m, ".12g"),
                format(r.L, ".12g"),
                r.nu,
                format(r.alpha_star, ".12g"),
                r.status,
                format(r.solve_ms, ".3f"),
            ])
