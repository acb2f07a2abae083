"""Semidefinite feasibility: request/report structures and solver backends.

A request is a list of affine symmetric-matrix constraints in one flat real
decision vector, each demanded to clear a margin (``G(x) >= margin * I`` in
the semidefinite order), plus scalar affine inequalities.  Backends are
pluggable behind :class:`SdpBackend`.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class MatrixConstraint:
    """Affine constraint ``constant + sum_i x[var_idx[i]] * basis[i] >= margin * I``."""

    name: str
    constant: np.ndarray          # (n, n) symmetric
    var_idx: np.ndarray           # (k,) indices into the flat decision vector
    basis: np.ndarray             # (k, n, n) symmetric coefficient matrices
    margin: float = 0.0

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        G = self.constant + np.tensordot(x[self.var_idx], self.basis, axes=1)
        return 0.5 * (G + G.T)

    def violation(self, x: np.ndarray) -> float:
        """Margin shortfall (zero when satisfied)."""
        lam_min = float(np.min(np.linalg.eigvalsh(self.evaluate(x))))
        return max(0.0, self.margin - lam_min)


@dataclass(frozen=True)
class LinearConstraint:
    """Affine scalar constraint ``coeffs @ x + offset >= 0``."""

    name: str
    var_idx: np.ndarray
    coeffs: np.ndarray
    offset: float = 0.0

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.coeffs @ x[self.var_idx] + self.offset)

    def violation(self, x: np.ndarray) -> float:
        return max(0.0, -self.evaluate(x))


@dataclass(frozen=True)
class SdpRequest:
    n_vars: int
    matrix_constraints: tuple[MatrixConstraint, ...]
    linear_constraints: tuple[LinearConstraint, ...] = ()

    def max_violation(self, x: np.ndarray) -> float:
        """Worst margin shortfall over all constraints at the point x."""
        x = np.asarray(x, dtype=float)
        viol = 0.0
        for c in self.matrix_constraints:
            viol = max(viol, c.violation(x))
        for c in self.linear_constraints:
            viol = max(viol, c.violation(x))
        return viol

    @property
    def min_margin(self) -> float:
        margins = [c.margin for c in self.matrix_constraints if c.margin > 0]
        return min(margins) if margins else 0.0


@dataclass
class SdpReport:
    """Solve outcome; ``x`` is the decision vector when the solver found one."""

    status: str
    x: np.ndarray | None
    max_violation: float
    solver_name: str = ""
    solver_status: str = ""
    solve_ms: float = 0.0
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


class SdpBackend(Protocol):
    def solve(self, request: SdpRequest) -> SdpReport: ...


class CvxpyBackend:
    """cvxpy-based backend; tries the configured solvers in order.

    The returned status maps the raw solver claim; callers that need the
    near-boundary classification re-check the reported violation.
    """

    def __init__(self, solvers: tuple[str, ...] = ("CLARABEL", "SCS"), solver_opts: dict | None = None):
        self.solvers = solvers
        self.solver_opts = dict(solver_opts or {})

    def solve(self, request: SdpRequest) -> SdpReport:
        import cvxpy as cp

        t0 = time.perf_counter()
        # constraints with no variable dependence are decided numerically
        x0 = np.zeros(request.n_vars)
        fixed_matrix = [c for c in request.matrix_constraints if c.var_idx.size == 0]
        fixed_linear = [c for c in request.linear_constraints if c.var_idx.size == 0]
        for c in (*fixed_matrix, *fixed_linear):
            if c.violation(x0) > 0:
                return SdpReport(
                    status=INFEASIBLE,
                    x=None,
                    max_violation=np.inf,
                    solver_name="constant-check",
                    solver_status="constant constraint violated",
                    solve_ms=(time.perf_counter() - t0) * 1e3,
                    message=f"constraint {c.name} fails with no variables to adjust",
                )
        free_matrix = [c for c in request.matrix_constraints if c.var_idx.size]
        free_linear = [c for c in request.linear_constraints if c.var_idx.size]
        if not free_matrix and not free_linear:
            return SdpReport(
                status=FEASIBLE,
                x=x0,
                max_violation=request.max_violation(x0),
                solver_name="constant-check",
                solver_status="all constraints constant",
                solve_ms=(time.perf_counter() - t0) * 1e3,
            )

        x = cp.Variable(request.n_vars)
        constraints = []
        for c in free_matrix:
            n = c.dim
            flat = c.basis.reshape(c.basis.shape[0], n * n)  # row-major vec of each basis matrix
            expr = cp.reshape(x[c.var_idx] @ flat, (n, n), order="C") + c.constant
            sym = 0.5 * (expr + expr.T)
            constraints.append(sym >> c.margin * np.eye(n))
        for c in free_linear:
            constraints.append(c.coeffs @ x[c.var_idx] + c.offset >= 0)
        problem = cp.Problem(cp.Minimize(0), constraints)

        last_message = ""
        for solver in self.solvers:
            try:
                # inaccurate-solution warnings are moot: callers re-verify the
                # returned point against the request margins
                with warnings.catch_warnings():
                    warnings.filterwarnings("ignore", message="Solution may be inaccurate")
                    problem.solve(solver=solver, **self.solver_opts)
            except Exception as exc:  # solver-side failure; try the next one
                last_message = f"{solver}: {exc}"
                continue
            ms = (time.perf_counter() - t0) * 1e3
            if problem.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) and x.value is not None:
                xv = np.asarray(x.value, dtype=float)
                return SdpReport(
                    status=FEASIBLE,
                    x=xv,
                    max_violation=request.max_violation(xv),
                    solver_name=solver,
                    solver_status=problem.status,
                    solve_ms=ms,
                )
            if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
                return SdpReport(
                    status=INFEASIBLE,
                    x=None,
                    max_violation=np.inf,
                    solver_name=solver,
                    solver_status=problem.status,
                    solve_ms=ms,
                )
            last_message = f"{solver}: status {problem.status}"
        return SdpReport(
            status=NUMERICAL_FAILURE,
            x=None,
            max_violation=np.inf,
            solver_name="",
            solver_status="",
            solve_ms=(time.perf_counter() - t0) * 1e3,
            message=last_message,
        )


_DEFAULT_BACKEND: SdpBackend | None = None


def default_backend() -> SdpBackend:
    global _DEFAULT_BACKEND
    if _DEFAULT_BACKEND is None:
        _DEFAULT_BACKEND = CvxpyBackend()
    return _DEFAULT_BACKEND
