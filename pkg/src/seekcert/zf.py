"""Zames-Falb multiplier realizations and the constraints on their variables.

The multiplier bank has order nu, all poles at beta = -1, and targets the
class of m-strongly-convex gradients with L-Lipschitz continuity.  The
exponential weight alpha shifts the bank poles by -2*alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .integrate import lti_filter_path
from .statespace import StateSpace, as_matrix

# Pole location of the multiplier bank.  Fixed: the closed forms used for the
# scalar constraint row depend on it.
BETA = -1.0


def bank_state_matrix(nu: int, beta: float = BETA) -> np.ndarray:
    """Lower-bidiagonal A with beta on the diagonal, ones below."""
    A = beta * np.eye(nu)
    for i in range(1, nu):
        A[i, i - 1] = 1.0
    return A


def bank_input_column(nu: int) -> np.ndarray:
    b = np.zeros((nu, 1))
    b[0, 0] = 1.0
    return b


def _validate_sector(m: float, L: float) -> None:
    if not (0 < m <= L):
        raise ValueError(f"sector bounds must satisfy 0 < m <= L, got ({m}, {L})")


@dataclass(frozen=True)
class ZfMultiplier:
    """Fixed multiplier realization for given (nu, alpha, m, L, d).

    States 2*nu*d, inputs 2*d (stacked [y; u] deviations), outputs
    2*(nu+1)*d.
    """

    nu: int
    alpha: float
    m: float
    L: float
    d: int
    sys: StateSpace

    @property
    def n_states(self) -> int:
        return 2 * self.nu * self.d

    @property
    def n_outputs(self) -> int:
        return 2 * (self.nu + 1) * self.d


def build_multiplier(nu: int, alpha: float, m: float, L: float, d: int = 1) -> ZfMultiplier:
    """Assemble the two-bank multiplier realization.

    The two pole banks are shifted by -2*alpha; the input blocks mix the
    sector combinations (-m y + u) and (L y - u); the outputs interleave
    those static combinations with the bank states.
    """
    if nu < 1:
        raise ValueError("multiplier order nu must be >= 1")
    if alpha < 0:
        raise ValueError("exponential rate alpha must be >= 0")
    if d < 1:
        raise ValueError("spatial dimension d must be >= 1")
    _validate_sector(m, L)
    An = bank_state_matrix(nu)
    Aa = An - 2.0 * alpha * np.eye(nu)
    Bn = bank_input_column(nu)
    Z = np.zeros((nu, nu))
    z1 = np.zeros((1, nu))
    A = np.block([[Aa, Z], [Z, Aa]])
    B = np.block([[-m * Bn, Bn], [L * Bn, -Bn]])
    C = np.block([[z1, z1], [np.eye(nu), Z], [z1, z1], [Z, np.eye(nu)]])
    D = np.block([[-m, 1.0], [np.zeros((nu, 2))], [L, -1.0], [np.zeros((nu, 2))]])
    Id = np.eye(d)
    sys = StateSpace(np.kron(A, Id), np.kron(B, Id), np.kron(C, Id), np.kron(D, Id))
    return ZfMultiplier(nu=nu, alpha=float(alpha), m=float(m), L=float(L), d=d, sys=sys)


def filter_bank_realization(nu: int, beta: float = BETA) -> StateSpace:
    """Realization of the transfer vector [1, s/(s-beta)^(nu-1), ...,
    s^(nu-1)/(s-beta)^(nu-1)].

    Controllable canonical form with nu-1 states; the constant first entry
    and the biproper last entry are realized through the feedthrough.
    """
    n = nu - 1
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), np.ones((1, 1)))
    den = np.poly([beta] * n)  # monic, highest power first
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[1:][::-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = np.zeros((nu, n))
    D = np.zeros((nu, 1))
    D[0, 0] = 1.0
    for k in range(1, nu):
        if k < n:
            C[k, k] = 1.0
        else:
            D[k, 0] = 1.0
            C[k, :] = -den[1:][::-1]
    return StateSpace(A, B, C, D)


@dataclass(frozen=True)
class ZfVariableSet:
    """Symbolic description of the admissible multiplier weights.

    Variables: scalar H, nu-vectors P1 and P3, and (for nu >= 2) symmetric
    (nu-1) x (nu-1) certificates X1 and X3 for the two positivity constraints.
    The constraints are the scalar row ``H + (P1 + P3) @ a_inv_b >= 0`` and,
    per bank, a strict LMI over the filter-bank realization (degenerating to
    entrywise positivity of P1 and P3 when nu = 1).
    """

    nu: int
    beta: float
    a_inv_b: np.ndarray
    bank: StateSpace
    row_weights: np.ndarray

    @property
    def x_dim(self) -> int:
        return self.nu - 1

    def p_matrix(self, H: float, P1, P3) -> np.ndarray:
        """Assemble the structured weight matrix of size 2*(nu+1)."""
        nu = self.nu
        P1 = np.atleast_1d(np.asarray(P1, dtype=float))
        P3 = np.atleast_1d(np.asarray(P3, dtype=float))
        if P1.shape != (nu,) or P3.shape != (nu,):
            raise ValueError(f"P1, P3 must have shape ({nu},)")
        n = 2 * (nu + 1)
        P = np.zeros((n, n))
        P[0, nu + 1] = float(H)
        P[0, nu + 2:] = -P3
        P[1:nu + 1, nu + 1] = -P1
        return P + P.T

    def l1_margin(self, H: float, P1, P3) -> float:
        """Value of the scalar constraint row (nonnegative when admissible)."""
        return float(H + (np.asarray(P1) + np.asarray(P3)) @ self.a_inv_b)

    def positivity_block(self, X: np.ndarray, P_i: np.ndarray) -> np.ndarray:
        """LHS of the strict positivity LMI for one bank (nu >= 2 only).

        ``X`` is the symmetric certificate, ``P_i`` the bank weight vector;
        the block must be positive definite.
        """
        if self.nu == 1:
            raise ValueError("nu = 1 has no matrix positivity constraint")
        Af, Bf, Cf, Df = self.bank.A, self.bank.B, self.bank.C, self.bank.D
        R = self.row_weights
        n = Af.shape[0]
        T1 = np.hstack([np.eye(n), np.zeros((n, 1))])
        T2 = np.hstack([Af, Bf])
        T3 = np.hstack([R @ Cf, R @ Df])
        X = as_matrix(X, rows=n, cols=n, name="X")
        return T1.T @ X @ T2 + T2.T @ X @ T1 + T3.T @ np.diag(np.asarray(P_i, dtype=float)) @ T3

    def contains(self, H: float, P1, P3, X1=None, X3=None, tol: float = 0.0) -> bool:
        """Membership test for a concrete sample (with certificates for nu >= 2)."""
        if self.l1_margin(H, P1, P3) < -tol:
            return False
        if self.nu == 1:
            return bool(np.all(np.asarray(P1) > tol) and np.all(np.asarray(P3) > tol))
        for X, Pi in ((X1, P1), (X3, P3)):
            if X is None:
                return False
            block = self.positivity_block(X, Pi)
            if np.min(np.linalg.eigvalsh(0.5 * (block + block.T))) <= tol:
                return False
        return True


def build_variable_constraints(nu: int, beta: float = BETA) -> ZfVariableSet:
    """Closed forms and realizations behind the multiplier variable set."""
    if nu < 1:
        raise ValueError("multiplier order nu must be >= 1")
    if beta != BETA:
        raise ValueError("bank pole is fixed at -1")
    a_inv_b = np.linalg.solve(bank_state_matrix(nu, beta), bank_input_column(nu)).ravel()
    bank = filter_bank_realization(nu, beta)
    row_weights = np.diag([1.0 / np.sqrt(factorial(k)) for k in range(nu)])
    return ZfVariableSet(nu=nu, beta=beta, a_inv_b=a_inv_b, bank=bank, row_weights=row_weights)


def iqc_residual(
    mult: ZfMultiplier,
    P: np.ndarray,
    y_tilde: np.ndarray,
    u_tilde: np.ndarray,
    dt: float,
    T: float | None = None,
) -> float:
    """Trapezoidal estimate of the exponentially weighted multiplier integral.

    The caller provides uniformly sampled deviation signals with
    ``u_tilde(t) = grad f(y_tilde(t) + y*)`` for some admissible f; the exact
    integral is then nonnegative for every admissible weight matrix P.

    Parameters
    ----------
    P : (2*(nu+1), 2*(nu+1)) weight matrix from the admissible set.
    y_tilde, u_tilde : (n_samples, d) sampled signals on the same grid.
    dt : sample spacing.
    T : optional horizon; must match ``(n_samples - 1) * dt`` when given.
    """
    d = mult.d
    y = np.atleast_2d(np.asarray(y_tilde, dtype=float))
    u = np.atleast_2d(np.asarray(u_tilde, dtype=float))
    if y.shape[0] == 1 and d == 1 and y.shape[1] > 1:
        y, u = y.T, u.T
    if y.shape != u.shape or y.shape[1] != d:
        raise ValueError("signals must share one uniform grid and match the multiplier dimension")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = y.shape[0]
    if T is not None and abs(T - (n - 1) * dt) > 1e-9 * max(1.0, abs(T)):
        raise ValueError("horizon T inconsistent with the sample grid")
    P = as_matrix(P, rows=2 * (mult.nu + 1), cols=2 * (mult.nu + 1), name="P")
    w = np.hstack([y, u])
    xs = lti_filter_path(mult.sys.A, mult.sys.B, w, dt)
    zs = xs @ mult.sys.C.T + w @ mult.sys.D.T
    Pd = np.kron(P, np.eye(d))
    ts = dt * np.arange(n)
    integrand = np.exp(2.0 * mult.alpha * ts) * np.einsum("ki,ij,kj->k", zs, Pd, zs)
    return float(np.trapezoid(integrand, dx=dt))
