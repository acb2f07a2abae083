"""Classic fixed-step fourth-order Runge-Kutta integration.

Single integrator for the whole package: closed-loop simulations and the
multiplier-state propagation in the IQC residual both go through here.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def rk4_path(f: Callable[[float, np.ndarray], np.ndarray], x0: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Integrate ``x' = f(t, x)`` over the uniform grid ``ts``.

    Returns the (len(ts), n) state path.  Integration stops early on
    non-finite states; remaining rows are NaN.
    """
    ts = np.asarray(ts, dtype=float)
    x = np.array(x0, dtype=float)
    out = np.full((ts.size, x.size), np.nan)
    out[0] = x
    for k in range(ts.size - 1):
        h = ts[k + 1] - ts[k]
        t = ts[k]
        k1 = f(t, x)
        k2 = f(t + h / 2, x + (h / 2) * k1)
        k3 = f(t + h / 2, x + (h / 2) * k2)
        k4 = f(t + h, x + h * k3)
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            break
        out[k + 1] = x
    return out


def lti_filter_path(A: np.ndarray, B: np.ndarray, w: np.ndarray, dt: float) -> np.ndarray:
    """State path of ``x' = A x + B w(t)`` from rest, for sampled input ``w``.

    ``w`` has one row per sample; stage inputs at half steps use the endpoint
    average (consistent with second-order input reconstruction).
    """
    w = np.asarray(w, dtype=float)
    n = A.shape[0]
    steps = w.shape[0]
    out = np.zeros((steps, n))
    if n == 0:
        return out
    x = np.zeros(n)
    for k in range(steps - 1):
        wk, wk1 = w[k], w[k + 1]
        wmid = 0.5 * (wk + wk1)
        k1 = A @ x + B @ wk
        k2 = A @ (x + (dt / 2) * k1) + B @ wmid
        k3 = A @ (x + (dt / 2) * k2) + B @ wmid
        k4 = A @ (x + dt * k3) + B @ wk1
        x = x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = x
    return out
