"""Scalar fields, interaction graphs, and the composite team objective.

The team objective couples a formation-keeping quadratic over the graph with
the ambient field sampled by the informed agents.  Its sector bounds follow
from the extreme eigenvalues of the two grounded Laplacians, and its
minimizer is computed here by a gradient-descent oracle used to validate
geometry properties and to anchor simulations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

EIG_RTOL = 1e-9
ORACLE_MAX_ITERS = 10**6


# -- scalar fields -------------------------------------------------------------

class ScalarField:
    """Field over R^d with declared strong-convexity/Lipschitz sector."""

    kind = "custom"

    def __init__(self, d: int, m: float, L: float, y_opt=None):
        if not (0 < m <= L):
            raise ValueError(f"field sector must satisfy 0 < m <= L, got ({m}, {L})")
        if d < 1:
            raise ValueError("field dimension must be >= 1")
        self.d = int(d)
        self.m = float(m)
        self.L = float(L)
        self.y_opt = None if y_opt is None else np.asarray(y_opt, dtype=float).reshape(d)

    def value(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_many(self, ys: np.ndarray) -> np.ndarray:
        """Gradients at a (k, d) batch of points; subclasses may vectorize."""
        ys = np.atleast_2d(np.asarray(ys, dtype=float))
        return np.stack([self.grad(y) for y in ys])

    def check_sector_sampled(self, rng=None, n_pairs: int = 200, box: float = 10.0) -> bool:
        """Sampled secant condition on random point pairs."""
        rng = np.random.default_rng(rng)
        for _ in range(n_pairs):
            y1 = rng.uniform(-box, box, self.d)
            y2 = rng.uniform(-box, box, self.d)
            dy = y1 - y2
            nn = float(dy @ dy)
            if nn < 1e-20:
                continue
            inner = float((self.grad(y1) - self.grad(y2)) @ dy)
            if inner < self.m * nn - 1e-7 * max(1.0, nn) or inner > self.L * nn + 1e-7 * max(1.0, nn):
                return False
        return True


class QuadraticField(ScalarField):
    """psi(y) = y^T Q y + b^T y + c with Hessian 2Q."""

    kind = "quadratic"

    def __init__(self, Q, b=None, c: float = 0.0):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        d = Q.shape[0]
        if Q.shape != (d, d) or not np.allclose(Q, Q.T):
            raise ValueError("Q must be square symmetric")
        b = np.zeros(d) if b is None else np.asarray(b, dtype=float).reshape(d)
        eigs = np.linalg.eigvalsh(2.0 * Q)
        if eigs[0] <= 0:
            raise ValueError("Q must be positive definite")
        y_opt = np.linalg.solve(2.0 * Q, -b)
        super().__init__(d, float(eigs[0]), float(eigs[-1]), y_opt)
        self.Q = Q
        self.b = b
        self.c = float(c)

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return float(y @ self.Q @ y + self.b @ y + self.c)

    def grad(self, y):
        y = np.asarray(y, dtype=float)
        return 2.0 * self.Q @ y + self.b

    def grad_many(self, ys):
        ys = np.atleast_2d(np.asarray(ys, dtype=float))
        return 2.0 * ys @ self.Q + self.b

    @classmethod
    def isotropic(cls, curvature: float, center, d: int | None = None) -> "QuadraticField":
        """psi(y) = (curvature/2) * ||y - center||^2."""
        center = np.atleast_1d(np.asarray(center, dtype=float))
        d = center.size if d is None else d
        Q = 0.5 * curvature * np.eye(d)
        b = -curvature * center
        c = 0.5 * curvature * float(center @ center)
        return cls(Q, b, c)


class RadialField(ScalarField):
    """Radially symmetric field around a center, from a 1-D profile.

    The profile is supplied through ``slope_over_s(s) = psi_r'(s)/s`` so the
    gradient ``slope_over_s(||y-c||) * (y-c)`` stays smooth through the center.
    """

    kind = "radial"

    def __init__(self, d: int, m: float, L: float, center, value_fn: Callable, slope_over_s: Callable):
        center = np.asarray(center, dtype=float).reshape(d)
        super().__init__(d, m, L, center)
        self.center = center
        self._value_fn = value_fn
        self._slope_over_s = slope_over_s

    def value(self, y):
        s = float(np.linalg.norm(np.asarray(y, dtype=float) - self.center))
        return float(self._value_fn(s))

    def grad(self, y):
        dy = np.asarray(y, dtype=float) - self.center
        s = float(np.linalg.norm(dy))
        return self._slope_over_s(s) * dy

    def grad_many(self, ys):
        dys = np.atleast_2d(np.asarray(ys, dtype=float)) - self.center
        s = np.linalg.norm(dys, axis=1)
        return np.asarray(self._slope_over_s(s))[:, None] * dys


def smoothed_huber_field(m: float, L: float, center) -> RadialField:
    """Radial profile m/2 s^2 + (L-m)(sqrt(1+s^2)-1), sector (m, L]."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    d = center.size

    def value_fn(s):
        return 0.5 * m * s * s + (L - m) * (np.sqrt(1.0 + s * s) - 1.0)

    def slope_over_s(s):
        return m + (L - m) / np.sqrt(1.0 + s * s)

    return RadialField(d, m, L, center, value_fn, slope_over_s)


class CustomField(ScalarField):
    kind = "custom"

    def __init__(self, d, m, L, value_fn, grad_fn, y_opt=None):
        super().__init__(d, m, L, y_opt)
        self._value_fn = value_fn
        self._grad_fn = grad_fn

    def value(self, y):
        return float(self._value_fn(np.asarray(y, dtype=float)))

    def grad(self, y):
        return np.asarray(self._grad_fn(np.asarray(y, dtype=float)), dtype=float)


# -- interaction graph ---------------------------------------------------------

@dataclass(frozen=True)
class FieldGraph:
    """Undirected interaction graph with informed agents and formation offsets."""

    n_agents: int
    edges: tuple[tuple[int, int], ...]
    informed: tuple[int, ...]
    r: np.ndarray
    field: ScalarField

    def __post_init__(self):
        N = self.n_agents
        if N < 1:
            raise ValueError("need at least one agent")
        edges = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError("self-loops are not allowed")
            if not (0 <= i < N and 0 <= j < N):
                raise ValueError(f"edge ({i},{j}) out of range")
            edges.append((min(i, j), max(i, j)))
        informed = tuple(sorted(set(int(i) for i in self.informed)))
        if not informed:
            raise ValueError("informed set must be non-empty")
        if informed[0] < 0 or informed[-1] >= N:
            raise ValueError("informed agent index out of range")
        r = np.asarray(self.r, dtype=float).reshape(-1)
        if r.size != N * self.field.d:
            raise ValueError(f"formation reference must have length {N * self.field.d}")
        r.setflags(write=False)
        object.__setattr__(self, "edges", tuple(sorted(set(edges))))
        object.__setattr__(self, "informed", informed)
        object.__setattr__(self, "r", r)

    @property
    def d(self) -> int:
        return self.field.d


def laplacian(fg: FieldGraph) -> np.ndarray:
    """Combinatorial graph Laplacian (symmetric, zero row sums, PSD)."""
    N = fg.n_agents
    Lap = np.zeros((N, N))
    for i, j in fg.edges:
        Lap[i, i] += 1.0
        Lap[j, j] += 1.0
        Lap[i, j] -= 1.0
        Lap[j, i] -= 1.0
    return Lap


def informed_indicator(fg: FieldGraph) -> np.ndarray:
    E = np.zeros((fg.n_agents, fg.n_agents))
    for i in fg.informed:
        E[i, i] = 1.0
    return E


def grounded_laplacians(fg: FieldGraph) -> tuple[np.ndarray, np.ndarray]:
    """Laplacian grounded at the informed agents by the field sector bounds."""
    Lap = laplacian(fg)
    E = informed_indicator(fg)
    return Lap + fg.field.m * E, Lap + fg.field.L * E


def certify_sector(fg: FieldGraph, m: float, L: float) -> bool:
    """True iff the grounded spectra certify the team objective in (m, L)."""
    if not (0 < m <= L):
        raise ValueError("queried sector must satisfy 0 < m <= L")
    Ls, Lb = grounded_laplacians(fg)
    lam_min = float(np.linalg.eigvalsh(Ls)[0])
    lam_max = float(np.linalg.eigvalsh(Lb)[-1])
    tol = EIG_RTOL * max(1.0, abs(lam_max))
    return lam_min >= m - tol and lam_max <= L + tol


def check_path_to_informed(fg: FieldGraph) -> bool:
    """Breadth-first reachability of every agent from the informed set."""
    adj: list[list[int]] = [[] for _ in range(fg.n_agents)]
    for i, j in fg.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = set(fg.informed)
    queue = deque(fg.informed)
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == fg.n_agents


def f_value(fg: FieldGraph, y: np.ndarray) -> float:
    """Team objective: formation quadratic plus informed field samples."""
    y = np.asarray(y, dtype=float).reshape(-1)
    d = fg.d
    dy = y - fg.r
    Lap = laplacian(fg)
    val = 0.5 * float(dy @ np.kron(Lap, np.eye(d)) @ dy)
    for i in fg.informed:
        val += fg.field.value(y[i * d:(i + 1) * d])
    return val


def grad_f(fg: FieldGraph, y: np.ndarray) -> np.ndarray:
    """Gradient of the team objective at stacked positions y."""
    y = np.asarray(y, dtype=float).reshape(-1)
    d = fg.d
    Lap = laplacian(fg)
    g = np.kron(Lap, np.eye(d)) @ (y - fg.r)
    for i in fg.informed:
        g[i * d:(i + 1) * d] += fg.field.grad(y[i * d:(i + 1) * d])
    return g


def minimize_f(fg: FieldGraph, y0: np.ndarray | None = None, tol_factor: float = 1e-9) -> np.ndarray:
    """Reference minimizer oracle: backtracking gradient descent.

    Requires informed reachability (which makes the objective strongly
    convex).  Stops when the gradient norm falls below
    ``tol_factor * (1 + initial gradient norm)``.
    """
    if not check_path_to_informed(fg):
        raise ValueError("graph violates informed reachability; objective may be unbounded")
    d = fg.d
    y = np.zeros(fg.n_agents * d) if y0 is None else np.asarray(y0, dtype=float).reshape(-1).copy()
    _, Lb = grounded_laplacians(fg)
    step0 = 1.0 / float(np.linalg.eigvalsh(Lb)[-1])
    g = grad_f(fg, y)
    tol = tol_factor * (1.0 + float(np.linalg.norm(g)))
    for _ in range(ORACLE_MAX_ITERS):
        gn = float(np.linalg.norm(g))
        if gn <= tol:
            return y
        fy = f_value(fg, y)
        # absolute slack: near the optimum the true decrease drops below the
        # floating-point resolution of f, where the full 1/L step is safe
        slack = 16.0 * np.finfo(float).eps * max(1.0, abs(fy))
        step = step0
        while step > 1e-18:
            y_new = y - step * g
            if f_value(fg, y_new) <= fy - 1e-4 * step * gn * gn + slack:
                break
            step *= 0.5
        else:
            raise RuntimeError("line search failed; sector data is inconsistent")
        y = y_new
        g = grad_f(fg, y)
    raise RuntimeError("minimizer oracle failed to converge within the iteration cap")


@dataclass(frozen=True)
class GeometryReport:
    """Minimizer geometry checks; None marks a property that does not apply."""

    halfspace_ok: bool
    center_of_mass_ok: bool | None
    hull_ok: bool | None
    details: dict = dc_field(default_factory=dict)


def _point_in_hull_1d(point: float, xs: np.ndarray, tol: float) -> bool:
    return min(xs) - tol <= point <= max(xs) + tol


def _point_in_hull_2d(point: np.ndarray, pts: np.ndarray, tol: float) -> bool:
    """Exact 2-D hull membership via orientation predicates (monotone chain)."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    if len(pts) == 1:
        return bool(np.linalg.norm(point - pts[0]) <= tol)
    spans = np.array([cross(pts[0], pts[-1], p) for p in pts[1:-1]]) if len(pts) > 2 else np.zeros(0)
    if len(pts) == 2 or np.all(np.abs(spans) <= tol):
        # collinear set: distance to the spanning segment
        a, b = pts[0], pts[-1]
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0 else float(np.clip((point - a) @ ab / denom, 0.0, 1.0))
        return bool(np.linalg.norm(point - (a + t * ab)) <= np.sqrt(tol))
    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if cross(a, b, point) < -tol:
            return False
    return True


def check_minimizer_geometry(fg: FieldGraph, y_star: np.ndarray, tol: float = 1e-6) -> GeometryReport:
    """Verify the minimizer geometry against the field's known optimum.

    (a) every informed position puts the optimum in its gradient halfspace;
    (b) quadratic fields: the informed center of mass sits at the optimum;
    (c) radial fields with d <= 2: the optimum lies in the informed hull
        (higher d reported as unchecked).
    """
    if fg.field.y_opt is None:
        raise ValueError("geometry checks need a field with a known optimum")
    d = fg.d
    y_star = np.asarray(y_star, dtype=float).reshape(-1)
    y_opt = fg.field.y_opt
    z = {i: y_star[i * d:(i + 1) * d] for i in fg.informed}

    halfspace_ok = all(float(fg.field.grad(z[i]) @ (z[i] - y_opt)) >= -tol for i in fg.informed)

    center_of_mass_ok: bool | None = None
    if fg.field.kind == "quadratic":
        com = np.mean([z[i] for i in fg.informed], axis=0)
        center_of_mass_ok = bool(np.linalg.norm(com - y_opt) <= tol)

    hull_ok: bool | None = None
    if fg.field.kind == "radial":
        if d == 1:
            hull_ok = _point_in_hull_1d(float(y_opt[0]), np.array([z[i][0] for i in fg.informed]), tol)
        elif d == 2:
            hull_ok = _point_in_hull_2d(y_opt, np.array([z[i] for i in fg.informed]), 1e-12)

    return GeometryReport(
        halfspace_ok=halfspace_ok,
        center_of_mass_ok=center_of_mass_ok,
        hull_ok=hull_ok,
        details={"informed_positions": z, "y_opt": y_opt},
    )


# -- scenario file -------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_scenario(fg: FieldGraph, path, extra_sections: dict[str, dict] | None = None) -> None:
    """Plain-text scenario file consumed by the simulation and CLI layers."""
    import configparser

    cp = configparser.ConfigParser()
    cp["graph"] = {
        "n_agents": str(fg.n_agents),
        "d": str(fg.d),
        "edges": " ".join(f"{i}-{j}" for i, j in fg.edges),
        "informed": " ".join(str(i) for i in fg.informed),
        "r": " ".join(_fmt(v) for v in fg.r),
    }
    fld = fg.field
    section = {"kind": fld.kind, "m": _fmt(fld.m), "L": _fmt(fld.L)}
    if isinstance(fld, QuadraticField):
        section["q_matrix"] = " ".join(_fmt(v) for v in fld.Q.ravel())
        section["b"] = " ".join(_fmt(v) for v in fld.b)
        section["c"] = _fmt(fld.c)
    elif isinstance(fld, RadialField):
        section["profile"] = "smoothed-huber"
        section["center"] = " ".join(_fmt(v) for v in fld.center)
    else:
        raise ValueError("only quadratic and built-in radial fields are file-serializable")
    cp["field"] = section
    for name, payload in (extra_sections or {}).items():
        cp[name] = {k: str(v) for k, v in payload.items()}
    with open(path, "w") as fh:
        cp.write(fh)


def load_scenario(path) -> tuple[FieldGraph, dict[str, dict]]:
    """Read a scenario file; returns the graph plus any extra sections."""
    import configparser

    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read or "graph" not in cp or "field" not in cp:
        raise ValueError(f"malformed scenario file: {path}")
    g = cp["graph"]
    n_agents = g.getint("n_agents")
    d = g.getint("d")
    edges = []
    for tok in g.get("edges", "").split():
        i, j = tok.split("-")
        edges.append((int(i), int(j)))
    informed = tuple(int(v) for v in g["informed"].split())
    r = np.array([float(v) for v in g["r"].split()]) if g.get("r", "").strip() else np.zeros(n_agents * d)
    f = cp["field"]
    kind = f["kind"]
    if kind == "quadratic":
        Q = np.array([float(v) for v in f["q_matrix"].split()]).reshape(d, d)
        b = np.array([float(v) for v in f["b"].split()])
        fld: ScalarField = QuadraticField(Q, b, float(f.get("c", "0")))
    elif kind == "radial":
        if f.get("profile", "smoothed-huber") != "smoothed-huber":
            raise ValueError("unknown radial profile")
        center = np.array([float(v) for v in f["center"].split()])
        fld = smoothed_huber_field(float(f["m"]), float(f["L"]), center)
    else:
        raise ValueError(f"unknown field kind {kind!r} in scenario file")
    fg = FieldGraph(n_agents=n_agents, edges=tuple(edges), informed=informed, r=r, field=fld)
    extras = {name: dict(cp[name]) for name in cp.sections() if name not in ("graph", "field")}
    return fg, extras
