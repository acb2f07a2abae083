"""Gridded LPV state-space models and the source-seeking filter augmentation.

Models are dense and immutable.  A parameter-varying model is represented by
one (A, B, C, D) realization per grid point of a declared parameter box; an
LTI model is the special case of a zero-dimensional grid with a single point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# Scale-aware singular-value threshold for all rank/null-space decisions.
RANK_RTOL = 1e-9

# Default number of grid points per parameter axis (box vertices included).
DEFAULT_GRID_DENSITY = 11


def as_matrix(a, rows: int | None = None, cols: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce to a read-only 2-D float array; reject non-finite entries."""
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be at most 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if rows is not None and arr.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {arr.shape[1]}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    """One dense realization (A, B, C, D)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        n = A.shape[0]
        if A.shape[1] != n:
            raise ValueError(f"A must be square, got {A.shape}")
        B = as_matrix(self.B, rows=n, name="B")
        C = as_matrix(self.C, cols=n, name="C")
        D = as_matrix(self.D, rows=C.shape[0], cols=B.shape[1], name="D")
        for f, v in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, f, v)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class ParamGrid:
    """Finite grid inside a parameter box; the box vertices must be gridded.

    ``lower``/``upper`` give the per-axis bounds, ``points`` the ordered list
    of grid points.  An LTI model uses the zero-dimensional grid with the
    single empty point.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    points: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        points = tuple(tuple(float(v) for v in p) for p in self.points)
        if len(lower) != len(upper):
            raise ValueError("lower/upper bound dimensions differ")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ValueError("lower bound exceeds upper bound")
        if not points:
            raise ValueError("grid needs at least one point")
        dim = len(lower)
        for p in points:
            if len(p) != dim:
                raise ValueError("grid point dimension mismatch")
            if any(v < lo - 1e-12 or v > hi + 1e-12 for v, lo, hi in zip(p, lower, upper)):
                raise ValueError(f"grid point {p} outside the box")
        if len(set(points)) != len(points):
            raise ValueError("grid points must be distinct")
        for vertex in itertools.product(*zip(lower, upper)):
            if vertex not in set(points):
                raise ValueError(f"box vertex {vertex} missing from the grid")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "points", points)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @classmethod
    def lti(cls) -> "ParamGrid":
        return cls(lower=(), upper=(), points=((),))

    @classmethod
    def uniform(cls, lower, upper, density: int = DEFAULT_GRID_DENSITY) -> "ParamGrid":
        """Uniform per-axis gridding (cartesian product for multi-axis boxes)."""
        lower = tuple(float(v) for v in np.atleast_1d(lower))
        upper = tuple(float(v) for v in np.atleast_1d(upper))
        if density < 2 and any(lo != hi for lo, hi in zip(lower, upper)):
            raise ValueError("need at least 2 points per non-degenerate axis")
        axes = []
        for lo, hi in zip(lower, upper):
            axes.append([lo] if lo == hi else list(np.linspace(lo, hi, density)))
        points = tuple(tuple(p) for p in itertools.product(*axes))
        return cls(lower=lower, upper=upper, points=points)


@dataclass(frozen=True)
class ParamStateSpace:
    """A family of realizations over a parameter grid.

    ``d`` is the spatial dimension of the position output; vehicle models
    have ``n_y == d``.
    """

    grid: ParamGrid
    realizations: tuple[StateSpace, ...]
    d: int

    def __post_init__(self):
        realizations = tuple(self.realizations)
        if len(realizations) != len(self.grid.points):
            raise ValueError("one realization per grid point required")
        r0 = realizations[0]
        for r in realizations[1:]:
            if (r.n_x, r.n_u, r.n_y) != (r0.n_x, r0.n_u, r0.n_y):
                raise ValueError("realizations must share dimensions")
        if self.d < 1:
            raise ValueError("spatial dimension d must be >= 1")
        object.__setattr__(self, "realizations", realizations)

    @property
    def n_x(self) -> int:
        return self.realizations[0].n_x

    @property
    def n_u(self) -> int:
        return self.realizations[0].n_u

    @property
    def n_y(self) -> int:
        return self.realizations[0].n_y

    @property
    def is_lti(self) -> bool:
        return len(self.realizations) == 1

    @classmethod
    def lti(cls, A, B, C, D, d: int) -> "ParamStateSpace":
        return cls(grid=ParamGrid.lti(), realizations=(StateSpace(A, B, C, D),), d=d)


@dataclass(frozen=True)
class StateLayout:
    """Index map of the augmented state [x; q; p] (recorded, never re-derived)."""

    x: slice
    q: slice
    p: slice


@dataclass(frozen=True)
class AugmentedPlant:
    """Vehicle dynamics augmented with the second-order reference filter."""

    base: ParamStateSpace
    k_p: float
    k_d: float
    aug: ParamStateSpace
    layout: StateLayout

    @property
    def d(self) -> int:
        return self.aug.d

    @property
    def n_states(self) -> int:
        return self.aug.n_x


def augment_with_filter(base: ParamStateSpace, k_p: float, k_d: float) -> AugmentedPlant:
    """Augment a tracking closed loop with the reference filter
    ``q' = p, p' = -k_d p - k_p u`` and inputs [q; p] fed to the base.

    The base must take stacked reference inputs [q; p] (``n_u == 2 d``) and
    output the position (``n_y == d``).  Base feedthrough, if present, lands
    in the output row next to C.
    """
    if k_p <= 0 or k_d <= 0:
        raise ValueError("filter gains k_p, k_d must be positive")
    d = base.d
    if base.n_y != d:
        raise ValueError(f"base must output position only (n_y={base.n_y}, d={d})")
    if base.n_u != 2 * d:
        raise ValueError(f"base must take inputs [q; p] (n_u={base.n_u}, expected {2 * d})")
    n = base.n_x
    Id = np.eye(d)
    realizations = []
    for r in base.realizations:
        Bq, Bp = r.B[:, :d], r.B[:, d:]
        Dq, Dp = r.D[:, :d], r.D[:, d:]
        A_G = np.block([
            [r.A, Bq, Bp],
            [np.zeros((d, n)), np.zeros((d, d)), Id],
            [np.zeros((d, n)), np.zeros((d, d)), -k_d * Id],
        ])
        B_G = np.vstack([np.zeros((n, d)), np.zeros((d, d)), -k_p * Id])
        C_G = np.hstack([r.C, Dq, Dp])
        realizations.append(StateSpace(A_G, B_G, C_G, np.zeros((d, d))))
    aug = ParamStateSpace(grid=base.grid, realizations=tuple(realizations), d=d)
    layout = StateLayout(x=slice(0, n), q=slice(n, n + d), p=slice(n + d, n + 2 * d))
    return AugmentedPlant(base=base, k_p=float(k_p), k_d=float(k_d), aug=aug, layout=layout)


def _null_space(mat: np.ndarray) -> np.ndarray:
    """Orthonormal null-space basis with scale-aware threshold."""
    if mat.size == 0:
        return np.eye(mat.shape[1])
    u, s, vt = np.linalg.svd(mat)
    tol = RANK_RTOL * (s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    return vt[rank:].T


@dataclass(frozen=True)
class EquilibriumCheck:
    """Result of the equilibrium-family test; ``witness`` maps target outputs
    to equilibrium states (columns are the states for unit target outputs)."""

    ok: bool
    witness: np.ndarray | None


def check_equilibrium_family(plant: AugmentedPlant) -> EquilibriumCheck:
    """Check that every target output admits one equilibrium state valid at
    all grid points: A_G(rho) eta = 0 and C_G(rho) eta = y* simultaneously.

    Computed as the common null space of the stacked A_G blocks, restricted
    to states whose output is grid-independent, and then requiring the output
    map on that subspace to reach all of R^d.
    """
    aug = plant.aug
    d = aug.d
    blocks = [r.A for r in aug.realizations]
    C0 = aug.realizations[0].C
    blocks += [r.C - C0 for r in aug.realizations[1:]]
    basis = _null_space(np.vstack(blocks))
    if basis.shape[1] == 0:
        return EquilibriumCheck(ok=False, witness=None)
    out_map = C0 @ basis
    s = np.linalg.svd(out_map, compute_uv=False)
    scale = max(s[0] if s.size else 0.0, 1.0)
    if int(np.sum(s > RANK_RTOL * scale)) < d:
        return EquilibriumCheck(ok=False, witness=None)
    witness = basis @ np.linalg.pinv(out_map)
    witness.setflags(write=False)
    return EquilibriumCheck(ok=True, witness=witness)


def equilibrium_state(plant: AugmentedPlant, y_target: np.ndarray) -> np.ndarray:
    """Equilibrium state for a target output, via the equilibrium witness."""
    check = check_equilibrium_family(plant)
    if not check.ok:
        raise ValueError("plant admits no equilibrium family")
    y = np.atleast_1d(np.asarray(y_target, dtype=float))
    if y.shape != (plant.d,):
        raise ValueError(f"target output must have shape ({plant.d},)")
    return check.witness @ y


def stack_agents(plant: AugmentedPlant, n_agents: int, grid_assignment) -> ParamStateSpace:
    """Block-diagonal model of ``n_agents`` copies at the assigned grid points.

    Desk-scale validation helper: the result is a single-point model whose
    parameter is the concatenation of the assigned points and whose spatial
    dimension is ``n_agents * d``.
    """
    if n_agents < 1:
        raise ValueError("need at least one agent")
    assignment = list(grid_assignment)
    if len(assignment) != n_agents:
        raise ValueError("one grid point per agent required")
    n_points = len(plant.aug.grid.points)
    for idx in assignment:
        if not (0 <= int(idx) < n_points):
            raise ValueError(f"grid point index {idx} out of range")
    reals = [plant.aug.realizations[int(idx)] for idx in assignment]
    from scipy.linalg import block_diag

    stacked = StateSpace(
        block_diag(*[r.A for r in reals]),
        block_diag(*[r.B for r in reals]),
        block_diag(*[r.C for r in reals]),
        block_diag(*[r.D for r in reals]),
    )
    point = tuple(v for idx in assignment for v in plant.aug.grid.points[int(idx)])
    grid = ParamGrid(lower=point, upper=point, points=(point,))
    return ParamStateSpace(grid=grid, realizations=(stacked,), d=n_agents * plant.aug.d)


# -- built-in vehicle models -------------------------------------------------

def double_integrator_plant(k_p: float = 1.0, k_d: float = 9.0, d: int = 1) -> AugmentedPlant:
    """Ideal vehicle (output tracks q exactly) behind the reference filter.

    The augmented model is the pure double integrator
    ``q' = p, p' = -k_d p - k_p u, y = q`` with 2d states.
    """
    Id = np.eye(d)
    base = ParamStateSpace.lti(
        A=np.zeros((0, 0)),
        B=np.zeros((0, 2 * d)),
        C=np.zeros((d, 0)),
        D=np.hstack([Id, np.zeros((d, d))]),
        d=d,
    )
    return augment_with_filter(base, k_p, k_d)


def friction_vehicle_base(
    m_v: float = 1.0,
    b_v: float = 1.0,
    k_x: float = 4.0,
    k_v: float = 4.0,
    rho_max: float = 5.0,
    density: int = DEFAULT_GRID_DENSITY,
) -> ParamStateSpace:
    """Velocity-scheduled closed loop of the nonlinear friction vehicle.

    Vehicle ``m_v x'' + b_v |x'| x' = u_F`` under the proportional tracking
    law ``u_F = m_v (k_x (q - x) + k_v (p - v))``, gridded over the
    scheduling range rho = |v| in [0, rho_max].  Affine in rho, so linear
    interpolation between grid points is exact.
    """
    if min(m_v, b_v, k_x, k_v) <= 0:
        raise ValueError("vehicle parameters must be positive")
    grid = ParamGrid.uniform([0.0], [rho_max], density)
    realizations = []
    for (rho,) in grid.points:
        A = np.array([[0.0, 1.0], [-k_x, -(b_v / m_v) * rho - k_v]])
        B = np.array([[0.0, 0.0], [k_x, k_v]])
        C = np.array([[1.0, 0.0]])
        realizations.append(StateSpace(A, B, C, np.zeros((1, 2))))
    return ParamStateSpace(grid=grid, realizations=tuple(realizations), d=1)


# -- model exchange format ---------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_matrix(mat: np.ndarray, path) -> None:
    """Single-matrix companion of the model format (test replay and such)."""
    mat = as_matrix(mat, name="matrix")
    with open(path, "w") as fh:
        fh.write(f"seekcert-matrix 1\nrows {mat.shape[0]} cols {mat.shape[1]}\n")
        fh.write("entries " + " ".join(_fmt(v) for v in mat.ravel(order="C")) + "\n")


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    if rows[0][:2] != ["seekcert-matrix", "1"]:
        raise ValueError("not a seekcert matrix file")
    r, c = int(rows[1][1]), int(rows[1][3])
    vals = np.array([float(v) for v in rows[2][1:]])
    if vals.size != r * c:
        raise ValueError("matrix entry count mismatch")
    return vals.reshape(r, c)


def save_model(model: ParamStateSpace, path) -> None:
    """Write the plain-text model file (17 significant digits round-trip)."""
    lines = ["seekcert-model 1"]
    lines.append(f"d {model.d}")
    lines.append(f"nx {model.n_x} nu {model.n_u} ny {model.n_y}")
    lines.append(f"rho_dim {model.grid.dim}")
    lines.append("rho_lower " + " ".join(_fmt(v) for v in model.grid.lower))
    lines.append("rho_upper " + " ".join(_fmt(v) for v in model.grid.upper))
    lines.append(f"n_points {len(model.grid.points)}")
    for point, r in zip(model.grid.points, model.realizations):
        lines.append("point " + " ".join(_fmt(v) for v in point))
        for tag, mat in (("A", r.A), ("B", r.B), ("C", r.C), ("D", r.D)):
            lines.append(f"{tag} " + " ".join(_fmt(v) for v in mat.ravel(order="C")))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> ParamStateSpace:
    """Read a model file written by :func:`save_model`."""
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    it = iter(rows)
    header = next(it)
    if header[:2] != ["seekcert-model", "1"]:
        raise ValueError("not a seekcert model file")
    d = int(next(it)[1])
    dims = next(it)
    nx, nu, ny = int(dims[1]), int(dims[3]), int(dims[5])
    rho_dim = int(next(it)[1])
    lower = tuple(float(v) for v in next(it)[1:])
    upper = tuple(float(v) for v in next(it)[1:])
    if len(lower) != rho_dim or len(upper) != rho_dim:
        raise ValueError("parameter box dimension mismatch")
    n_points = int(next(it)[1])
    points, realizations = [], []
    shapes = {"A": (nx, nx), "B": (nx, nu), "C": (ny, nx), "D": (ny, nu)}
    for _ in range(n_points):
        tok = next(it)
        if tok[0] != "point":
            raise ValueError("malformed model file: expected a grid point")
        points.append(tuple(float(v) for v in tok[1:]))
        mats = {}
        for tag in ("A", "B", "C", "D"):
            tok = next(it)
            if tok[0] != tag:
                raise ValueError(f"malformed model file: expected matrix {tag}")
            shape = shapes[tag]
            vals = np.array([float(v) for v in tok[1:]])
            if vals.size != shape[0] * shape[1]:
                raise ValueError(f"matrix {tag} has wrong entry count")
            mats[tag] = vals.reshape(shape)
        realizations.append(StateSpace(mats["A"], mats["B"], mats["C"], mats["D"]))
    grid = ParamGrid(lower=lower, upper=upper, points=tuple(points))
    return ParamStateSpace(grid=grid, realizations=tuple(realizations), d=d)
