"""Dense linear programming by the two-phase simplex method.

Small, self-contained solver used throughout the package for feasibility
certificates, workload-interval computation, and the displacement-cone
constants.  Problems here have at most a few dozen variables, so a dense
tableau with Bland's anti-cycling rule is the robust choice; speed is not
a concern.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical_failure"

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10

_MAX_ITER = 20000


@dataclass(frozen=True)
class LpProblem:
    """minimize c'x subject to A_eq x = b_eq, A_ub x <= b_ub, bounds.

    ``bounds`` is a per-variable list of (lower, upper) pairs where None
    means unbounded on that side.  ``bounds=None`` leaves every variable
    free (the common case for control-space programs here).
    """

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    bounds: list[tuple[float | None, float | None]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).ravel())
        n = self.c.size
        for name in ("A_eq", "A_ub"):
            mat = getattr(self, name)
            if mat is not None:
                mat = np.atleast_2d(np.asarray(mat, dtype=float))
                if mat.shape[1] != n:
                    raise ValueError(f"{name} has {mat.shape[1]} columns, expected {n}")
                object.__setattr__(self, name, mat)
        for aname, bname in (("A_eq", "b_eq"), ("A_ub", "b_ub")):
            mat, rhs = getattr(self, aname), getattr(self, bname)
            if (mat is None) != (rhs is None):
                raise ValueError(f"{aname} and {bname} must be given together")
            if rhs is not None:
                rhs = np.asarray(rhs, dtype=float).ravel()
                if rhs.size != mat.shape[0]:
                    raise ValueError(f"{bname} has length {rhs.size}, expected {mat.shape[0]}")
                object.__setattr__(self, bname, rhs)
        if self.bounds is not None and len(self.bounds) != n:
            raise ValueError(f"bounds has {len(self.bounds)} entries, expected {n}")

    @property
    def n(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpOutcome:
    """Solver verdict.

    status is one of "optimal", "infeasible", "unbounded",
    "numerical_failure".  On optimal, ``x`` and ``value`` are set.  On
    unbounded, ``ray`` is a certifying direction r with A_eq r = 0,
    A_ub r <= 0, bound-compatible signs, and c'r < 0.
    """

    status: str
    x: np.ndarray | None = None
    value: float | None = None
    ray: np.ndarray | None = None


@dataclass
class _StandardForm:
    """min c'x, Ax = b, x >= 0 plus the map back to original variables."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n_struct: int  # structural (non-slack) standard columns
    var_map: list = field(default_factory=list)  # (kind, std_col, datum) per original var
    n_orig: int = 0


def _to_standard_form(prob: LpProblem) -> _StandardForm:
    n = prob.n
    bounds = prob.bounds if prob.bounds is not None else [(None, None)] * n

    # Column transform per variable: shift / flip / split to x >= 0.
    var_map = []
    cols = []  # coefficient multipliers per std column, as (orig_var, sign)
    shift = np.zeros(n)
    extra_ub_rows = []  # (std_col, cap) for doubly bounded variables
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None and np.isfinite(lo):
            var_map.append(("shift", len(cols), lo))
            cols.append((j, 1.0))
            shift[j] = lo
            if hi is not None and np.isfinite(hi):
                # hi < lo yields a negative cap on x' >= 0, i.e. infeasible.
                extra_ub_rows.append((len(cols) - 1, hi - lo))
        elif hi is not None and np.isfinite(hi):
            var_map.append(("flip", len(cols), hi))
            cols.append((j, -1.0))
            shift[j] = hi
        else:
            var_map.append(("split", len(cols), None))
            cols.append((j, 1.0))
            cols.append((j, -1.0))

    n_std = len(cols)
    T = np.zeros((n, n_std))
    for k, (j, sgn) in enumerate(cols):
        T[j, k] = sgn

    A_blocks, b_blocks, slack_rows = [], [], 0
    if prob.A_eq is not None and prob.A_eq.shape[0]:
        A_blocks.append(prob.A_eq @ T)
        b_blocks.append(prob.b_eq - prob.A_eq @ shift)
    ub_A, ub_b = [], []
    if prob.A_ub is not None and prob.A_ub.shape[0]:
        ub_A.append(prob.A_ub @ T)
        ub_b.append(prob.b_ub - prob.A_ub @ shift)
    if extra_ub_rows:
        rows = np.zeros((len(extra_ub_rows), n_std))
        caps = np.zeros(len(extra_ub_rows))
        for i, (k, cap) in enumerate(extra_ub_rows):
            rows[i, k] = 1.0
            caps[i] = cap
        ub_A.append(rows)
        ub_b.append(caps)
    if ub_A:
        ub_A = np.vstack(ub_A)
        ub_b = np.concatenate(ub_b)
        slack_rows = ub_A.shape[0]
        A_blocks.append(np.hstack([ub_A, np.eye(slack_rows)]))
        b_blocks.append(ub_b)
        # Pad earlier equality block with zero slack columns.
        if len(A_blocks) == 2:
            A_blocks[0] = np.hstack([A_blocks[0], np.zeros((A_blocks[0].shape[0], slack_rows))])

    if A_blocks:
        A = np.vstack(A_blocks)
        b = np.concatenate(b_blocks)
    else:
        A = np.zeros((0, n_std))
        b = np.zeros(0)
    c_std = np.zeros(A.shape[1])
    for k, (j, sgn) in enumerate(cols):
        c_std[k] = sgn * prob.c[j]

    # Flip rows so b >= 0.
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    sf = _StandardForm(A=A, b=b, c=c_std, n_struct=n_std, var_map=var_map, n_orig=n)
    return sf


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row:
            T[i] -= T[i, col] * T[row]


def _bland_simplex(T: np.ndarray, basis: np.ndarray, cost: np.ndarray):
    """Run simplex with Bland's rule on tableau rows [B^-1 A | B^-1 b].

    Returns (status, entering_col) with status in {"optimal", "unbounded",
    "stalled"}.
    """
    m = T.shape[0]
    ncols = T.shape[1] - 1
    for _ in range(_MAX_ITER):
        red = cost[:ncols] - cost[basis] @ T[:, :ncols] if m else cost[:ncols].copy()
        if m:
            red[basis] = 0.0
        enter = -1
        for j in range(ncols):
            if red[j] < -PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return OPTIMAL, -1
        col = T[:, enter]
        leave = -1
        best = np.inf
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = T[i, -1] / col[i]
                if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and (leave < 0 or basis[i] < basis[leave])):
                    best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED, enter
        _pivot(T, leave, enter)
        basis[leave] = enter
    return "stalled", -1


def _map_back_point(x_std: np.ndarray, sf: _StandardForm) -> np.ndarray:
    x = np.zeros(sf.n_orig)
    for j, (kind, k, datum) in enumerate(sf.var_map):
        if kind == "shift":
            x[j] = datum + x_std[k]
        elif kind == "flip":
            x[j] = datum - x_std[k]
        else:
            x[j] = x_std[k] - x_std[k + 1]
    return x


def _map_back_ray(d_std: np.ndarray, sf: _StandardForm) -> np.ndarray:
    r = np.zeros(sf.n_orig)
    for j, (kind, k, _) in enumerate(sf.var_map):
        if kind == "shift":
            r[j] = d_std[k]
        elif kind == "flip":
            r[j] = -d_std[k]
        else:
            r[j] = d_std[k] - d_std[k + 1]
    return r


def solve_lp(prob: LpProblem) -> LpOutcome:
    """Solve a dense LP by the two-phase simplex method with Bland's rule.

    The cycling guard never returns a wrong answer: if the iteration cap
    is hit, status is "numerical_failure".
    """
    sf = _to_standard_form(prob)
    m, ncols = sf.A.shape

    # Phase 1: artificial variable on every row, minimize their sum.
    T = np.hstack([sf.A, np.eye(m), sf.b[:, None]])
    basis = np.arange(ncols, ncols + m)
    cost1 = np.concatenate([np.zeros(ncols), np.ones(m)])
    status, _ = _bland_simplex(T, basis, cost1)
    if status == "stalled":
        return LpOutcome(status=NUMERICAL_FAILURE)
    phase1_val = float(cost1[basis] @ T[:, -1]) if m else 0.0
    if phase1_val > FEAS_TOL:
        return LpOutcome(status=INFEASIBLE)

    # Drive artificial variables out of the basis; drop redundant rows.
    keep = []
    for i in range(m):
        if basis[i] >= ncols:
            piv = -1
            for j in range(ncols):
                if abs(T[i, j]) > PIVOT_TOL:
                    piv = j
                    break
            if piv < 0:
                continue  # redundant row
            _pivot(T, i, piv)
            basis[i] = piv
        keep.append(i)
    T = np.hstack([T[keep][:, :ncols], T[keep][:, -1:]])
    basis = basis[keep]

    # Phase 2 on the real columns.
    status, enter = _bland_simplex(T, basis, sf.c)
    if status == "stalled":
        return LpOutcome(status=NUMERICAL_FAILURE)
    if status == UNBOUNDED:
        d_std = np.zeros(ncols)
        d_std[enter] = 1.0
        for i, bi in enumerate(basis):
            d_std[bi] = -T[i, enter]
        ray = _map_back_ray(d_std, sf)
        return LpOutcome(status=UNBOUNDED, ray=ray)

    x_std = np.zeros(ncols)
    for i, bi in enumerate(basis):
        x_std[bi] = T[i, -1]
    x = _map_back_point(x_std, sf)
    return LpOutcome(status=OPTIMAL, x=x, value=float(prob.c @ x))


def lp_feasible(
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    bounds=None,
    n_vars: int | None = None,
) -> tuple[bool, np.ndarray | None]:
    """Feasibility of {A_eq x = b_eq, A_ub x <= b_ub, bounds}; returns a witness.

    The variable count is inferred from whichever of A_eq / A_ub / bounds
    is given, unless passed explicitly.
    """
    if n_vars is None:
        if A_eq is not None:
            n_vars = np.atleast_2d(np.asarray(A_eq)).shape[1]
        elif A_ub is not None:
            n_vars = np.atleast_2d(np.asarray(A_ub)).shape[1]
        elif bounds is not None:
            n_vars = len(bounds)
        else:
            raise ValueError("cannot infer the number of variables")
    out = solve_lp(
        LpProblem(c=np.zeros(n_vars), A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub, bounds=bounds)
    )
    if out.status == OPTIMAL:
        return True, out.x
    if out.status == INFEASIBLE:
        return False, None
    raise RuntimeError(f"feasibility LP ended with status {out.status}")
