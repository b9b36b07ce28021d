"""Effective holding cost on workload fibers and its continuous selection.

The reduced problem charges holding cost through gcheck(w), the minimum
of g(z) = h(z) + alpha pi'z over the fiber {z in Z : Mz = w}.  For
strictly convex quadratic g each fiber has a unique minimizer psi(w),
computed here by a small active-set QP; psi is then a continuous
selection and gcheck is convex and continuous.  The module also carries
the two-server closed form for psi and a quasiconvex construction whose
fiber minimizer jumps, showing that continuity of the selection is a
real assumption and not a free lunch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import lp_feasible
from .model import Polytope, QuadraticCost

__all__ = [
    "EffectiveCost",
    "CurvePoint",
    "ProbeRow",
    "InfeasibleFiberError",
    "UnsupportedCostError",
    "NumericalError",
    "eval_g",
    "minimize_on_fiber",
    "effective_cost_curve",
    "two_server_selection",
    "quasiconvex_level_eval",
    "discontinuity_probe",
]


class InfeasibleFiberError(ValueError):
    """Requested workload level has an empty fiber (w outside W)."""


class UnsupportedCostError(ValueError):
    """The generic fiber minimizer requires a strictly convex cost."""


class NumericalError(RuntimeError):
    """The QP iteration failed to converge or verify its KKT conditions."""


def eval_g(z, h: QuadraticCost, alpha: float, pi, state: Polytope | None = None) -> float:
    """Adjusted holding cost g(z) = h(z) + alpha * pi'z."""
    z = np.asarray(z, dtype=float).ravel()
    pi = np.asarray(pi, dtype=float).ravel()
    if state is not None and not state.contains(z, tol=1e-9):
        raise ValueError(f"point {z.tolist()} is outside the state space")
    return float(h(z) + alpha * (pi @ z))


@dataclass(frozen=True)
class EffectiveCost:
    """Fiber-minimization problem data: minimize z'Qz + lin'z + const
    subject to Mz = w and the state polytope."""

    M: np.ndarray
    state: Polytope
    Q: np.ndarray
    lin: np.ndarray
    const: float = 0.0
    kkt_tol: float = 1e-8

    @classmethod
    def from_parts(cls, M, state: Polytope, h: QuadraticCost, alpha: float, pi,
                   kkt_tol: float = 1e-8) -> "EffectiveCost":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        pi = np.asarray(pi, dtype=float).ravel()
        return cls(M=M, state=state, Q=h.Q.copy(),
                   lin=h.c + alpha * pi, const=float(h.c0), kkt_tol=kkt_tol)

    @property
    def strictly_convex(self) -> bool:
        eig = np.linalg.eigvalsh((self.Q + self.Q.T) / 2.0)
        return bool(eig[0] >= 1e-10)

    def objective(self, z) -> float:
        z = np.asarray(z, dtype=float).ravel()
        return float(z @ self.Q @ z + self.lin @ z + self.const)


def minimize_on_fiber(w, ec: EffectiveCost):
    """Unique minimizer of the adjusted cost over the fiber {Mz = w}.

    Returns (psi, value).  Uses a primal active-set method: from an LP
    feasible point, repeatedly minimize on the currently active face;
    take the blocking-constraint step when a face boundary interferes,
    drop the inequality with the most negative multiplier when
    stationary.  Constraint order is deterministic (ascending row
    index), so results are reproducible bit for bit.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float)).ravel()
    if not ec.strictly_convex:
        raise UnsupportedCostError(
            "fiber minimization requires a strictly convex quadratic cost"
        )
    A, b = ec.state.A, ec.state.b
    nv = A.shape[1]
    feasible, x = lp_feasible(A_eq=ec.M, b_eq=w, A_ub=A, b_ub=b)
    if not feasible:
        raise InfeasibleFiberError(f"workload level {w.tolist()} has an empty fiber")

    H = ec.Q + ec.Q.T  # Hessian of z'Qz
    n_eq = ec.M.shape[0]
    step_tol = 1e-11
    work: list[int] = [i for i in range(A.shape[0]) if b[i] - A[i] @ x <= 1e-9]
    work = _independent_subset(ec.M, A, work)

    mu = np.zeros(0)
    for _ in range(200):
        C = np.vstack([ec.M, A[work]]) if work else ec.M
        kkt = np.block([
            [H, C.T],
            [C, np.zeros((C.shape[0], C.shape[0]))],
        ])
        rhs = np.concatenate([-(H @ x + ec.lin), np.zeros(C.shape[0])])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        if not np.all(np.isfinite(sol)):
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        p, lam = sol[:nv], sol[nv:]

        if np.max(np.abs(p), initial=0.0) <= step_tol * (1.0 + np.max(np.abs(x))):
            mu = lam[n_eq:]
            if mu.size == 0 or np.min(mu) >= -ec.kkt_tol:
                break
            worst = int(np.argmin(mu))  # most negative multiplier, lowest index tie
            work.pop(worst)
            continue

        # Largest feasible step along p; a constraint outside the working
        # set blocks when its boundary is crossed before the full step.
        ratio, blocker = 1.0, None
        for i in range(A.shape[0]):
            if i in work:
                continue
            d = float(A[i] @ p)
            if d > 1e-12:
                r = max(0.0, float(b[i] - A[i] @ x)) / d
                if r < ratio - 1e-15:
                    ratio, blocker = r, i
        x = x + ratio * p
        if blocker is not None:
            work.append(blocker)
            work.sort()
    else:
        raise NumericalError("active-set QP did not converge within 200 iterations")

    _verify_kkt(x, mu, work, w, ec, H)
    return x, ec.objective(x)


def _independent_subset(M: np.ndarray, A: np.ndarray, rows: list[int]) -> list[int]:
    """Greedy prefix of `rows` keeping [M; A[rows]] full row rank."""
    kept: list[int] = []
    base = M
    rank = np.linalg.matrix_rank(base, tol=1e-10)
    for i in rows:
        cand = np.vstack([base, A[[i]]])
        r = np.linalg.matrix_rank(cand, tol=1e-10)
        if r > rank:
            kept.append(i)
            base, rank = cand, r
    return kept


def _verify_kkt(x, mu, work, w, ec: EffectiveCost, H) -> None:
    scale = 1.0 + float(np.max(np.abs(x), initial=0.0))
    fiber_resid = float(np.max(np.abs(ec.M @ x - w)))
    feas_resid = float(np.max(ec.state.A @ x - ec.state.b, initial=0.0))
    grad = H @ x + ec.lin
    # Stationarity residual: distance of -grad from the span of the active rows.
    C = np.vstack([ec.M] + ([ec.state.A[work]] if work else []))
    coef, *_ = np.linalg.lstsq(C.T, -grad, rcond=None)
    stat_resid = float(np.max(np.abs(C.T @ coef + grad)))
    checks = {
        "fiber equality": fiber_resid,
        "state feasibility": feas_resid,
        "stationarity": stat_resid,
        "multiplier sign": float(max(0.0, -np.min(mu, initial=0.0))),
    }
    bad = {k: r for k, r in checks.items() if r > ec.kkt_tol * scale}
    if bad:
        raise NumericalError(f"KKT verification failed: {bad}")


@dataclass(frozen=True)
class CurvePoint:
    w: np.ndarray
    value: float | None
    psi: np.ndarray | None
    error: str | None = None


def effective_cost_curve(ec: EffectiveCost, w_grid) -> list[CurvePoint]:
    """Tabulate (w, gcheck(w), psi(w)) over a workload grid.

    Per-point failures (typically infeasible fibers) are recorded in the
    row instead of aborting the sweep.
    """
    rows: list[CurvePoint] = []
    for w in np.atleast_1d(np.asarray(w_grid, dtype=float)):
        wv = np.atleast_1d(w)
        try:
            psi, val = minimize_on_fiber(wv, ec)
            rows.append(CurvePoint(w=wv, value=val, psi=psi))
        except (InfeasibleFiberError, NumericalError) as exc:
            rows.append(CurvePoint(w=wv, value=None, psi=None, error=str(exc)))
    return rows


def two_server_selection(w: float, a1: float, a2: float, b: float) -> np.ndarray:
    """Closed-form fiber minimizer for the two-server instance.

    The fiber of workload w in the box [0, b]^2 under M = (2, 1) is a
    segment; minimizing a1 z1^2 + a2 z2^2 (the linear price term does
    not move the minimizer because pi'z is constant on each fiber)
    gives three regimes as the box constraints activate.
    """
    if not 0.0 - 1e-9 <= w <= 3.0 * b + 1e-9:
        raise ValueError(f"workload {w} outside [0, {3 * b}]")
    interior = 2.0 * a2 * w / (4.0 * a2 + a1)
    if w <= b:
        psi1 = interior
    elif w <= 2.0 * b:
        psi1 = max(interior, (w - b) / 2.0)
    else:
        psi1 = min(b, max(interior, (w - b) / 2.0))
    return np.array([psi1, w - 2.0 * psi1])


# ---------------------------------------------------------------------------
# Quasiconvex construction with a discontinuous fiber minimizer.
#
# The function below is quasiconvex but not strictly quasiconvex: its
# level-r curve is the closed loop made of a top segment {z2 = r,
# |z1| <= r}, a left segment {z1 = -r, |z2| <= r}, a bottom segment
# {z2 = -r, -r <= z1 <= r^2} and a slanted segment from (r^2, -r) to
# (r, r).  Minimized over vertical fibers z1 = w, the minimizer's
# z2-component jumps from +1 to -1 as w crosses 1 while the minimum
# value stays continuous.


def quasiconvex_level_eval(z) -> float:
    """Level r >= 0 of the quasiconvex loop function at a point of R^2.

    Case priority on shared boundary points: top, left, bottom, slant;
    all cases agree where they overlap, so the priority only picks the
    cheapest formula.
    """
    z1, z2 = (float(c) for c in np.asarray(z, dtype=float).ravel())
    if z2 >= 0.0 and abs(z1) <= z2:
        return z2
    if z1 <= 0.0 and abs(z2) <= -z1:
        return -z1
    if z2 <= 0.0 and z1 <= z2 * z2:
        return -z2

    # Slanted segment: z1 = s(r) with s(r) = r^2 + (z2 + r)(1 - r)/2,
    # strictly increasing in r on r >= |z2|, so bisection is exact.
    def s_minus_z1(r: float) -> float:
        return r * r + (z2 + r) * (1.0 - r) / 2.0 - z1

    lo = max(abs(z2), 1e-300)
    hi = abs(z1) + abs(z2) + 1.0
    flo, fhi = s_minus_z1(lo), s_minus_z1(hi)
    if flo > 0.0 or fhi < 0.0:
        raise AssertionError(
            f"slant-case bisection lost its bracket at z = ({z1}, {z2})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if s_minus_z1(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * (1.0 + hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ProbeRow:
    w: float
    z2_argmin: float
    value: float


def discontinuity_probe(w_grid, z2_grid) -> list[ProbeRow]:
    """Trace the fiber minimizer of the quasiconvex loop function.

    For each w, grid-minimizes quasiconvex_level_eval((w, z2)) over the
    z2 grid and refines the argmin locally.  The resulting z2 trace
    jumps across w = 1 while the value trace stays continuous.
    """
    w_grid = np.asarray(w_grid, dtype=float).ravel()
    z2_grid = np.sort(np.asarray(z2_grid, dtype=float).ravel())
    if w_grid.size and (w_grid.min() < -1e-12 or w_grid.max() > 2.0 + 1e-12):
        raise ValueError("w grid must lie within [0, 2]")
    if z2_grid.size and (z2_grid.min() < -2.0 - 1e-12 or z2_grid.max() > 2.0 + 1e-12):
        raise ValueError("z2 grid must lie within [-2, 2]")

    rows = []
    for w in w_grid:
        vals = [quasiconvex_level_eval((w, z2)) for z2 in z2_grid]
        i = int(np.argmin(vals))
        lo = z2_grid[max(i - 1, 0)]
        hi = z2_grid[min(i + 1, z2_grid.size - 1)]
        for _ in range(4):
            pts = np.linspace(lo, hi, 33)
            vv = [quasiconvex_level_eval((w, z2)) for z2 in pts]
            j = int(np.argmin(vv))
            lo = pts[max(j - 1, 0)]
            hi = pts[min(j + 1, pts.size - 1)]
        z2_star = 0.5 * (lo + hi)
        rows.append(ProbeRow(w=float(w), z2_argmin=float(z2_star),
                             value=quasiconvex_level_eval((w, z2_star))))
    return rows
