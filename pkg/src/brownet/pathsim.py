"""Path simulation and discounted cost evaluation.

Builds Brownian paths on a fixed time grid, extends a workload-level
Brownian motion to a state-level one sharing the same projection,
applies the two-sided regulator, lifts reduced controls back to full
network controls, and evaluates the discounted cost functionals of both
problem levels.  Also provides the recentering ball control used as a
finite-cost baseline.

Conventions.  Holding integrals use left-Riemann sums.  Stieltjes
integrals against nondecreasing (or bounded-variation) integrators use
the right-point jump-sum with the time-zero convention that F(0) enters
undiscounted (the integrator starts from 0- = 0, so an initial jump is
paid at full value).  Infinite-horizon quantities are truncated at the
grid horizon; certified tail bounds are carried in CostBreakdown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    ROLE_AUX,
    ROLE_BALL,
    ROLE_MAIN,
    ball_costs,
    path_generator,
    regulator_path,
)
from .assumptions import check_full_displacement
from .model import NetworkData, Polytope, QuadraticCost
from .reduction import WorkloadReduction

__all__ = [
    "TimeGrid",
    "PathBundle",
    "CostBreakdown",
    "BallControlResult",
    "path_generator",
    "simulate_bm",
    "extend_workload_bm",
    "two_sided_regulator",
    "discounted_stieltjes",
    "stieltjes_consistency",
    "lift_control",
    "check_bundle_admissible",
    "cost_bcp",
    "cost_rbcp",
    "offset_I",
    "quadratic_abs_bound",
    "control_tail_bound",
    "baseline_ball_control",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*dt, k = 0..n, with n*dt = horizon."""

    dt: float
    horizon: float

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        n = round(self.horizon / self.dt)
        if n < 1 or abs(n * self.dt - self.horizon) > 1e-9 * max(1.0, self.horizon):
            raise ValueError(
                f"horizon {self.horizon} is not an integer multiple of dt {self.dt}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def check_resolution(self, alpha: float) -> None:
        # Discount must be slow on the step scale or Riemann sums of
        # e^{-a s} integrands are meaningless.
        if self.dt > 1.0 / (100.0 * alpha):
            raise ValueError(
                f"dt = {self.dt} too coarse for discount rate {alpha}: "
                f"need dt <= {1.0 / (100.0 * alpha):g}"
            )


@dataclass
class PathBundle:
    """All per-path processes of one lifted control path."""

    grid: TimeGrid
    chi: np.ndarray  # (n+1, d) free workload Brownian motion
    X: np.ndarray  # (n+1, m) state-level Brownian motion, M X = chi
    W: np.ndarray  # (n+1, d) regulated workload
    Z: np.ndarray  # (n+1, m) state path
    U: np.ndarray  # (n+1, p) cumulative control, nondecreasing
    Y: np.ndarray  # (n+1, n_ctrl) lifted control path
    seed: int
    path_index: int
    L1: np.ndarray | None = None  # lower pushing process (d = 1 policies)
    L2: np.ndarray | None = None  # upper pushing process

    def residuals(self, red: WorkloadReduction) -> dict[str, float]:
        """Max-abs defects of the exact algebraic path identities."""
        W2 = np.atleast_2d(self.W.T).T if self.W.ndim == 1 else self.W
        chi2 = np.atleast_2d(self.chi.T).T if self.chi.ndim == 1 else self.chi
        out = {
            "MZ_W": float(np.max(np.abs(self.Z @ red.M.T - W2))),
            "MX_chi": float(np.max(np.abs(self.X @ red.M.T - chi2))),
            "state_eq": float(np.max(np.abs(self.Z - self.X - self.Y @ red.R.T))),
            "control_eq": float(np.max(np.abs(self.U - self.Y @ red.K.T))),
        }
        # price identity v'Y = pi'(Z - X) + kappa'U at every grid point
        lhs = self.Y @ red.v
        rhs = (self.Z - self.X) @ red.pi + self.U @ red.kappa
        out["price_path"] = float(np.max(np.abs(lhs - rhs)))
        return out


@dataclass(frozen=True)
class CostBreakdown:
    """Discounted cost of one path, split into its defining pieces.

    holding + control = zeta_T by construction; tail_bound bounds the
    holding mass beyond the horizon (sup|h| e^{-aT}/a form) and
    control_tail_bound the post-horizon Stieltjes mass via the
    scale-invariance constant gamma.
    """

    holding: float
    control: float
    offset_I: float
    zeta_T: float
    tail_bound: float
    control_tail_bound: float = 0.0

    def __post_init__(self):
        if abs(self.zeta_T - (self.holding + self.control)) > 1e-9 * (
            1.0 + abs(self.holding) + abs(self.control)
        ):
            raise ValueError("zeta_T must equal holding + control")
        if self.tail_bound < 0 or self.control_tail_bound < 0:
            raise ValueError("tail bounds must be nonnegative")


def simulate_bm(dim, start, drift, cov, grid: TimeGrid, seed, path_index) -> np.ndarray:
    """Sample one Brownian path with the given statistics on the grid.

    Returns an (n+1, dim) array; increments are drift*dt + chol(cov)
    sqrt(dt) xi_k with xi_k iid standard normal from the path's own
    counter-based stream.
    """
    start = np.asarray(start, dtype=float).ravel()
    drift = np.asarray(drift, dtype=float).ravel()
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if start.shape != (dim,) or drift.shape != (dim,) or cov.shape != (dim, dim):
        raise ValueError("start/drift/cov shapes inconsistent with dim")
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"covariance is not SPD: {exc}") from exc
    n = grid.n_steps
    gen = path_generator(seed, path_index, ROLE_MAIN)
    xi = gen.standard_normal((n, dim))
    inc = drift * grid.dt + xi @ (L * math.sqrt(grid.dt)).T
    path = np.empty((n + 1, dim))
    path[0] = start
    np.cumsum(inc, axis=0, out=path[1:])
    path[1:] += start
    return path


def extend_workload_bm(chi_path, M, Sigma, theta, z0, Rev_basis, grid: TimeGrid,
                       seed, path_index) -> np.ndarray:
    """Extend a workload Brownian path chi to a state path X with MX = chi.

    The missing coordinates along the rows of N (an orthonormal basis of
    the reversible space, i.e. the orthogonal complement of the rows of
    M) are reconstructed as the conditional law of N X given M X: the
    regression term of chi plus independent auxiliary noise with the
    Schur-complement covariance, drawn from the path's auxiliary stream.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    theta = np.asarray(theta, dtype=float).ravel()
    z0 = np.asarray(z0, dtype=float).ravel()
    d, m = M.shape
    chi = np.asarray(chi_path, dtype=float)
    if chi.ndim == 1:
        chi = chi[:, None]
    if chi.shape[1] != d:
        raise ValueError(f"chi_path has {chi.shape[1]} columns, expected d = {d}")
    if d == 0:
        raise ValueError("d = 0 has no workload path; simulate X directly")
    if d == m:
        X = np.linalg.solve(M, chi.T).T
    else:
        N = np.asarray(Rev_basis, dtype=float).T  # rows span the complement of rows(M)
        if N.shape != (m - d, m):
            raise ValueError(f"Rev_basis must be {m}x{m - d}")
        A = np.vstack([M, N])
        Gam = M @ Sigma @ M.T
        Pi = M @ Sigma @ N.T
        Gt = N @ Sigma @ N.T
        S = Gt - Pi.T @ np.linalg.solve(Gam, Pi)
        S = 0.5 * (S + S.T)
        try:
            At = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            # Schur complement of an SPD covariance can only fail PD by
            # round-off; retry with a relative jitter before giving up.
            jitter = 1e-12 * max(1.0, float(np.max(np.abs(S))))
            try:
                At = np.linalg.cholesky(S + jitter * np.eye(m - d))
            except np.linalg.LinAlgError as exc:
                raise ValueError(f"extension covariance is not SPD: {exc}") from exc
        n = grid.n_steps
        gen = path_generator(seed, path_index, ROLE_AUX)
        xi = gen.standard_normal((n, m - d))
        B = np.zeros((n + 1, m - d))
        np.cumsum(xi * math.sqrt(grid.dt), axis=0, out=B[1:])
        t = grid.times()[:, None]
        Pmat = np.linalg.solve(Gam, Pi).T  # = Pi' Gam^{-1}, (m-d, d)
        dev = chi - t * (M @ theta) - (M @ z0)
        chit = dev @ Pmat.T + B @ At.T + t * (N @ theta) + (N @ z0)
        X = np.linalg.solve(A, np.hstack([chi, chit]).T).T
    resid = float(np.max(np.abs(X @ M.T - chi)))
    scale = 1.0 + float(np.max(np.abs(chi)))
    if resid > 1e-10 * scale:
        raise RuntimeError(f"extension failed: max |M X - chi| = {resid:.3e}")
    return X


def two_sided_regulator(chi_path, lo: float, hi: float, w_start: float):
    """Confine a scalar free path to [lo, hi] with minimal pushing.

    Returns (W, L1, L2): the regulated path and the cumulative lower and
    upper pushing processes, both nondecreasing from 0.  L1 increases
    only when W sits at lo, L2 only at hi.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if not (lo <= w_start <= hi):
        raise ValueError(f"w_start {w_start} outside [{lo}, {hi}]")
    chi = np.asarray(chi_path, dtype=float).ravel()
    return regulator_path(np.diff(chi), w_start, lo, hi)


def discounted_stieltjes(F_path, alpha: float, grid: TimeGrid) -> float:
    """Right-point discounted jump-sum of the integrator F over [0, T].

    F(0) enters undiscounted (the time-zero convention for integrators
    starting from 0-), each later increment at the discount of its
    right endpoint.
    """
    F = np.asarray(F_path, dtype=float).ravel()
    if F.shape[0] != grid.n_steps + 1:
        raise ValueError("integrator length does not match the grid")
    disc = np.exp(-alpha * grid.times()[1:])
    return float(F[0] + disc @ np.diff(F))


def stieltjes_consistency(F_path, alpha: float, grid: TimeGrid):
    """Jump-sum and integration-by-parts forms plus their difference.

    The parts form a*sum e^{-a t_k} F_k dt + e^{-aT} F_T agrees with the
    jump-sum within O(dt) for smooth F; the residual is a discretization
    diagnostic.
    """
    F = np.asarray(F_path, dtype=float).ravel()
    jump = discounted_stieltjes(F, alpha, grid)
    t = grid.times()
    parts = alpha * grid.dt * float(np.exp(-alpha * t[:-1]) @ F[:-1]) + math.exp(
        -alpha * grid.horizon
    ) * float(F[-1])
    return jump, parts, jump - parts


def _as_cols(path, n_rows, name):
    a = np.asarray(path, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] != n_rows:
        raise ValueError(f"{name} has {a.shape[0]} rows, expected {n_rows}")
    return a


def lift_control(U_path, W_path, chi_path, data: NetworkData,
                 red: WorkloadReduction, psi, grid: TimeGrid,
                 seed, path_index) -> PathBundle:
    """Lift a reduced control path (W, U, chi) to a full bundle.

    Z is the fiber selection psi applied along W; X extends chi to the
    state level; Y recovers the unique control consistent with (Z-X, U).
    Preconditions (the reduced admissibility of (W, U, chi)) are
    enforced to 1e-6 with the worst offending time index reported; the
    resulting bundle is verified to satisfy the state and control
    equations to 1e-8.
    """
    n = grid.n_steps
    U = _as_cols(U_path, n + 1, "U_path")
    W = _as_cols(W_path, n + 1, "W_path")
    chi = _as_cols(chi_path, n + 1, "chi_path")

    resid = W - chi - U @ red.G.T
    worst = np.unravel_index(np.argmax(np.abs(resid)), resid.shape)
    if abs(resid[worst]) > 1e-6:
        raise ValueError(
            f"workload identity W = chi + G U fails at time index {worst[0]}: "
            f"residual {resid[worst]:.3e}"
        )
    dU = np.diff(U, axis=0)
    if dU.size:
        worst = np.unravel_index(np.argmin(dU), dU.shape)
        if dU[worst] < -1e-6:
            raise ValueError(
                f"control path decreases at time index {worst[0] + 1}: "
                f"increment {dU[worst]:.3e}"
            )
    if np.min(U[0], initial=0.0) < -1e-6:
        raise ValueError(f"U(0) has a negative component: {np.min(U[0]):.3e}")

    Wflat = W[:, 0] if W.shape[1] == 1 else W
    try:
        Z = np.asarray(psi(Wflat), dtype=float)
        if Z.shape != (n + 1, red.M.shape[1]):
            raise TypeError
    except (TypeError, ValueError):
        # scalar-only selection: apply pointwise
        Z = np.array([np.asarray(psi(w), dtype=float).ravel() for w in Wflat])
    X = extend_workload_bm(chi, red.M, data.Sigma, data.theta, data.z0,
                           red.Rev_basis, grid, seed, path_index)
    Yhat = U @ red.Kdag.T
    Y = Yhat + (Z - X - Yhat @ red.R.T) @ red.Rdag.T

    scale = 1.0 + max(float(np.max(np.abs(Z))), float(np.max(np.abs(U))), 1.0)
    state_resid = float(np.max(np.abs(Z - X - Y @ red.R.T)))
    ctrl_resid = float(np.max(np.abs(U - Y @ red.K.T)))
    if state_resid > 1e-8 * scale or ctrl_resid > 1e-8 * scale:
        raise RuntimeError(
            f"lift failed verification: |Z - X - RY| = {state_resid:.3e}, "
            f"|U - KY| = {ctrl_resid:.3e}"
        )
    return PathBundle(grid=grid, chi=chi, X=X, W=W, Z=Z, U=U, Y=Y,
                      seed=seed, path_index=path_index)


def check_bundle_admissible(bundle: PathBundle, data: NetworkData,
                            red: WorkloadReduction, tol: float = 1e-8) -> dict:
    """Worst-case admissibility defects of a bundle against its instance.

    Covers state membership Z(t) in the state set, nondecreasing U with
    U(0) >= 0, the state and control equations, and the price identity.
    """
    out = bundle.residuals(red)
    A, b = data.Z.A, data.Z.b
    out["state_membership"] = float(max(0.0, np.max(bundle.Z @ A.T - b)))
    dU = np.diff(bundle.U, axis=0)
    out["U_monotone"] = float(max(0.0, -np.min(dU, initial=0.0)))
    out["U0_nonneg"] = float(max(0.0, -np.min(bundle.U[0], initial=0.0)))
    out["passed"] = all(
        v <= tol for k, v in out.items() if isinstance(v, float)
    )
    return out


def _left_riemann(values, alpha, grid: TimeGrid) -> float:
    t = grid.times()
    return grid.dt * float(np.exp(-alpha * t[:-1]) @ values[:-1])


def quadratic_abs_bound(h: QuadraticCost, lo, hi) -> float:
    """Interval bound on sup |h| over the box [lo, hi] (>= true sup)."""
    mx = np.maximum(np.abs(np.asarray(lo, dtype=float)),
                    np.abs(np.asarray(hi, dtype=float)))
    return float(np.abs(h.Q) @ mx @ mx + np.abs(h.c) @ mx + abs(h.c0))


def control_tail_bound(gamma: float, state: Polytope, z0, theta, Sigma,
                       alpha: float, T: float) -> float:
    """Post-horizon bound on the downward Stieltjes mass.

    Pattern: the negative part of d(v'Y) beyond T is dominated by
    gamma * E int_T^inf e^{-as} (|Z| + |X|) ds with |Z| bounded by the
    state set and E|X(s)| linearly bounded via |theta| s and the
    per-coordinate absolute-moment bound of the noise (sqrt(s) absorbed
    by AM-GM).  Everything in max norm.
    """
    z_sup = float(np.max(np.maximum(np.abs(state.bbox_lo), np.abs(state.bbox_hi))))
    z0 = np.asarray(z0, dtype=float).ravel()
    sig = math.sqrt(float(np.max(np.diag(np.atleast_2d(Sigma)))))
    m = z0.shape[0]
    half = 0.5 * m * sig * math.sqrt(2.0 / math.pi)
    c1 = float(np.max(np.abs(z0), initial=0.0)) + half
    c2 = float(np.max(np.abs(np.asarray(theta, dtype=float)), initial=0.0)) + half
    e = math.exp(-alpha * T)
    return gamma * e * ((c1 + z_sup) / alpha + c2 * (T + 1.0 / alpha) / alpha)


def cost_bcp(bundle: PathBundle, h: QuadraticCost, v, alpha: float,
             state: Polytope | None = None, offset: float = 0.0,
             gamma: float | None = None, data: NetworkData | None = None) -> CostBreakdown:
    """Discounted original-problem cost of one path, truncated at T.

    holding is the left-Riemann sum of e^{-as} h(Z); control the
    discounted jump-sum of v'Y.  tail_bound uses sup|h| over the state
    set when one is supplied (max |h| along the path otherwise).
    """
    grid = bundle.grid
    grid.check_resolution(alpha)
    hz = h.evaluate(bundle.Z)
    holding = _left_riemann(hz, alpha, grid)
    control = discounted_stieltjes(bundle.Y @ np.asarray(v, dtype=float), alpha, grid)
    if state is not None:
        sup_h = quadratic_abs_bound(h, state.bbox_lo, state.bbox_hi)
    else:
        sup_h = float(np.max(np.abs(hz)))
    tail = sup_h * math.exp(-alpha * grid.horizon) / alpha
    ctail = 0.0
    if gamma is not None and state is not None and data is not None:
        ctail = control_tail_bound(gamma, state, data.z0, data.theta,
                                   data.Sigma, alpha, grid.horizon)
    return CostBreakdown(holding=holding, control=control, offset_I=offset,
                         zeta_T=holding + control, tail_bound=tail,
                         control_tail_bound=ctail)


def cost_rbcp(bundle: PathBundle, gcheck, kappa, alpha: float,
              g_sup: float | None = None) -> CostBreakdown:
    """Discounted reduced-problem cost of one path, truncated at T."""
    grid = bundle.grid
    grid.check_resolution(alpha)
    W = bundle.W[:, 0] if bundle.W.ndim == 2 and bundle.W.shape[1] == 1 else bundle.W
    gw = np.asarray(gcheck(W), dtype=float)
    if gw.shape != W.shape:
        gw = np.array([float(gcheck(w)) for w in W])
    holding = _left_riemann(gw, alpha, grid)
    control = discounted_stieltjes(bundle.U @ np.asarray(kappa, dtype=float),
                                   alpha, grid)
    sup_g = float(np.max(np.abs(gw))) if g_sup is None else g_sup
    tail = sup_g * math.exp(-alpha * grid.horizon) / alpha
    return CostBreakdown(holding=holding, control=control, offset_I=0.0,
                         zeta_T=holding + control, tail_bound=tail)


def offset_I(pi, z0, theta, alpha: float) -> float:
    """Policy-independent cost offset alpha E int e^{-as} pi'X ds.

    Closed form pi'z0 + pi'theta / alpha from the linear growth of
    E[X(s)].
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    pi = np.asarray(pi, dtype=float).ravel()
    return float(pi @ np.asarray(z0, dtype=float).ravel()
                 + pi @ np.asarray(theta, dtype=float).ravel() / alpha)


# ---------------------------------------------------------------------------
# Recentering ball control (finite-cost baseline).


@dataclass(frozen=True)
class BallControlResult:
    """Monte Carlo estimate and a priori bound for the recenter control."""

    cost_mean: float
    cost_stderr: float
    bound: float
    beta_hat: float  # E[e^{-a tau}], tau = driftless first exit from the ball
    beta_stderr: float
    beta_observed: float  # same statistic over the simulated (drifted) cycles
    c_r: float  # r * sum of witness-control norms
    y0_cost: float  # v'Y(0) paid for the initial jump to the center
    y0_norm: float
    sup_h: float
    v_norm: float
    n_cycles: int
    n_paths: int
    path_costs: np.ndarray | None = None
    path_cycles: np.ndarray | None = None


def _exit_discount_driftless(Sigma, radius, alpha, dt, n_excursions, gen,
                             max_steps) -> tuple[float, float]:
    """MC estimate of E[e^{-a tau}] for the driftless first exit from
    the centered ball of the given radius."""
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    m = Sigma.shape[0]
    Lsq = np.linalg.cholesky(Sigma) * math.sqrt(dt)
    pos = np.zeros((n_excursions, m))
    disc = np.zeros(n_excursions)
    alive = np.ones(n_excursions, dtype=bool)
    decay = math.exp(-alpha * dt)
    eat = 1.0
    r2 = float(radius) ** 2
    for _ in range(max_steps):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        pos[idx] += gen.standard_normal((idx.size, m)) @ Lsq.T
        eat *= decay
        out = np.einsum("ij,ij->i", pos[idx], pos[idx]) > r2
        exited = idx[out]
        disc[exited] = eat
        alive[exited] = False
    if np.any(alive):
        # unfinished excursions contribute at most the current discount;
        # leaving them at 0 under-estimates beta, so refuse instead
        raise RuntimeError(
            f"{int(np.sum(alive))} exit excursions did not finish in "
            f"{max_steps} steps; enlarge the horizon or the step"
        )
    return float(np.mean(disc)), float(np.std(disc) / math.sqrt(n_excursions))


def baseline_ball_control(data: NetworkData, center, radius, grid: TimeGrid,
                          seed, n_paths: int, backend=None) -> BallControlResult:
    """Simulate the jump-to-center control and its a priori cost bound.

    The control moves the state to the ball center at time zero, lets it
    follow the uncontrolled increments until it exits the ball, then
    jumps back to the center, paying each displacement through the
    full-displacement witness controls.  The reported bound is
    sup|h|/alpha + |v| (|Y(0)| + C(r) beta/(1-beta)) with
    C(r) = r * sum of witness norms and beta estimated from driftless
    exit excursions.
    """
    center = np.asarray(center, dtype=float).ravel()
    radius = float(radius)
    grid.check_resolution(data.alpha)
    if center.shape != (data.m,):
        raise ValueError(f"center must have dimension {data.m}")
    # ball strictly inside the state set: every face cleared by r
    A, b = data.Z.A, data.Z.b
    row_norms = np.linalg.norm(A, axis=1)
    clearance = b - A @ center - radius * row_norms
    if np.min(clearance) < 1e-9:
        i = int(np.argmin(clearance))
        raise ValueError(
            f"ball(center, r={radius}) is not interior to the state set: "
            f"face {i} cleared by {clearance[i]:.3e}"
        )
    ok, witnesses = check_full_displacement(data.R, data.K)
    if not ok:
        raise ValueError("full displacement fails; ball control undefined")
    wit = np.asarray(witnesses, dtype=float)  # (2m, n_ctrl), +e_i then -e_i
    norms = np.linalg.norm(wit, axis=1)
    c_r = radius * float(np.sum(norms))
    vplus = wit[: data.m] @ data.v
    vminus = wit[data.m:] @ data.v

    x0 = center - data.z0
    Y0 = (np.maximum(x0, 0.0) @ wit[: data.m]
          + np.maximum(-x0, 0.0) @ wit[data.m:])
    y0_cost = float(data.v @ Y0)
    y0_norm = float(np.linalg.norm(Y0))

    chol = np.linalg.cholesky(data.Sigma)
    hold, st, sum_tau, ncyc = ball_costs(
        grid.n_steps, grid.dt, data.theta, chol, center, radius, data.alpha,
        data.h.Q, data.h.c, data.h.c0, vplus, vminus,
        seed, range(n_paths), backend=backend,
    )
    costs = hold + y0_cost + st
    cost_mean = float(np.mean(costs))
    cost_stderr = float(np.std(costs) / math.sqrt(n_paths))

    n_exc = max(1000, n_paths)
    gen = path_generator(seed, n_paths, ROLE_BALL)  # index past the cost paths
    # expected exit time ~ r^2 / tr(Sigma); allow a wide multiple of it
    tr = float(np.trace(data.Sigma))
    max_steps = int(500.0 * max(1.0, radius**2 / tr) / grid.dt)
    beta_hat, beta_se = _exit_discount_driftless(
        data.Sigma, radius, data.alpha, grid.dt, n_exc, gen, max_steps
    )
    total_cycles = int(np.sum(ncyc))
    beta_obs = float(np.sum(sum_tau) / total_cycles) if total_cycles else 0.0

    sup_h = quadratic_abs_bound(data.h, data.Z.bbox_lo, data.Z.bbox_hi)
    v_norm = float(np.linalg.norm(data.v))
    bound = sup_h / data.alpha + v_norm * (
        y0_norm + c_r * beta_hat / (1.0 - beta_hat)
    )
    return BallControlResult(
        cost_mean=cost_mean, cost_stderr=cost_stderr, bound=bound,
        beta_hat=beta_hat, beta_stderr=beta_se, beta_observed=beta_obs,
        c_r=c_r, y0_cost=y0_cost, y0_norm=y0_norm, sup_h=sup_h,
        v_norm=v_norm, n_cycles=total_cycles, n_paths=n_paths,
        path_costs=costs, path_cycles=ncyc,
    )
