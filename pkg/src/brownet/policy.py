"""Reduced-problem policy layer for one-dimensional workload.

Reduces the control modes to a cheapest up-mode and cheapest down-mode
pair (L1, L2), tabulates the fiber selection and effective cost on a
uniform workload grid, simulates and optimizes the double reflecting
barrier policy, translates reduced solutions back to full network
controls, and runs the coupled cost-equivalence study.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import barrier_costs, equivalence_costs, equivalence_from_increments, path_generator, ROLE_AUX, ROLE_MAIN
from .effective_cost import EffectiveCost, minimize_on_fiber
from .model import NetworkData, ReducedNetworkData
from .pathsim import PathBundle, TimeGrid, lift_control, offset_I, simulate_bm, two_sided_regulator
from .reduction import WorkloadReduction

__all__ = [
    "ControllabilityError",
    "ModeReduction",
    "mode_reduction",
    "BarrierPolicy",
    "PolicyTables",
    "build_policy_tables",
    "BarrierCostEstimate",
    "simulate_barrier_policy",
    "OptimizeResult",
    "optimize_barrier",
    "RbcpPath",
    "simulate_barrier_paths",
    "translate_policy_to_bcp",
    "EquivalenceResult",
    "run_equivalence",
    "OrderStudyResult",
    "equivalence_order_study",
]


class ControllabilityError(ValueError):
    """The scalar workload cannot be pushed in both directions."""


@dataclass(frozen=True)
class ModeReduction:
    """Cheapest up/down control modes for scalar workload.

    up_modes / down_modes are the 0-based indices achieving the minimal
    displacement price among modes pushing the workload up (G_k > 0)
    and down (G_k < 0); ell1 / ell2 are those prices.  up_map and
    down_map send a unit of L1 / L2 displacement to the full control
    vector, using the lowest-index minimizer.
    """

    up_modes: tuple[int, ...]
    down_modes: tuple[int, ...]
    ell1: float
    ell2: float
    up_map: np.ndarray
    down_map: np.ndarray


def mode_reduction(G, kappa) -> ModeReduction:
    """Pick the cheapest up- and down-pushing control modes.

    For each mode k, the price of a unit workload displacement is
    kappa_k / |G_k|; ties keep every minimizing mode but displacement is
    routed to the lowest-index one.
    """
    G = np.asarray(G, dtype=float).ravel()
    kappa = np.asarray(kappa, dtype=float).ravel()
    if G.shape != kappa.shape:
        raise ValueError("G and kappa must have matching length")
    p = G.shape[0]
    tol = 1e-12 * (1.0 + float(np.max(np.abs(G))))
    ups = np.flatnonzero(G > tol)
    downs = np.flatnonzero(G < -tol)
    if ups.size == 0 or downs.size == 0:
        missing = "upward" if ups.size == 0 else "downward"
        raise ControllabilityError(
            f"no control mode pushes the workload {missing}; the "
            "workload is not two-sided controllable and no barrier "
            "policy exists"
        )

    def pick(idx):
        ratios = kappa[idx] / np.abs(G[idx])
        best = float(np.min(ratios))
        keep = idx[ratios <= best + 1e-12 * (1.0 + abs(best))]
        return best, tuple(int(k) for k in keep)

    ell1, up_modes = pick(ups)
    ell2, down_modes = pick(downs)
    up_map = np.zeros(p)
    up_map[up_modes[0]] = 1.0 / G[up_modes[0]]
    down_map = np.zeros(p)
    down_map[down_modes[0]] = 1.0 / (-G[down_modes[0]])
    return ModeReduction(up_modes=up_modes, down_modes=down_modes,
                         ell1=ell1, ell2=ell2, up_map=up_map, down_map=down_map)


@dataclass(frozen=True)
class BarrierPolicy:
    """Double reflecting barrier on [lo, b_star] for scalar workload."""

    b_star: float
    lo: float = 0.0
    mode: ModeReduction | None = None

    def __post_init__(self):
        if not (math.isfinite(self.b_star) and self.b_star > self.lo):
            raise ValueError(f"need lo < b_star, got [{self.lo}, {self.b_star}]")


@dataclass(frozen=True)
class PolicyTables:
    """Fiber selection and effective cost on a uniform workload grid.

    Node identity gcheck = h_psi + alpha * pi_psi holds exactly (the
    gcheck column is constructed as that sum), so it survives linear
    interpolation at every point, which is what makes the coupled cost
    recursions consistent to round-off.
    """

    w_lo: float
    w_hi: float
    step: float
    psi: np.ndarray  # (nodes, m) fiber minimizers
    gcheck: np.ndarray  # (nodes,) effective holding cost
    h_psi: np.ndarray  # (nodes,) original holding cost along the selection
    pi_psi: np.ndarray  # (nodes,) dual price of the selection

    @property
    def nodes(self) -> np.ndarray:
        return self.w_lo + self.step * np.arange(self.gcheck.shape[0])

    def _interp(self, tab, w):
        idx = (np.asarray(w, dtype=float) - self.w_lo) / self.step
        i = np.clip(np.floor(idx).astype(np.int64), 0, tab.shape[0] - 2)
        return tab[i] + (tab[i + 1] - tab[i]) * (idx - i)

    def gcheck_at(self, w):
        return self._interp(self.gcheck, w)

    def h_psi_at(self, w):
        return self._interp(self.h_psi, w)

    def pi_psi_at(self, w):
        return self._interp(self.pi_psi, w)

    def psi_at(self, w):
        w = np.asarray(w, dtype=float)
        idx = (w - self.w_lo) / self.step
        i = np.clip(np.floor(idx).astype(np.int64), 0, self.psi.shape[0] - 2)
        frac = (idx - i)[..., None]
        return self.psi[i] + (self.psi[i + 1] - self.psi[i]) * frac


def build_policy_tables(data: NetworkData, red: WorkloadReduction,
                        reduced: ReducedNetworkData, n_nodes: int = 4201,
                        psi_fn=None) -> PolicyTables:
    """Tabulate the fiber selection on [w_lo, w_hi].

    psi_fn, when given, must map a workload value to a fiber minimizer
    (used for instances with a closed-form selection); otherwise each
    node is solved by the parametric QP.
    """
    if reduced.d != 1 or reduced.w_lo is None or reduced.w_hi is None:
        raise ValueError("tables require d = 1 with a computed workload interval")
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    w_lo, w_hi = float(reduced.w_lo), float(reduced.w_hi)
    step = (w_hi - w_lo) / (n_nodes - 1)
    nodes = w_lo + step * np.arange(n_nodes)
    nodes[-1] = w_hi  # guard the top node against accumulated round-off
    if psi_fn is not None:
        psi = np.array([np.asarray(psi_fn(w), dtype=float).ravel() for w in nodes])
    else:
        ec = EffectiveCost.from_parts(red.M, data.Z, data.h, data.alpha, red.pi)
        psi = np.empty((n_nodes, data.m))
        for i, w in enumerate(nodes):
            psi[i], _ = minimize_on_fiber(np.array([w]), ec)
    h_psi = np.asarray(data.h.evaluate(psi), dtype=float)
    pi_psi = psi @ red.pi
    gcheck = h_psi + data.alpha * pi_psi
    return PolicyTables(w_lo=w_lo, w_hi=w_hi, step=step, psi=psi,
                        gcheck=gcheck, h_psi=h_psi, pi_psi=pi_psi)


@dataclass(frozen=True)
class BarrierCostEstimate:
    """MC cost of a barrier policy with its truncation tail bounds."""

    mean: float
    stderr: float
    holding_mean: float
    push_lo_mean: float  # discounted jump-sum of L1, path average
    push_hi_mean: float
    tail_bound: float
    n_paths: int


def _barrier_pieces(reduced: ReducedNetworkData, tables: PolicyTables,
                    policy: BarrierPolicy, grid: TimeGrid, n_paths: int,
                    seed: int, alpha: float, backend=None):
    """Per-path (holding, L1 jump-sum, L2 jump-sum) for one barrier."""
    if reduced.d != 1:
        raise ValueError("barrier policies require d = 1")
    if reduced.w_hi is not None and policy.b_star > reduced.w_hi + 1e-12:
        raise ValueError(
            f"barrier {policy.b_star} exceeds the workload ceiling {reduced.w_hi}"
        )
    sig = float(np.linalg.cholesky(np.atleast_2d(reduced.Gamma))[0, 0])
    hold, st1, st2, _ = barrier_costs(
        grid.n_steps, grid.dt, float(reduced.vartheta[0]), sig, alpha,
        float(reduced.w0[0]), policy.lo, policy.b_star,
        tables.gcheck, tables.w_lo, tables.step,
        seed, range(n_paths), backend=backend,
    )
    return hold, st1, st2


def _barrier_tail(reduced, tables, policy, ell1, ell2, alpha, T) -> float:
    # Holding tail: sup gcheck over the barrier interval.  Control tail:
    # over any unit interval the pushing increment is at most the
    # barrier width plus the mean absolute free motion, so the
    # discounted post-horizon pushing cost is geometrically summable.
    top = np.searchsorted(tables.nodes, policy.b_star) + 1
    g_sup = float(np.max(np.abs(tables.gcheck[: top + 1])))
    e = math.exp(-alpha * T)
    gamma_var = float(np.atleast_2d(reduced.Gamma)[0, 0])
    flux = (policy.b_star - policy.lo) + math.sqrt(2.0 * gamma_var / math.pi) \
        + abs(float(reduced.vartheta[0]))
    return g_sup * e / alpha + (ell1 + ell2) * flux * e / (1.0 - math.exp(-alpha))


def simulate_barrier_policy(policy: BarrierPolicy, reduced: ReducedNetworkData,
                            tables: PolicyTables, grid: TimeGrid,
                            n_paths: int, seed: int, alpha: float,
                            ell1: float | None = None, ell2: float | None = None,
                            backend=None) -> BarrierCostEstimate:
    """Estimate the reduced-problem cost of one barrier policy.

    Per path the cost is the discounted holding integral of gcheck plus
    ell1/ell2 times the discounted jump-sums of the two pushing
    processes; ell values default to the policy's mode reduction.
    """
    grid.check_resolution(alpha)
    if ell1 is None or ell2 is None:
        if policy.mode is None:
            raise ValueError("need ell1/ell2 or a mode reduction on the policy")
        ell1, ell2 = policy.mode.ell1, policy.mode.ell2
    hold, st1, st2 = _barrier_pieces(reduced, tables, policy, grid,
                                     n_paths, seed, alpha, backend=backend)
    costs = hold + ell1 * st1 + ell2 * st2
    return BarrierCostEstimate(
        mean=float(np.mean(costs)),
        stderr=float(np.std(costs) / math.sqrt(n_paths)),
        holding_mean=float(np.mean(hold)),
        push_lo_mean=float(np.mean(st1)),
        push_hi_mean=float(np.mean(st2)),
        tail_bound=_barrier_tail(reduced, tables, policy, ell1, ell2,
                                 alpha, grid.horizon),
        n_paths=n_paths,
    )


@dataclass(frozen=True)
class OptimizeResult:
    """Outcome of the barrier search."""

    b_star: float
    cost: float
    stderr: float
    profile: tuple  # ((b, cost, stderr), ...) sorted by b
    warning: str | None = None


def optimize_barrier(reduced: ReducedNetworkData, tables: PolicyTables,
                     ell1: float, ell2: float, grid: TimeGrid,
                     n_paths: int, seed: int, alpha: float,
                     b_tol: float | None = None, bracket=None,
                     lo: float | None = None, backend=None,
                     eval_cache: dict | None = None) -> OptimizeResult:
    """Golden-section search for the upper barrier height.

    All candidate barriers are costed on the identical seed set (common
    random numbers), and the per-path simulation pieces do not depend on
    (ell1, ell2), so a shared eval_cache lets several price vectors
    reuse the same simulations — comparisons across parameter sets are
    then exact, not just low-variance.  The search scans a fixed coarse
    grid first (shared across calls) and refines the best cell by
    golden section until the bracket is within b_tol.
    """
    grid.check_resolution(alpha)
    if reduced.w_lo is None or reduced.w_hi is None:
        raise ValueError("optimizer requires a bounded workload interval")
    lo = float(reduced.w_lo) if lo is None else float(lo)
    w_hi = float(reduced.w_hi)
    if b_tol is None:
        b_tol = 0.02 * (w_hi - lo)
    if bracket is None:
        bracket = (lo + 0.5 * b_tol, w_hi)
    blo, bhi = float(bracket[0]), float(bracket[1])
    if not (lo < blo < bhi <= w_hi):
        raise ValueError(f"bracket ({blo}, {bhi}) outside ({lo}, {w_hi}]")
    cache = {} if eval_cache is None else eval_cache

    def pieces(b):
        key = round(b, 12)
        if key not in cache:
            pol = BarrierPolicy(b_star=b, lo=lo)
            cache[key] = _barrier_pieces(reduced, tables, pol, grid,
                                         n_paths, seed, alpha, backend=backend)
        return cache[key]

    evaluated = {}

    def cost(b):
        key = round(b, 12)
        if key not in evaluated:
            hold, st1, st2 = pieces(b)
            c = hold + ell1 * st1 + ell2 * st2
            evaluated[key] = (float(np.mean(c)),
                              float(np.std(c) / math.sqrt(n_paths)))
        return evaluated[key][0]

    # coarse shared scan
    n_scan = 17
    scan = np.linspace(blo, bhi, n_scan)
    scan_costs = [cost(b) for b in scan]
    k = int(np.argmin(scan_costs))
    glo = scan[max(0, k - 1)]
    ghi = scan[min(n_scan - 1, k + 1)]

    # golden section inside the best cell
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, c2 = float(glo), float(ghi)
    x1 = c2 - invphi * (c2 - a)
    x2 = a + invphi * (c2 - a)
    f1, f2 = cost(x1), cost(x2)
    while c2 - a > b_tol:
        if f1 <= f2:
            c2, x2, f2 = x2, x1, f1
            x1 = c2 - invphi * (c2 - a)
            f1 = cost(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (c2 - a)
            f2 = cost(x2)
    b_star = 0.5 * (a + c2)
    final_cost = cost(b_star)
    final_se = evaluated[round(b_star, 12)][1]

    profile = tuple(sorted((float(b), v[0], v[1]) for b, v in evaluated.items()))
    warning = _unimodality_warning(profile)
    if warning:
        warnings.warn(warning)
    return OptimizeResult(b_star=float(b_star), cost=final_cost,
                          stderr=final_se, profile=profile, warning=warning)


def _unimodality_warning(profile) -> str | None:
    """Detect a sampled profile that fails unimodality beyond MC noise."""
    costs = np.array([row[1] for row in profile])
    ses = np.array([row[2] for row in profile])
    k = int(np.argmin(costs))
    noise = 3.0 * float(np.max(ses, initial=0.0))
    bad_left = np.any(np.diff(costs[: k + 1]) > noise)
    bad_right = np.any(np.diff(costs[k:]) < -noise)
    if bad_left or bad_right:
        return ("sampled cost profile is not unimodal beyond MC noise; "
                "treating the bracket as widened — b* is approximate")
    return None


@dataclass
class RbcpPath:
    """One simulated reduced-problem path under a barrier policy."""

    chi: np.ndarray
    W: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    seed: int
    path_index: int


def simulate_barrier_paths(policy: BarrierPolicy, reduced: ReducedNetworkData,
                           grid: TimeGrid, seed: int, path_indices) -> list[RbcpPath]:
    """Full (chi, W, L1, L2) arrays for a set of barrier-policy paths.

    A start outside the barrier interval is handled by an initial jump
    recorded in L1/L2 at time zero.
    """
    if reduced.d != 1:
        raise ValueError("barrier policies require d = 1")
    w0 = float(reduced.w0[0])
    out = []
    dl1 = max(0.0, policy.lo - w0)
    dl2 = max(0.0, w0 - policy.b_star)
    for idx in path_indices:
        chi = simulate_bm(1, [w0], reduced.vartheta, reduced.Gamma,
                          grid, seed, idx)[:, 0]
        W, L1, L2 = two_sided_regulator(chi, policy.lo, policy.b_star,
                                        w0 + dl1 - dl2)
        if dl1 or dl2:
            L1 = L1 + dl1
            L2 = L2 + dl2
        out.append(RbcpPath(chi=chi, W=W, L1=L1, L2=L2,
                            seed=seed, path_index=idx))
    return out


def translate_policy_to_bcp(policy: BarrierPolicy, paths, data: NetworkData,
                            red: WorkloadReduction, psi, grid: TimeGrid) -> list[PathBundle]:
    """Rebuild full control bundles from reduced barrier paths.

    U distributes L1/L2 through the mode-reduction maps, then the lift
    reconstructs (Z, X, Y); the returned bundles carry L1/L2 along.
    """
    if policy.mode is None:
        raise ValueError("policy carries no mode reduction")
    up_map, down_map = policy.mode.up_map, policy.mode.down_map
    bundles = []
    for p in paths:
        U = np.outer(p.L1, up_map) + np.outer(p.L2, down_map)
        bundle = lift_control(U, p.W, p.chi, data, red, psi, grid,
                              p.seed, p.path_index)
        bundle.L1 = p.L1
        bundle.L2 = p.L2
        bundles.append(bundle)
    return bundles


# ---------------------------------------------------------------------------
# Coupled cost equivalence.


@dataclass(frozen=True)
class _EquivCoeffs:
    """Scalar contractions that let the kernels carry pi'X incrementally."""

    cchi: float
    cB: np.ndarray
    ct: float
    c0c: float
    mu: float
    sig: float
    chi0: float


def equivalence_coefficients(data: NetworkData, red: WorkloadReduction,
                             reduced: ReducedNetworkData) -> _EquivCoeffs:
    """Contract pi'X(t) = cchi chi(t) + cB.Btilde(t) + ct t + c0c.

    Derived from the workload-extension construction: X solves
    (M; N) X = (chi; chitilde) with chitilde the regression of chi plus
    auxiliary noise, so pi'X is an affine function of (chi, Btilde, t).
    """
    if reduced.d != 1:
        raise ValueError("equivalence kernel requires d = 1")
    M = red.M
    m = M.shape[1]
    N = red.Rev_basis.T
    A = np.vstack([M, N])
    pA = np.linalg.solve(A.T, red.pi)
    q = pA[1:]
    Gam = float(reduced.Gamma[0, 0])
    Pi = (M @ data.Sigma @ N.T).ravel()
    P_col = Pi / Gam
    S = N @ data.Sigma @ N.T - np.outer(Pi, Pi) / Gam
    S = 0.5 * (S + S.T)
    if S.shape[0]:
        try:
            At = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            jitter = 1e-12 * max(1.0, float(np.max(np.abs(S))))
            At = np.linalg.cholesky(S + jitter * np.eye(S.shape[0]))
        cB = At.T @ q
    else:
        cB = np.zeros(0)
    qP = float(q @ P_col)
    w0 = float(reduced.w0[0])
    cchi = float(pA[0] + qP)
    ct = float(q @ (N @ data.theta)) - qP * float(reduced.vartheta[0])
    c0c = float(q @ (N @ data.z0)) - qP * w0
    pix0 = cchi * w0 + c0c
    expect = float(red.pi @ data.z0)
    if abs(pix0 - expect) > 1e-9 * (1.0 + abs(expect)):
        raise RuntimeError(
            f"contraction check failed: pi'X(0) = {pix0}, expected {expect}"
        )
    sig = float(np.linalg.cholesky(np.atleast_2d(reduced.Gamma))[0, 0])
    return _EquivCoeffs(cchi=cchi, cB=cB, ct=ct, c0c=c0c,
                        mu=float(reduced.vartheta[0]), sig=sig, chi0=w0)


@dataclass(frozen=True)
class EquivalenceResult:
    """Coupled estimates of both cost levels on common paths.

    residual_mean is the average pathwise defect
    zeta(T) + a int e^{-as} pi'X ds - zetacheck(T); endpoint_mean the
    average of its dominant horizon term e^{-aT} pi'(Z - X)(T).
    """

    J: float
    J_stderr: float
    J_check: float
    J_check_stderr: float
    offset: float
    gap: float  # J + I - J_check
    gap_stderr: float  # stderr of the coupled per-path difference
    residual_mean: float
    residual_abs_mean: float
    endpoint_mean: float
    n_paths: int
    dt: float
    horizon: float


def _equiv_tables_args(tables: PolicyTables):
    return (tables.gcheck, tables.h_psi, tables.pi_psi, tables.w_lo, tables.step)


def run_equivalence(data: NetworkData, red: WorkloadReduction,
                    reduced: ReducedNetworkData, tables: PolicyTables,
                    policy: BarrierPolicy, grid: TimeGrid, n_paths: int,
                    seed: int, backend=None) -> EquivalenceResult:
    """Estimate both cost levels on identical paths under one policy.

    Per path the kernel carries the full-problem cost (holding h along
    the selection plus the v'Y jump-sum) and the reduced cost (gcheck
    holding plus priced pushing) simultaneously, so the gap estimate is
    a coupled, low-variance statistic.
    """
    grid.check_resolution(data.alpha)
    if policy.mode is None:
        raise ValueError("policy carries no mode reduction")
    co = equivalence_coefficients(data, red, reduced)
    ell1, ell2 = policy.mode.ell1, policy.mode.ell2
    res = equivalence_costs(
        grid.n_steps, grid.dt, co.mu, co.sig, data.alpha, co.chi0,
        policy.lo, policy.b_star, *_equiv_tables_args(tables),
        ell1, ell2, co.cchi, co.cB, co.ct, co.c0c,
        seed, range(n_paths), backend=backend,
    )
    zeta = res["hold_h"] + res["st_vy"]
    zcheck = res["hold_g"] + ell1 * res["st1"] + ell2 * res["st2"]
    resid = zeta + data.alpha * res["lr"] - zcheck
    I = offset_I(red.pi, data.z0, data.theta, data.alpha)
    diff = zeta - zcheck
    return EquivalenceResult(
        J=float(np.mean(zeta)),
        J_stderr=float(np.std(zeta) / math.sqrt(n_paths)),
        J_check=float(np.mean(zcheck)),
        J_check_stderr=float(np.std(zcheck) / math.sqrt(n_paths)),
        offset=I,
        gap=float(np.mean(zeta) + I - np.mean(zcheck)),
        gap_stderr=float(np.std(diff) / math.sqrt(n_paths)),
        residual_mean=float(np.mean(resid)),
        residual_abs_mean=float(np.mean(np.abs(resid))),
        endpoint_mean=float(np.mean(res["endpoint"])),
        n_paths=n_paths,
        dt=grid.dt,
        horizon=grid.horizon,
    )


@dataclass(frozen=True)
class OrderStudyResult:
    """Pathwise identity defect vs step size, with the fitted order."""

    dts: tuple
    residuals: tuple  # mean |defect| per level, horizon term removed
    slope: float


def equivalence_order_study(data: NetworkData, red: WorkloadReduction,
                            reduced: ReducedNetworkData, tables: PolicyTables,
                            policy: BarrierPolicy, dts, horizon: float,
                            n_paths: int, seed: int) -> OrderStudyResult:
    """Re-run the identity on dyadically coarsened copies of one path set.

    The same Brownian paths are simulated at every step size (coarse
    increments are sums of fine ones), so the defect decay measures pure
    discretization error.  The horizon term e^{-aT} pi'(Z-X)(T) — which
    does not vanish with the step — is subtracted before fitting.
    """
    if policy.mode is None:
        raise ValueError("policy carries no mode reduction")
    dts = sorted(float(d) for d in dts)
    fine = dts[0]
    n_fine = round(horizon / fine)
    if abs(n_fine * fine - horizon) > 1e-9:
        raise ValueError("horizon must be a multiple of the finest step")
    factors = []
    for d in dts:
        f = round(d / fine)
        if abs(f * fine - d) > 1e-12:
            raise ValueError(f"step {d} is not an integer multiple of {fine}")
        if n_fine % f:
            raise ValueError(f"step {d} does not divide the horizon evenly")
        factors.append(f)
    co = equivalence_coefficients(data, red, reduced)
    ell1, ell2 = policy.mode.ell1, policy.mode.ell2
    mA = co.cB.shape[0]
    sqf = math.sqrt(fine)
    inc = np.empty((n_paths, n_fine))
    dB = np.empty((n_paths, n_fine, mA))
    for i in range(n_paths):
        gm = path_generator(seed, i, ROLE_MAIN)
        ga = path_generator(seed, i, ROLE_AUX)
        inc[i] = co.mu * fine + (co.sig * sqf) * gm.standard_normal(n_fine)
        dB[i] = sqf * ga.standard_normal((n_fine, mA))
    vals = []
    for d, f in zip(dts, factors):
        inc_l = inc.reshape(n_paths, -1, f).sum(axis=2)
        dB_l = dB.reshape(n_paths, -1, f, mA).sum(axis=2)
        res = equivalence_from_increments(
            inc_l, dB_l, d, data.alpha, co.chi0, policy.lo, policy.b_star,
            *_equiv_tables_args(tables), ell1, ell2,
            co.cchi, co.cB, co.ct, co.c0c,
        )
        zeta = res["hold_h"] + res["st_vy"]
        zcheck = res["hold_g"] + ell1 * res["st1"] + ell2 * res["st2"]
        defect = zeta + data.alpha * res["lr"] - zcheck - res["endpoint"]
        vals.append(float(np.mean(np.abs(defect))))
    slope = float(np.polyfit(np.log(dts), np.log(vals), 1)[0])
    return OrderStudyResult(dts=tuple(dts), residuals=tuple(vals), slope=slope)
