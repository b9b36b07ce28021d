"""Workload reduction of a Brownian network control instance.

Given the flow matrix R, constraint matrix K and cost vector v, this
module computes the costless-control null space N = {y : Ky = 0}, the
reversible-displacement space RN, a workload matrix M whose rows span
the orthogonal complement of RN, extended pseudo-inverses of K and R,
the effort matrix G satisfying MR = GK, and dual prices (pi, kappa)
with v' = pi'R + kappa'K.  Together these pieces map the original
control problem onto an equivalent lower-dimensional workload problem,
and map any compatible (state, cumulative-control) pair back to the
unique control that produces it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lp import OPTIMAL, solve_lp, LpProblem
from .model import NetworkData, ReducedNetworkData

__all__ = [
    "ReductionError",
    "WorkloadReduction",
    "null_space_basis",
    "reversible_basis",
    "workload_matrix",
    "pseudo_inverse_K",
    "pseudo_inverse_R",
    "effort_matrix_G",
    "dual_prices",
    "recover_control",
    "reduce_network",
]

# Relative singular-value cutoff for every rank decision in this module.
_EPS_RANK = 1e-10


def _svd_rank(s: np.ndarray) -> int:
    if s.size == 0:
        return 0
    return int(np.sum(s > _EPS_RANK * s[0]))


def null_space_basis(K) -> np.ndarray:
    """Orthonormal columns spanning {y : Ky = 0}.

    Returns an n x (n - rank K) array; empty second axis when K has full
    column rank.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    _, s, vh = np.linalg.svd(K)
    rank = _svd_rank(s)
    return vh[rank:].T.copy()


def reversible_basis(R, N_basis) -> np.ndarray:
    """Orthonormal columns spanning the column space of R @ N_basis."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    N_basis = np.asarray(N_basis, dtype=float)
    if N_basis.size == 0:
        return np.zeros((R.shape[0], 0))
    u, s, _ = np.linalg.svd(R @ N_basis)
    rank = _svd_rank(s)
    return u[:, :rank].copy()


class ReductionError(RuntimeError):
    """A reduction identity failed or an override was inconsistent."""


def workload_matrix(Rev_basis, m: int, override=None) -> np.ndarray:
    """Rows spanning the orthogonal complement of the reversible space.

    Without an override the rows are orthonormal and deterministic:
    columns of the projector I - Rev Rev' are orthogonalized in a
    column-pivoted order (largest remaining norm first, lowest index on
    ties) and each row is signed so its first nonzero entry is positive.
    An override matrix is accepted verbatim after checking that it has
    the right number of linearly independent rows, each orthogonal to
    the reversible space.
    """
    Rev_basis = np.asarray(Rev_basis, dtype=float)
    if Rev_basis.ndim != 2 or Rev_basis.shape[0] != m:
        raise ReductionError(f"Rev_basis must be {m} x dim, got {Rev_basis.shape}")
    d = m - Rev_basis.shape[1]

    if override is not None:
        M = np.atleast_2d(np.asarray(override, dtype=float))
        if M.shape != (d, m):
            raise ReductionError(
                f"workload matrix override must be {d} x {m}, got {M.shape}"
            )
        if d > 0 and _svd_rank(np.linalg.svd(M, compute_uv=False)) < d:
            raise ReductionError("workload matrix override rows are linearly dependent")
        if Rev_basis.shape[1] > 0:
            inner = M @ Rev_basis
            worst = np.unravel_index(np.argmax(np.abs(inner)), inner.shape)
            if abs(inner[worst]) > 1e-9:
                raise ReductionError(
                    "override row %d is not orthogonal to the reversible space: "
                    "inner product with basis column %d is %.3e"
                    % (worst[0], worst[1], inner[worst])
                )
        return M.copy()

    if d == 0:
        return np.zeros((0, m))
    # Candidate spanning vectors: columns of the orthogonal projector.
    P = np.eye(m) - Rev_basis @ Rev_basis.T
    cols = [P[:, j].copy() for j in range(m)]
    rows = []
    for _ in range(d):
        norms = [np.linalg.norm(c) for c in cols]
        j = int(np.argmax(norms))  # argmax takes the lowest index on ties
        q = cols[j] / norms[j]
        rows.append(q)
        cols = [c - (q @ c) * q for c in cols]
    M = np.array(rows)
    for i in range(d):
        lead = np.nonzero(np.abs(M[i]) > 1e-12)[0][0]
        if M[i, lead] < 0:
            M[i] = -M[i]
    return M


def pseudo_inverse_K(K) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of K.

    Acts as the inverse of K restricted to the orthogonal complement of
    its null space, and is zero on the orthogonal complement of the
    range of K.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    return np.linalg.pinv(K, rcond=_EPS_RANK)


def pseudo_inverse_R(R, N_basis, M) -> np.ndarray:
    """Right inverse of R restricted to the reversible space.

    Maps each reversible displacement delta to the costless control
    y in N with Ry = delta, and annihilates the workload directions
    (rows of M).  Built by pseudo-inverting R restricted to N, composing
    with the orthogonal projection onto the reversible space, and
    mapping back through N_basis.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    N_basis = np.asarray(N_basis, dtype=float)
    m = R.shape[0]
    if N_basis.size == 0:
        return np.zeros((R.shape[1], m))
    RN = R @ N_basis
    u, s, _ = np.linalg.svd(RN)
    rank = _svd_rank(s)
    proj = u[:, :rank] @ u[:, :rank].T  # orthogonal projector onto RN's column space
    return N_basis @ np.linalg.pinv(RN, rcond=_EPS_RANK) @ proj


def effort_matrix_G(M, R, Kdag, K=None) -> np.ndarray:
    """Effort matrix G = M R Kdag, the workload image of each control.

    When K is supplied the defining identity MR = GK is verified and a
    violation raises; for exact-rank inputs it cannot fail.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    G = M @ R @ Kdag
    if K is not None:
        K = np.atleast_2d(np.asarray(K, dtype=float))
        resid = _max_abs(M @ R - G @ K)
        tol = 1e-10 * (1.0 + _max_abs(R) + _max_abs(K))
        if resid > tol:
            raise ReductionError(
                f"effort matrix identity MR = GK failed: residual {resid:.3e}"
            )
    return G


def _max_abs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dual_prices(v, R, K, Rdag, Kdag, pi_override=None):
    """Prices (pi, kappa) decomposing the cost vector: v' = pi'R + kappa'K.

    Only the reversible-space component of pi is determined by the data
    (v'y = pi'Ry must hold for every costless control y); the canonical
    choice pi' = v'Rdag sets the complementary component to zero.  An
    override must agree with the forced component and then kappa is
    recovered by least squares.
    """
    v = np.asarray(v, dtype=float).ravel()
    R = np.atleast_2d(np.asarray(R, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    tol_forced = 1e-9 * (1.0 + _max_abs(v))

    if pi_override is None:
        pi = Rdag.T @ v
        kappa = Kdag.T @ (v - R.T @ pi)
    else:
        pi = np.asarray(pi_override, dtype=float).ravel()
        if pi.shape != (R.shape[0],):
            raise ReductionError(
                f"pi override must have length {R.shape[0]}, got {pi.shape}"
            )
        N_basis = null_space_basis(K)
        for j in range(N_basis.shape[1]):
            y = N_basis[:, j]
            resid = float(v @ y - pi @ (R @ y))
            if abs(resid) > tol_forced:
                raise ReductionError(
                    "pi override disagrees with the forced reversible component: "
                    "residual v'y - pi'Ry = %.3e on null-space basis vector %d"
                    % (resid, j)
                )
        kappa, *_ = np.linalg.lstsq(K.T, v - R.T @ pi, rcond=None)

    resid = _max_abs(v - R.T @ pi - K.T @ kappa)
    tol = 1e-10 * (1.0 + _max_abs(v))
    if resid > tol:
        raise ReductionError(
            "price identity v' = pi'R + kappa'K failed: residual %.3e "
            "(the cost vector is not decomposable; the no-arbitrage "
            "condition likely fails)" % resid
        )
    return pi, kappa


@dataclass(frozen=True)
class WorkloadReduction:
    """All algebraic pieces of the workload reduction.

    Carries the source matrices (R, K, v) alongside the derived ones so
    that control recovery is self-contained.  residuals holds the
    max-norm defects of the three defining identities (MR = GK,
    v' = pi'R + kappa'K, M Rev = 0), each of which must sit at
    round-off level.
    """

    N_basis: np.ndarray
    Rev_basis: np.ndarray
    M: np.ndarray
    d: int
    Kdag: np.ndarray
    Rdag: np.ndarray
    G: np.ndarray
    pi: np.ndarray
    kappa: np.ndarray
    R: np.ndarray
    K: np.ndarray
    v: np.ndarray
    residuals: dict = field(default_factory=dict)


def recover_control(x, u, red: WorkloadReduction) -> np.ndarray:
    """Unique control y* with Ry* = x and Ky* = u.

    Requires the compatibility condition Mx = Gu and u in the range of
    K; the result also prices out exactly: v'y* = pi'x + kappa'u.
    """
    x = np.asarray(x, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    scale = 1.0 + max(_max_abs(x), _max_abs(u))

    resid = _max_abs(red.M @ x - red.G @ u)
    if resid > 1e-8 * scale:
        raise ReductionError(
            f"compatibility condition Mx = Gu failed: residual {resid:.3e}"
        )
    yhat = red.Kdag @ u
    range_resid = _max_abs(red.K @ yhat - u)
    if range_resid > 1e-8 * scale:
        raise ReductionError(
            f"u is not in the range of K: residual {range_resid:.3e}"
        )
    y = yhat + red.Rdag @ (x - red.R @ yhat)

    r1 = _max_abs(red.K @ y - u)
    r2 = _max_abs(red.R @ y - x)
    r3 = abs(float(red.v @ y - red.pi @ x - red.kappa @ u))
    for name, r in (("Ky* = u", r1), ("Ry* = x", r2), ("v'y* = pi'x + kappa'u", r3)):
        if r > 1e-8 * scale:
            raise ReductionError(f"recovered control violates {name}: residual {r:.3e}")
    return y


def reduce_network(
    data: NetworkData, M_override=None, pi_override=None
) -> tuple[WorkloadReduction, ReducedNetworkData]:
    """Assemble the full workload reduction of a validated instance.

    Returns the algebraic reduction together with the reduced network
    data (w0, vartheta, Gamma, G and the workload state space; for
    d = 1 the interval [w_lo, w_hi] is computed by two LPs).
    """
    R, K, v = data.R, data.K, data.v
    N_basis = null_space_basis(K)
    Rev_basis = reversible_basis(R, N_basis)
    M = workload_matrix(Rev_basis, data.m, override=M_override)
    d = M.shape[0]
    if d + Rev_basis.shape[1] != data.m:
        raise ReductionError(
            f"dimension split failed: d={d} + dim Rev={Rev_basis.shape[1]} != m={data.m}"
        )
    Kdag = pseudo_inverse_K(K)
    Rdag = pseudo_inverse_R(R, N_basis, M)
    G = effort_matrix_G(M, R, Kdag, K=K)
    pi, kappa = dual_prices(v, R, K, Rdag, Kdag, pi_override=pi_override)

    scale = 1.0 + _max_abs(R) + _max_abs(K) + _max_abs(v)
    residuals = {
        "MR_GK": _max_abs(M @ R - G @ K),
        "price_identity": _max_abs(v - R.T @ pi - K.T @ kappa),
        "M_Rev": _max_abs(M @ Rev_basis),
    }
    bad = {k: r for k, r in residuals.items() if r > 1e-10 * scale}
    if bad:
        raise ReductionError(f"reduction identities above tolerance: {bad}")

    red = WorkloadReduction(
        N_basis=N_basis,
        Rev_basis=Rev_basis,
        M=M,
        d=d,
        Kdag=Kdag,
        Rdag=Rdag,
        G=G,
        pi=pi,
        kappa=kappa,
        R=R.copy(),
        K=K.copy(),
        v=v.copy(),
        residuals=residuals,
    )

    w0 = M @ data.z0
    vartheta = M @ data.theta
    Gamma = M @ data.Sigma @ M.T
    if d >= 1:
        try:
            np.linalg.cholesky(Gamma)
        except np.linalg.LinAlgError:
            raise ReductionError("workload covariance Gamma is not positive definite")

    w_lo = w_hi = None
    if d == 1:
        w_lo = _extreme_workload(M[0], data, minimize=True)
        w_hi = _extreme_workload(M[0], data, minimize=False)
    reduced = ReducedNetworkData(
        d=d, w0=w0, vartheta=vartheta, Gamma=Gamma, G=G, M=M, Z=data.Z,
        w_lo=w_lo, w_hi=w_hi,
    )
    return red, reduced


def _extreme_workload(m_row: np.ndarray, data: NetworkData, minimize: bool) -> float:
    c = m_row if minimize else -m_row
    out = solve_lp(LpProblem(c=c, A_ub=data.Z.A, b_ub=data.Z.b))
    if out.status != OPTIMAL:
        raise ReductionError(f"workload interval LP ended with status {out.status}")
    val = float(m_row @ out.x)
    return val
