"""LP certification of the structural assumptions on (R, K, v).

Two properties make a network instance workable: *full displacement*
(for every coordinate direction there is a constraint-feasible control
moving the state that way, so the attainable displacement cone is all
of R^m) and *no arbitrage* (no nonzero control is simultaneously
constraint-feasible, state-neutral and costless-or-profitable).  Both
are decided exactly by small LPs, as are the finiteness constants gamma
and eta used in cost tail bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, solve_lp

__all__ = [
    "AssumptionViolation",
    "AssumptionReport",
    "check_full_displacement",
    "check_no_arbitrage",
    "compute_gamma_eta",
    "check_assumptions",
    "NORM_NOTE",
]

NORM_NOTE = (
    "gamma and eta use the max norm in place of the Euclidean norm so every "
    "subproblem stays linear; positive homogeneity in the radius is exact for "
    "the surrogate, and the values bracket the Euclidean ones within "
    "dimension-dependent factors."
)

_WITNESS_TOL = 1e-8


class AssumptionViolation(RuntimeError):
    """An operation was run on an instance violating its precondition."""


def check_full_displacement(R, K):
    """Can feasible controls move the state in every signed direction?

    Runs 2m feasibility LPs, one per direction +-e(i).  Returns
    (ok, witnesses) where witnesses is the list of 2m controls ordered
    [+e1 .. +em, -e1 .. -em] when ok, else None.  The displacement cone
    {Ry : Ky >= 0} is closed under nonnegative combinations, so it is
    all of R^m exactly when it contains every +-e(i).
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    m, n = R.shape
    witnesses = []
    for sign in (1.0, -1.0):
        for i in range(m):
            target = np.zeros(m)
            target[i] = sign
            prob = LpProblem(
                c=np.zeros(n), A_eq=R, b_eq=target, A_ub=-K, b_ub=np.zeros(K.shape[0])
            )
            out = solve_lp(prob)
            if out.status == INFEASIBLE:
                return False, None
            if out.status != OPTIMAL:
                raise AssumptionViolation(
                    f"displacement LP for direction {sign:+.0f}e({i + 1}) "
                    f"ended with status {out.status}"
                )
            y = out.x
            if (
                np.max(np.abs(R @ y - target)) > _WITNESS_TOL
                or np.min(K @ y) < -_WITNESS_TOL
            ):
                raise AssumptionViolation(
                    "displacement witness failed verification "
                    f"for direction {sign:+.0f}e({i + 1})"
                )
            witnesses.append(y)
    return True, witnesses


def check_no_arbitrage(R, K, v):
    """Is the cone {y : Ky >= 0, Ry = 0, v'y <= 0} trivial?

    Decided by 2n LPs maximizing +-y_j over the cone intersected with
    the unit max-norm ball; the cone is {0} iff every optimum is zero.
    Returns (ok, ray) with ray a normalized nonzero cone element on
    failure, else None.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    v = np.asarray(v, dtype=float).ravel()
    m, n = R.shape
    A_ub = np.vstack([-K, v[None, :]])
    b_ub = np.zeros(K.shape[0] + 1)
    bounds = [(-1.0, 1.0)] * n
    for j in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[j] = -sign  # maximize sign * y_j
            out = solve_lp(LpProblem(c=c, A_eq=R, b_eq=np.zeros(m),
                                     A_ub=A_ub, b_ub=b_ub, bounds=bounds))
            if out.status != OPTIMAL:
                raise AssumptionViolation(
                    f"arbitrage LP for coordinate {j} ended with status {out.status}"
                )
            if -out.value > _WITNESS_TOL:
                ray = out.x / np.max(np.abs(out.x))
                if (
                    np.min(K @ ray) < -_WITNESS_TOL
                    or np.max(np.abs(R @ ray)) > _WITNESS_TOL
                    or float(v @ ray) > _WITNESS_TOL
                ):
                    raise AssumptionViolation("arbitrage ray failed verification")
                return False, ray
    return True, None


def compute_gamma_eta(R, K, v, radius: float = 1.0):
    """Finiteness constants of the control cost, max-norm variant.

    gamma = -min{v'y : Ky >= 0, |Ry|_inf <= radius} measures how
    profitable a bounded-displacement control can be; eta bounds the
    size |y|_inf of any such control that is also costless-or-
    profitable.  Both scale exactly linearly in the radius.  Requires
    the no-arbitrage condition; without it these programs are unbounded
    and an AssumptionViolation is raised.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    v = np.asarray(v, dtype=float).ravel()
    m, n = R.shape
    box = np.vstack([R, -R])
    box_b = np.full(2 * m, float(radius))

    A_ub = np.vstack([-K, box])
    b_ub = np.concatenate([np.zeros(K.shape[0]), box_b])
    out = solve_lp(LpProblem(c=v, A_ub=A_ub, b_ub=b_ub))
    if out.status == UNBOUNDED:
        raise AssumptionViolation(
            "gamma LP is unbounded: the no-arbitrage condition fails"
        )
    if out.status != OPTIMAL:
        raise AssumptionViolation(f"gamma LP ended with status {out.status}")
    gamma = max(0.0, -out.value)

    A_eta = np.vstack([A_ub, v[None, :]])
    b_eta = np.concatenate([b_ub, [0.0]])
    eta = 0.0
    for j in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[j] = -sign
            out = solve_lp(LpProblem(c=c, A_ub=A_eta, b_ub=b_eta))
            if out.status == UNBOUNDED:
                raise AssumptionViolation(
                    "eta LP is unbounded: the no-arbitrage condition fails"
                )
            if out.status != OPTIMAL:
                raise AssumptionViolation(f"eta LP ended with status {out.status}")
            eta = max(eta, -out.value)
    return gamma, eta


@dataclass(frozen=True)
class AssumptionReport:
    full_displacement: bool
    displacement_witnesses: list | None
    no_arbitrage: bool
    arbitrage_ray: np.ndarray | None
    gamma: float | None
    eta: float | None
    norm_note: str = NORM_NOTE

    @property
    def passed(self) -> bool:
        return self.full_displacement and self.no_arbitrage

    def __str__(self):
        lines = [
            f"full displacement: {'holds' if self.full_displacement else 'FAILS'}",
            f"no arbitrage:      {'holds' if self.no_arbitrage else 'FAILS'}",
        ]
        if self.arbitrage_ray is not None:
            lines.append(f"  arbitrage ray: {np.array2string(self.arbitrage_ray, precision=6)}")
        if self.gamma is not None:
            lines.append(f"gamma = {self.gamma:.6g}, eta = {self.eta:.6g}")
            lines.append(f"  ({self.norm_note})")
        return "\n".join(lines)


def check_assumptions(R, K, v) -> AssumptionReport:
    """Run both assumption checks and, when sound, the gamma/eta LPs."""
    disp_ok, witnesses = check_full_displacement(R, K)
    arb_ok, ray = check_no_arbitrage(R, K, v)
    gamma = eta = None
    if arb_ok:
        gamma, eta = compute_gamma_eta(R, K, v)
    return AssumptionReport(
        full_displacement=disp_ok,
        displacement_witnesses=witnesses,
        no_arbitrage=arb_ok,
        arbitrage_ray=ray,
        gamma=gamma,
        eta=eta,
    )
