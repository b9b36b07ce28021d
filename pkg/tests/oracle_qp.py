"""Brute-force fiber minimization used as an independent test oracle.

Solves min z'Qz + l'z over {Mz = w, Az <= b} by enumerating active sets:
for every subset of inequality rows, solve the equality-constrained KKT
system and keep the best primal-feasible, dual-feasible candidate.
Exponential in the number of rows, so only usable on tiny instances --
which is exactly what makes it independent of the production solver.
"""

from itertools import combinations

import numpy as np


def fiber_min_bruteforce(w, M, A, b, Q, lin):
    w = np.atleast_1d(np.asarray(w, dtype=float))
    M = np.atleast_2d(np.asarray(M, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    lin = np.asarray(lin, dtype=float).ravel()
    n = M.shape[1]
    H = Q + Q.T

    best = None
    for k in range(A.shape[0] + 1):
        for rows in combinations(range(A.shape[0]), k):
            C = np.vstack([M, A[list(rows)]]) if rows else M
            if np.linalg.matrix_rank(C) < C.shape[0]:
                continue
            kkt = np.block([
                [H, C.T],
                [C, np.zeros((C.shape[0], C.shape[0]))],
            ])
            rhs = np.concatenate([-lin, w, b[list(rows)]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            z = sol[:n]
            mu = sol[n + M.shape[0]:]
            if np.any(A @ z - b > 1e-9):
                continue
            if mu.size and np.min(mu) < -1e-9:
                continue
            val = float(z @ Q @ z + lin @ z)
            if best is None or val < best[1] - 1e-12:
                best = (z, val)
    if best is None:
        raise AssertionError("oracle found no KKT point; fiber empty?")
    return best
