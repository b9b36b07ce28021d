"""Benchmark the simulation kernels: jit backend vs pure-NumPy fallback.

Both routes consume the identical Philox streams, so before timing we
assert their outputs match bit for bit — the fallback is a drop-in
replacement, not an approximation.  Usage:

    python3 benchmarks/bench_backends.py [--paths N] [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from brownet import _kernels as K
from brownet.model import two_server_network
from brownet.policy import build_policy_tables, mode_reduction
from brownet.reduction import reduce_network


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def flatten(out):
    if isinstance(out, dict):
        return np.concatenate([np.ravel(v) for v in out.values()])
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(v) for v in out])
    return np.ravel(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=64)
    ap.add_argument("--steps", type=int, default=40_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    data = two_server_network(v4=1.2)
    red, reduced = reduce_network(data, M_override=[[2.0, 1.0]],
                                  pi_override=[1.0, 0.5])
    tables = build_policy_tables(data, red, reduced, n_nodes=301)
    mode = mode_reduction(red.G, red.kappa)
    alpha, dt = data.alpha, 1e-3
    mu = float(reduced.vartheta[0])
    sig = float(np.sqrt(reduced.Gamma[0, 0]))
    idx = range(args.paths)

    cases = {
        "regulator": lambda backend: K.regulator_path(
            np.asarray(K.path_generator(7, 0).standard_normal(args.steps)),
            5.0, 0.0, 10.0, backend=backend),
        "barrier": lambda backend: K.barrier_costs(
            args.steps, dt, mu, sig, alpha, 0.0, 0.0, 8.0,
            tables.gcheck, tables.w_lo, tables.step, 7, idx, backend=backend),
        "equivalence": lambda backend: K.equivalence_costs(
            args.steps, dt, mu, sig, alpha, 0.0, 0.0, 8.0,
            tables.gcheck, tables.h_psi, tables.pi_psi,
            tables.w_lo, tables.step, mode.ell1, mode.ell2,
            0.5, np.zeros(1), 0.0, 0.0, 7, idx, backend=backend),
        "ball": lambda backend: K.ball_costs(
            args.steps, dt, data.theta, np.linalg.cholesky(data.Sigma),
            np.array([5.0, 5.0]), 3.0, alpha, data.h.Q, data.h.c, data.h.c0,
            np.ones(2), np.ones(2), 7, idx, backend=backend),
    }

    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"paths={args.paths} steps={args.steps} "
          f"(best of {args.repeats} runs, jit warmup excluded)")
    print(f"{'kernel':<12} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    for name, fn in cases.items():
        fn("numba")  # compile before the timed runs
        t_nb, out_nb = best_of(lambda: fn("numba"), args.repeats)
        t_np, out_np = best_of(lambda: fn("numpy"), args.repeats)
        if not np.array_equal(flatten(out_nb), flatten(out_np)):
            raise SystemExit(f"{name}: backends disagree — refusing to time")
        print(f"{name:<12} {t_nb:>9.3f}s {t_np:>9.3f}s {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
