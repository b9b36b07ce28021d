"""Hot per-path simulation kernels, in numba and numpy twin forms.

Every kernel exists twice: a scalar per-path loop compiled with numba
(fast path) and a numpy form vectorized across paths with the time loop
in Python (portable fallback).  The active form is chosen by the
WF_BACKEND environment variable ("numba" or "numpy"; default numba when
importable).  Both forms consume the same per-path counter-based random
streams in the same order and perform the same floating-point
operations in the same grouping, so their outputs are bit-identical.

Random streams: each path owns a Philox generator keyed by
(master seed, path index); independent noise roles within a path
(main workload noise, auxiliary extension noise, ball-control noise)
are separated by .jumped(role).  Identical (seed, path index, role)
always reproduces the identical stream, which is what makes
common-random-numbers policy comparisons exact.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None
    HAVE_NUMBA = False

__all__ = [
    "HAVE_NUMBA",
    "ROLE_MAIN",
    "ROLE_AUX",
    "ROLE_BALL",
    "active_backend",
    "worker_count",
    "path_generator",
    "regulator_path",
    "barrier_costs",
    "equivalence_costs",
    "equivalence_from_increments",
    "ball_costs",
]

ROLE_MAIN, ROLE_AUX, ROLE_BALL = 0, 1, 2

_BACKEND_ENV = "WF_BACKEND"
_THREADS_ENV = "WF_THREADS"
_CHUNK = 2048  # time-chunk length for the numpy backend's stream draws


def active_backend() -> str:
    """Resolve the kernel backend from WF_BACKEND (numba default)."""
    env = os.environ.get(_BACKEND_ENV, "").strip().lower()
    if env == "numpy":
        return "numpy"
    if env == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("WF_BACKEND=numba but numba is not importable")
        return "numba"
    if env:
        raise RuntimeError(f"unknown {_BACKEND_ENV} value {env!r}")
    return "numba" if HAVE_NUMBA else "numpy"


def worker_count(n_tasks: int) -> int:
    """Worker cap from WF_THREADS (default 1), clamped to the task count."""
    try:
        w = int(os.environ.get(_THREADS_ENV, "1"))
    except ValueError:
        w = 1
    return max(1, min(w, n_tasks))


def path_generator(seed: int, path_index: int, role: int = ROLE_MAIN) -> np.random.Generator:
    """Counter-based generator for one (path, noise-role) pair."""
    bg = np.random.Philox(key=[int(seed), int(path_index)])
    if role:
        bg = bg.jumped(role)
    return np.random.Generator(bg)


# ---------------------------------------------------------------------------
# Scalar kernel bodies.  Plain Python functions; numba-compiled lazily.
# The numpy batch forms below repeat the identical arithmetic with the
# path axis vectorized — any change here must be mirrored there.


def _interp(tab, lo, inv_step, x):
    # Uniform-grid linear interpolation, clamped to the table range.
    idx = (x - lo) * inv_step
    i = int(idx)
    top = tab.shape[0] - 2
    if i < 0:
        i = 0
    elif i > top:
        i = top
    return tab[i] + (tab[i + 1] - tab[i]) * (idx - i)


if HAVE_NUMBA:
    # compiled kernels may only call compiled helpers
    try:
        _interp = _numba.njit(cache=True, nogil=True)(_interp)
    except Exception:  # pragma: no cover
        _interp = _numba.njit(_interp)


def _regulator_fill(dchi, w0, lo, hi, W, L1, L2):
    W[0] = w0
    L1[0] = 0.0
    L2[0] = 0.0
    for k in range(dchi.shape[0]):
        raw = W[k] + dchi[k]
        dl1 = lo - raw if raw < lo else 0.0
        dl2 = raw - hi if raw > hi else 0.0
        W[k + 1] = raw + dl1 - dl2
        L1[k + 1] = L1[k] + dl1
        L2[k + 1] = L2[k] + dl2


def _barrier_scalar(gen, n_steps, mu_dt, sig_sqdt, w0, lo, hi, decay, dt,
                    tab_g, tab_lo, inv_step):
    # Reflected workload cost pieces for one path: left-Riemann holding
    # integral of gcheck(W) plus discounted jump-sums of the two
    # boundary pushing processes (time-0 clip included).
    dl1 = lo - w0 if w0 < lo else 0.0
    dl2 = w0 - hi if w0 > hi else 0.0
    W = w0 + dl1 - dl2
    st1 = dl1
    st2 = dl2
    hold = 0.0
    eat = 1.0
    for _ in range(n_steps):
        hold += eat * _interp(tab_g, tab_lo, inv_step, W) * dt
        raw = W + (mu_dt + sig_sqdt * gen.standard_normal())
        dl1 = lo - raw if raw < lo else 0.0
        dl2 = raw - hi if raw > hi else 0.0
        W = raw + dl1 - dl2
        eat *= decay
        st1 += eat * dl1
        st2 += eat * dl2
    return hold, st1, st2, W


def _equiv_scalar(gen_main, gen_aux, n_steps, mu_dt, sig_sqdt, sqdt, chi0,
                  lo, hi, decay, dt, tab_g, tab_h, tab_p, tab_lo, inv_step,
                  ell1, ell2, cchi, cB, ct, c0c):
    # One path of the coupled cost pair: the reduced-problem cost pieces
    # (gcheck holding, boundary jump-sums) and the original-problem cost
    # pieces (h(psi(W)) holding, jump-sum of v'Y), where every scalar
    # contraction of the lifted path is maintained incrementally:
    #   pi'X(t)  = cchi*chi(t) + cB.Btilde(t) + ct*t + c0c
    #   v'Y(t)   = pi'Z(t) - pi'X(t) + ell1*L1(t) + ell2*L2(t)
    # with pi'Z and h(Z) read from tables of the fiber selection.
    chi = chi0
    dl1 = lo - chi0 if chi0 < lo else 0.0
    dl2 = chi0 - hi if chi0 > hi else 0.0
    W = chi0 + dl1 - dl2
    l1 = dl1
    l2 = dl2
    st1 = dl1
    st2 = dl2
    bdot = 0.0
    piX = cchi * chi + bdot + c0c
    vy = _interp(tab_p, tab_lo, inv_step, W) - piX + ell1 * l1 + ell2 * l2
    st_vy = vy
    hold_g = 0.0
    hold_h = 0.0
    lr = 0.0
    eat = 1.0
    mA = cB.shape[0]
    for k in range(n_steps):
        hold_g += eat * _interp(tab_g, tab_lo, inv_step, W) * dt
        hold_h += eat * _interp(tab_h, tab_lo, inv_step, W) * dt
        lr += eat * piX * dt
        inc = mu_dt + sig_sqdt * gen_main.standard_normal()
        chi = chi + inc
        raw = W + inc
        for j in range(mA):
            bdot += cB[j] * (sqdt * gen_aux.standard_normal())
        dl1 = lo - raw if raw < lo else 0.0
        dl2 = raw - hi if raw > hi else 0.0
        W = raw + dl1 - dl2
        l1 += dl1
        l2 += dl2
        eat *= decay
        piX = cchi * chi + bdot + ct * ((k + 1) * dt) + c0c
        vy_new = _interp(tab_p, tab_lo, inv_step, W) - piX + ell1 * l1 + ell2 * l2
        st_vy += eat * (vy_new - vy)
        vy = vy_new
        st1 += eat * dl1
        st2 += eat * dl2
    endpoint = eat * (_interp(tab_p, tab_lo, inv_step, W) - piX)
    return hold_g, hold_h, st_vy, st1, st2, lr, endpoint, W, l1, l2


def _ball_scalar(gen, n_steps, theta_dt, chol_sqdt, c0, r2, decay, dt,
                 Q, qc, qc0, vplus, vminus):
    # Recentering jump control for one path: hold h(Z) while Z follows
    # the Brownian increments inside the ball, jump back to the center
    # on exit and pay the assembled displacement cost at the jump time.
    m = c0.shape[0]
    z = c0.copy()
    znew = np.empty(m)
    xi = np.empty(m)
    hold = 0.0
    st = 0.0
    eat = 1.0
    cyc = 1.0
    sum_tau = 0.0
    ncyc = 0
    for _ in range(n_steps):
        hz = qc0
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += Q[i, j] * z[j]
            hz += z[i] * acc + qc[i] * z[i]
        hold += eat * hz * dt
        for j in range(m):
            xi[j] = gen.standard_normal()
        d2 = 0.0
        for i in range(m):
            acc = theta_dt[i]
            for j in range(m):
                acc += chol_sqdt[i, j] * xi[j]
            znew[i] = z[i] + acc
            diff = znew[i] - c0[i]
            d2 += diff * diff
        eat *= decay
        cyc *= decay
        if d2 > r2:
            cost = 0.0
            for i in range(m):
                x = c0[i] - znew[i]
                if x >= 0.0:
                    cost += x * vplus[i]
                else:
                    cost -= x * vminus[i]
            st += eat * cost
            sum_tau += cyc
            ncyc += 1
            cyc = 1.0
            for i in range(m):
                z[i] = c0[i]
        else:
            for i in range(m):
                z[i] = znew[i]
    return hold, st, sum_tau, ncyc


_NB_CACHE: dict[str, object] = {}


def _nb(name: str):
    """Lazily numba-compile one of the scalar bodies above."""
    fn = _NB_CACHE.get(name)
    if fn is None:
        fn = _nb_jit(globals()[name])
        _NB_CACHE[name] = fn
    return fn


def _nb_jit(pyfunc):
    try:
        return _numba.njit(cache=True, nogil=True)(pyfunc)
    except Exception:  # cache/nogil can fail on exotic setups; stay correct
        return _numba.njit(pyfunc)


# ---------------------------------------------------------------------------
# numpy batch forms.  Time loop in Python, path axis vectorized; random
# numbers drawn per path in time chunks so each path consumes exactly
# the stream the scalar kernels would.


def _draw_chunks(gens, n_steps, shape_tail=()):
    """Yield per-chunk standard-normal draws of shape (paths, L, *tail)."""
    done = 0
    P = len(gens)
    while done < n_steps:
        L = min(_CHUNK, n_steps - done)
        out = np.empty((P, L) + shape_tail)
        for i, g in enumerate(gens):
            out[i] = g.standard_normal((L,) + shape_tail)
        done += L
        yield out


def _barrier_numpy(gens, n_steps, mu_dt, sig_sqdt, w0, lo, hi, decay, dt,
                   tab_g, tab_lo, inv_step):
    P = len(gens)
    w0v = np.full(P, float(w0))
    dl1 = np.maximum(lo - w0v, 0.0)
    dl2 = np.maximum(w0v - hi, 0.0)
    W = w0v + dl1 - dl2
    st1 = dl1
    st2 = dl2
    hold = np.zeros(P)
    eat = 1.0
    top = tab_g.shape[0] - 2
    for xi in _draw_chunks(gens, n_steps):
        inc = mu_dt + sig_sqdt * xi
        for k in range(inc.shape[1]):
            idx = (W - tab_lo) * inv_step
            i = np.clip(idx.astype(np.int64), 0, top)
            gW = tab_g[i] + (tab_g[i + 1] - tab_g[i]) * (idx - i)
            hold += eat * gW * dt
            raw = W + inc[:, k]
            dl1 = np.maximum(lo - raw, 0.0)
            dl2 = np.maximum(raw - hi, 0.0)
            W = raw + dl1 - dl2
            eat *= decay
            st1 += eat * dl1
            st2 += eat * dl2
    return hold, st1, st2, W


def _interp_vec(tab, lo, inv_step, x, top):
    idx = (x - lo) * inv_step
    i = np.clip(idx.astype(np.int64), 0, top)
    return tab[i] + (tab[i + 1] - tab[i]) * (idx - i)


def _equiv_numpy_steps(state, inc, dB, k_offset, lo, hi, decay, dt,
                       tab_g, tab_h, tab_p, tab_lo, inv_step,
                       ell1, ell2, cchi, cB, ct, c0c):
    """Advance the batched equivalence recursion by one chunk in place."""
    top = tab_g.shape[0] - 2
    for k in range(inc.shape[1]):
        state["hold_g"] += state["eat"] * _interp_vec(tab_g, tab_lo, inv_step, state["W"], top) * dt
        state["hold_h"] += state["eat"] * _interp_vec(tab_h, tab_lo, inv_step, state["W"], top) * dt
        state["lr"] += state["eat"] * state["piX"] * dt
        state["chi"] = state["chi"] + inc[:, k]
        raw = state["W"] + inc[:, k]
        for j in range(cB.shape[0]):
            state["bdot"] += cB[j] * dB[:, k, j]
        dl1 = np.maximum(lo - raw, 0.0)
        dl2 = np.maximum(raw - hi, 0.0)
        state["W"] = raw + dl1 - dl2
        state["l1"] += dl1
        state["l2"] += dl2
        state["eat"] *= decay
        state["piX"] = cchi * state["chi"] + state["bdot"] + ct * ((k_offset + k + 1) * dt) + c0c
        vy_new = (_interp_vec(tab_p, tab_lo, inv_step, state["W"], top)
                  - state["piX"] + ell1 * state["l1"] + ell2 * state["l2"])
        state["st_vy"] += state["eat"] * (vy_new - state["vy"])
        state["vy"] = vy_new
        state["st1"] += state["eat"] * dl1
        state["st2"] += state["eat"] * dl2


def _equiv_state(P, chi0, lo, hi, tab_p, tab_lo, inv_step, ell1, ell2, cchi, c0c):
    chi = np.full(P, float(chi0))
    dl1 = np.maximum(lo - chi, 0.0)
    dl2 = np.maximum(chi - hi, 0.0)
    W = chi + dl1 - dl2
    piX = cchi * chi + 0.0 + c0c
    top = tab_p.shape[0] - 2
    vy = _interp_vec(tab_p, tab_lo, inv_step, W, top) - piX + ell1 * dl1 + ell2 * dl2
    return {
        "chi": chi, "W": W, "l1": dl1.copy(), "l2": dl2.copy(),
        "st1": dl1.copy(), "st2": dl2.copy(), "bdot": np.zeros(P),
        "piX": piX, "vy": vy, "st_vy": vy.copy(),
        "hold_g": np.zeros(P), "hold_h": np.zeros(P), "lr": np.zeros(P),
        "eat": 1.0,
    }


def _equiv_finish(state, tab_p, tab_lo, inv_step):
    top = tab_p.shape[0] - 2
    endpoint = state["eat"] * (
        _interp_vec(tab_p, tab_lo, inv_step, state["W"], top) - state["piX"]
    )
    return {
        "hold_g": state["hold_g"], "hold_h": state["hold_h"],
        "st_vy": state["st_vy"], "st1": state["st1"], "st2": state["st2"],
        "lr": state["lr"], "endpoint": endpoint,
        "W_T": state["W"], "L1_T": state["l1"], "L2_T": state["l2"],
    }


def _ball_numpy(gens, n_steps, theta_dt, chol_sqdt, c0, r2, decay, dt,
                Q, qc, qc0, vplus, vminus):
    P = len(gens)
    m = c0.shape[0]
    Z = np.tile(c0, (P, 1))
    hold = np.zeros(P)
    st = np.zeros(P)
    sum_tau = np.zeros(P)
    ncyc = np.zeros(P, dtype=np.int64)
    cyc = np.ones(P)
    eat = 1.0
    for Xi in _draw_chunks(gens, n_steps, shape_tail=(m,)):
        for k in range(Xi.shape[1]):
            hz = np.full(P, qc0)
            for i in range(m):
                acc = np.zeros(P)
                for j in range(m):
                    acc += Q[i, j] * Z[:, j]
                hz += Z[:, i] * acc + qc[i] * Z[:, i]
            hold += eat * hz * dt
            Znew = np.empty_like(Z)
            d2 = np.zeros(P)
            for i in range(m):
                acc = np.full(P, theta_dt[i])
                for j in range(m):
                    acc += chol_sqdt[i, j] * Xi[:, k, j]
                Znew[:, i] = Z[:, i] + acc
                diff = Znew[:, i] - c0[i]
                d2 += diff * diff
            eat *= decay
            cyc *= decay
            out = d2 > r2
            if np.any(out):
                cost = np.zeros(P)
                for i in range(m):
                    x = c0[i] - Znew[:, i]
                    cost += np.where(x >= 0.0, x * vplus[i], -x * vminus[i])
                st[out] += eat * cost[out]
                sum_tau[out] += cyc[out]
                ncyc[out] += 1
                cyc[out] = 1.0
                Znew[out] = c0
            Z = Znew
    return hold, st, sum_tau, ncyc


# ---------------------------------------------------------------------------
# Dispatchers.


def _resolve(backend):
    return backend if backend is not None else active_backend()


def regulator_path(dchi, w_start, lo, hi, backend=None):
    """Two-sided Skorokhod recursion over one increment path.

    Returns (W, L1, L2) arrays of length len(dchi) + 1 with W confined
    to [lo, hi], and L1 (L2) flat except when W sits at the lower
    (upper) boundary.
    """
    dchi = np.ascontiguousarray(dchi, dtype=float)
    n = dchi.shape[0]
    W = np.empty(n + 1)
    L1 = np.empty(n + 1)
    L2 = np.empty(n + 1)
    if _resolve(backend) == "numba":
        _nb("_regulator_fill")(dchi, float(w_start), float(lo), float(hi), W, L1, L2)
    else:
        _regulator_fill(dchi, float(w_start), float(lo), float(hi), W, L1, L2)
    return W, L1, L2


def _run_paths(worker, path_indices):
    """Run a per-path callable sequentially or on a small thread pool."""
    n = len(path_indices)
    workers = worker_count(n)
    if workers == 1:
        return [worker(idx) for idx in path_indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, path_indices))


def barrier_costs(n_steps, dt, mu, sig, alpha, w0, lo, hi,
                  tab_g, tab_lo, tab_step, seed, path_indices, backend=None):
    """Reflected-workload cost pieces for a batch of paths.

    Returns per-path arrays (hold, st1, st2, W_T): the left-Riemann
    discounted holding integral of the tabulated gcheck, the discounted
    jump-sums of the lower/upper pushing processes, and the terminal
    workload.
    """
    n_steps = int(n_steps)
    mu_dt = float(mu) * dt
    sig_sqdt = float(sig) * math.sqrt(dt)
    decay = math.exp(-alpha * dt)
    inv_step = 1.0 / tab_step
    tab_g = np.ascontiguousarray(tab_g, dtype=float)
    args = (n_steps, mu_dt, sig_sqdt, float(w0), float(lo), float(hi),
            decay, float(dt), tab_g, float(tab_lo), inv_step)
    if _resolve(backend) == "numba":
        kern = _nb("_barrier_scalar")

        def worker(idx):
            return kern(path_generator(seed, idx, ROLE_MAIN), *args)

        rows = _run_paths(worker, list(path_indices))
        out = np.array(rows)
    else:
        gens = [path_generator(seed, i, ROLE_MAIN) for i in path_indices]
        out = np.column_stack(_barrier_numpy(gens, *args))
    return out[:, 0], out[:, 1], out[:, 2], out[:, 3]


def equivalence_costs(n_steps, dt, mu, sig, alpha, chi0, lo, hi,
                      tab_g, tab_h, tab_p, tab_lo, tab_step,
                      ell1, ell2, cchi, cB, ct, c0c,
                      seed, path_indices, backend=None):
    """Coupled original/reduced cost pieces for a batch of paths.

    Returns a dict of per-path arrays: hold_g, hold_h, st_vy, st1, st2,
    lr (left-Riemann integral of e^{-as} pi'X), endpoint
    (e^{-aT} pi'(Z-X)(T)), W_T, L1_T, L2_T.
    """
    n_steps = int(n_steps)
    mu_dt = float(mu) * dt
    sig_sqdt = float(sig) * math.sqrt(dt)
    sqdt = math.sqrt(dt)
    decay = math.exp(-alpha * dt)
    inv_step = 1.0 / tab_step
    tabs = tuple(np.ascontiguousarray(t, dtype=float) for t in (tab_g, tab_h, tab_p))
    cB = np.ascontiguousarray(cB, dtype=float)
    args = (n_steps, mu_dt, sig_sqdt, sqdt, float(chi0), float(lo), float(hi),
            decay, float(dt), *tabs, float(tab_lo), inv_step,
            float(ell1), float(ell2), float(cchi), cB, float(ct), float(c0c))
    names = ("hold_g", "hold_h", "st_vy", "st1", "st2", "lr", "endpoint",
             "W_T", "L1_T", "L2_T")
    if _resolve(backend) == "numba":
        kern = _nb("_equiv_scalar")

        def worker(idx):
            return kern(path_generator(seed, idx, ROLE_MAIN),
                        path_generator(seed, idx, ROLE_AUX), *args)

        rows = np.array(_run_paths(worker, list(path_indices)))
        return {name: rows[:, i] for i, name in enumerate(names)}

    gens_main = [path_generator(seed, i, ROLE_MAIN) for i in path_indices]
    gens_aux = [path_generator(seed, i, ROLE_AUX) for i in path_indices]
    P = len(gens_main)
    state = _equiv_state(P, chi0, lo, hi, tabs[2], tab_lo, inv_step,
                         ell1, ell2, cchi, c0c)
    done = 0
    main_iter = _draw_chunks(gens_main, n_steps)
    aux_iter = _draw_chunks(gens_aux, n_steps, shape_tail=(cB.shape[0],))
    for xi, xa in zip(main_iter, aux_iter):
        inc = mu_dt + sig_sqdt * xi
        dB = sqdt * xa
        _equiv_numpy_steps(state, inc, dB, done, lo, hi, decay, dt,
                           *tabs, tab_lo, inv_step, ell1, ell2, cchi, cB, ct, c0c)
        done += inc.shape[1]
    return _equiv_finish(state, tabs[2], tab_lo, inv_step)


def equivalence_from_increments(inc_main, dB_aux, dt, alpha, chi0, lo, hi,
                                tab_g, tab_h, tab_p, tab_lo, tab_step,
                                ell1, ell2, cchi, cB, ct, c0c):
    """Equivalence recursion driven by precomputed increments.

    inc_main has shape (paths, steps) and already includes drift;
    dB_aux has shape (paths, steps, aux_dim).  Used for step-size
    studies where the same Brownian path is re-run on coarsened grids.
    """
    inc_main = np.atleast_2d(np.asarray(inc_main, dtype=float))
    dB_aux = np.asarray(dB_aux, dtype=float)
    P, n = inc_main.shape
    decay = math.exp(-alpha * dt)
    inv_step = 1.0 / tab_step
    cB = np.ascontiguousarray(cB, dtype=float)
    tabs = tuple(np.ascontiguousarray(t, dtype=float) for t in (tab_g, tab_h, tab_p))
    state = _equiv_state(P, chi0, lo, hi, tabs[2], tab_lo, inv_step,
                         ell1, ell2, cchi, c0c)
    _equiv_numpy_steps(state, inc_main, dB_aux, 0, lo, hi, decay, dt,
                       *tabs, tab_lo, inv_step, ell1, ell2, cchi, cB, ct, c0c)
    return _equiv_finish(state, tabs[2], tab_lo, inv_step)


def ball_costs(n_steps, dt, theta, Sigma_chol, c0, radius, alpha,
               Q, qc, qc0, vplus, vminus, seed, path_indices, backend=None):
    """Recentering-control cost pieces for a batch of paths.

    Returns per-path arrays (hold, st_jump, sum_disc_tau, n_cycles):
    discounted holding integral, discounted jump-cost sum, the sum of
    e^{-a tau} over completed recenter cycles, and the cycle count.
    """
    n_steps = int(n_steps)
    theta_dt = np.ascontiguousarray(theta, dtype=float) * dt
    chol_sqdt = np.ascontiguousarray(Sigma_chol, dtype=float) * math.sqrt(dt)
    c0 = np.ascontiguousarray(c0, dtype=float)
    decay = math.exp(-alpha * dt)
    args = (n_steps, theta_dt, chol_sqdt, c0, float(radius) ** 2, decay, float(dt),
            np.ascontiguousarray(Q, dtype=float),
            np.ascontiguousarray(qc, dtype=float), float(qc0),
            np.ascontiguousarray(vplus, dtype=float),
            np.ascontiguousarray(vminus, dtype=float))
    if _resolve(backend) == "numba":
        kern = _nb("_ball_scalar")

        def worker(idx):
            return kern(path_generator(seed, idx, ROLE_BALL), *args)

        rows = np.array(_run_paths(worker, list(path_indices)))
    else:
        gens = [path_generator(seed, i, ROLE_BALL) for i in path_indices]
        rows = np.column_stack(_ball_numpy(gens, *args))
    return rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]
