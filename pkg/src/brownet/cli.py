"""Command-line front end for the workload-reduction pipeline.

Commands
    check           validate an instance and test both structural assumptions
    reduce          compute the workload reduction, write reduction.json
    effcost         tabulate effective cost and selection, write effcost.csv
    counterexample  trace the quasiconvex fiber minimizer across its jump
    simulate        run a policy on sampled paths, write paths_summary.csv
    optimize        search the reflecting-barrier level, write profile.csv
    equivalence     reduce -> barrier policy -> lift, write equivalence.csv

Exit codes: 0 success, 1 assumption-check failure, 2 input error.  All
numeric output is reproducible from the flags and the seed; reruns with
identical arguments produce byte-identical file bodies.  The environment
variable WF_THREADS caps simulation worker threads, WF_BACKEND selects
the simulation kernels ("numba" or "numpy").
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assumptions import check_assumptions
from .effective_cost import discontinuity_probe
from .model import (
    InstanceError,
    NetworkData,
    load_instance,
    two_server_network,
    validate_network,
)
from .pathsim import (
    TimeGrid,
    baseline_ball_control,
    check_bundle_admissible,
    cost_bcp,
    cost_rbcp,
    extend_workload_bm,
    lift_control,
    offset_I,
    simulate_bm,
    _left_riemann,
)
from .policy import (
    BarrierPolicy,
    ControllabilityError,
    build_policy_tables,
    mode_reduction,
    optimize_barrier,
    run_equivalence,
    simulate_barrier_paths,
    translate_policy_to_bcp,
)
from .reduction import ReductionError, reduce_network

__all__ = ["RunConfig", "run", "main"]


class CliInputError(ValueError):
    """Bad command-line input (missing file, malformed vector, ...)."""


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of one CLI invocation."""

    command: str
    instance: str | None  # path, or None for instance-free commands
    seed: int
    outdir: Path
    options: dict

    def __post_init__(self):
        if self.instance is not None and not Path(self.instance).is_file():
            raise CliInputError(f"instance file not found: {self.instance}")


# ---------------------------------------------------------------------------
# Deterministic text output.


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _parse_vector(text: str, name: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise CliInputError(f"--{name} must be a list of numbers, got {text!r}")
    if not vals:
        raise CliInputError(f"--{name} is empty")
    return np.array(vals)


def _parse_matrix(text: str, name: str) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip()]
    mat = [_parse_vector(r, name) for r in rows]
    if len({v.size for v in mat}) != 1:
        raise CliInputError(f"--{name} rows have unequal lengths")
    return np.vstack(mat)


def _overrides(args) -> tuple[np.ndarray | None, np.ndarray | None]:
    M = _parse_matrix(args.M, "M") if args.M else None
    pi = _parse_vector(args.pi, "pi") if args.pi else None
    return M, pi


def _reduced(data: NetworkData, args):
    M, pi = _overrides(args)
    return reduce_network(data, M_override=M, pi_override=pi)


# ---------------------------------------------------------------------------
# Commands.


def _cmd_check(cfg: RunConfig) -> int:
    data = load_instance(cfg.instance)
    report = validate_network(data)
    for chk in report.checks:
        state = "ok" if chk.passed else "FAIL"
        extra = f"  ({chk.detail})" if chk.detail else ""
        print(f"validate {chk.name}: {state}{extra}")
    if not report.passed:
        raise CliInputError("instance failed structural validation")

    rep = check_assumptions(data.R, data.K, data.v)
    print(f"full displacement: {'ok' if rep.full_displacement else 'FAIL'}")
    print(f"no arbitrage: {'ok' if rep.no_arbitrage else 'FAIL'}")
    if rep.full_displacement:
        print(f"gamma = {rep.gamma!r}")
    if rep.no_arbitrage:
        print(f"eta = {rep.eta!r}")
    else:
        print(f"arbitrage ray: {rep.arbitrage_ray.tolist()}")
    print(rep.norm_note)
    return 0 if (rep.full_displacement and rep.no_arbitrage) else 1


def _cmd_reduce(cfg: RunConfig) -> int:
    args = cfg.options["args"]
    data = load_instance(cfg.instance)
    red, reduced = _reduced(data, args)
    doc = {
        "d": red.d,
        "M": red.M.tolist(),
        "G": red.G.tolist(),
        "pi": red.pi.tolist(),
        "kappa": red.kappa.tolist(),
        "Gamma": reduced.Gamma.tolist(),
        "vartheta": reduced.vartheta.tolist(),
        "w0": reduced.w0.tolist(),
        "w_lo": reduced.w_lo,
        "w_hi": reduced.w_hi,
        "residuals": {k: float(v) for k, v in red.residuals.items()},
    }
    out = cfg.outdir / "reduction.json"
    _write_json(out, doc)
    print(f"d = {red.d}")
    print(f"M = {red.M.tolist()}")
    print(f"G = {red.G.tolist()}")
    print(f"pi = {red.pi.tolist()}")
    print(f"kappa = {red.kappa.tolist()}")
    if red.d == 1:
        print(f"workload interval = [{reduced.w_lo!r}, {reduced.w_hi!r}]")
    print(f"wrote {out}")
    return 0


def _cmd_effcost(cfg: RunConfig) -> int:
    args = cfg.options["args"]
    data = load_instance(cfg.instance)
    red, reduced = _reduced(data, args)
    if red.d != 1:
        raise CliInputError(f"effcost tabulates d = 1 workloads, got d = {red.d}")
    tables = build_policy_tables(data, red, reduced, n_nodes=args.nodes)
    header = (["w", "gcheck"]
              + [f"psi_{i + 1}" for i in range(data.m)]
              + ["h_psi", "pi_psi"])
    nodes = tables.nodes
    rows = [
        [nodes[k], tables.gcheck[k], *tables.psi[k], tables.h_psi[k],
         tables.pi_psi[k]]
        for k in range(nodes.size)
    ]
    out = cfg.outdir / "effcost.csv"
    _write_csv(out, header, rows)
    print(f"tabulated {nodes.size} nodes on "
          f"[{float(nodes[0])!r}, {float(nodes[-1])!r}]")
    print(f"wrote {out}")
    return 0


def _cmd_counterexample(cfg: RunConfig) -> int:
    args = cfg.options["args"]
    w_grid = np.linspace(0.8, 1.2, args.points)
    z2_grid = np.linspace(-2.0, 2.0, 801)
    rows = discontinuity_probe(w_grid, z2_grid)
    out = cfg.outdir / "counterexample.csv"
    _write_csv(out, ["w", "z2_argmin", "value"],
               [[r.w, r.z2_argmin, r.value] for r in rows])
    z2 = np.array([r.z2_argmin for r in rows])
    val = np.array([r.value for r in rows])
    jump = float(np.max(np.abs(np.diff(z2))))
    value_step = float(np.max(np.abs(np.diff(val))))
    below = discontinuity_probe([0.99], z2_grid)[0].z2_argmin
    above = discontinuity_probe([1.01], z2_grid)[0].z2_argmin
    print(f"argmin z2 jump across the grid: {jump!r}")
    print(f"largest value step on the same grid: {value_step!r}")
    print(f"z2 argmin just below the jump (w = 0.99): {below!r}")
    print(f"z2 argmin just above the jump (w = 1.01): {above!r}")
    print(f"wrote {out}")
    return 0


def _policy_setup(data: NetworkData, args):
    red, reduced = _reduced(data, args)
    if red.d != 1:
        raise CliInputError(f"barrier policies require d = 1, got d = {red.d}")
    mode = mode_reduction(red.G, red.kappa)
    tables = build_policy_tables(data, red, reduced)
    return red, reduced, mode, tables


def _cmd_simulate(cfg: RunConfig) -> int:
    args = cfg.options["args"]
    data = load_instance(cfg.instance)
    grid = TimeGrid(dt=args.dt, horizon=args.horizon)
    out = cfg.outdir / "paths_summary.csv"

    if args.policy == "ball":
        if args.center is None or args.radius is None:
            raise CliInputError("--policy ball requires --center and --radius")
        center = _parse_vector(args.center, "center")
        res = baseline_ball_control(data, center, args.radius, grid,
                                    cfg.seed, args.paths)
        _write_csv(out, ["path", "zeta", "cycles"],
                   [[i, res.path_costs[i], res.path_cycles[i]]
                    for i in range(args.paths)])
        print(f"cost = {res.cost_mean!r} +- {res.cost_stderr!r}")
        print(f"a priori bound = {res.bound!r}")
        print(f"beta_hat = {res.beta_hat!r} +- {res.beta_stderr!r}"
              f"  (observed {res.beta_observed!r})")
        print(f"wrote {out}")
        return 0

    red, reduced, mode, tables = _policy_setup(data, args)
    alpha = data.alpha
    pi = red.pi
    decay = np.exp(-alpha * grid.times())

    if args.policy == "barrier":
        if args.bstar is None:
            raise CliInputError("--policy barrier requires --bstar")
        policy = BarrierPolicy(b_star=args.bstar, mode=mode)
        paths = simulate_barrier_paths(policy, reduced, grid, cfg.seed,
                                       range(args.paths))
        bundles = translate_policy_to_bcp(policy, paths, data, red,
                                          tables.psi_at, grid)
        rows = []
        for i, bundle in enumerate(bundles):
            cb = cost_bcp(bundle, data.h, data.v, alpha, state=data.Z)
            cr = cost_rbcp(bundle, tables.gcheck_at, red.kappa, alpha)
            pix = bundle.X @ pi
            lr = _left_riemann(pix, alpha, grid)
            horizon_term = decay[-1] * (bundle.Z[-1] @ pi - pix[-1])
            resid = cb.zeta_T + alpha * lr - cr.zeta_T - horizon_term
            adm = check_bundle_admissible(bundle, data, red)
            rows.append([i, cb.zeta_T, cr.zeta_T, alpha * lr, horizon_term,
                         resid, adm["passed"]])
        _write_csv(out, ["path", "zeta", "zeta_check", "pix_integral",
                         "horizon_term", "identity_defect", "admissible"],
                   rows)
        zeta = np.array([r[1] for r in rows])
        zcheck = np.array([r[2] for r in rows])
        I = offset_I(pi, data.z0, data.theta, alpha)
        print(f"mean zeta = {float(np.mean(zeta))!r}"
              f" +- {float(np.std(zeta) / math.sqrt(args.paths))!r}")
        print(f"mean zeta_check = {float(np.mean(zcheck))!r}"
              f" +- {float(np.std(zcheck) / math.sqrt(args.paths))!r}")
        print(f"offset I = {I!r}")
        print(f"admissible paths: {sum(r[6] for r in rows)}/{args.paths}")
        print(f"wrote {out}")
        return 0

    # zero control: U == 0, so W = chi, valid while chi stays in the
    # workload interval; paths that exit are flagged and carry no costs.
    rows = []
    n_valid = 0
    for i in range(args.paths):
        chi = simulate_bm(1, reduced.w0, reduced.vartheta, reduced.Gamma,
                          grid, cfg.seed, i)[:, 0]
        valid = bool(np.all((chi >= reduced.w_lo - 1e-9)
                            & (chi <= reduced.w_hi + 1e-9)))
        if not valid:
            rows.append([i, 0, math.nan, math.nan, math.nan])
            continue
        U = np.zeros((grid.n_steps + 1, data.K.shape[0]))
        bundle = lift_control(U, chi, chi, data, red, tables.psi_at, grid,
                              cfg.seed, i)
        cb = cost_bcp(bundle, data.h, data.v, alpha, state=data.Z)
        cr = cost_rbcp(bundle, tables.gcheck_at, red.kappa, alpha)
        pix = bundle.X @ pi
        lr = _left_riemann(pix, alpha, grid)
        horizon_term = decay[-1] * (bundle.Z[-1] @ pi - pix[-1])
        resid = cb.zeta_T + alpha * lr - cr.zeta_T - horizon_term
        rows.append([i, 1, cb.zeta_T, cr.zeta_T, resid])
        n_valid += 1
    _write_csv(out, ["path", "valid", "zeta", "zeta_check",
                     "identity_defect"], rows)
    print(f"paths staying inside the workload interval: "
          f"{n_valid}/{args.paths}")
    if n_valid:
        zeta = np.array([r[2] for r in rows if r[1]])
        print(f"mean zeta over valid paths = {float(np.mean(zeta))!r}")
    print(f"wrote {out}")
    return 0


def _family_instance(args) -> NetworkData:
    return two_server_network(v4=args.v4, a1=args.a1, a2=args.a2,
                              b=args.b, alpha=args.alpha)


def _cmd_optimize(cfg: RunConfig) -> int:
    args = cfg.options["args"]
    data = _family_instance(args)
    red, reduced, mode, tables = _policy_setup(data, args)
    grid = TimeGrid(dt=args.dt, horizon=args.horizon)
    res = optimize_barrier(reduced, tables, mode.ell1, mode.ell2, grid,
                           args.paths, cfg.seed, data.alpha, b_tol=args.btol)
    rows = sorted(res.profile, key=lambda r: r[0])
    out = cfg.outdir / "profile.csv"
    _write_csv(out, ["b", "cost", "stderr", "chosen"],
               [[b, c, s, int(b == res.b_star)] for b, c, s in rows])
    print(f"b_star = {res.b_star!r}")
    print(f"cost = {res.cost!r} +- {res.stderr!r}")
    if res.warning:
        print(f"warning: {res.warning}")
    print(f"wrote {out}")
    return 0


def _cmd_equivalence(cfg: RunConfig) -> int:
    args = cfg.options["args"]
    data = _family_instance(args)
    red, reduced, mode, tables = _policy_setup(data, args)
    grid = TimeGrid(dt=args.dt, horizon=args.horizon)
    seeds = [int(s) for s in args.seeds.replace(",", " ").split()]
    if not seeds:
        raise CliInputError("--seeds is empty")
    b_star = args.bstar
    if b_star is None:
        opt = optimize_barrier(reduced, tables, mode.ell1, mode.ell2, grid,
                               args.paths, cfg.seed, data.alpha,
                               b_tol=args.btol)
        b_star = opt.b_star
        print(f"optimized b_star = {b_star!r}")
    policy = BarrierPolicy(b_star=b_star, mode=mode)
    rows = []
    for s in seeds:
        r = run_equivalence(data, red, reduced, tables, policy, grid,
                            args.paths, s)
        rows.append([s, r.J, r.J_stderr, r.J_check, r.J_check_stderr,
                     r.offset, r.gap, r.gap_stderr])
        print(f"seed {s}: J = {r.J!r} +- {r.J_stderr!r}, "
              f"J_check = {r.J_check!r} +- {r.J_check_stderr!r}, "
              f"I = {r.offset!r}, residual = {r.gap!r} +- {r.gap_stderr!r}")
    out = cfg.outdir / "equivalence.csv"
    _write_csv(out, ["seed", "J", "J_stderr", "J_check", "J_check_stderr",
                     "I", "residual", "residual_stderr"], rows)
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing.


def _add_overrides(p):
    p.add_argument("--M", default=None,
                   help="workload matrix override, rows ';'-separated,"
                        " e.g. \"2 1\"")
    p.add_argument("--pi", default=None,
                   help="state price override, e.g. \"1 0.5\"")


def _add_family(p):
    p.add_argument("--v4", type=float, default=1.2,
                   help="fourth activity value rate, in (0, 1.5)")
    p.add_argument("--a1", type=float, default=1.0)
    p.add_argument("--a2", type=float, default=1.0)
    p.add_argument("--b", type=float, default=10.0, help="state box size")
    p.add_argument("--alpha", type=float, default=0.1, help="discount rate")
    p.add_argument("--M", default="2 1",
                   help="workload matrix override, default \"2 1\"")
    p.add_argument("--pi", default="1 0.5",
                   help="state price override, default \"1 0.5\"")


def _add_out_seed(p):
    p.add_argument("-o", "--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="master seed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="brownet",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate instance and assumptions")
    p.add_argument("instance")
    _add_out_seed(p)

    p = sub.add_parser("reduce", help="compute the workload reduction")
    p.add_argument("instance")
    _add_overrides(p)
    _add_out_seed(p)

    p = sub.add_parser("effcost", help="tabulate effective cost / selection")
    p.add_argument("instance")
    _add_overrides(p)
    p.add_argument("--nodes", type=int, default=4201,
                   help="number of workload grid nodes")
    _add_out_seed(p)

    p = sub.add_parser("counterexample",
                       help="trace the quasiconvex minimizer jump")
    p.add_argument("--points", type=int, default=81,
                   help="number of w probe points on [0.8, 1.2]")
    _add_out_seed(p)

    p = sub.add_parser("simulate", help="simulate a policy on one instance")
    p.add_argument("instance")
    p.add_argument("--policy", choices=("barrier", "ball", "zero"),
                   required=True)
    p.add_argument("--paths", type=int, default=100)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=20.0)
    p.add_argument("--bstar", type=float, default=None,
                   help="barrier level (policy barrier)")
    p.add_argument("--center", default=None,
                   help="ball center, e.g. \"5 5\" (policy ball)")
    p.add_argument("--radius", type=float, default=None,
                   help="ball radius (policy ball)")
    _add_overrides(p)
    _add_out_seed(p)

    p = sub.add_parser("optimize",
                       help="optimize the barrier for the two-server family")
    _add_family(p)
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=40.0)
    p.add_argument("--btol", type=float, default=None,
                   help="barrier search tolerance")
    _add_out_seed(p)

    p = sub.add_parser("equivalence",
                       help="coupled cost-equivalence study, per-seed rows")
    _add_family(p)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=40.0)
    p.add_argument("--seeds", default="0 1 2 3",
                   help="per-row seeds, e.g. \"0 1 2 3\"")
    p.add_argument("--bstar", type=float, default=None,
                   help="barrier level; omitted -> optimize first")
    p.add_argument("--btol", type=float, default=None)
    _add_out_seed(p)
    return ap


_DISPATCH = {
    "check": _cmd_check,
    "reduce": _cmd_reduce,
    "effcost": _cmd_effcost,
    "counterexample": _cmd_counterexample,
    "simulate": _cmd_simulate,
    "optimize": _cmd_optimize,
    "equivalence": _cmd_equivalence,
}


def run(argv=None) -> int:
    """Parse argv, execute one command, and return the exit code."""
    args = build_parser().parse_args(argv)
    try:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        cfg = RunConfig(
            command=args.command,
            instance=getattr(args, "instance", None),
            seed=args.seed,
            outdir=outdir,
            options={"args": args},
        )
        return _DISPATCH[args.command](cfg)
    except (CliInputError, InstanceError, ReductionError,
            ControllabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
