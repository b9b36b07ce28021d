"""Network data types: state polytope, quadratic holding cost, instances.

A network instance bundles the primitive data (m, n, p, z0, theta, Sigma,
R, K, Z, v, h, alpha): an m-dimensional controlled diffusion Z = X + RY
confined to a compact polytope Z, with control constraints U = KY
nondecreasing, linear control cost rate v, holding cost h, and discount
rate alpha.  Everything here is immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .lp import LpProblem, OPTIMAL, UNBOUNDED, lp_feasible, solve_lp

INTERIOR_EPS = 1e-9


class PolytopeError(ValueError):
    """A polytope failed one of its construction certificates."""


class InstanceError(ValueError):
    """An instance file or dictionary is malformed."""


class Polytope:
    """Compact convex state space {z : Az <= b} with certified geometry.

    Construction runs three certificates by linear programming: the set is
    nonempty, bounded (each coordinate has finite min and max, retained as
    ``bbox_lo``/``bbox_hi``), and has nonempty interior (some z satisfies
    Az <= b - eps with eps = 1e-9).  Failing any certificate raises
    PolytopeError.
    """

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).ravel()
        if self.A.shape[0] != self.b.size:
            raise PolytopeError(
                f"A has {self.A.shape[0]} rows but b has {self.b.size} entries"
            )
        self.dim = self.A.shape[1]

        feasible, witness = lp_feasible(A_ub=self.A, b_ub=self.b)
        if not feasible:
            raise PolytopeError("polytope is empty")
        self.witness = witness

        lo = np.zeros(self.dim)
        hi = np.zeros(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            low = solve_lp(LpProblem(c=e, A_ub=self.A, b_ub=self.b))
            high = solve_lp(LpProblem(c=-e, A_ub=self.A, b_ub=self.b))
            if low.status == UNBOUNDED or high.status == UNBOUNDED:
                raise PolytopeError(f"polytope is unbounded in coordinate {i}")
            if low.status != OPTIMAL or high.status != OPTIMAL:
                raise PolytopeError(f"boundedness certificate failed in coordinate {i}")
            lo[i] = low.value
            hi[i] = -high.value
        self.bbox_lo = lo
        self.bbox_hi = hi

        interior_ok, interior_pt = lp_feasible(A_ub=self.A, b_ub=self.b - INTERIOR_EPS)
        if interior_ok:
            # the phase-1 tolerance is wider than eps, so re-verify the
            # witness: reject when it misses the shrunken set by > eps/2
            slack = float(np.max(self.A @ interior_pt - (self.b - INTERIOR_EPS)))
            interior_ok = slack <= 0.5 * INTERIOR_EPS
        if not interior_ok:
            raise PolytopeError("polytope has empty interior")
        self.interior_point = interior_pt

        self.A.flags.writeable = False
        self.b.flags.writeable = False

    @classmethod
    def box(cls, upper, dim: int | None = None) -> "Polytope":
        """The box [0, upper]^dim; ``upper`` may be a scalar (with dim) or a vector."""
        u = np.asarray(upper, dtype=float)
        if u.ndim == 0:
            if dim is None:
                raise PolytopeError("scalar box bound requires an explicit dim")
            u = np.full(dim, float(u))
        m = u.size
        A = np.vstack([np.eye(m), -np.eye(m)])
        b = np.concatenate([u, np.zeros(m)])
        return cls(A, b)

    def contains(self, z, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float).ravel()
        if z.size != self.dim:
            raise PolytopeError(f"point has dimension {z.size}, expected {self.dim}")
        return bool(np.all(self.A @ z <= self.b + tol))

    def __repr__(self):
        return f"Polytope(dim={self.dim}, rows={self.A.shape[0]})"


def polytope_contains(P: Polytope, z, tol: float = 0.0) -> bool:
    """True iff Az <= b + tol componentwise."""
    return P.contains(z, tol)


class QuadraticCost:
    """Holding cost h(z) = z'Qz + c'z + c0 with symmetric PSD Q.

    ``strictly_convex`` is True when the smallest eigenvalue of Q is at
    least 1e-10; the fiber minimizer requires it.
    """

    def __init__(self, Q, c=None, c0: float = 0.0):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        m = self.Q.shape[0]
        if self.Q.shape != (m, m):
            raise ValueError(f"Q must be square, got {self.Q.shape}")
        if np.max(np.abs(self.Q - self.Q.T)) > 1e-12:
            raise ValueError("Q is not symmetric within 1e-12")
        self.c = np.zeros(m) if c is None else np.asarray(c, dtype=float).ravel()
        if self.c.size != m:
            raise ValueError(f"c has length {self.c.size}, expected {m}")
        self.c0 = float(c0)
        eigs = np.linalg.eigvalsh(self.Q)
        if eigs[0] < -1e-12:
            raise ValueError(f"Q is not positive semidefinite (min eigenvalue {eigs[0]:.3e})")
        self.min_eig = float(eigs[0])
        self.strictly_convex = bool(eigs[0] >= 1e-10)
        self.dim = m
        self.Q.flags.writeable = False
        self.c.flags.writeable = False

    def evaluate(self, z) -> float | np.ndarray:
        """h at a single point (1-D input) or per row of a 2-D batch."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            return float(z @ self.Q @ z + self.c @ z + self.c0)
        return np.einsum("ij,jk,ik->i", z, self.Q, z) + z @ self.c + self.c0

    def __call__(self, z):
        return self.evaluate(z)

    def __repr__(self):
        return f"QuadraticCost(dim={self.dim}, strictly_convex={self.strictly_convex})"


@dataclass(frozen=True)
class NetworkData:
    """Primitive data of a Brownian network control instance.

    Plain container: invariants are checked by validate_network so that a
    bad instance can be loaded and reported rather than crash on import.
    """

    m: int
    n: int
    p: int
    z0: np.ndarray
    theta: np.ndarray
    Sigma: np.ndarray
    R: np.ndarray
    K: np.ndarray
    Z: Polytope
    v: np.ndarray
    h: QuadraticCost
    alpha: float

    def __post_init__(self):
        for name in ("z0", "theta", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        for name in ("Sigma", "R", "K"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        lines = []
        for c in self.checks:
            mark = "ok " if c.passed else "FAIL"
            lines.append(f"[{mark}] {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def validate_network(data: NetworkData) -> ValidationReport:
    """Check every structural invariant of a network instance.

    Deterministic and side-effect free; dimension mismatches are reported
    by name, never coerced.
    """
    checks: list[CheckResult] = []

    def add(name, passed, detail=""):
        checks.append(CheckResult(name, bool(passed), detail))

    m, n, p = data.m, data.n, data.p
    add("dims_positive", m >= 1 and n >= 1 and p >= 1, f"m={m}, n={n}, p={p}")

    shape_specs = [
        ("z0", data.z0.shape, (m,)),
        ("theta", data.theta.shape, (m,)),
        ("Sigma", data.Sigma.shape, (m, m)),
        ("R", data.R.shape, (m, n)),
        ("K", data.K.shape, (p, n)),
        ("v", data.v.shape, (n,)),
        ("h.Q", data.h.Q.shape, (m, m)),
        ("h.c", data.h.c.shape, (m,)),
        ("Z", (data.Z.dim,), (m,)),
    ]
    shapes_ok = True
    for name, got, want in shape_specs:
        ok = got == want
        shapes_ok = shapes_ok and ok
        if not ok:
            add(f"shape_{name}", False, f"got {got}, expected {want}")
    add("shapes", shapes_ok)
    if not shapes_ok:
        return ValidationReport(tuple(checks))

    sym_err = float(np.max(np.abs(data.Sigma - data.Sigma.T)))
    add("Sigma_symmetric", sym_err <= 1e-12, f"max asymmetry {sym_err:.3e}")
    try:
        np.linalg.cholesky(data.Sigma)
        add("Sigma_positive_definite", True)
    except np.linalg.LinAlgError:
        add("Sigma_positive_definite", False, "Cholesky factorization failed")

    inside = data.Z.contains(data.z0, tol=1e-9)
    add("z0_in_state_space", inside, "" if inside else f"z0={data.z0.tolist()}")
    add("alpha_positive", data.alpha > 0, f"alpha={data.alpha}")
    add("h_psd", data.h.min_eig >= -1e-12, f"min eigenvalue {data.h.min_eig:.3e}")
    return ValidationReport(tuple(checks))


@dataclass(frozen=True)
class ReducedNetworkData:
    """Workload-level network data (w0, vartheta, Gamma, G) and state space.

    For d = 1 the workload state space is the interval [w_lo, w_hi]; for
    d >= 2 it is kept implicitly as the pair (M, Z) and membership is
    testable only through an LP on the fiber.
    """

    d: int
    w0: np.ndarray
    vartheta: np.ndarray
    Gamma: np.ndarray
    G: np.ndarray
    M: np.ndarray
    Z: Polytope
    w_lo: float | None = None
    w_hi: float | None = None

    def contains_w(self, w, tol: float = 1e-9) -> bool:
        w = np.asarray(w, dtype=float).ravel()
        if self.d == 1 and self.w_lo is not None:
            return bool(self.w_lo - tol <= w[0] <= self.w_hi + tol)
        feasible, _ = lp_feasible(
            A_eq=self.M, b_eq=w, A_ub=self.Z.A, b_ub=self.Z.b + tol
        )
        return feasible


# ---------------------------------------------------------------------------
# Instance (de)serialization.

_TOP_KEYS = {"m", "n", "p", "z0", "theta", "Sigma", "R", "K", "Z", "v", "h", "alpha"}


def network_from_dict(doc: dict) -> NetworkData:
    """Build a NetworkData from the instance-dictionary schema."""
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise InstanceError(f"unknown instance keys: {sorted(unknown)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise InstanceError(f"missing instance keys: {sorted(missing)}")

    zdoc = doc["Z"]
    if "box" in zdoc:
        Z = Polytope.box(np.asarray(zdoc["box"], dtype=float))
    elif "A" in zdoc and "b" in zdoc:
        Z = Polytope(zdoc["A"], zdoc["b"])
    else:
        raise InstanceError("Z must contain either {A, b} or {box}")

    hdoc = doc["h"]
    h = QuadraticCost(hdoc["Q"], hdoc.get("c"), hdoc.get("c0", 0.0))

    return NetworkData(
        m=int(doc["m"]),
        n=int(doc["n"]),
        p=int(doc["p"]),
        z0=doc["z0"],
        theta=doc["theta"],
        Sigma=doc["Sigma"],
        R=doc["R"],
        K=doc["K"],
        Z=Z,
        v=doc["v"],
        h=h,
        alpha=doc["alpha"],
    )


def network_to_dict(data: NetworkData) -> dict:
    return {
        "m": data.m,
        "n": data.n,
        "p": data.p,
        "z0": data.z0.tolist(),
        "theta": data.theta.tolist(),
        "Sigma": data.Sigma.tolist(),
        "R": data.R.tolist(),
        "K": data.K.tolist(),
        "Z": {"A": data.Z.A.tolist(), "b": data.Z.b.tolist()},
        "v": data.v.tolist(),
        "h": {"Q": data.h.Q.tolist(), "c": data.h.c.tolist(), "c0": data.h.c0},
        "alpha": data.alpha,
    }


def load_instance(path) -> NetworkData:
    """Load and parse an instance JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise InstanceError(f"instance file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InstanceError(f"instance file is not valid JSON: {exc}")
    try:
        return network_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed instance {path}: {exc}")


def bundled_instance_path(name: str) -> Path:
    """Path of a packaged instance file, e.g. 'two_server'."""
    res = resources.files("brownet").joinpath("instances", f"{name}.json")
    return Path(str(res))


def two_server_network(
    v4: float = 1.2,
    a1: float = 1.0,
    a2: float = 1.0,
    b: float = 10.0,
    alpha: float = 0.1,
) -> NetworkData:
    """The bundled two-server network family.

    Two servers process two job classes through six activities (four
    service activities plus ejection of either class); the five
    nondecreasing controls are the two servers' cumulative idleness, the
    cumulative use of the overflow activity, and the two cumulative
    ejection counts.  The activity value rate v4 is free in (0, 3/2); the
    state space is the box [0, b]^2; holding cost a1*z1^2 + a2*z2^2.
    """
    if not 0 < v4 < 1.5:
        raise InstanceError(f"v4 must lie in (0, 1.5), got {v4}")
    R = np.array(
        [
            [1.0, 0.0, 0.5, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 3.0, 0.0, 1.0],
        ]
    )
    K = np.array(
        [
            [1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, -1.0],
        ]
    )
    v = np.array([1.0, 1.0, 1.0, v4, 0.0, 0.0])
    return NetworkData(
        m=2,
        n=6,
        p=5,
        z0=np.zeros(2),
        theta=np.zeros(2),
        Sigma=np.diag([2.2, 1.6]),
        R=R,
        K=K,
        Z=Polytope.box(np.array([b, b])),
        v=v,
        h=QuadraticCost(np.diag([a1, a2])),
        alpha=alpha,
    )
