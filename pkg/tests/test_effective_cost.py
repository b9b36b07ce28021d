import numpy as np
import pytest

from brownet.effective_cost import (
    EffectiveCost,
    InfeasibleFiberError,
    UnsupportedCostError,
    discontinuity_probe,
    effective_cost_curve,
    eval_g,
    minimize_on_fiber,
    quasiconvex_level_eval,
    two_server_selection,
)
from brownet.model import Polytope, QuadraticCost

from oracle_qp import fiber_min_bruteforce

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@pytest.fixture(scope="module")
def ec7(data7):
    return EffectiveCost.from_parts([[2.0, 1.0]], data7.Z, data7.h,
                                    data7.alpha, [1.0, 0.5])


# ---------------------------------------------------------------------------
# Closed-form selection of the two-server instance.


def test_selection_known_points():
    assert np.allclose(two_server_selection(1.0, 1.0, 1.0, 10.0), [0.4, 0.2])
    assert np.allclose(two_server_selection(18.0, 1.0, 1.0, 10.0), [7.2, 3.6])
    assert np.allclose(two_server_selection(30.0, 1.0, 1.0, 10.0), [10.0, 10.0])


def test_selection_feasible_on_grid():
    for w in np.linspace(0.0, 30.0, 121):
        z = two_server_selection(float(w), 1.0, 1.0, 10.0)
        assert -1e-12 <= z[0] <= 10.0 + 1e-12
        assert -1e-12 <= z[1] <= 10.0 + 1e-12
        assert 2.0 * z[0] + z[1] == pytest.approx(w, abs=1e-12)


def test_effective_cost_known_values(data7):
    # g(psi(w)) at w in {0, 5, 10, 18, 30}
    expect = {0.0: 0.0, 5.0: 5.25, 10.0: 20.5, 18.0: 65.7, 30.0: 201.5}
    for w, val in expect.items():
        z = two_server_selection(w, 1.0, 1.0, 10.0)
        assert eval_g(z, data7.h, 0.1, [1.0, 0.5]) == pytest.approx(val, abs=1e-12)


def test_qp_matches_closed_form(ec7):
    for w in np.linspace(0.0, 30.0, 61):
        psi, val = minimize_on_fiber(float(w), ec7)
        z = two_server_selection(float(w), 1.0, 1.0, 10.0)
        assert np.max(np.abs(psi - z)) < 1e-8, f"w = {w}"
        assert val == pytest.approx(ec7.objective(z), abs=1e-8)


def test_gcheck_discrete_convexity(ec7):
    grid = np.linspace(0.0, 30.0, 201)
    vals = np.array([minimize_on_fiber(float(w), ec7)[1] for w in grid])
    second = np.diff(vals, 2)
    assert np.min(second) >= -1e-8


def test_selection_is_lipschitz_on_grid(ec7):
    # continuity of the minimizer: no jumps between adjacent nodes
    grid = np.linspace(0.0, 30.0, 201)
    psis = np.array([minimize_on_fiber(float(w), ec7)[0] for w in grid])
    steps = np.max(np.abs(np.diff(psis, axis=0)), axis=1)
    assert np.max(steps) < 2.0 * (grid[1] - grid[0])


# ---------------------------------------------------------------------------
# Generic QP route against brute-force active-set enumeration.


def test_random_fibers_match_bruteforce(rng):
    for trial in range(30):
        m = int(rng.integers(2, 4))
        d = int(rng.integers(1, m))
        hi = rng.uniform(1.0, 3.0, size=m)
        state = Polytope.box(hi)
        L = rng.normal(size=(m, m))
        Q = L @ L.T + np.eye(m)  # strictly convex
        lin = rng.normal(size=m)
        M = rng.normal(size=(d, m))
        z_int = rng.uniform(0.2, 0.8, size=m) * hi
        w = M @ z_int  # guaranteed nonempty fiber
        ec = EffectiveCost(M=M, state=state, Q=Q, lin=lin)
        psi, val = minimize_on_fiber(w, ec)
        z_ref, val_ref = fiber_min_bruteforce(w, M, state.A, state.b, Q, lin)
        assert val == pytest.approx(val_ref, abs=1e-7), f"trial {trial}"
        assert np.max(np.abs(psi - z_ref)) < 1e-6, f"trial {trial}"


def test_infeasible_fiber_raises(ec7):
    with pytest.raises(InfeasibleFiberError):
        minimize_on_fiber(31.0, ec7)
    with pytest.raises(InfeasibleFiberError):
        minimize_on_fiber(-0.5, ec7)


def test_non_strictly_convex_rejected(data7):
    ec = EffectiveCost(M=np.array([[2.0, 1.0]]), state=data7.Z,
                       Q=np.zeros((2, 2)), lin=np.array([1.0, 1.0]))
    with pytest.raises(UnsupportedCostError):
        minimize_on_fiber(1.0, ec)


def test_eval_g_checks_membership(data7):
    with pytest.raises(ValueError, match="outside"):
        eval_g([11.0, 0.0], data7.h, 0.1, [1.0, 0.5], state=data7.Z)


def test_curve_records_failures(ec7):
    rows = effective_cost_curve(ec7, [1.0, 40.0])
    assert rows[0].error is None
    assert rows[0].value == pytest.approx(0.25, abs=1e-8)
    assert rows[1].error is not None and rows[1].value is None


# ---------------------------------------------------------------------------
# Quasiconvex loop function: value closed forms and the minimizer jump.


def test_level_eval_segment_cases():
    assert quasiconvex_level_eval([0.0, 1.0]) == pytest.approx(1.0)   # top
    assert quasiconvex_level_eval([-2.0, 0.5]) == pytest.approx(2.0)  # left
    assert quasiconvex_level_eval([0.5, -1.0]) == pytest.approx(1.0)  # bottom
    # slant through (0.5, 0): r^2 + r - 1 = 0, the golden section
    assert quasiconvex_level_eval([0.5, 0.0]) == pytest.approx(GOLDEN, abs=1e-9)


def test_level_eval_corner_consistency():
    # shared points of adjacent segments agree
    assert quasiconvex_level_eval([1.0, 1.0]) == pytest.approx(1.0)
    assert quasiconvex_level_eval([-1.0, 1.0]) == pytest.approx(1.0)
    assert quasiconvex_level_eval([-1.0, -1.0]) == pytest.approx(1.0)
    assert quasiconvex_level_eval([1.0, -1.0]) == pytest.approx(1.0, abs=1e-9)


def test_level_sets_nested(rng):
    # quasiconvexity surrogate: f(midpoint) <= max(f(a), f(b)) on samples
    pts = rng.uniform(-1.8, 1.8, size=(200, 2, 2))
    for a, b in pts:
        fm = quasiconvex_level_eval((a + b) / 2.0)
        assert fm <= max(quasiconvex_level_eval(a),
                         quasiconvex_level_eval(b)) + 1e-9


def test_minimizer_trace_jump():
    z2_grid = np.linspace(-2.0, 2.0, 801)
    below = discontinuity_probe([0.90], z2_grid)[0]
    above = discontinuity_probe([1.08], z2_grid)[0]
    assert below.z2_argmin == pytest.approx(0.90, abs=0.01)
    assert above.z2_argmin == pytest.approx(-np.sqrt(1.08), abs=0.01)
    # value trace continuous across the jump
    at = discontinuity_probe([0.999, 1.001], z2_grid)
    assert abs(at[0].value - at[1].value) < 0.01


def test_probe_rejects_out_of_range():
    with pytest.raises(ValueError):
        discontinuity_probe([2.5], np.linspace(-2, 2, 11))
    with pytest.raises(ValueError):
        discontinuity_probe([1.0], np.linspace(-3, 3, 11))
