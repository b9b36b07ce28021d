import numpy as np
import pytest

from brownet.lp import (
    INFEASIBLE,
    LpProblem,
    OPTIMAL,
    UNBOUNDED,
    lp_feasible,
    solve_lp,
)


def test_simple_bounded_optimum():
    # min -x - y on the unit square: optimum at (1, 1)
    out = solve_lp(LpProblem(c=[-1.0, -1.0],
                             A_ub=np.vstack([np.eye(2), -np.eye(2)]),
                             b_ub=[1.0, 1.0, 0.0, 0.0]))
    assert out.status == OPTIMAL
    assert out.value == pytest.approx(-2.0, abs=1e-12)
    assert np.allclose(out.x, [1.0, 1.0], atol=1e-12)


def test_equality_constraint():
    # min x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0 -> (1, 0)
    out = solve_lp(LpProblem(c=[1.0, 2.0], A_eq=[[1.0, 1.0]], b_eq=[1.0],
                             bounds=[(0.0, None), (0.0, None)]))
    assert out.status == OPTIMAL
    assert np.allclose(out.x, [1.0, 0.0], atol=1e-12)
    assert out.value == pytest.approx(1.0, abs=1e-12)


def test_free_variables_default():
    # default bounds leave variables free: min x s.t. x >= -3 via A_ub
    out = solve_lp(LpProblem(c=[1.0], A_ub=[[-1.0]], b_ub=[3.0]))
    assert out.status == OPTIMAL
    assert out.x[0] == pytest.approx(-3.0, abs=1e-10)


def test_infeasible():
    out = solve_lp(LpProblem(c=[1.0], A_eq=[[1.0]], b_eq=[2.0],
                             A_ub=[[1.0]], b_ub=[1.0]))
    assert out.status == INFEASIBLE


def test_unbounded_with_certificate():
    prob = LpProblem(c=[-1.0, 0.0], A_ub=[[-1.0, 1.0]], b_ub=[0.0])
    out = solve_lp(prob)
    assert out.status == UNBOUNDED
    r = out.ray
    assert r is not None
    assert float(prob.c @ r) < 0
    assert np.all(prob.A_ub @ r <= 1e-10)


def test_degenerate_vertex_terminates():
    # many redundant constraints meeting at the optimum (degeneracy)
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 2.0],
                  [1.0, 2.0], [2.0, 1.0]])
    b = np.zeros(6)
    out = solve_lp(LpProblem(c=[1.0, 1.0], A_ub=A, b_ub=b,
                             bounds=[(-1.0, 1.0)] * 2))
    assert out.status == OPTIMAL
    assert out.value == pytest.approx(-2.0, abs=1e-9)  # at (-1, -1)


def test_redundant_equalities():
    # duplicated equality rows must not break phase 1
    out = solve_lp(LpProblem(c=[0.0, 1.0],
                             A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0],
                             bounds=[(0.0, None), (0.0, None)]))
    assert out.status == OPTIMAL
    assert out.x[0] + out.x[1] == pytest.approx(1.0, abs=1e-10)
    assert out.value == pytest.approx(0.0, abs=1e-10)


def test_random_lps_match_vertex_enumeration(rng):
    # box-constrained LPs: the optimum sits at the sign vertex of c
    for _ in range(50):
        n = int(rng.integers(1, 5))
        c = rng.normal(size=n)
        lo = rng.uniform(-2.0, 0.0, size=n)
        hi = rng.uniform(0.5, 2.0, size=n)
        out = solve_lp(LpProblem(c=c, bounds=list(zip(lo, hi))))
        assert out.status == OPTIMAL
        expect = np.where(c > 0, lo, hi)
        assert out.value == pytest.approx(float(c @ expect), abs=1e-9)


def test_lp_feasible_witness():
    ok, x = lp_feasible(A_ub=[[1.0, 0.0], [0.0, 1.0]], b_ub=[1.0, 1.0],
                        A_eq=[[1.0, 1.0]], b_eq=[1.5])
    assert ok
    assert x[0] + x[1] == pytest.approx(1.5, abs=1e-9)
    ok, x = lp_feasible(A_eq=[[1.0]], b_eq=[2.0], A_ub=[[1.0]], b_ub=[1.0])
    assert not ok and x is None


def test_shape_validation():
    with pytest.raises(ValueError):
        LpProblem(c=[1.0, 2.0], A_eq=[[1.0]], b_eq=[1.0])
    with pytest.raises(ValueError):
        LpProblem(c=[1.0], A_ub=[[1.0]], b_ub=None)
    with pytest.raises(ValueError):
        LpProblem(c=[1.0], bounds=[(0.0, 1.0), (0.0, 1.0)])
