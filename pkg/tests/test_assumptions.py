import numpy as np
import pytest

from brownet.assumptions import (
    check_assumptions,
    check_full_displacement,
    check_no_arbitrage,
    compute_gamma_eta,
)
from brownet.model import bundled_instance_path, load_instance


@pytest.fixture(scope="module")
def arb():
    return load_instance(bundled_instance_path("arbitrage"))


@pytest.fixture(scope="module")
def onesided():
    return load_instance(bundled_instance_path("onesided"))


def test_two_server_passes_both(data7):
    rep = check_assumptions(data7.R, data7.K, data7.v)
    assert rep.full_displacement
    assert rep.no_arbitrage
    assert rep.arbitrage_ray is None
    assert len(rep.displacement_witnesses) == 4


def test_two_server_witnesses_verify(data7):
    ok, wit = check_full_displacement(data7.R, data7.K)
    assert ok
    for i, y in enumerate(wit):
        target = np.zeros(2)
        target[i % 2] = 1.0 if i < 2 else -1.0
        assert np.max(np.abs(data7.R @ y - target)) < 1e-8
        assert np.min(data7.K @ y) > -1e-8


def test_two_server_constants(data7):
    gamma, eta = compute_gamma_eta(data7.R, data7.K, data7.v)
    assert gamma == pytest.approx(0.6, abs=1e-9)
    assert eta == pytest.approx(14.0, abs=1e-9)


def test_gamma_eta_homogeneous_in_radius(data7):
    g1, e1 = compute_gamma_eta(data7.R, data7.K, data7.v, radius=1.0)
    g3, e3 = compute_gamma_eta(data7.R, data7.K, data7.v, radius=3.0)
    assert g3 == pytest.approx(3.0 * g1, rel=1e-9)
    assert e3 == pytest.approx(3.0 * e1, rel=1e-9)


def test_arbitrage_instance_fails_no_arbitrage(arb):
    ok, ray = check_no_arbitrage(arb.R, arb.K, arb.v)
    assert not ok
    # the ray is a genuine certificate: feasible, state-neutral, costless
    assert ray is not None and np.max(np.abs(ray)) > 0
    assert np.min(arb.K @ ray) > -1e-8
    assert np.max(np.abs(arb.R @ ray)) < 1e-8
    assert float(arb.v @ ray) <= 1e-8
    # profitable ejection of class 2: the known direction (0, 1)
    assert np.allclose(ray, [0.0, 1.0], atol=1e-8)


def test_onesided_instance_fails_displacement_only(onesided):
    rep = check_assumptions(onesided.R, onesided.K, onesided.v)
    assert not rep.full_displacement
    assert rep.displacement_witnesses is None
    # R = (1, 0), K = I: -e1 is unreachable with K y >= 0
    assert rep.no_arbitrage
    # the finiteness constants only need no-arbitrage
    assert rep.gamma == pytest.approx(0.0, abs=1e-9)
    assert rep.eta is not None and rep.eta >= 0.0


def test_report_carries_norm_note(data7):
    rep = check_assumptions(data7.R, data7.K, data7.v)
    assert "max norm" in rep.norm_note


def test_displacement_fails_cleanly_on_pointed_cone():
    # K = I forces y >= 0, so -e1 is not displaceable
    ok, wit = check_full_displacement(np.eye(2), np.eye(2))
    assert not ok and wit is None


def test_no_arbitrage_flags_null_direction():
    # y = (0, 1) has Ky = 0, Ry = 0, v'y = 0: an arbitrage ray
    R = np.array([[1.0, 0.0]])
    K = np.array([[1.0, 0.0]])
    ok, ray = check_no_arbitrage(R, K, [1.0, 0.0])
    assert not ok
    assert abs(ray[1]) == pytest.approx(1.0)
