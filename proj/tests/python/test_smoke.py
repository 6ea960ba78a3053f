from pathlib import Path

import numpy as np
import pytest

import relucert

DATA = Path(__file__).resolve().parents[2] / "data"


def correlated():
    return relucert.Network.load(str(DATA / "correlated.json"))


def test_forward_and_prediction():
    net = correlated()
    assert net.widths == [2, 2, 2]
    np.testing.assert_allclose(net.forward(np.array([1.0, 0.0])), [2.0, 1.5])
    assert net.predict(np.zeros(2)) == 1


def test_bounds_match_the_worked_example():
    net = correlated()
    box = relucert.UncertaintySet.ball(np.zeros(2), 1.0, "inf")
    lo, hi = relucert.bounds(net, box, "ibp")[1]
    assert (lo[0], hi[0]) == pytest.approx((0.0, 4.0))
    lo, hi = relucert.bounds(net, box, "fastlin")[1]
    assert (lo[0], hi[0]) == pytest.approx((-1.0, 3.0))
    assert relucert.bounds(net, box, "krelu", k=2)[1][1][0] == pytest.approx(2.0)


def test_certify_orders_methods():
    net = correlated()
    x = np.zeros(2)
    ball = relucert.UncertaintySet.ball(x, 1.0)
    margins = {m: relucert.certify(net, x, ball, method=m)["min_margin"] for m in relucert.METHODS}
    assert margins["fastlin"] <= margins["lp"] + 1e-9 <= margins["exact"] + 2e-9
    assert margins["krelu"] == pytest.approx(-0.5)
    exact = relucert.certify(net, x, ball, method="exact")
    assert exact["verdict"] == "falsified"
    assert net.predict(np.asarray(exact["counterexample"])) != 1


def test_random_network_is_seeded():
    a = relucert.Network.random(3, [2, 4, 2])
    b = relucert.Network.random(3, [2, 4, 2])
    assert a.to_json() == b.to_json()
    x = np.array([0.1, -0.2])
    r = relucert.certify(a, x, relucert.UncertaintySet.ball(x, 0.0), method="ibp")
    assert r["verdict"] in ("certified", "unknown")


def test_errors_surface_as_exceptions():
    net = correlated()
    with pytest.raises(relucert.Error):
        relucert.certify(net, np.zeros(2), relucert.UncertaintySet.ball(np.zeros(2), 0.1), method="milp")
    with pytest.raises(relucert.Error):
        relucert.certify(net, np.zeros(3), relucert.UncertaintySet.ball(np.zeros(3), 0.1))
    assert len(relucert.octahedral_coefficients(2)) == 8
