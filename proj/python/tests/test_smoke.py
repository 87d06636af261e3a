import math

import numpy as np
import pytest

import sbs

FIGURE = sbs.ModelParams([0.8, 0.4], mu=0.2, lam=1.0)


def test_graph_builders():
    g = sbs.complete(4)
    assert g.num_edges == 6
    assert g.is_regular() == 3
    assert g.is_doubly_stochastic()
    assert sbs.cycle(3) == sbs.complete(3)
    rr = sbs.random_regular(40, 10, 3)
    assert rr.is_regular() == 10
    assert not sbs.disjoint_cliques(3, 2).is_connected()
    with pytest.raises(sbs.ValidationError):
        sbs.from_edges(3, [(0, 1)])


def test_params_validation():
    with pytest.raises(sbs.ValidationError):
        sbs.ModelParams([0.5, 0.5])
    with pytest.raises(ValueError):
        sbs.ModelParams([0.8, 0.4], mu=2.0)


def test_simulate_is_deterministic():
    g = sbs.complete(50)
    a = sbs.simulate(g, FIGURE, "iid", [1.0, 0.0, 0.0], 5.0, seed=7, record_jumps=True)
    b = sbs.simulate(g, FIGURE, "iid", [1.0, 0.0, 0.0], 5.0, seed=7, record_jumps=True)
    assert np.array_equal(a["Y"], b["Y"])
    assert a["Y"].shape == (51, 3)
    assert np.allclose(a["Y"].sum(axis=1), 1.0)
    assert a["status"] == "TimedOut"
    z1 = int(round(a["Y"][-1, 1] * 50))
    assert z1 == sum(a["jump_directions"])


def test_absorbing_start():
    out = sbs.simulate(sbs.complete(2), FIGURE, "explicit", [1, 1], 3.0, seed=1, stop_on_absorption=True)
    assert out["status"] == "AbsorbedSuccess"
    assert out["absorption_time"] == 0.0


def test_meanfield_and_bound():
    t, y = sbs.integrate([1.0, 0.0, 0.0], FIGURE, 30.0)
    assert np.max(np.abs(y.sum(axis=1) - 1.0)) < 1e-9
    assert y[-1, 1] > 0.99
    b = sbs.convergence_bound(FIGURE, [1.0, 0.0, 0.0], 0.5)
    assert b["R"] == pytest.approx(0.4)
    assert b["t_bar_c"] == pytest.approx(math.log(2) / 0.12)
    idx = np.searchsorted(t, 20.0)
    assert y[idx, 1] >= b["lower_bound_y1"](t[idx]) - 1e-6
    assert max(abs(v) for v in sbs.drift([0.0, 1.0, 0.0], FIGURE)) < 1e-14


def test_analysis_helpers():
    exact, bound = sbs.gambler_ruin(2 / 3, 1, 2)
    assert exact == pytest.approx(2 / 3)
    assert exact >= bound
    lo, hi = sbs.wilson_interval(50, 100)
    assert lo < 0.5 < hi
    est = sbs.estimate_learnability(sbs.complete(10), sbs.ModelParams([0.8, 0.4]), [0, 5, 5], 50, 200.0, seed=3)
    assert est["successes"] + est["failures"] + est["timeouts"] == 50
    rep = sbs.coupling_error(sbs.complete(10), FIGURE, [1.0, 0.0, 0.0], 1.0, 20, seed=4)
    assert rep["vacuous"]
    assert 0.0 <= rep["max_error"] <= 2.0
