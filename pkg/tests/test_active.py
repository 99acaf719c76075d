import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advclique.active import ParameterError, delta_active, eta_active, exact_active, max_eta
from advclique.graph import Graph, UncertaintySet
from advclique.model import (FeasiblePoint, ModelParams, characteristic_point, component_gradients,
                             component_values, lipschitz_upper_bound)
from conftest import complete_graph, random_family, random_feasible

K2 = Graph(2, frozenset({(0, 1)}))
E2 = Graph(2, frozenset())
TOY = UncertaintySet((E2, K2))
TOY_PARAMS = ModelParams(2, 0.1, 1.0)
TOY_L = lipschitz_upper_bound(TOY, TOY_PARAMS)


def _sets(rep):
    return set(rep.exact.tolist()), set(rep.eta.tolist()), set(rep.delta.tolist())


def test_single_matrix():
    g = complete_graph(3)
    us = UncertaintySet((g,))
    params = ModelParams.default(3)
    pt = FeasiblePoint(np.full(3, 1 / 3), np.ones(3))
    assert exact_active(us, pt, params).tolist() == [0]
    rep = eta_active(us, pt, params, 0.1, 0.0, 1.0)
    assert rep.eta.tolist() == [0] and rep.skipped and rep.lp_calls == 0


def test_common_clique_face_is_fully_active():
    us = UncertaintySet((complete_graph(5), Graph(5, frozenset({(0, 1), (0, 2), (1, 2)}))))
    params = ModelParams.default(5)
    pt = characteristic_point([0, 1, 2], 5, params.eps)
    assert exact_active(us, pt, params).tolist() == [0, 1]
    L = lipschitz_upper_bound(us, params)
    rep = eta_active(us, pt, params, 0.5, max_eta(0.5, L), L)
    assert rep.skipped and rep.lp_calls == 0 and rep.eta.tolist() == [0, 1]


def test_value_below_max_is_excluded():
    pt = FeasiblePoint([0.9, 0.1], [0.9, 0.1])
    vals = component_values(TOY, pt, TOY_PARAMS)
    assert vals[0] - vals[1] > 1e-10
    assert exact_active(TOY, pt, TOY_PARAMS).tolist() == [0]


def test_delta_active_examples(rng):
    us = random_family(rng, 7, 5)
    params = ModelParams.default(7)
    pt = random_feasible(rng, 7, params.eps)
    vals = component_values(us, pt, params)
    assert delta_active(us, pt, params, vals.max() - vals.min() + 1).tolist() == list(range(5))
    gaps = vals.max() - vals
    positive = gaps[gaps > 0]
    small = positive.min() / 2 if positive.size else 1e-3
    assert delta_active(us, pt, params, small).tolist() == exact_active(us, pt, params, 0.0).tolist()
    with pytest.raises(ParameterError):
        delta_active(us, pt, params, 0.0)


def test_eta_precondition():
    pt = FeasiblePoint([0.9, 0.1], [0.9, 0.1])
    with pytest.raises(ParameterError):
        eta_active(TOY, pt, TOY_PARAMS, 0.1, 2 * max_eta(0.1, TOY_L), TOY_L)
    with pytest.raises(ParameterError):
        eta_active(TOY, pt, TOY_PARAMS, 0.1, -1.0, TOY_L)
    with pytest.raises(ParameterError):
        eta_active(TOY, pt, TOY_PARAMS, -0.1, 0.0, TOY_L)


def _box_sampling_oracle(pt, delta, eta, rng, samples=10 ** 4):
    """Candidates certified by random points of the box that satisfy the linearized system."""
    vals = component_values(TOY, pt, TOY_PARAMS)
    grads = component_gradients(TOY, pt, TOY_PARAMS)
    dset = np.flatnonzero(vals >= vals.max() - delta)
    r = eta / math.sqrt(2)
    d = rng.uniform(-r, r, samples)
    s = np.stack([pt.x[0] + d, pt.x[1] - d], axis=1)
    t = pt.y + rng.uniform(-r, r, (samples, 2))
    eps = TOY_PARAMS.eps
    ok = (s >= 0).all(1) & (t >= 0).all(1) & (t <= 1).all(1) & (s <= t).all(1) & (eps * t <= s).all(1)
    found = set()
    for k in dset:
        good = ok.copy()
        for j in dset:
            if j != k:
                good &= (s - pt.x) @ (grads[j] - grads[k]) <= vals[k] - vals[j] + TOY_L * eta ** 2
        if good.any():
            found.add(int(k))
    return found


def test_toy_reachable_component_included(rng):
    pt = FeasiblePoint([0.9, 0.1], [0.9, 0.1])
    delta = 1.0
    eta = max_eta(delta, TOY_L)
    rep = eta_active(TOY, pt, TOY_PARAMS, delta, eta, TOY_L)
    sampled = _box_sampling_oracle(pt, delta, eta, rng)
    assert rep.exact.tolist() == [0]
    assert sampled == {0, 1}
    assert rep.eta.tolist() == [0, 1] and rep.lp_calls == 1


def test_toy_sampling_never_beats_lp(rng):
    for a in np.linspace(0.5, 1.0, 11):
        x = np.array([a, 1 - a])
        for y in (x.copy(), np.minimum(1, x / TOY_PARAMS.eps)):
            pt = FeasiblePoint(x, y)
            for delta in (0.05, 0.5, 3.0):
                eta = max_eta(delta, TOY_L)
                rep = eta_active(TOY, pt, TOY_PARAMS, delta, eta, TOY_L)
                assert _box_sampling_oracle(pt, delta, eta, rng, 2000) <= set(rep.eta.tolist())


@given(st.integers(0, 10 ** 6))
def test_nesting_and_eta_zero(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    us = random_family(rng, n, int(rng.integers(2, 5)))
    params = ModelParams(n, 1 / n, float(rng.uniform(0.5, 3)))
    L = lipschitz_upper_bound(us, params)
    pt = random_feasible(rng, n, params.eps)
    vals = component_values(us, pt, params)
    delta = float(rng.uniform(0.1, 1.5)) * (vals.max() - vals.min() + 1e-3)
    eta = float(rng.uniform(0, 1)) * max_eta(delta, L)
    exact, eta_set, dset = _sets(eta_active(us, pt, params, delta, eta, L))
    assert exact <= eta_set <= dset <= set(range(us.m)) and exact
    assert exact == set(exact_active(us, pt, params).tolist())
    assert dset == set(delta_active(us, pt, params, delta).tolist())
    assert _sets(eta_active(us, pt, params, delta, 0.0, L))[1] == exact


@given(st.integers(0, 10 ** 6))
def test_monotone_in_eta(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    us = random_family(rng, n, 3)
    params = ModelParams(n, 1 / n, float(rng.uniform(0.5, 2)))
    L = lipschitz_upper_bound(us, params)
    pt = random_feasible(rng, n, params.eps)
    vals = component_values(us, pt, params)
    delta = vals.max() - vals.min() + 0.01
    prev = set()
    for frac in (0.0, 0.01, 0.1, 0.3, 0.6, 1.0):
        cur = _sets(eta_active(us, pt, params, delta, frac * max_eta(delta, L), L))[1]
        assert prev <= cur
        prev = cur


def test_strict_radius_is_smaller():
    pt = FeasiblePoint([0.9, 0.1], [0.9, 0.1])
    delta = 1.0
    eta = max_eta(delta, TOY_L)
    strict = eta_active(TOY, pt, TOY_PARAMS, delta, eta, TOY_L, strict_radius=True)
    loose = eta_active(TOY, pt, TOY_PARAMS, delta, eta, TOY_L)
    assert set(strict.eta.tolist()) <= set(loose.eta.tolist())


def test_upper_semicontinuity_on_sequences():
    delta = 1.0
    eta = 0.5 * max_eta(delta, TOY_L)
    for limit_a, limit_y in ((0.9, 0.9), (0.95, 0.95), (0.7, 1.0)):
        z = FeasiblePoint([limit_a, 1 - limit_a], [limit_y, min(1.0, (1 - limit_a) / TOY_PARAMS.eps)])
        at_limit = set(eta_active(TOY, z, TOY_PARAMS, delta, eta, TOY_L).eta.tolist())
        tail = []
        for k in range(1, 60):
            h = 0.05 / k
            a = limit_a - h
            x = np.array([a, 1 - a])
            y = np.clip(np.array([limit_y, z.y[1]]) - h / 2, x, np.minimum(1, x / TOY_PARAMS.eps))
            tail.append(set(eta_active(TOY, FeasiblePoint(x, y), TOY_PARAMS, delta, eta, TOY_L).eta.tolist()))
        recurring = set.intersection(*tail[-20:])
        assert recurring <= at_limit
