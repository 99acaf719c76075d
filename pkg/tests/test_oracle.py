from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advclique.graph import Graph, UncertaintySet, intersection_graph, random_graph
from advclique.oracle import (BRANCH_AND_BOUND, BRUTE_FORCE, brute_force_common, degeneracy_order,
                              max_clique_exact, max_common_clique, reversed_minmax_value)
from conftest import complete_graph, random_family


def cycle(n):
    return Graph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    return Graph(10, frozenset(outer + inner + spokes))


def _largest_clique_by_enumeration(g):
    for k in range(g.n, 0, -1):
        for S in combinations(range(g.n), k):
            if g.is_clique(S):
                return k
    return 0


def test_small_named_graphs():
    r = max_clique_exact(complete_graph(4))
    assert r.size == 4 and r.vertices == [0, 1, 2, 3] and r.method == BRANCH_AND_BOUND and r.complete
    assert max_clique_exact(cycle(5)).size == 2
    P = petersen()
    assert all(len(P.neighbors[v]) == 3 for v in range(10))
    assert max_clique_exact(P).size == _largest_clique_by_enumeration(P) == 2


def test_trivial_graphs():
    assert max_clique_exact(Graph(1, frozenset())).size == 1
    assert max_clique_exact(Graph(5, frozenset())).size == 1


def test_degeneracy_order_is_a_permutation():
    g = random_graph(30, 0.4, 3)
    assert sorted(degeneracy_order(g)) == list(range(30))


@given(st.integers(0, 10 ** 6))
def test_max_clique_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(1, 11)), float(rng.uniform(0.1, 0.9)), seed)
    r = max_clique_exact(g)
    assert r.size == len(r.vertices) == _largest_clique_by_enumeration(g)
    assert g.is_clique(r.vertices)


def test_budget_exceeded_keeps_incumbent():
    g = random_graph(80, 0.7, 1)
    r = max_clique_exact(g, budget=5)
    assert not r.complete and g.is_clique(r.vertices) and r.size >= 1


def test_common_clique_examples():
    k4 = complete_graph(4)
    assert max_common_clique(UncertaintySet((k4, k4, k4))).size == 4
    a = Graph(4, frozenset({(0, 1), (2, 3)}))
    b = Graph(4, frozenset({(0, 2), (1, 3)}))
    c = Graph(4, frozenset({(0, 3), (1, 2)}))
    assert max_common_clique(UncertaintySet((a, b, c))).size == 1


def test_brute_force_examples():
    r = brute_force_common(UncertaintySet((Graph(4, frozenset()),)))
    assert r.size == 1 and r.method == BRUTE_FORCE
    assert brute_force_common(UncertaintySet((Graph(1, frozenset()),))).size == 1
    with pytest.raises(ValueError):
        brute_force_common(UncertaintySet((Graph(17, frozenset()),)))


def test_oracles_agree_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        n, m = int(rng.integers(1, 13)), int(rng.integers(1, 7))
        us = random_family(rng, n, m, density=float(rng.uniform(0.5, 0.95)))
        bb, bf = max_common_clique(us), brute_force_common(us)
        assert bb.size == bf.size
        assert all(g.is_clique(bb.vertices) for g in us.graphs)
        assert bb.size == max_clique_exact(intersection_graph(us)).size


def test_reversed_minmax_examples():
    k4 = complete_graph(4)
    assert reversed_minmax_value(UncertaintySet((k4, k4))) == pytest.approx(0.875)
    assert reversed_minmax_value(UncertaintySet((k4, Graph(4, frozenset())))) == pytest.approx(0.5)
    # perfect matchings of K4 each have clique number 2
    a = Graph(4, frozenset({(0, 1), (2, 3)}))
    b = Graph(4, frozenset({(0, 2), (1, 3)}))
    assert reversed_minmax_value(UncertaintySet((k4, a, b))) == pytest.approx(0.75)


@given(st.integers(0, 10 ** 6))
def test_reversed_minmax_nonincreasing_when_adding_graphs(seed):
    rng = np.random.default_rng(seed)
    us = random_family(rng, 8, 3)
    extra = random_graph(8, float(rng.uniform(0, 1)), seed)
    bigger = UncertaintySet(us.graphs + (extra,))
    assert reversed_minmax_value(bigger) <= reversed_minmax_value(us)
