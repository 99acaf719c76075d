"""Exact discrete solvers used as ground truth.

Maximum clique by branch and bound over bitsets: vertices are visited in
degeneracy order, and a greedy colouring of the candidate set bounds the
clique size reachable from each node.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graph import Graph, UncertaintySet, intersection_graph

BRANCH_AND_BOUND = "branch_and_bound"
BRUTE_FORCE = "brute_force"
DEFAULT_BUDGET = 10 ** 8
BRUTE_FORCE_MAX_N = 16


@dataclass
class CliqueResult:
    size: int
    vertices: list[int]
    nodes_explored: int
    method: str
    complete: bool = True  # False when the node budget ran out; vertices is then the incumbent


class _BudgetExceeded(Exception):
    pass


def _masks(g: Graph) -> list[int]:
    masks = [0] * g.n
    for i, j in g.edges:
        masks[i] |= 1 << j
        masks[j] |= 1 << i
    return masks


def degeneracy_order(g: Graph) -> list[int]:
    """Repeatedly remove a minimum-degree vertex; returns the removal order."""
    deg = [len(nb) for nb in g.neighbors]
    alive = set(range(g.n))
    order = []
    while alive:
        v = min(alive, key=lambda u: (deg[u], u))
        order.append(v)
        alive.remove(v)
        for u in g.neighbors[v]:
            if u in alive:
                deg[u] -= 1
    return order


def _colour_sort(cand: int, masks: list[int], order: list[int]) -> tuple[list[int], list[int]]:
    """Greedy sequential colouring of ``cand`` in ``order``.

    Returns the candidates grouped by colour class with their colour numbers,
    so colours are nondecreasing along the list.
    """
    classes: list[list[int]] = []
    class_masks: list[int] = []
    for v in order:
        if not cand >> v & 1:
            continue
        for k, cm in enumerate(class_masks):
            if not cm & masks[v]:
                classes[k].append(v)
                class_masks[k] |= 1 << v
                break
        else:
            classes.append([v])
            class_masks.append(1 << v)
    verts, colours = [], []
    for k, members in enumerate(classes, start=1):
        verts.extend(members)
        colours.extend([k] * len(members))
    return verts, colours


def max_clique_exact(g: Graph, budget: int = DEFAULT_BUDGET) -> CliqueResult:
    """Maximum clique of ``g``; stops with ``complete=False`` past ``budget`` nodes."""
    if g.n == 0:
        return CliqueResult(0, [], 0, BRANCH_AND_BOUND)
    masks = _masks(g)
    # high-degeneracy vertices branched first
    order = degeneracy_order(g)[::-1]
    best: list[int] = [order[0]]
    nodes = 0

    def expand(clique: list[int], cand: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise _BudgetExceeded
        verts, colours = _colour_sort(cand, masks, order)
        for idx in range(len(verts) - 1, -1, -1):
            if len(clique) + colours[idx] <= len(best):
                return
            v = verts[idx]
            clique.append(v)
            new = cand & masks[v]
            if new:
                expand(clique, new)
            elif len(clique) > len(best):
                best = list(clique)
            clique.pop()
            cand &= ~(1 << v)

    complete = True
    try:
        expand([], (1 << g.n) - 1)
    except _BudgetExceeded:
        complete = False
    return CliqueResult(len(best), sorted(best), nodes, BRANCH_AND_BOUND, complete)


def max_common_clique(us: UncertaintySet, budget: int = DEFAULT_BUDGET) -> CliqueResult:
    """Largest vertex set that is a clique in every member graph."""
    res = max_clique_exact(intersection_graph(us), budget)
    for g in us.graphs:
        if not g.is_clique(res.vertices):
            raise AssertionError(f"oracle clique {res.vertices} is not a clique of every member")
    return res


def brute_force_common(us: UncertaintySet) -> CliqueResult:
    """Enumerate vertex subsets from the largest size down (n <= 16)."""
    n = us.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    masks = [_masks(g) for g in us.graphs]
    common = [0] * n
    for v in range(n):
        common[v] = (1 << n) - 1
        for mk in masks:
            common[v] &= mk[v]
    checked = 0
    for size in range(n, 0, -1):
        for S in combinations(range(n), size):
            checked += 1
            if all(common[v] >> u & 1 for v, u in combinations(S, 2)):
                return CliqueResult(size, list(S), checked, BRUTE_FORCE)
    return CliqueResult(0, [], checked, BRUTE_FORCE)


def reversed_minmax_value(us: UncertaintySet, budget: int = DEFAULT_BUDGET) -> float:
    """``min_U max_x x'Ux`` over the simplex, i.e. ``min_U (1 - 1/(2 omega_U))``."""
    vals = []
    for g in us.graphs:
        res = max_clique_exact(g, budget)
        if not res.complete:
            raise RuntimeError("clique number not certified within the node budget")
        vals.append(1.0 - 1.0 / (2 * max(res.size, 1)))
    return min(vals)
