import numpy as np
import pytest
from hypothesis import settings

from advclique.graph import Graph, UncertaintySet, random_graph
from advclique.model import FeasiblePoint

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_family(rng, n, m, density=0.6):
    seeds = rng.integers(0, 2 ** 31, size=m)
    return UncertaintySet(tuple(random_graph(n, density, int(s)) for s in seeds))


def random_feasible(rng, n, eps):
    """Random point of the lifted polytope with y strictly inside its range."""
    x = rng.exponential(size=n)
    if rng.random() < 0.3:
        x[rng.random(n) < 0.5] = 0.0
        if not x.any():
            x[0] = 1.0
    x = x / x.sum()
    lo, hi = x, np.minimum(1.0, x / eps)
    y = lo + rng.random(n) * (hi - lo)
    return FeasiblePoint(x, y)


def complete_graph(n):
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def vertex_enumeration(c, A_le, b_le, A_eq, b_eq, lo, hi, tol=1e-9):
    """Brute-force LP oracle for bounded problems: try every basis of tight constraints.

    Returns (status, objective) with status "optimal" or "infeasible".
    """
    from itertools import combinations

    n = len(c)
    ineq_A = [A_le] if len(b_le) else []
    ineq_b = [b_le] if len(b_le) else []
    ineq_A += [-np.eye(n), np.eye(n)]
    ineq_b += [-np.asarray(lo, float), np.asarray(hi, float)]
    G, h = np.vstack(ineq_A), np.concatenate(ineq_b)
    k = n - len(b_eq)
    if k < 0:
        return "infeasible", None
    combos = list(combinations(range(len(h)), k))
    subsets = np.array(combos, dtype=int).reshape(len(combos), k)
    M = np.concatenate([np.broadcast_to(A_eq, (len(subsets),) + A_eq.shape), G[subsets]], axis=1)
    r = np.concatenate([np.broadcast_to(b_eq, (len(subsets), len(b_eq))), h[subsets]], axis=1)
    ok = np.abs(np.linalg.det(M)) > 1e-10
    if not ok.any():
        return "infeasible", None
    V = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
    feas = (V @ G.T <= h + tol).all(axis=1)
    if len(b_eq):
        feas &= (np.abs(V @ A_eq.T - b_eq) <= tol).all(axis=1)
    if not feas.any():
        return "infeasible", None
    return "optimal", float((V[feas] @ c).min())


def random_bounded_lp(rng):
    """Small LP with a finite box so that vertex enumeration is an exact oracle."""
    n = int(rng.integers(1, 7))
    mle = int(rng.integers(0, 7))
    meq = int(rng.integers(0, min(n, 2) + 1))
    c = rng.normal(size=n).round(2)
    A_le = rng.normal(size=(mle, n)).round(2)
    b_le = (rng.normal(size=mle) + 0.5).round(2)
    A_eq = rng.normal(size=(meq, n)).round(2)
    b_eq = rng.normal(size=meq).round(2)
    lo = (rng.normal(size=n) - 1).round(2)
    hi = lo + rng.uniform(0.5, 3.0, size=n).round(2)
    return c, A_le, b_le, A_eq, b_eq, lo, hi


BEALE = dict(
    c=[-0.75, 20.0, -0.5, 6.0],
    A_le=[[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]],
    b_le=[0.0, 0.0, 1.0],
)
