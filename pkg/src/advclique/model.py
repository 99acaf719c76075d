"""Penalized min-max model over the lifted simplex.

For a regularized adjacency ``U = I/2 + A`` each component is

    g_U(x, y) = -x'Ux + beta * x'(Ebar - U)x - |y|^2 / (2 gamma)

with ``Ebar = E - I/2``; ``G = max_U g_U`` is minimized over the polytope

    {(x, y): x in simplex, eps*y <= x <= y, 0 <= y <= 1}.

``Ebar - U`` is the complement adjacency (zero diagonal), so the penalty is
evaluated as a sum of nonnegative terms rather than a difference of large
numbers. On the simplex the x-gradient ``2(-U + beta(Ebar - U))x`` equals
``beta(2e - x) - 2(1 + beta)Ux``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import UncertaintySet

TOL_FEAS = 1e-9
TOL_ACTIVE = 1e-10


@dataclass
class FeasiblePoint:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError(f"x and y must be vectors of equal length, got {self.x.shape} and {self.y.shape}")

    @property
    def n(self) -> int:
        return self.x.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class ModelParams:
    n: int
    eps: float
    beta: float
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 < self.eps <= 1.0 / self.n * (1 + 1e-12):
            raise ValueError(f"eps must lie in (0, 1/n] = (0, {1.0 / self.n}], got {self.eps}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @classmethod
    def default(cls, n: int, gamma: float = 1.0, eps: float | None = None) -> ModelParams:
        """Parameters used in the experiments: beta just above the exactness bound."""
        if eps is None:
            eps = 0.001 if n < 1000 else 0.0001
        eps = min(eps, 1.0 / n)
        if n >= 2:
            beta = math.nextafter(beta_lower_bound(n, gamma, eps) * (1 + 1e-6), math.inf)
        else:
            beta = 1.0
        return cls(n=n, eps=eps, beta=beta, gamma=gamma)

    @property
    def satisfies_exactness_bound(self) -> bool:
        return self.n < 2 or self.beta > beta_lower_bound(self.n, self.gamma, self.eps)


@dataclass
class ValueAndActive:
    value: float
    argmax: np.ndarray
    values: np.ndarray


def _check_dims(n: int, pt: FeasiblePoint) -> None:
    if pt.n != n:
        raise ValueError(f"dimension mismatch: point has n={pt.n}, model has n={n}")


def feasible_check(pt: FeasiblePoint, params: ModelParams, tol: float = TOL_FEAS) -> tuple[bool, float]:
    """Return ``(feasible, worst_violation)`` for membership in the lifted polytope."""
    _check_dims(params.n, pt)
    x, y, eps = pt.x, pt.y, params.eps
    viol = max(
        abs(math.fsum(x) - 1.0),
        float(np.max(eps * y - x, initial=0.0)),
        float(np.max(x - y, initial=0.0)),
        float(np.max(-y, initial=0.0)),
        float(np.max(y - 1.0, initial=0.0)),
        float(np.max(-x, initial=0.0)),
    )
    return viol <= tol, viol


def _complement(U: np.ndarray) -> np.ndarray:
    n = U.shape[0]
    return np.ones((n, n)) - 0.5 * np.eye(n) - U


def g_value(U: np.ndarray, pt: FeasiblePoint, params: ModelParams) -> float:
    U = np.asarray(U, dtype=float)
    _check_dims(U.shape[0], pt)
    x, y = pt.x, pt.y
    return float(-x @ U @ x + params.beta * (x @ _complement(U) @ x) - (y @ y) / (2 * params.gamma))


def g_gradient(U: np.ndarray, pt: FeasiblePoint, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Gradient ``(d/dx, d/dy)`` of one component."""
    U = np.asarray(U, dtype=float)
    _check_dims(U.shape[0], pt)
    x = pt.x
    gx = 2.0 * (params.beta * (_complement(U) @ x) - U @ x)
    return gx, -pt.y / params.gamma


def component_values(us: UncertaintySet, pt: FeasiblePoint, params: ModelParams) -> np.ndarray:
    """All m component values at ``pt``."""
    _check_dims(us.n, pt)
    x, y = pt.x, pt.y
    Ax = us.adjacency_stack @ x
    Cx = us.complement_stack @ x
    quad = 0.5 * (x @ x) + Ax @ x
    return -quad + params.beta * (Cx @ x) - (y @ y) / (2 * params.gamma)


def component_gradients(us: UncertaintySet, pt: FeasiblePoint, params: ModelParams,
                        idx: np.ndarray | None = None) -> np.ndarray:
    """x-gradients of the selected components, shape (k, n). The y-gradient is shared: ``-y/gamma``."""
    _check_dims(us.n, pt)
    A = us.adjacency_stack if idx is None else us.adjacency_stack[idx]
    C = us.complement_stack if idx is None else us.complement_stack[idx]
    x = pt.x
    return 2.0 * (params.beta * (C @ x) - 0.5 * x - A @ x)


def G_value(us: UncertaintySet, pt: FeasiblePoint, params: ModelParams,
            tol_active: float = TOL_ACTIVE) -> ValueAndActive:
    vals = component_values(us, pt, params)
    top = float(vals.max())
    return ValueAndActive(top, np.flatnonzero(vals >= top - tol_active), vals)


def lipschitz_upper_bound(us: UncertaintySet, params: ModelParams) -> float:
    """Certified bound on the gradient norm of every component over the polytope.

    Uses ``|Mx| <= |M|_F`` for x in the simplex and ``|y| <= sqrt(n)``.
    """
    b = params.beta
    # 2(-(1+b)U + b*Ebar) = 2(b*C - U) with C the complement; entries: -1 on
    # the diagonal, -2 on edges, 2b on non-edges
    n = us.n
    non_edges = n * (n - 1) - us.adjacency_stack.sum(axis=(1, 2))
    edges = us.adjacency_stack.sum(axis=(1, 2))
    fro2 = n * 1.0 + 4.0 * edges + 4.0 * b * b * non_edges
    return float(np.sqrt(fro2.max() + n / params.gamma ** 2))


def beta_lower_bound(n: int, gamma: float, eps: float) -> float:
    """Exactness threshold: beta must strictly exceed this value."""
    if n < 2:
        raise ValueError("the penalty bound needs n >= 2")
    if gamma <= 0 or not 0 < eps <= 1.0 / n * (1 + 1e-12):
        raise ValueError("need gamma > 0 and 0 < eps <= 1/n")
    return (1.0 - 1.0 / (2 * (n - 1)) + n / (2.0 * gamma)) / (2.0 * eps * eps)


def characteristic_point(C, n: int, eps: float) -> FeasiblePoint:
    """Uniform weights on C, binary y with support C."""
    C = sorted(set(int(i) for i in C))
    if not C:
        raise ValueError("characteristic point of an empty set")
    if C[0] < 0 or C[-1] >= n:
        raise ValueError(f"vertex set {C} not inside [0, {n})")
    if eps > 1.0 / n * (1 + 1e-12):
        raise ValueError("eps must not exceed 1/n")
    x = np.zeros(n)
    y = np.zeros(n)
    x[C] = 1.0 / len(C)
    y[C] = 1.0
    return FeasiblePoint(x, y)


def clique_face_value(c: int, gamma: float) -> float:
    """Objective at the characteristic point of a common clique of size c."""
    if c < 1:
        raise ValueError("clique size must be at least 1")
    return 1.0 / (2 * c) - 1.0 - c / (2.0 * gamma)


def face_value(pt: FeasiblePoint, params: ModelParams) -> float:
    """Common value of every component on a common-clique face."""
    return 0.5 * float(pt.x @ pt.x) - 1.0 - float(pt.y @ pt.y) / (2 * params.gamma)


def value_lower_bound(n: int, gamma: float) -> float:
    """``G >= -1 - n/(2 gamma)`` on the whole polytope."""
    return -1.0 - n / (2.0 * gamma)
