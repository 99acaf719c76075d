"""Adversary oracle: exact, delta-approximate and eta-local active sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import UncertaintySet
from .lp import check_feasible
from .model import (TOL_ACTIVE, FeasiblePoint, ModelParams, component_gradients,
                    component_values)


class ParameterError(ValueError):
    """Solver parameters violate a precondition of the method."""


@dataclass
class ActiveSetReport:
    exact: np.ndarray
    delta: np.ndarray
    eta: np.ndarray
    skipped: bool = False
    lp_calls: int = 0


def exact_active(us: UncertaintySet, pt: FeasiblePoint, params: ModelParams,
                 tol_active: float = TOL_ACTIVE) -> np.ndarray:
    vals = component_values(us, pt, params)
    return np.flatnonzero(vals >= vals.max() - tol_active)


def delta_active(us: UncertaintySet, pt: FeasiblePoint, params: ModelParams, delta: float) -> np.ndarray:
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    vals = component_values(us, pt, params)
    return np.flatnonzero(vals >= vals.max() - delta)


def max_eta(delta: float, lipschitz: float) -> float:
    return delta / (2.0 * lipschitz)


def eta_active(us: UncertaintySet, pt: FeasiblePoint, params: ModelParams, delta: float,
               eta: float, lipschitz: float, *, tol_active: float = TOL_ACTIVE,
               strict_radius: bool = False) -> ActiveSetReport:
    """Approximate local active set.

    A delta-active component ``k`` is kept when the linearized system

        <grad g_j - grad g_k, z' - z> <= g_k - g_j + L eta^2   for all delta-active j
        |z' - z|_inf <= eta / sqrt(n)
        z' in the polytope

    has a solution. Exactly active components always pass (take ``z' = z``).
    ``strict_radius`` shrinks the box to ``eta / sqrt(2n)`` so that it sits
    inside the Euclidean eta-ball.
    """
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if eta < 0:
        raise ParameterError(f"eta must be nonnegative, got {eta}")
    if eta > max_eta(delta, lipschitz) * (1 + 1e-12):
        raise ParameterError(f"eta={eta:g} exceeds delta/(2L)={max_eta(delta, lipschitz):g}")

    vals = component_values(us, pt, params)
    top = vals.max()
    exact = np.flatnonzero(vals >= top - tol_active)
    dset = np.flatnonzero(vals >= top - delta)
    if exact.size == us.m:
        return ActiveSetReport(exact, dset, exact, skipped=True)
    candidates = np.setdiff1d(dset, exact)
    if eta == 0.0 or candidates.size == 0:
        return ActiveSetReport(exact, dset, exact)

    n = us.n
    radius = eta / math.sqrt(2 * n if strict_radius else n)
    x, y, eps = pt.x, pt.y, params.eps
    grads = component_gradients(us, pt, params, dset)
    slack = lipschitz * eta * eta

    # Unknowns are box-normalized displacements u = (s - x, t - y) / radius in
    # [-1, 1]^2n, so the phase-1 tolerance is measured against the box size.
    lo = np.concatenate([np.maximum(-1.0, -x / radius), np.maximum(-1.0, -y / radius)])
    hi = np.concatenate([np.ones(n), np.minimum(1.0, (1.0 - y) / radius)])
    lo = np.minimum(lo, hi)
    eye = np.eye(n)
    coupling = np.vstack([np.hstack([eye, -eye]), np.hstack([-eye, eps * eye])])
    coupling_rhs = np.concatenate([y - x, x - eps * y]) / radius
    A_eq = np.concatenate([np.ones(n), np.zeros(n)])[None, :]
    b_eq = np.array([(1.0 - math.fsum(x)) / radius])

    kept = []
    calls = 0
    pos = {int(k): i for i, k in enumerate(dset)}
    for k in candidates:
        gk = grads[pos[int(k)]]
        others = [j for j in dset if j != k]
        diff = grads[[pos[int(j)] for j in others]] - gk
        rows = np.hstack([radius * diff, np.zeros((len(others), n))])
        rhs = vals[k] - vals[others] + slack
        A_le = np.vstack([rows, coupling])
        b_le = np.concatenate([rhs, coupling_rhs])
        calls += 1
        if check_feasible(A_le, b_le, A_eq, b_eq, lo, hi):
            kept.append(int(k))
    eta_set = np.union1d(exact, np.array(kept, dtype=int))
    return ActiveSetReport(exact, dset, eta_set, lp_calls=calls)

