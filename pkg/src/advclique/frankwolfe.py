"""Projection-free Frank-Wolfe method for the penalized min-max problem.

Each iteration queries the adversary oracle for the eta-local active set,
solves a linear minimization oracle (LMO) over the lifted simplex against
the max of the active linearizations, stops when the resulting gap is at
most ``xi`` and otherwise takes an Armijo step toward the LMO vertex.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .active import ParameterError, eta_active, max_eta
from .graph import UncertaintySet, verify_common_clique
from .lp import LinearProgram, solve_lp
from .model import (TOL_ACTIVE, TOL_FEAS, FeasiblePoint, ModelParams, component_gradients,
                    component_values, feasible_check, lipschitz_upper_bound, value_lower_bound)

log = logging.getLogger(__name__)

GAP_BELOW_XI = "gap_below_xi"
K_MAX_REACHED = "k_max_reached"
LINE_SEARCH_FAILED = "line_search_failed"

WORKERS_ENV = "ADVCLIQUE_WORKERS"


class LineSearchError(RuntimeError):
    """Armijo backtracking found no acceptable step within the cap."""


class LmoError(RuntimeError):
    """The LMO linear program did not return an optimal vertex."""


@dataclass(frozen=True)
class SolverConfig:
    k_max: int = 1000
    xi: float = 1e-3
    omega: float = 0.8
    sigma: float = 0.4
    delta: float = 0.01
    eta_mode: str = "decaying"  # or "fixed"
    eta: float | None = None  # fixed eta, or eta_0 when decaying; None -> delta/(2L)
    tau: float = 0.5
    support_threshold: float | None = None  # None -> eps/2
    seed: int = 0
    n_starts: int = 10
    m_cap: int = 60
    tol_active: float = TOL_ACTIVE
    strict_radius: bool = False
    repair_maximal: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.omega < 1:
            raise ParameterError(f"omega must lie in (0, 1), got {self.omega}")
        if not 0 < self.sigma < 0.5:
            raise ParameterError(f"sigma must lie in (0, 1/2), got {self.sigma}")
        if self.xi <= 0:
            raise ParameterError(f"xi must be positive, got {self.xi}")
        if self.delta <= 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if self.eta_mode not in ("fixed", "decaying"):
            raise ParameterError(f"eta_mode must be 'fixed' or 'decaying', got {self.eta_mode!r}")
        if self.eta_mode == "decaying" and not 0 < self.tau < 1:
            raise ParameterError(f"tau must lie in (0, 1), got {self.tau}")
        if self.eta is not None and self.eta <= 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.k_max < 0 or self.n_starts < 1 or self.m_cap < 0:
            raise ParameterError("k_max, m_cap must be >= 0 and n_starts >= 1")

    def eta0(self, lipschitz: float) -> float:
        cap = max_eta(self.delta, lipschitz)
        if self.eta is None:
            return cap
        if self.eta > cap * (1 + 1e-12):
            raise ParameterError(f"eta={self.eta:g} exceeds delta/(2L)={cap:g}")
        return self.eta


@dataclass
class IterateRecord:
    k: int
    G_value: float
    gap: float
    step: float | None
    eta: float
    n_exact: int
    n_delta: int
    n_eta: int
    skipped: bool
    lp_calls: int = 0
    feas_violation: float = 0.0
    c_star: float = math.inf
    bound: float = math.inf
    armijo_m: int | None = None
    G_next: float | None = None


@dataclass
class BoundTracker:
    """Running min of gaps checked against the sublinear rate bounds.

    ``G(z*)`` is unknown, so the surrogate ``-1 - n/(2 gamma) <= G(z*)`` is
    used; this only enlarges rho and keeps the bound valid.
    """

    n: int
    G0: float
    lower: float
    sigma: float
    eta0: float
    decaying: bool
    tau: float = 0.5
    c_star: float = math.inf
    _S: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def D(self) -> float:
        return self.n + 1.0

    @property
    def rho(self) -> float:
        r = self.D * (self.G0 - self.lower) / self.sigma
        return r / self.eta0 if self.decaying else r

    def bound(self, k: int) -> float:
        rho, s = self.rho, self.sigma
        if self.decaying:
            S = self._S
            log_threshold = math.log(rho * (1 - s) * (1 - self.tau) + 1) / (1 - self.tau)
            if math.log(k + 1) < log_threshold:
                return rho / S
            return math.sqrt(rho / ((1 - s) * S))
        eta = self.eta0
        if k < rho * (1 - s) / eta - 1:
            return rho / ((k + 1) * eta)
        return math.sqrt(rho / ((k + 1) * (1 - s) * eta))

    def update(self, k: int, gap: float) -> tuple[float, float]:
        self.c_star = min(self.c_star, gap)
        self._S += (k + 1) ** -self.tau
        b = self.bound(k)
        if self.c_star > b * (1 + 1e-12):
            self.violations.append((k, self.c_star, b))
        return self.c_star, b


@dataclass
class RunResult:
    point: FeasiblePoint
    trace: list[IterateRecord]
    termination: str
    support: list[int]
    is_common_clique: bool
    is_maximal: bool
    clique_size: int
    lipschitz: float
    eta0: float
    bound_violations: list = field(default_factory=list)
    seconds: float = 0.0
    message: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    @property
    def final_gap(self) -> float:
        return self.trace[-1].gap

    @property
    def verified_size(self) -> int:
        return self.clique_size if self.is_common_clique else 0


def eta_schedule(k: int, config: SolverConfig, lipschitz: float) -> float:
    """``eta_0 / (1 + k)^tau`` in decaying mode, the constant eta otherwise."""
    eta0 = config.eta0(lipschitz)
    if config.eta_mode == "fixed":
        return eta0
    return min(eta0 / (1.0 + k) ** config.tau, max_eta(config.delta, lipschitz))


def random_start(n: int, eps: float, rng: np.random.Generator) -> FeasiblePoint:
    """Uniform point of the simplex with ``y = min(1, x/eps)``."""
    e = rng.exponential(size=n)
    x = e / e.sum()
    # push the rounding residue of the sum into the largest coordinate
    top = int(np.argmax(x))
    for _ in range(4):
        r = 1.0 - math.fsum(x)
        if r == 0.0:
            break
        x[top] += r
    y = np.minimum(1.0, x / eps)
    y = np.where(eps * y > x, np.nextafter(y, 0.0), y)
    return FeasiblePoint(x, y)


def _repair_vertex(x: np.ndarray, y: np.ndarray, y_k: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.maximum(x, 0.0)
    x = x / x.sum()
    upper = np.minimum(1.0, x / eps)
    # y only enters through -y_k'y/gamma: push it to its upper bound where y_k > 0
    y = np.where(y_k > 0, upper, np.clip(y, x, upper))
    return x, y


def lmo_step(pt: FeasiblePoint, grads: np.ndarray, params: ModelParams) -> tuple[FeasiblePoint, float]:
    """Minimize the max of active linearizations over the lifted simplex.

    ``grads`` holds the x-gradients (k, n) of the eta-active components; their
    y-gradient is the shared ``-y/gamma``. Returns the LMO vertex and the gap
    ``c = -min max_h h'(z' - z) >= 0``.
    """
    grads = np.atleast_2d(grads)
    if grads.shape[0] == 0:
        raise ValueError("LMO needs at least one gradient")
    n = pt.n
    xk, yk, gam, eps = pt.x, pt.y, params.gamma, params.eps
    # unknowns (x, y, mu) with mu >= every linearization
    G = grads
    r = G.shape[0]
    eye = np.eye(n)
    A_le = np.vstack([
        np.hstack([eye, -eye, np.zeros((n, 1))]),
        np.hstack([-eye, eps * eye, np.zeros((n, 1))]),
        np.hstack([G, np.zeros((r, n)), -np.ones((r, 1))]),
    ])
    b_le = np.concatenate([np.zeros(2 * n), G @ xk])
    A_eq = np.concatenate([np.ones(n), np.zeros(n + 1)])[None, :]
    c = np.concatenate([np.zeros(n), -yk / gam, [1.0]])
    lo = np.concatenate([np.zeros(2 * n), [-np.inf]])
    hi = np.concatenate([np.full(n, np.inf), np.ones(n), [np.inf]])
    sol = solve_lp(LinearProgram(c, A_le, b_le, A_eq, np.array([1.0]), lo, hi))
    if not sol.optimal:
        raise LmoError(f"LMO linear program returned status {sol.status!r}")
    xh, yh = _repair_vertex(sol.v[:n], sol.v[n:2 * n], yk, eps)
    gap = _gap_at(grads, xk, yk, xh, yh, gam)
    return FeasiblePoint(xh, yh), gap


def _gap_at(grads, xk, yk, xh, yh, gamma) -> float:
    lin = float(np.max(grads @ (xh - xk))) - float(yk @ (yh - yk)) / gamma
    return max(0.0, -lin)


def armijo_search(us: UncertaintySet, pt: FeasiblePoint, d: tuple[np.ndarray, np.ndarray], gap: float,
                  config: SolverConfig, params: ModelParams, G_current: float | None = None
                  ) -> tuple[float, int, float]:
    """Backtrack ``alpha = omega^m`` until ``G(z + alpha d) <= G(z) - sigma alpha gap``.

    Returns ``(alpha, m, G_new)``; raises LineSearchError past ``m_cap``.
    """
    if gap <= 0:
        raise ValueError("Armijo search needs a positive gap")
    dx, dy = d
    if G_current is None:
        G_current = float(component_values(us, pt, params).max())
    alpha = 1.0
    for m in range(config.m_cap + 1):
        trial = FeasiblePoint(pt.x + alpha * dx, pt.y + alpha * dy)
        G_new = float(component_values(us, trial, params).max())
        if G_new <= G_current - config.sigma * alpha * gap:
            return alpha, m, G_new
        alpha *= config.omega
    raise LineSearchError(f"no Armijo step within m_cap={config.m_cap} (gap={gap:.3g})")


def extract_support(pt: FeasiblePoint, params: ModelParams, threshold: float | None = None) -> list[int]:
    if threshold is None:
        threshold = params.eps / 2
    return np.flatnonzero(pt.x >= threshold).tolist()


def greedy_extend(support: list[int], us: UncertaintySet) -> list[int]:
    """Add backbone-common neighbours (lowest index first) until maximal."""
    nb = us.backbone.neighbors
    S = list(support)
    cand = set(range(us.n)) - set(S)
    for v in S:
        cand &= nb[v]
    while cand:
        v = min(cand)
        S.append(v)
        cand &= nb[v]
    return sorted(S)


def run_fw(us: UncertaintySet, start: FeasiblePoint, config: SolverConfig, params: ModelParams) -> RunResult:
    """One run of the Frank-Wolfe method from ``start``."""
    t0 = time.perf_counter()
    ok, viol = feasible_check(start, params, TOL_FEAS)
    if not ok:
        raise ValueError(f"start point is infeasible (violation {viol:.3g})")
    if not params.satisfies_exactness_bound:
        log.warning("beta=%g does not exceed the exactness bound", params.beta)
    L = lipschitz_upper_bound(us, params)
    eta0 = config.eta0(L)
    pt = FeasiblePoint(start.x.copy(), start.y.copy())
    G = float(component_values(us, pt, params).max())
    tracker = BoundTracker(us.n, G, value_lower_bound(us.n, params.gamma), config.sigma, eta0,
                           config.eta_mode == "decaying", config.tau)
    trace: list[IterateRecord] = []
    termination = K_MAX_REACHED
    message = ""
    k = 0
    while True:
        eta_k = eta_schedule(k, config, L)
        rep = eta_active(us, pt, params, config.delta, eta_k, L, tol_active=config.tol_active,
                         strict_radius=config.strict_radius)
        grads = component_gradients(us, pt, params, rep.eta)
        vertex, gap = lmo_step(pt, grads, params)
        c_star, bound = tracker.update(k, gap)
        rec = IterateRecord(k, G, gap, None, eta_k, rep.exact.size, rep.delta.size, rep.eta.size,
                            rep.skipped, rep.lp_calls, feasible_check(pt, params)[1], c_star, bound)
        trace.append(rec)
        if gap <= config.xi:
            termination = GAP_BELOW_XI
            break
        if k >= config.k_max:
            termination = K_MAX_REACHED
            break
        d = (vertex.x - pt.x, vertex.y - pt.y)
        try:
            alpha, m, G_new = armijo_search(us, pt, d, gap, config, params, G)
        except LineSearchError as exc:
            termination = LINE_SEARCH_FAILED
            message = str(exc)
            break
        rec.step, rec.armijo_m, rec.G_next = alpha, m, G_new
        pt = FeasiblePoint(pt.x + alpha * d[0], pt.y + alpha * d[1])
        G = G_new
        k += 1

    support = extract_support(pt, params, config.support_threshold)
    if config.repair_maximal and support and us.backbone.is_clique(support):
        support = greedy_extend(support, us)
    is_common, is_maximal = verify_common_clique(support, us)
    return RunResult(pt, trace, termination, support, is_common, is_maximal, len(support), L, eta0,
                     list(tracker.violations), time.perf_counter() - t0, message)


def check_run_invariants(result: RunResult, config: SolverConfig, tol_feas: float = TOL_FEAS) -> list[str]:
    """Per-run invariant audit. Returns human-readable violations (empty when clean)."""
    out = []
    cap = max_eta(config.delta, result.lipschitz) * (1 + 1e-12)
    for r in result.trace:
        if r.feas_violation > tol_feas:
            out.append(f"k={r.k}: feasibility violation {r.feas_violation:.3g}")
        if r.gap < 0:
            out.append(f"k={r.k}: negative gap {r.gap}")
        if r.eta > cap:
            out.append(f"k={r.k}: eta {r.eta:g} above delta/(2L)")
        if r.step is not None and r.G_next > r.G_value - config.sigma * r.step * r.gap:
            out.append(f"k={r.k}: Armijo inequality violated")
        if r.c_star > r.bound * (1 + 1e-12):
            out.append(f"k={r.k}: c*={r.c_star:.3g} exceeds rate bound {r.bound:.3g}")
    for a, b in zip(result.trace, result.trace[1:]):
        if b.G_value > a.G_value:
            out.append(f"k={b.k}: objective increased")
    if result.termination == GAP_BELOW_XI and result.trace[-1].gap > config.xi:
        out.append("terminated on gap but final gap exceeds xi")
    return out


# --- multistart ---------------------------------------------------------------

@dataclass
class StartOutcome:
    index: int
    result: RunResult | None
    error: str | None = None

    @property
    def size(self) -> int:
        return self.result.verified_size if self.result is not None else 0


@dataclass
class MultistartResult:
    outcomes: list[StartOutcome]

    @property
    def sizes(self) -> list[int]:
        return [o.size for o in self.outcomes]

    @property
    def best(self) -> StartOutcome:
        return max(self.outcomes, key=lambda o: (o.size, -o.index))

    @property
    def max(self) -> int:
        return max(self.sizes)

    @property
    def mean(self) -> float:
        return float(np.mean(self.sizes))

    @property
    def std(self) -> float:
        return float(np.std(self.sizes))

    @property
    def failures(self) -> list[StartOutcome]:
        return [o for o in self.outcomes if o.result is None or not o.result.is_common_clique]


def start_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, index])


def _one_start(us: UncertaintySet, config: SolverConfig, params: ModelParams, index: int) -> StartOutcome:
    rng = np.random.default_rng(start_seed(config.seed, index))
    try:
        start = random_start(us.n, params.eps, rng)
        return StartOutcome(index, run_fw(us, start, config, params))
    except Exception as exc:  # noqa: BLE001 - one bad start must not sink the batch
        log.exception("start %d failed", index)
        return StartOutcome(index, None, f"{type(exc).__name__}: {exc}")


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def multistart(us: UncertaintySet, config: SolverConfig, params: ModelParams,
               workers: int | None = None) -> MultistartResult:
    """Run ``config.n_starts`` seeded random starts; results do not depend on ``workers``."""
    workers = worker_count(workers)
    idx = list(range(config.n_starts))
    if workers == 1 or len(idx) == 1:
        outcomes = [_one_start(us, config, params, i) for i in idx]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_one_start, [us] * len(idx), [config] * len(idx),
                                     [params] * len(idx), idx))
    return MultistartResult(sorted(outcomes, key=lambda o: o.index))


def with_overrides(config: SolverConfig, **kw) -> SolverConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
