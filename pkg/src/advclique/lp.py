"""Dense two-phase primal simplex.

Small, dependency-free LP kernel used for the linear minimization oracle and
for the local active-set feasibility systems. Problems are stated as

    minimize    c @ v
    subject to  A_le @ v <= b_le
                A_eq @ v == b_eq
                lo <= v <= hi

with ``lo``/``hi`` allowed to be infinite. Internally the problem is shifted
to ``w >= 0`` form, equilibrated, and solved on a full tableau.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
STALL_THRESHOLD = 50
REFACTOR_EVERY = 50
RC_ERR_FACTOR = 100.0
DROP_TOL = 1e-13
EPS_REL = 1e-3
EPS = float(np.finfo(float).eps)


class LpError(ValueError):
    """Malformed linear program or solver breakdown."""


@dataclass
class LinearProgram:
    c: np.ndarray
    A_le: np.ndarray | None = None
    b_le: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_le, self.b_le = _rows(self.A_le, self.b_le, n, "le")
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n, "eq")
        self.lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=float).ravel()
        self.hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).ravel()
        if self.lo.size != n or self.hi.size != n:
            raise LpError("bound vectors must match the number of variables")
        for name in ("c", "A_le", "b_le", "A_eq", "b_eq"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise LpError(f"non-finite entries in {name}")
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)):
            raise LpError("NaN bound")
        if np.any(self.lo == np.inf) or np.any(self.hi == -np.inf):
            raise LpError("bound lo=+inf or hi=-inf")

    @property
    def n_vars(self) -> int:
        return self.c.size


def _rows(A, b, n, tag):
    if A is None:
        if b is not None and np.size(b):
            raise LpError(f"b_{tag} given without A_{tag}")
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return np.zeros((0, n)), np.zeros(0)
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[1] != n:
        raise LpError(f"A_{tag} has {A.shape[1]} columns, expected {n}")
    if b.size != A.shape[0]:
        raise LpError(f"b_{tag} has {b.size} entries, expected {A.shape[0]}")
    return A, b


@dataclass
class LpSolution:
    status: str
    v: np.ndarray | None = None
    objective: float = float("nan")
    iterations: int = 0
    phase1_objective: float = float("nan")
    used_bland: bool = field(default=False, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Full simplex tableau. Last row holds reduced costs, last column the rhs.

    ``R0`` keeps the original constraint rows so the tableau can be rebuilt
    from a fresh basis solve, which stops round-off from piling up.
    """

    def __init__(self, R0: np.ndarray, basis: np.ndarray, cost: np.ndarray, stall_threshold: int,
                 max_iter: int, twin: np.ndarray | None = None):
        self.R0 = R0
        # twin[j] is the other half of a split free variable, else -1
        self.twin = np.full(R0.shape[1] - 1, -1) if twin is None else twin
        self.basis = basis
        self.cost = cost
        self.stall_threshold = stall_threshold
        self.max_iter = max_iter
        self.iterations = 0
        self.bland = False
        self.T = np.zeros((R0.shape[0] + 1, R0.shape[1]))
        self.refactor()

    def refactor(self) -> None:
        m = self.R0.shape[0]
        T = self.T
        B = self.R0[:, self.basis]
        if m and np.array_equal(B, np.eye(m)):
            T[:m] = self.R0
        elif m:
            try:
                T[:m] = np.linalg.solve(B, self.R0)
            except np.linalg.LinAlgError as exc:
                raise LpError("singular basis during refactorization") from exc
        cb = self.cost[self.basis]
        T[-1, :-1] = self.cost - cb @ T[:m, :-1]
        T[-1, -1] = -(cb @ T[:m, -1])
        T[np.abs(T) < DROP_TOL] = 0.0
        T[:m, self.basis] = 0.0
        T[np.arange(m), self.basis] = 1.0
        T[-1, self.basis] = 0.0

    def set_cost(self, cost: np.ndarray) -> None:
        self.cost = cost
        self.refactor()

    def pivot(self, p: int, q: int) -> None:
        T = self.T
        T[p] /= T[p, q]
        rows = np.flatnonzero(T[:, q])
        rows = rows[rows != p]
        block = T[rows] - np.outer(T[rows, q], T[p])
        block[np.abs(block) < DROP_TOL] = 0.0
        T[rows] = block
        T[:, q] = 0.0
        T[p, q] = 1.0
        self.basis[p] = q

    def _twin_mask(self, n_cols: int) -> np.ndarray:
        # the twin of a basic free-variable half has reduced cost zero in
        # exact arithmetic; pricing its round-off would report a false ray
        tw = self.twin[:n_cols]
        mask = np.zeros(n_cols, dtype=bool)
        has = tw >= 0
        if has.any():
            in_basis = np.zeros(self.T.shape[1], dtype=bool)
            in_basis[self.basis] = True
            mask[np.flatnonzero(has)[in_basis[tw[has]]]] = True
        return mask

    def _pick(self, red: np.ndarray, tol) -> int | None:
        cand = np.flatnonzero(red < -tol)
        if cand.size == 0:
            return None
        if self.bland:
            return int(cand[0])
        return int(cand[np.argmin(red[cand])])

    def _entering(self, n_cols: int) -> int | None:
        T = self.T
        m = T.shape[0] - 1
        cb = self.cost[self.basis]
        masked = self._twin_mask(n_cols)
        # fast path: propose from the pivot-updated cost row, then confirm the
        # proposal with a fresh reduced cost and its rounding-error bound
        red = np.where(masked, 0.0, T[-1, :n_cols])
        q = self._pick(red, FEAS_TOL)
        if q is not None:
            rq = self.cost[q] - cb @ T[:m, q]
            err = abs(self.cost[q]) + np.abs(cb) @ np.abs(T[:m, q])
            if rq < -(FEAS_TOL + RC_ERR_FACTOR * EPS * err):
                T[-1, q] = rq
                return q
        # slow path: reprice every column from the constraint rows, since
        # pivot updates amplify round-off by the size of the basic costs
        T[-1, :n_cols] = self.cost[:n_cols] - cb @ T[:m, :n_cols]
        T[-1, self.basis] = 0.0
        T[-1, -1] = -(cb @ T[:m, -1])
        red = np.where(masked, 0.0, T[-1, :n_cols])
        err = np.abs(self.cost[:n_cols]) + np.abs(cb) @ np.abs(T[:m, :n_cols])
        return self._pick(red, FEAS_TOL + RC_ERR_FACTOR * EPS * err)

    def run(self, n_cols: int) -> str:
        """Optimize over the first ``n_cols`` columns. Returns a status string."""
        T = self.T
        m = T.shape[0] - 1
        stall = 0
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                raise LpError("simplex iteration limit reached")
            q = self._entering(n_cols)
            if q is None and since_refactor:
                # confirm optimality on a freshly computed tableau
                self.refactor()
                since_refactor = 0
                q = self._entering(n_cols)
            if q is None:
                return OPTIMAL
            col = T[:m, q]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED
            rhs = np.maximum(T[rows, -1], 0.0)
            ratios = rhs / col[rows]
            best = ratios.min()
            if self.bland:
                ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
                p = int(ties[np.argmin(self.basis[ties])])
            else:
                # Harris two-pass test: within a FEAS_TOL relaxation of the
                # step, take the largest pivot element
                bound = ((rhs + FEAS_TOL) / col[rows]).min()
                ok = rows[ratios <= bound]
                p = int(ok[np.argmax(col[ok])])
            # a pivot that does not move the objective counts as degenerate
            if best <= PIVOT_TOL or -T[-1, q] * best <= FEAS_TOL * EPS_REL:
                stall += 1
                if stall >= self.stall_threshold:
                    self.bland = True
            else:
                stall = 0
            self.pivot(p, q)
            self.iterations += 1
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0


@dataclass
class _StandardForm:
    # v = offset + M @ w, w >= 0
    offset: np.ndarray
    M: np.ndarray
    c: np.ndarray
    A: np.ndarray  # le rows first, then eq rows
    b: np.ndarray
    n_le: int
    col_scale: np.ndarray
    twin: np.ndarray


def _standardize(lp: LinearProgram) -> _StandardForm:
    n = lp.n_vars
    cols = []
    offset = np.zeros(n)
    ub_rows = []  # (w column, bound)
    k = 0
    for j in range(n):
        lo, hi = lp.lo[j], lp.hi[j]
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                ub_rows.append((k, hi - lo))
            k += 1
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
            k += 1
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
            k += 2
    M = np.zeros((n, k))
    for idx, (j, s) in enumerate(cols):
        M[j, idx] = s

    A_le = lp.A_le @ M
    b_le = lp.b_le - lp.A_le @ offset
    if ub_rows:
        U = np.zeros((len(ub_rows), k))
        for r, (w, bound) in enumerate(ub_rows):
            U[r, w] = 1.0
        A_le = np.vstack([A_le, U])
        b_le = np.concatenate([b_le, [bd for _, bd in ub_rows]])
    A_eq = lp.A_eq @ M
    b_eq = lp.b_eq - lp.A_eq @ offset

    A = np.vstack([A_le, A_eq])
    b = np.concatenate([b_le, b_eq])
    c = lp.c @ M

    # equilibrate rows, then columns
    if A.size:
        r = np.abs(A).max(axis=1)
        r[r == 0] = 1.0
        A = A / r[:, None]
        b = b / r
        s = np.abs(A).max(axis=0)
        s[s == 0] = 1.0
    else:
        s = np.ones(k)
    A = A / s
    c = c / s
    twin = np.full(k, -1)
    for idx in range(len(cols) - 1):
        if cols[idx][0] == cols[idx + 1][0]:
            twin[idx], twin[idx + 1] = idx + 1, idx
    return _StandardForm(offset, M, c, A, b, A_le.shape[0], s, twin)


def _solve(lp: LinearProgram, phase1_only: bool, stall_threshold: int, max_iter: int | None) -> LpSolution:
    sf = _standardize(lp)
    A, b = sf.A.copy(), sf.b.copy()
    m, k = A.shape
    n_le = sf.n_le
    if max_iter is None:
        max_iter = 50 * (m + k) + 1000

    # rows with negative rhs are flipped; their slack then enters with -1
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    slack_sign = np.where(flip[:n_le], -1.0, 1.0)
    needs_art = np.ones(m, dtype=bool)
    needs_art[:n_le] = flip[:n_le]
    art_rows = np.flatnonzero(needs_art)
    n_art = art_rows.size

    n_cols = k + n_le + n_art
    R0 = np.zeros((m, n_cols + 1))
    R0[:, :k] = A
    R0[np.arange(n_le), k + np.arange(n_le)] = slack_sign
    R0[art_rows, k + n_le + np.arange(n_art)] = 1.0
    R0[:, -1] = b
    basis = np.empty(m, dtype=int)
    basis[:n_le] = k + np.arange(n_le)
    basis[art_rows] = k + n_le + np.arange(n_art)

    cost = np.zeros(n_cols)
    cost[k + n_le:] = 1.0
    twin = np.concatenate([sf.twin, np.full(n_cols - k, -1)])
    tab = _Tableau(R0, basis, cost, stall_threshold, max_iter, twin)
    phase1_obj = 0.0
    if n_art:
        tab.run(n_cols)
        phase1_obj = float(-tab.T[-1, -1])
        if phase1_obj > FEAS_TOL:
            return LpSolution(INFEASIBLE, iterations=tab.iterations, phase1_objective=phase1_obj,
                              used_bland=tab.bland)
        # drive remaining artificials out of the basis; rows where that is
        # impossible are redundant
        T = tab.T
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if tab.basis[i] >= k + n_le:
                nz = np.flatnonzero(np.abs(T[i, :k + n_le]) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(i, int(nz[np.argmax(np.abs(T[i, nz]))]))
                else:
                    keep[i] = False
        cols = np.r_[0:k + n_le, n_cols]
        tab.R0 = tab.R0[keep][:, cols]
        tab.basis = tab.basis[keep]
        tab.T = np.zeros((tab.R0.shape[0] + 1, tab.R0.shape[1]))
        n_cols = k + n_le
        tab.twin = tab.twin[:n_cols]
        tab.cost = np.zeros(n_cols)
        if not phase1_only:
            tab.cost[:k] = sf.c
        tab.refactor()

    if phase1_only:
        return LpSolution(OPTIMAL, v=_recover(sf, tab, k), objective=0.0, iterations=tab.iterations,
                          phase1_objective=phase1_obj, used_bland=tab.bland)

    tab.bland = False
    if n_art == 0:
        cost = np.zeros(n_cols)
        cost[:k] = sf.c
        tab.set_cost(cost)
    status = tab.run(n_cols)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations, phase1_objective=phase1_obj,
                          used_bland=tab.bland)
    v = _recover(sf, tab, k)
    return LpSolution(OPTIMAL, v=v, objective=float(lp.c @ v), iterations=tab.iterations,
                      phase1_objective=phase1_obj, used_bland=tab.bland)


def _recover(sf: _StandardForm, tab: _Tableau, k: int) -> np.ndarray:
    w = np.zeros(k)
    T = tab.T
    for i, j in enumerate(tab.basis):
        if j < k:
            w[j] = max(T[i, -1], 0.0)
    w = w / sf.col_scale
    return sf.offset + sf.M @ w


def solve_lp(lp: LinearProgram, *, stall_threshold: int = STALL_THRESHOLD,
             max_iter: int | None = None) -> LpSolution:
    """Solve ``lp`` to optimality, or report it infeasible/unbounded.

    Dantzig pricing is used until ``stall_threshold`` consecutive degenerate
    pivots occur; Bland's rule then takes over for the rest of the phase,
    which rules out cycling.
    """
    sol = _solve(lp, False, stall_threshold, max_iter)
    if sol.v is not None:
        sol.v = np.clip(sol.v, lp.lo, lp.hi)
        sol.objective = float(lp.c @ sol.v)
    return sol


def check_feasible(A_le=None, b_le=None, A_eq=None, b_eq=None, lo=None, hi=None, *,
                   n_vars: int | None = None) -> bool:
    """Phase-1 feasibility test: True iff the phase-1 optimum is <= 1e-9."""
    if n_vars is None:
        for A in (A_le, A_eq):
            if A is not None and np.size(A):
                n_vars = np.atleast_2d(A).shape[1]
                break
        else:
            if lo is not None:
                n_vars = np.size(lo)
            elif hi is not None:
                n_vars = np.size(hi)
            else:
                raise LpError("cannot infer the number of variables")
    lp = LinearProgram(np.zeros(n_vars), A_le, b_le, A_eq, b_eq, lo, hi)
    if np.any(lp.lo > lp.hi + FEAS_TOL):
        return False
    return _solve(lp, True, STALL_THRESHOLD, None).status == OPTIMAL
