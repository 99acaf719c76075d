"""Benchmark harness: instance families, multistart runs and reports.

For every (graph, b, p) configuration a number of independent instances is
generated; each is solved by multistart Frank-Wolfe and checked against the
exact oracle. One size per experiment (the best over its starts) feeds the
max/mean/std columns.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .frankwolfe import SolverConfig, check_run_invariants, multistart, worker_count
from .graph import Graph, InstanceSpec, generate_instance, random_graph, read_dimacs
from .model import ModelParams
from .oracle import DEFAULT_BUDGET, max_common_clique

log = logging.getLogger(__name__)

CSV_HEADER = ["graph", "b", "p", "max", "mean", "std", "real_max", "runs", "starts", "seed"]

_SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - {"seed", "n_starts"}


@dataclass
class BenchmarkConfig:
    graphs: list[str]
    b: list[float] = field(default_factory=lambda: [0.25, 0.5, 0.75])
    p: list[float] = field(default_factory=lambda: [0.25, 0.5, 0.75])
    m: int = 10
    n_experiments: int = 10
    n_starts: int = 10
    solver: dict = field(default_factory=dict)
    output: str | None = None
    report: str | None = None
    seed: int = 0
    gamma: float = 1.0
    eps: float | None = None
    oracle_budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if not self.graphs or not self.b or not self.p:
            raise ValueError("graphs, b and p lists must be nonempty")
        if self.m < 1 or self.n_experiments < 1 or self.n_starts < 1:
            raise ValueError("m, n_experiments and n_starts must be >= 1")
        unknown = set(self.solver) - _SOLVER_KEYS
        if unknown:
            raise ValueError(f"unknown solver override(s): {sorted(unknown)}")

    @classmethod
    def from_dict(cls, d: dict) -> BenchmarkConfig:
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown benchmark config key(s): {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> BenchmarkConfig:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def solver_config(self, seed: int) -> SolverConfig:
        return SolverConfig(seed=seed, n_starts=self.n_starts, **self.solver)


def resolve_graph(ref: str) -> tuple[str, Graph]:
    """``gnp:N:DENSITY:SEED`` builds a random graph; anything else is a DIMACS path."""
    if ref.startswith("gnp:"):
        try:
            _, n, dens, seed = ref.split(":")
            return ref, random_graph(int(n), float(dens), int(seed))
        except ValueError as exc:
            raise ValueError(f"bad random graph reference {ref!r}; expected gnp:N:DENSITY:SEED") from exc
    path = Path(ref)
    return path.stem, read_dimacs(path)


def derive_seed(*keys: int) -> int:
    """Stable 64-bit seed from integer keys."""
    lo, hi = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


@dataclass
class ExperimentRecord:
    experiment: int
    instance_seed: int
    solver_seed: int
    best_size: int
    real_max: int
    oracle_complete: bool
    best_clique: list[int]
    runs: list[dict]
    invariant_violations: list[str]
    seconds: float


@dataclass
class ReportRow:
    graph: str
    b: float
    p: float
    sizes: list[int]
    real_max: int
    oracle_complete: bool
    starts: int
    seed: int
    experiments: list[ExperimentRecord] = field(default_factory=list)

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
    def flagged(self) -> bool:
        """Any run whose extracted support was not a common clique."""
        return any(not r["is_common"] for e in self.experiments for r in e.runs)

    def csv_fields(self) -> list[str]:
        real = str(self.real_max) if self.oracle_complete else f"{self.real_max}+"
        return [self.graph, f"{self.b:g}", f"{self.p:g}", str(self.max), f"{self.mean:.2f}",
                f"{self.std:.2f}", real, str(len(self.sizes)), str(self.starts), str(self.seed)]


def _run_experiment(cfg: BenchmarkConfig, name: str, base: Graph, idx: tuple[int, int, int],
                    e: int) -> ExperimentRecord:
    t0 = time.perf_counter()
    gi, bi, pi = idx
    inst_seed = derive_seed(cfg.seed, gi, bi, pi, e, 0)
    solver_seed = derive_seed(cfg.seed, gi, bi, pi, e, 1)
    us = generate_instance(InstanceSpec(base, cfg.b[bi], cfg.p[pi], cfg.m, inst_seed, name))
    params = ModelParams.default(us.n, gamma=cfg.gamma, eps=cfg.eps)
    scfg = cfg.solver_config(solver_seed)
    ms = multistart(us, scfg, params, workers=1)
    oracle = max_common_clique(us, cfg.oracle_budget)
    runs, violations = [], []
    for o in ms.outcomes:
        r = o.result
        if r is None:
            runs.append({"start": o.index, "size": 0, "is_common": False, "is_maximal": False,
                         "iterations": 0, "final_gap": None, "termination": "error", "error": o.error})
            continue
        runs.append({"start": o.index, "size": r.verified_size, "support": r.support,
                     "is_common": r.is_common_clique, "is_maximal": r.is_maximal,
                     "iterations": r.iterations, "final_gap": r.final_gap,
                     "termination": r.termination})
        violations += [f"start {o.index}: {v}" for v in check_run_invariants(r, scfg)]
    best = ms.best
    return ExperimentRecord(e, inst_seed, solver_seed, ms.max, oracle.size, oracle.complete,
                            best.result.support if best.result is not None and best.size else [],
                            runs, violations, time.perf_counter() - t0)


def run_benchmark(cfg: BenchmarkConfig, workers: int | None = None) -> list[ReportRow]:
    """Run every configuration; rows come back ordered by (graph, b, p)."""
    graphs = [resolve_graph(g) for g in cfg.graphs]
    jobs = []
    for gi, (name, base) in enumerate(graphs):
        for bi in range(len(cfg.b)):
            for pi in range(len(cfg.p)):
                for e in range(cfg.n_experiments):
                    jobs.append((cfg, name, base, (gi, bi, pi), e))
    workers = worker_count(workers)
    if workers == 1:
        records = [_run_experiment(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_experiment, *zip(*jobs)))
    rows = []
    it = iter(records)
    for gi, (name, _) in enumerate(graphs):
        for b in cfg.b:
            for p in cfg.p:
                exps = [next(it) for _ in range(cfg.n_experiments)]
                rows.append(ReportRow(name, b, p, [x.best_size for x in exps],
                                      max(x.real_max for x in exps),
                                      all(x.oracle_complete for x in exps), cfg.n_starts, cfg.seed, exps))
                log.info("%s b=%g p=%g: max=%d real=%d", name, b, p, rows[-1].max, rows[-1].real_max)
    return rows


def format_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def format_text(rows: list[ReportRow]) -> str:
    """JSON document with per-experiment and per-run detail."""
    doc = []
    for r in rows:
        d = {"graph": r.graph, "b": r.b, "p": r.p, "max": r.max, "mean": round(r.mean, 6),
             "std": round(r.std, 6), "real_max": r.real_max, "oracle_complete": r.oracle_complete,
             "runs": len(r.sizes), "starts": r.starts, "seed": r.seed, "sizes": r.sizes,
             "flagged": r.flagged}
        d["experiments"] = [asdict(e) for e in r.experiments]
        doc.append(d)
    return json.dumps(doc, indent=1, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def emit_report(rows: list[ReportRow], path: str | Path, fmt: str = "csv") -> Path:
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "csv":
        text = format_csv(rows)
    elif fmt in ("text", "json"):
        text = format_text(rows)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path

