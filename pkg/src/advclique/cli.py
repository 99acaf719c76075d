"""Command-line front end: gen, solve, oracle, bench, check."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .frankwolfe import SolverConfig, multistart
from .graph import InstanceSpec, generate_instance, load_instance, save_instance, verify_common_clique, write_dimacs
from .model import ModelParams
from .oracle import DEFAULT_BUDGET, max_common_clique


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--starts", type=int, default=None, help="number of random starts")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--xi", type=float, default=None, help="stopping threshold on the gap")
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--eta-mode", choices=["fixed", "decaying"], default=None)
    p.add_argument("--eta", type=float, default=None, help="eta (fixed) or eta_0 (decaying)")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--repair", action="store_true", help="greedily extend the support to a maximal clique")


def _solver_overrides(args) -> dict:
    pairs = {"xi": args.xi, "k_max": args.k_max, "delta": args.delta, "eta_mode": args.eta_mode,
             "eta": args.eta, "tau": args.tau}
    out = {k: v for k, v in pairs.items() if v is not None}
    if getattr(args, "repair", False):
        out["repair_maximal"] = True
    return out


def cmd_gen(args) -> int:
    name, base = bench.resolve_graph(args.graph)
    us = generate_instance(InstanceSpec(base, args.b, args.p, args.m, args.seed, name))
    path = save_instance(us, args.out)
    if args.dimacs:
        gdir = Path(args.out) / "graphs"
        gdir.mkdir(parents=True, exist_ok=True)
        for i, g in enumerate(us.graphs):
            write_dimacs(g, gdir / f"g{i:03d}.clq", comment=f"{name} realization {i}")
    print(f"wrote {path} (n={us.n}, m={us.m}, backbone edges={us.backbone.n_edges})")
    return 0


def cmd_solve(args) -> int:
    us = load_instance(args.instance)
    params = ModelParams.default(us.n, gamma=args.gamma, eps=args.eps)
    cfg = SolverConfig(seed=args.seed or 0, n_starts=args.starts or 10, **_solver_overrides(args))
    ms = multistart(us, cfg, params)
    best = ms.best
    summary = {
        "n": us.n, "m": us.m, "eps": params.eps, "beta": params.beta, "gamma": params.gamma,
        "sizes": ms.sizes, "max": ms.max, "mean": round(ms.mean, 4), "std": round(ms.std, 4),
        "best_clique": best.result.support if best.result is not None else [],
        "runs": [
            {"start": o.index, "size": o.size, "error": o.error} if o.result is None else
            {"start": o.index, "size": o.size, "is_common": o.result.is_common_clique,
             "is_maximal": o.result.is_maximal, "iterations": o.result.iterations,
             "final_gap": o.result.final_gap, "termination": o.result.termination}
            for o in ms.outcomes
        ],
    }
    text = json.dumps(summary, indent=1)
    if args.json:
        Path(args.json).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_oracle(args) -> int:
    us = load_instance(args.instance)
    res = max_common_clique(us, args.budget)
    status = "optimal" if res.complete else "budget_exceeded"
    print(json.dumps({"size": res.size, "clique": res.vertices, "nodes": res.nodes_explored,
                      "status": status}))
    return 0


def cmd_bench(args) -> int:
    d = {}
    if args.graphs:
        d["graphs"] = args.graphs
    for key in ("b", "p"):
        if getattr(args, key):
            d[key] = getattr(args, key)
    for key, val in (("m", args.m), ("n_experiments", args.experiments), ("n_starts", args.starts),
                     ("seed", args.seed), ("output", args.out), ("report", args.report)):
        if val is not None:
            d[key] = val
    if _solver_overrides(args):
        d["solver"] = _solver_overrides(args)
    if args.config:
        # the config file takes precedence over flags
        d.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    if "graphs" not in d:
        raise ValueError("no graphs given (use --graphs or a config file)")
    cfg = bench.BenchmarkConfig.from_dict(d)
    rows = bench.run_benchmark(cfg)
    if cfg.output:
        bench.emit_report(rows, cfg.output, "csv")
    else:
        sys.stdout.write(bench.format_csv(rows))
    if cfg.report:
        bench.emit_report(rows, cfg.report, "text")
    return 0


def cmd_check(args) -> int:
    us = load_instance(args.instance)
    try:
        clique = [int(t) for t in args.clique.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ValueError(f"bad clique list {args.clique!r}") from exc
    if any(not 0 <= v < us.n for v in clique):
        raise ValueError(f"clique vertices must lie in [0, {us.n})")
    is_common, is_maximal = verify_common_clique(clique, us)
    print(json.dumps({"clique": sorted(set(clique)), "is_common": is_common, "is_maximal": is_maximal}))
    return 0 if is_common else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="advclique", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an uncertainty-set instance")
    g.add_argument("--graph", required=True, help="DIMACS file or gnp:N:DENSITY:SEED")
    g.add_argument("--b", type=float, required=True, help="backbone fraction of base edges")
    g.add_argument("--p", type=float, required=True, help="edge-addition probability")
    g.add_argument("--m", type=int, required=True, help="number of realizations")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--dimacs", action="store_true", help="also write each realization as DIMACS")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="multistart Frank-Wolfe on one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--json", default=None, help="also write the summary to this file")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exact maximum common clique")
    o.add_argument("--instance", required=True)
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="run the benchmark protocol")
    b.add_argument("--config", default=None, help="JSON config; its keys override flags")
    b.add_argument("--graphs", nargs="+", default=None)
    b.add_argument("--b", type=float, nargs="+", default=None)
    b.add_argument("--p", type=float, nargs="+", default=None)
    b.add_argument("--m", type=int, default=None)
    b.add_argument("--experiments", type=int, default=None)
    b.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    b.add_argument("--report", default=None, help="per-run JSON report path")
    _add_solver_flags(b)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("check", help="verify a claimed common clique")
    c.add_argument("--instance", required=True)
    c.add_argument("--clique", required=True, help='comma-separated 0-based vertices, e.g. "0,3,7"')
    c.set_defaults(func=cmd_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
