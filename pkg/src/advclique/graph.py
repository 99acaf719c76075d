"""Graphs, uncertainty sets, DIMACS I/O and instance generation."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MANIFEST_VERSION = 1
MANIFEST_NAME = "instance.json"


class DimacsError(ValueError):
    """Malformed DIMACS input; the message carries the line number."""


class InstanceError(ValueError):
    """Invalid or inconsistent instance manifest."""


def _norm_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Simple undirected loopless graph on vertices ``0..n-1``."""

    n: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={self.n}")
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            norm.add(_norm_edge(i, j))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_adjacency(cls, A: np.ndarray) -> Graph:
        A = np.asarray(A)
        iu, ju = np.nonzero(np.triu(A, 1))
        return cls(A.shape[0], frozenset(zip(iu.tolist(), ju.tolist())))

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        if self.edges:
            e = np.array(sorted(self.edges))
            A[e[:, 0], e[:, 1]] = 1.0
            A[e[:, 1], e[:, 0]] = 1.0
        A.setflags(write=False)
        return A

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        nb: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nb[i].add(j)
            nb[j].add(i)
        return tuple(frozenset(s) for s in nb)

    def has_edge(self, i: int, j: int) -> bool:
        return _norm_edge(i, j) in self.edges

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = sorted(set(vertices))
        return all(self.has_edge(a, b) for k, a in enumerate(vs) for b in vs[k + 1:])

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def regularized_matrix(g: Graph) -> np.ndarray:
    """``I/2 + A``: ones on edges, one half on the diagonal."""
    return 0.5 * np.eye(g.n) + g.adjacency


@dataclass(frozen=True)
class Provenance:
    base_graph: str
    b: float
    p: float
    seed: int
    backbone: tuple[tuple[int, int], ...] = ()

    def to_dict(self) -> dict:
        return {"base_graph": self.base_graph, "b": self.b, "p": self.p, "seed": self.seed,
                "backbone": [list(e) for e in self.backbone]}

    @classmethod
    def from_dict(cls, d: dict) -> Provenance:
        return cls(str(d["base_graph"]), float(d["b"]), float(d["p"]), int(d["seed"]),
                   tuple(tuple(e) for e in d.get("backbone", [])))


@dataclass(frozen=True)
class UncertaintySet:
    """A finite family of graphs on a common vertex set."""

    graphs: tuple[Graph, ...]
    provenance: Provenance | None = None

    def __post_init__(self) -> None:
        graphs = tuple(self.graphs)
        if not graphs:
            raise ValueError("uncertainty set must contain at least one graph")
        n = graphs[0].n
        if any(g.n != n for g in graphs):
            raise ValueError("all graphs in an uncertainty set must share n")
        object.__setattr__(self, "graphs", graphs)

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def m(self) -> int:
        return len(self.graphs)

    @cached_property
    def adjacency_stack(self) -> np.ndarray:
        """(m, n, n) stack of adjacency matrices."""
        S = np.stack([g.adjacency for g in self.graphs])
        S.setflags(write=False)
        return S

    @cached_property
    def complement_stack(self) -> np.ndarray:
        """(m, n, n) stack of complement adjacencies, i.e. ``E - I/2 - U`` per member."""
        S = 1.0 - np.eye(self.n) - self.adjacency_stack
        S.setflags(write=False)
        return S

    @cached_property
    def backbone(self) -> Graph:
        return intersection_graph(self)


def intersection_graph(us: UncertaintySet) -> Graph:
    """Backbone: edges present in every member graph."""
    common = set(us.graphs[0].edges)
    for g in us.graphs[1:]:
        common &= g.edges
    return Graph(us.n, frozenset(common))


@dataclass(frozen=True)
class InstanceSpec:
    base_graph: Graph
    b: float
    p: float
    m: int
    seed: int
    base_name: str = "base"

    def __post_init__(self) -> None:
        if not 0.0 < self.b <= 1.0:
            raise ValueError(f"backbone fraction b must lie in (0, 1], got {self.b}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"addition probability p must lie in [0, 1], got {self.p}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")


def generate_instance(spec: InstanceSpec) -> UncertaintySet:
    """Draw a backbone of ``floor(b*|E|)`` base edges, then m realizations.

    Each realization keeps the backbone and adds every remaining base edge
    independently with probability ``p``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    base = spec.base_graph.sorted_edges()
    if not base:
        warnings.warn("base graph has no edges; backbone is empty", RuntimeWarning, stacklevel=2)
    k = int(np.floor(spec.b * len(base)))
    perm = rng.permutation(len(base))
    chosen = np.zeros(len(base), dtype=bool)
    chosen[perm[:k]] = True
    backbone = [e for e, c in zip(base, chosen) if c]
    pool = [e for e, c in zip(base, chosen) if not c]
    graphs = []
    for _ in range(spec.m):
        keep = rng.random(len(pool)) < spec.p
        edges = backbone + [e for e, kp in zip(pool, keep) if kp]
        graphs.append(Graph(spec.base_graph.n, frozenset(edges)))
    prov = Provenance(spec.base_name, float(spec.b), float(spec.p), int(spec.seed), tuple(backbone))
    return UncertaintySet(tuple(graphs), prov)


def random_graph(n: int, density: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, density) graph."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < density
    return Graph(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))


def planted_instance(n: int, clique: int, m: int, noise: float, seed: int) -> UncertaintySet:
    """m noisy graphs sharing a clique planted on a random vertex subset.

    Every member contains the planted clique; each other vertex pair is an
    edge independently with probability ``noise``, redrawn per member. The
    planted vertices are ``planted_vertices(n, clique, seed)``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    where = sorted(rng.choice(n, size=clique, replace=False).tolist())
    planted = [(i, j) for a, i in enumerate(where) for j in where[a + 1:]]
    iu, ju = np.triu_indices(n, 1)
    graphs = []
    for _ in range(m):
        keep = rng.random(iu.size) < noise
        edges = set(planted) | set(zip(iu[keep].tolist(), ju[keep].tolist()))
        graphs.append(Graph(n, frozenset(edges)))
    return UncertaintySet(tuple(graphs))


def planted_vertices(n: int, clique: int, seed: int) -> list[int]:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return sorted(rng.choice(n, size=clique, replace=False).tolist())


# --- DIMACS ----------------------------------------------------------------

def parse_dimacs(text: str | Iterable[str]) -> Graph:
    """Parse a DIMACS ``.clq`` graph (1-indexed) into a 0-indexed Graph."""
    lines = text.splitlines() if isinstance(text, str) else text
    n = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tok = line.split()
        if tok[0] == "p":
            if n is not None:
                raise DimacsError(f"line {lineno}: duplicate problem line")
            if len(tok) != 4 or tok[1] not in ("edge", "col"):
                raise DimacsError(f"line {lineno}: malformed problem line {line!r}")
            try:
                n = int(tok[2])
                int(tok[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer in problem line {line!r}") from None
            if n < 1:
                raise DimacsError(f"line {lineno}: vertex count must be positive")
        elif tok[0] == "e":
            if n is None:
                raise DimacsError(f"line {lineno}: edge line before problem line")
            if len(tok) != 3:
                raise DimacsError(f"line {lineno}: malformed edge line {line!r}")
            try:
                u, v = int(tok[1]), int(tok[2])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer vertex in {line!r}") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"line {lineno}: vertex out of range [1, {n}] in {line!r}")
            if u == v:
                raise DimacsError(f"line {lineno}: self-loop on vertex {u}")
            edges.add(_norm_edge(u - 1, v - 1))
        else:
            raise DimacsError(f"line {lineno}: unknown line type {tok[0]!r}")
    if n is None:
        raise DimacsError("missing problem line")
    return Graph(n, frozenset(edges))


def read_dimacs(path: str | Path) -> Graph:
    with open(path, encoding="ascii") as fh:
        return parse_dimacs(fh.read())


def format_dimacs(g: Graph, comment: str | None = None) -> str:
    out = []
    if comment:
        out.extend(f"c {c}" for c in comment.splitlines())
    out.append(f"p edge {g.n} {g.n_edges}")
    out.extend(f"e {i + 1} {j + 1}" for i, j in g.sorted_edges())
    return "\n".join(out) + "\n"


def write_dimacs(g: Graph, path: str | Path, comment: str | None = None) -> None:
    Path(path).write_text(format_dimacs(g, comment), encoding="ascii")


# --- instance manifests ------------------------------------------------------

def _manifest_path(path: str | Path) -> Path:
    p = Path(path)
    return p / MANIFEST_NAME if p.is_dir() or p.suffix != ".json" else p


def save_instance(us: UncertaintySet, path: str | Path) -> Path:
    """Write ``us`` as a JSON manifest. A directory path gets ``instance.json``."""
    p = Path(path)
    if p.suffix != ".json":
        p.mkdir(parents=True, exist_ok=True)
        p = p / MANIFEST_NAME
    prov = us.provenance
    doc = {
        "version": MANIFEST_VERSION,
        "n": us.n,
        "m": us.m,
        "seed": prov.seed if prov else None,
        "b": prov.b if prov else None,
        "p": prov.p if prov else None,
        "base_graph": prov.base_graph if prov else None,
        "provenance": prov.to_dict() if prov else None,
        "graphs": [{"n": g.n, "edges": [list(e) for e in g.sorted_edges()]} for g in us.graphs],
    }
    p.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return p


def load_instance(path: str | Path) -> UncertaintySet:
    p = _manifest_path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{p}: not valid JSON ({exc})") from None
    if doc.get("version") != MANIFEST_VERSION:
        raise InstanceError(f"{p}: unsupported manifest version {doc.get('version')!r}")
    n = int(doc["n"])
    graphs = []
    for k, entry in enumerate(doc["graphs"]):
        if "dimacs" in entry:
            g = read_dimacs(p.parent / entry["dimacs"])
        else:
            g = Graph(int(entry.get("n", n)), frozenset(tuple(e) for e in entry["edges"]))
        if g.n != n:
            raise InstanceError(f"{p}: graph {k} has n={g.n}, manifest declares n={n}")
        graphs.append(g)
    if len(graphs) != int(doc["m"]):
        raise InstanceError(f"{p}: manifest declares m={doc['m']} but lists {len(graphs)} graphs")
    prov = Provenance.from_dict(doc["provenance"]) if doc.get("provenance") else None
    return UncertaintySet(tuple(graphs), prov)


def verify_common_clique(vertices: Sequence[int], us: UncertaintySet) -> tuple[bool, bool]:
    """Return ``(is_common, is_maximal)`` for a vertex set against ``us``.

    Maximality is judged in the intersection graph: no outside vertex is
    adjacent to every member of the set.
    """
    S = sorted(set(int(v) for v in vertices))
    if not S:
        return False, False
    bb = us.backbone
    if not bb.is_clique(S):
        return False, False
    nb = bb.neighbors
    common = set(range(us.n)) - set(S)
    for v in S:
        common &= nb[v]
        if not common:
            break
    return True, not common
