"""Temporal graph instances, demands, solutions and the predicates on them.

An instance is a sequence of frames G_1..G_T over one vertex set.  Depending
on the variant, what changes over time is the edge set ("edge"), the vertex
set ("node", edge presence derived from endpoint activity), or both
("node_and_edge").  A demand (a, b, t) asks for an a-b path whose edges all
exist in frame t.  Weights are exact rationals throughout: reductions halve
and re-add weights, and the test suite compares optima exactly, so floats
are never used.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

Vertex = str

VARIANTS = ("edge", "node", "node_and_edge")


class InputError(ValueError):
    """Malformed instance/solution data (maps to CLI exit code 2)."""


class InfeasibleInstanceError(Exception):
    """A demand cannot be satisfied even by the full underlying graph."""

    def __init__(self, demand: "Demand", message: str | None = None):
        self.demand = demand
        super().__init__(message or f"demand {demand} is unsatisfiable")


@dataclass(frozen=True)
class Edge:
    """One underlying edge.  `times` is the stored activity set; for the
    node variant it is ignored (activity is derived from the endpoints)."""

    u: Vertex
    v: Vertex
    w: Fraction
    times: frozenset[int] = frozenset()

    def endpoints(self) -> tuple[Vertex, Vertex]:
        return (self.u, self.v)


@dataclass(frozen=True)
class Demand:
    a: Vertex
    b: Vertex
    t: int


@dataclass(frozen=True)
class TemporalInstance:
    directed: bool
    variant: str
    num_times: int
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    demands: tuple[Demand, ...]
    node_activity: Optional[Mapping[Vertex, frozenset[int]]] = None
    # Reductions may legitimately produce parallel edges; user input may not.
    allow_parallel: bool = False

    @property
    def k(self) -> int:
        return len(self.demands)

    def activity(self, v: Vertex) -> frozenset[int]:
        if self.node_activity is None:
            return frozenset(range(1, self.num_times + 1))
        return self.node_activity.get(v, frozenset())


def make_instance(
    directed: bool,
    variant: str,
    num_times: int,
    vertices: Iterable[Vertex],
    edges: Iterable[tuple],
    demands: Iterable[tuple],
    node_activity: Mapping[Vertex, Iterable[int]] | None = None,
    allow_parallel: bool = False,
) -> TemporalInstance:
    """Convenience constructor taking plain tuples.

    Edges are (u, v, w, times); for the node variant `times` may be omitted.
    Demands are (a, b, t).
    """
    es = []
    for e in edges:
        if len(e) == 3:
            u, v, w = e
            times: Iterable[int] = ()
        else:
            u, v, w, times = e
        es.append(Edge(u, v, Fraction(w), frozenset(times)))
    act = None
    if node_activity is not None:
        act = {v: frozenset(ts) for v, ts in node_activity.items()}
    return TemporalInstance(
        directed=directed,
        variant=variant,
        num_times=num_times,
        vertices=tuple(vertices),
        edges=tuple(es),
        demands=tuple(Demand(a, b, t) for a, b, t in demands),
        node_activity=act,
        allow_parallel=allow_parallel,
    )


@dataclass(frozen=True)
class Solution:
    """A subgraph given as a sorted tuple of edge indices plus its cost."""

    edges: tuple[int, ...]
    cost: Fraction


def solution_from_edges(instance: TemporalInstance, edge_ids: Iterable[int]) -> Solution:
    ids = tuple(sorted(set(edge_ids)))
    cost = sum((instance.edges[i].w for i in ids), Fraction(0))
    return Solution(edges=ids, cost=cost)


# ---------------------------------------------------------------------------
# Validity


def validate(instance: TemporalInstance) -> list[str]:
    """Return a list of invariant violations (empty iff well formed)."""
    out: list[str] = []
    if instance.variant not in VARIANTS:
        out.append(f"unknown variant {instance.variant!r}")
        return out
    if instance.num_times < 1:
        out.append(f"num_times must be positive, got {instance.num_times}")
    vset = set(instance.vertices)
    if len(vset) != len(instance.vertices):
        out.append("duplicate vertex identifiers")
    trange = range(1, instance.num_times + 1)

    seen_pairs: dict[tuple, int] = {}
    for i, e in enumerate(instance.edges):
        if e.u not in vset:
            out.append(f"edge {i}: endpoint {e.u!r} not a vertex")
        if e.v not in vset:
            out.append(f"edge {i}: endpoint {e.v!r} not a vertex")
        if e.w < 0:
            out.append(f"edge {i}: negative weight {e.w}")
        if instance.variant == "node":
            # activity is derived from the endpoints, stored times are ignored
            pass
        else:
            if not e.times:
                out.append(f"edge {i}: empty active-time set")
            for t in e.times:
                if t not in trange:
                    out.append(f"edge {i}: active time {t} outside [1..{instance.num_times}]")
        key = (e.u, e.v) if instance.directed else (frozenset((e.u, e.v)),)
        if key in seen_pairs and not instance.allow_parallel:
            out.append(f"edge {i}: parallel to edge {seen_pairs[key]} (not flagged)")
        seen_pairs.setdefault(key, i)

    if instance.variant == "edge":
        if instance.node_activity is not None:
            out.append("edge variant must not carry node_activity")
    else:
        if instance.node_activity is None:
            out.append(f"{instance.variant} variant requires node_activity")
        else:
            for v, ts in instance.node_activity.items():
                if v not in vset:
                    out.append(f"node_activity: unknown vertex {v!r}")
                for t in ts:
                    if t not in trange:
                        out.append(f"node_activity[{v!r}]: time {t} outside range")

    for j, d in enumerate(instance.demands):
        if d.a not in vset:
            out.append(f"demand {j}: endpoint {d.a!r} not a vertex")
        if d.b not in vset:
            out.append(f"demand {j}: endpoint {d.b!r} not a vertex")
        if d.t not in trange:
            out.append(f"demand {j}: time {d.t} outside [1..{instance.num_times}]")
    return out


def check_valid(instance: TemporalInstance) -> None:
    violations = validate(instance)
    if violations:
        raise InputError("; ".join(violations))


# ---------------------------------------------------------------------------
# Frames and reachability


def effective_times(instance: TemporalInstance, edge_id: int) -> frozenset[int]:
    """Times at which the edge actually exists, per variant semantics."""
    e = instance.edges[edge_id]
    if instance.variant == "edge":
        return e.times
    both = instance.activity(e.u) & instance.activity(e.v)
    if instance.variant == "node":
        return both
    return both & e.times


@dataclass(frozen=True)
class Frame:
    """The static graph at one time: active vertices and edge indices."""

    t: int
    vertices: frozenset[Vertex]
    edge_ids: tuple[int, ...]


def frame(instance: TemporalInstance, t: int) -> Frame:
    if not 1 <= t <= instance.num_times:
        raise InputError(f"time {t} outside [1..{instance.num_times}]")
    if instance.variant == "edge":
        verts = frozenset(instance.vertices)
    else:
        verts = frozenset(v for v in instance.vertices if t in instance.activity(v))
    ids = tuple(i for i in range(len(instance.edges)) if t in effective_times(instance, i))
    return Frame(t=t, vertices=verts, edge_ids=ids)


def _reachable(
    instance: TemporalInstance, edge_ids: Iterable[int], source: Vertex
) -> set[Vertex]:
    adj: dict[Vertex, list[Vertex]] = {}
    for i in edge_ids:
        e = instance.edges[i]
        adj.setdefault(e.u, []).append(e.v)
        if not instance.directed:
            adj.setdefault(e.v, []).append(e.u)
    seen = {source}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def satisfies(
    instance: TemporalInstance, solution: Solution | Iterable[int], demand: Demand
) -> bool:
    """True iff the chosen edges contain an a-b path inside frame t.

    A demand with a == b is vacuously satisfied by the empty path.
    """
    if demand.a == demand.b:
        return True
    ids = solution.edges if isinstance(solution, Solution) else tuple(solution)
    active = [i for i in ids if demand.t in effective_times(instance, i)]
    return demand.b in _reachable(instance, active, demand.a)


def is_feasible(instance: TemporalInstance, solution: Solution | Iterable[int]) -> bool:
    ids = solution.edges if isinstance(solution, Solution) else tuple(solution)
    return all(satisfies(instance, ids, d) for d in instance.demands)


def first_unsatisfiable_demand(instance: TemporalInstance) -> Optional[Demand]:
    """First demand (in input order) not satisfiable even with every edge."""
    all_edges = range(len(instance.edges))
    for d in instance.demands:
        if not satisfies(instance, all_edges, d):
            return d
    return None


def is_monotonic(instance: TemporalInstance) -> bool:
    """True iff every effective active-time set is upward closed."""
    T = instance.num_times
    for i in range(len(instance.edges)):
        ts = effective_times(instance, i)
        if ts and ts != frozenset(range(min(ts), T + 1)):
            return False
    return True


def is_acyclic(instance: TemporalInstance) -> bool:
    """DAG check on the underlying directed graph (all frames united)."""
    if not instance.directed:
        raise InputError("is_acyclic is defined for directed instances only")
    indeg = {v: 0 for v in instance.vertices}
    adj: dict[Vertex, list[Vertex]] = {v: [] for v in instance.vertices}
    for e in instance.edges:
        adj[e.u].append(e.v)
        indeg[e.v] += 1
    queue = deque(v for v in instance.vertices if indeg[v] == 0)
    seen = 0
    while queue:
        x = queue.popleft()
        seen += 1
        for y in adj[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                queue.append(y)
    return seen == len(instance.vertices)


def solution_cost(instance: TemporalInstance, solution: Solution | Iterable[int]) -> Fraction:
    ids = solution.edges if isinstance(solution, Solution) else tuple(set(solution))
    return sum((instance.edges[i].w for i in set(ids)), Fraction(0))


# ---------------------------------------------------------------------------
# JSON interchange
#
# Instance files:
#   {"directed": bool, "variant": "edge"|"node"|"node_and_edge", "T": int,
#    "vertices": [str], "edges": [{"u","v","w","times"}],
#    "node_activity": {v: [int]} (node variants only),
#    "demands": [{"a","b","t"}]}
# Weights are JSON numbers when integral, otherwise "p/q" strings.
# For monotonic instances an edge may carry "first_time": t instead of
# "times", meaning {t..T}.


def _weight_to_json(w: Fraction):
    if w.denominator == 1:
        return int(w)
    return f"{w.numerator}/{w.denominator}"


def _weight_from_json(raw) -> Fraction:
    if isinstance(raw, bool):
        raise InputError(f"bad weight {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        # decimal-exact reading: 0.1 means 1/10
        return Fraction(repr(raw))
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad weight {raw!r}: {exc}") from None
    raise InputError(f"bad weight {raw!r}")


def instance_to_dict(instance: TemporalInstance) -> dict:
    edges = []
    for i, e in enumerate(instance.edges):
        rec: dict = {"u": e.u, "v": e.v, "w": _weight_to_json(e.w)}
        if instance.variant != "node":
            rec["times"] = sorted(e.times)
        edges.append(rec)
    out: dict = {
        "directed": instance.directed,
        "variant": instance.variant,
        "T": instance.num_times,
        "vertices": list(instance.vertices),
        "edges": edges,
        "demands": [{"a": d.a, "b": d.b, "t": d.t} for d in instance.demands],
    }
    if instance.node_activity is not None:
        out["node_activity"] = {v: sorted(ts) for v, ts in sorted(instance.node_activity.items())}
    if instance.allow_parallel:
        out["allow_parallel"] = True
    return out


def instance_from_dict(data: dict) -> TemporalInstance:
    try:
        directed = bool(data["directed"])
        variant = data["variant"]
        T = int(data["T"])
        vertices = tuple(str(v) for v in data["vertices"])
        edges = []
        for rec in data["edges"]:
            if "first_time" in rec and "times" not in rec:
                times = frozenset(range(int(rec["first_time"]), T + 1))
            else:
                times = frozenset(int(t) for t in rec.get("times", ()))
            edges.append(Edge(str(rec["u"]), str(rec["v"]), _weight_from_json(rec["w"]), times))
        demands = tuple(Demand(str(d["a"]), str(d["b"]), int(d["t"])) for d in data["demands"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed instance: {exc}") from None
    act = None
    if "node_activity" in data:
        act = {str(v): frozenset(int(t) for t in ts) for v, ts in data["node_activity"].items()}
    return TemporalInstance(
        directed=directed,
        variant=variant,
        num_times=T,
        vertices=vertices,
        edges=tuple(edges),
        demands=demands,
        node_activity=act,
        allow_parallel=bool(data.get("allow_parallel", False)),
    )


def solution_to_dict(instance: TemporalInstance, solution: Solution | None) -> dict:
    if solution is None:
        return {"edges": [], "cost": None, "feasible": False}
    return {
        "edges": list(solution.edges),
        "cost": str(solution.cost),
        "feasible": bool(is_feasible(instance, solution)),
    }


def solution_from_dict(data: dict) -> tuple[Solution | None, bool]:
    """Returns (solution, claimed_feasible); solution is None for an
    infeasible marker file."""
    try:
        feasible = bool(data["feasible"])
        if data.get("cost") is None and not feasible:
            return None, False
        ids = tuple(sorted(int(i) for i in data["edges"]))
        cost = _weight_from_json(data["cost"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed solution: {exc}") from None
    return Solution(edges=ids, cost=cost), feasible


def dump_json(data: dict, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
