"""Reductions for monotonic instances.

Undirected monotonic instances are interchangeable with priority-constrained
Steiner forests (priority = first active time).  Directed monotonic
single-source instances reduce to a rooted Steiner tree problem over a level
graph: one copy of the graph per sorted demand time, zero-weight edges
advancing copies.  `normalize_to_time_layered_tree` is the solution
normalisation underlying that reduction: prune a feasible solution until
every edge is necessary, which provably leaves a directed tree whose
earliest necessary times never decrease away from the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import (
    Demand,
    Edge,
    InputError,
    Solution,
    TemporalInstance,
    effective_times,
    is_feasible,
    is_monotonic,
    satisfies,
    solution_from_edges,
)
from .variants import ReductionMap, fresh_name

# ---------------------------------------------------------------------------
# Priority formulation


@dataclass(frozen=True)
class PriorityEdge:
    u: str
    v: str
    w: Fraction
    priority: int


@dataclass(frozen=True)
class PriorityDemand:
    a: str
    b: str
    priority: int


@dataclass(frozen=True)
class PriorityInstance:
    """Undirected multigraph with priority levels; a demand may only use
    edges of priority at most its own."""

    vertices: tuple[str, ...]
    edges: tuple[PriorityEdge, ...]
    max_priority: int
    demands: tuple[PriorityDemand, ...]


def priority_feasible(p: PriorityInstance, edge_ids: Iterable[int]) -> bool:
    ids = set(edge_ids)
    for d in p.demands:
        if d.a == d.b:
            continue
        adj: dict[str, list[str]] = {}
        for i in ids:
            e = p.edges[i]
            if e.priority > d.priority:
                continue
            adj.setdefault(e.u, []).append(e.v)
            adj.setdefault(e.v, []).append(e.u)
        seen = {d.a}
        stack = [d.a]
        while stack:
            x = stack.pop()
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if d.b not in seen:
            return False
    return True


def tsn_to_priority(instance: TemporalInstance) -> PriorityInstance:
    """Edge priority = earliest active time; demand priority = demand time."""
    if instance.directed:
        raise InputError("priority reduction expects an undirected instance")
    if instance.variant != "edge":
        raise InputError("priority reduction expects the edge variant")
    if not is_monotonic(instance):
        raise InputError("priority reduction expects a monotonic instance")
    edges = []
    for i in range(len(instance.edges)):
        e = instance.edges[i]
        ts = effective_times(instance, i)
        if not ts:
            continue
        edges.append(PriorityEdge(e.u, e.v, e.w, min(ts)))
    return PriorityInstance(
        vertices=instance.vertices,
        edges=tuple(edges),
        max_priority=instance.num_times,
        demands=tuple(PriorityDemand(d.a, d.b, d.t) for d in instance.demands),
    )


def priority_to_tsn(p: PriorityInstance) -> tuple[TemporalInstance, ReductionMap]:
    """Priorities become times: an edge of priority q exists at {q..P}.

    Parallel multiedges are split through a fresh midpoint into two edges of
    half the original weight, so the image is a simple graph.
    """
    counts: dict[frozenset, int] = {}
    for e in p.edges:
        key = frozenset((e.u, e.v))
        counts[key] = counts.get(key, 0) + 1
    taken = set(p.vertices)
    vertices = list(p.vertices)
    added: list[str] = []
    edges: list[Edge] = []
    fwd: list[tuple[int, tuple[int, ...]]] = []
    for i, e in enumerate(p.edges):
        times = frozenset(range(e.priority, p.max_priority + 1))
        if counts[frozenset((e.u, e.v))] > 1:
            mid = fresh_name(f"m({e.u},{e.v})#{i}", taken)
            vertices.append(mid)
            added.append(mid)
            half = e.w / 2
            fwd.append((i, (len(edges), len(edges) + 1)))
            edges.append(Edge(e.u, mid, half, times))
            edges.append(Edge(mid, e.v, half, times))
        else:
            fwd.append((i, (len(edges),)))
            edges.append(Edge(e.u, e.v, e.w, times))
    image = TemporalInstance(
        directed=False,
        variant="edge",
        num_times=p.max_priority,
        vertices=tuple(vertices),
        edges=tuple(edges),
        demands=tuple(Demand(d.a, d.b, d.priority) for d in p.demands),
        allow_parallel=False,
    )
    rmap = ReductionMap(
        kind="priority_to_tsn",
        forward_edge_map=tuple(fwd),
        demand_map=tuple((j, j) for j in range(len(p.demands))),
        added_vertices=tuple(added),
    )
    return image, rmap


def priority_solution_from_tsn(
    rmap: ReductionMap, image_solution: Solution, p: PriorityInstance
) -> tuple[tuple[int, ...], Fraction]:
    """Contract split edges back: a priority edge is used iff both halves
    are.  Returns (edge indices, cost)."""
    chosen = set(image_solution.edges)
    ids = tuple(
        o for o, imgs in rmap.forward_edge_map if all(i in chosen for i in imgs)
    )
    cost = sum((p.edges[i].w for i in ids), Fraction(0))
    return ids, cost


# ---------------------------------------------------------------------------
# Level-graph formulation


@dataclass(frozen=True)
class DstEdge:
    u: str
    v: str
    w: Fraction
    level: int
    orig_edge: Optional[int]  # None for zero-weight level-advance edges


@dataclass(frozen=True)
class DstInstance:
    """Rooted directed Steiner instance over the level graph."""

    vertices: tuple[str, ...]
    edges: tuple[DstEdge, ...]
    root: str
    terminals: tuple[str, ...]
    back_vertex: dict[str, tuple[str, int]]
    source_instance: TemporalInstance
    demand_order: tuple[int, ...]  # original demand index per level


def _copy_name(v: str, level: int) -> str:
    return f"{v}#{level}"


def single_source_to_dst(instance: TemporalInstance) -> DstInstance:
    """Levels follow the sorted demand times; level i holds a copy of frame
    t_i, and each vertex gets a free edge to its next-level copy.  The root
    is the source's level-1 copy, terminal i the target's level-i copy."""
    if not instance.directed:
        raise InputError("level-graph reduction expects a directed instance")
    if instance.variant != "edge":
        raise InputError("level-graph reduction expects the edge variant")
    if not is_monotonic(instance):
        raise InputError("level-graph reduction expects a monotonic instance")
    if not instance.demands:
        raise InputError("level-graph reduction needs at least one demand")
    sources = {d.a for d in instance.demands}
    if len(sources) != 1:
        raise InputError("all demands must share a single source")
    (source,) = sources
    order = sorted(range(len(instance.demands)), key=lambda j: (instance.demands[j].t, instance.demands[j].b, j))
    k = len(order)
    vertices = [
        _copy_name(v, i) for i in range(1, k + 1) for v in instance.vertices
    ]
    back = {
        _copy_name(v, i): (v, i)
        for i in range(1, k + 1)
        for v in instance.vertices
    }
    edges: list[DstEdge] = []
    for lvl, j in enumerate(order, start=1):
        t = instance.demands[j].t
        for i, e in enumerate(instance.edges):
            if t in effective_times(instance, i):
                edges.append(
                    DstEdge(_copy_name(e.u, lvl), _copy_name(e.v, lvl), e.w, lvl, i)
                )
    for lvl in range(1, k):
        for v in instance.vertices:
            edges.append(
                DstEdge(_copy_name(v, lvl), _copy_name(v, lvl + 1), Fraction(0), lvl, None)
            )
    terminals = tuple(
        _copy_name(instance.demands[j].b, lvl) for lvl, j in enumerate(order, start=1)
    )
    return DstInstance(
        vertices=tuple(vertices),
        edges=tuple(edges),
        root=_copy_name(source, 1),
        terminals=terminals,
        back_vertex=back,
        source_instance=instance,
        demand_order=tuple(order),
    )


def dst_feasible(dst: DstInstance, edge_ids: Iterable[int]) -> bool:
    ids = set(edge_ids)
    adj: dict[str, list[str]] = {}
    for i in ids:
        e = dst.edges[i]
        adj.setdefault(e.u, []).append(e.v)
    seen = {dst.root}
    stack = [dst.root]
    while stack:
        x = stack.pop()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return all(t in seen for t in dst.terminals)


def dst_solution_to_tsn(dst: DstInstance, edge_ids: Iterable[int]) -> Solution:
    """Project level edges back to underlying edges (free level-advance
    edges vanish, duplicates collapse), never increasing the cost."""
    ids = list(edge_ids)
    if not dst_feasible(dst, ids):
        raise InputError("edge set does not connect the root to every terminal")
    orig = {dst.edges[i].orig_edge for i in ids if dst.edges[i].orig_edge is not None}
    sol = solution_from_edges(dst.source_instance, orig)
    assert is_feasible(dst.source_instance, sol)
    return sol


def dst_to_dict(dst: DstInstance) -> dict:
    from .core import _weight_to_json

    return {
        "vertices": list(dst.vertices),
        "edges": [{"u": e.u, "v": e.v, "w": _weight_to_json(e.w)} for e in dst.edges],
        "root": dst.root,
        "terminals": list(dst.terminals),
        "levels": {
            v: sorted({lvl for name, (w, lvl) in dst.back_vertex.items() if w == v})
            for v in dst.source_instance.vertices
        },
    }


# ---------------------------------------------------------------------------
# Solution normalisation


def earliest_necessary_times(
    instance: TemporalInstance, edge_ids: Sequence[int]
) -> dict[int, Optional[int]]:
    """Per edge, the smallest demand time whose satisfaction breaks when the
    edge is removed from the given solution; None if removal breaks nothing."""
    ids = set(edge_ids)
    out: dict[int, Optional[int]] = {}
    for e in ids:
        rest = ids - {e}
        broken = [d.t for d in instance.demands if not satisfies(instance, rest, d)]
        out[e] = min(broken) if broken else None
    return out


def normalize_to_time_layered_tree(
    instance: TemporalInstance, solution: Solution
) -> Solution:
    """Prune a feasible solution down to a directed tree rooted at the
    source whose earliest necessary times are non-decreasing along every
    root path.

    Removing redundant edges one at a time (lowest index first) until every
    remaining edge is necessary achieves this: in a monotonic single-source
    instance a minimal solution has in-degree at most one everywhere (an
    earlier-frame entry path into a vertex also works in every later frame),
    so it is a tree, and on a tree each edge's necessity set contains its
    parent's, which orders the earliest necessary times.
    """
    if not instance.directed:
        raise InputError("normalisation expects a directed instance")
    if not is_monotonic(instance):
        raise InputError("normalisation expects a monotonic instance")
    sources = {d.a for d in instance.demands}
    if len(sources) > 1:
        raise InputError("all demands must share a single source")
    if not is_feasible(instance, solution):
        raise InputError("solution is not feasible")
    ids = set(solution.edges)
    while True:
        removable = None
        # drop the highest-index redundant edge first so the retained tree
        # prefers low edge indices, like the other solvers
        for e in sorted(ids, reverse=True):
            if all(satisfies(instance, ids - {e}, d) for d in instance.demands):
                removable = e
                break
        if removable is None:
            break
        ids.remove(removable)
    return solution_from_edges(instance, ids)
