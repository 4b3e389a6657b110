"""Benchmark-instance generators built from constraint-graph gadgets.

A label-cover constraint graph compiles into a temporal instance made of
chained bundles: per side (or hypergraph part) and per vertex, one bundle
whose strands enumerate that vertex's candidate labels; each strand chains
one sub-bundle per incident constraint edge, holding a unit-weight contact
edge per consistent labelling of the far endpoint(s).  Contact edges whose
label tuples agree are shared between frames, so a satisfiable constraint
graph admits a solution that pays each constraint edge once, while an
unsatisfiable one forces one payment per frame.  All wiring other than the
contact edges is free.

Vertex names are structured (part.position.strand...) so the gadget
structure is recoverable from names alone.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from .core import Demand, Edge, InputError, TemporalInstance

# ---------------------------------------------------------------------------
# Constraint-graph inputs (labels and colors are 0-based indices)


@dataclass(frozen=True)
class LabelCoverInstance:
    left: tuple[str, ...]
    right: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]  # (left index, right index)
    num_labels: int
    num_colors: int
    # per edge: (table for the left endpoint, table for the right endpoint),
    # each a tuple mapping label -> color
    projections: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]


@dataclass(frozen=True)
class KphlcInstance:
    parts: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[int, ...], ...]  # one vertex index per part
    num_labels: int
    num_colors: int
    projections: tuple[tuple[tuple[int, ...], ...], ...]  # per edge, per part

    @property
    def k(self) -> int:
        return len(self.parts)


def lc_satisfied_edges(lc: LabelCoverInstance, left_labels: Sequence[int], right_labels: Sequence[int]) -> int:
    hits = 0
    for m, (i, j) in enumerate(lc.edges):
        pl, pr = lc.projections[m]
        if pl[left_labels[i]] == pr[right_labels[j]]:
            hits += 1
    return hits


def lc_has_total_labeling(lc: LabelCoverInstance) -> bool:
    for left in product(range(lc.num_labels), repeat=len(lc.left)):
        for right in product(range(lc.num_labels), repeat=len(lc.right)):
            if lc_satisfied_edges(lc, left, right) == len(lc.edges):
                return True
    return False


def phlc_strongly_satisfies(h: KphlcInstance, labeling: Sequence[Sequence[int]], m: int) -> bool:
    e = h.edges[m]
    colors = {h.projections[m][t][labeling[t][e[t]]] for t in range(h.k)}
    return len(colors) == 1


def phlc_weakly_satisfies(h: KphlcInstance, labeling: Sequence[Sequence[int]], m: int) -> bool:
    e = h.edges[m]
    cols = [h.projections[m][t][labeling[t][e[t]]] for t in range(h.k)]
    return len(set(cols)) < len(cols)


def lc_agreeing_pairs(lc: LabelCoverInstance, m: int) -> list[tuple[int, int]]:
    pl, pr = lc.projections[m]
    return sorted(
        (l, r)
        for l in range(lc.num_labels)
        for r in range(lc.num_labels)
        if pl[l] == pr[r]
    )


def phlc_agreeing_tuples(h: KphlcInstance, m: int) -> list[tuple[int, ...]]:
    tables = h.projections[m]
    by_color: dict[int, list[list[int]]] = {}
    for c in range(h.num_colors):
        per_part = [[l for l in range(h.num_labels) if tables[t][l] == c] for t in range(h.k)]
        if all(per_part):
            by_color[c] = per_part
    out: list[tuple[int, ...]] = []
    for c in sorted(by_color):
        out.extend(product(*by_color[c]))
    return sorted(out)


# ---------------------------------------------------------------------------
# Gadget trace


@dataclass(frozen=True)
class ContactInfo:
    hyperedge: int
    labels: Optional[tuple[int, ...]]  # None for an unmergeable fallback strand
    part: Optional[int] = None  # fallback strands record their location
    vertex: Optional[int] = None
    strand_label: Optional[int] = None


@dataclass(frozen=True)
class BundleInfo:
    part: int
    vertex: int
    source: str
    sink: str
    # per strand label: tuple of (hyperedge, contact edge ids in this strand)
    strands: tuple[tuple[int, tuple[tuple[int, tuple[int, ...]], ...]], ...]


@dataclass(frozen=True)
class GadgetTrace:
    contacts: dict[int, ContactInfo]
    bundles: tuple[BundleInfo, ...]


def trace_to_dict(trace: GadgetTrace) -> dict:
    return {
        "contacts": {
            str(i): {
                "hyperedge": c.hyperedge,
                "labels": list(c.labels) if c.labels is not None else None,
                "part": c.part,
                "vertex": c.vertex,
                "strand_label": c.strand_label,
            }
            for i, c in sorted(trace.contacts.items())
        },
        "bundles": [
            {
                "part": b.part,
                "vertex": b.vertex,
                "source": b.source,
                "sink": b.sink,
                "strands": [
                    {"label": lab, "chain": [{"hyperedge": m, "contacts": list(ids)} for m, ids in chain]}
                    for lab, chain in b.strands
                ],
            }
            for b in trace.bundles
        ],
    }


def canonical_signature(instance: TemporalInstance, trace: GadgetTrace) -> str:
    """Hash of the gadget structure that is invariant under relabelling.

    Per hyperedge it records the merged-tuple count and, per part, the
    sorted multiset of per-strand path counts, so permuting the label set
    leaves the signature unchanged.
    """
    per_edge: dict[int, dict] = {}
    for b in trace.bundles:
        for lab, chain in b.strands:
            for m, ids in chain:
                rec = per_edge.setdefault(m, {"parts": {}, "merged": set(), "fallback": 0})
                rec["parts"].setdefault(b.part, []).append(len(ids))
                for eid in ids:
                    info = trace.contacts[eid]
                    if info.labels is not None:
                        rec["merged"].add(info.labels)
                    else:
                        rec["fallback"] += 1
    payload = {
        "vertices": len(instance.vertices),
        "edges": len(instance.edges),
        "T": instance.num_times,
        "demands": len(instance.demands),
        "weight": str(sum((e.w for e in instance.edges), Fraction(0))),
        "per_edge": [
            {
                "edge": m,
                "merged": len(rec["merged"]),
                "fallback": rec["fallback"],
                "strand_profile": sorted(
                    (part, tuple(sorted(counts))) for part, counts in rec["parts"].items()
                ),
            }
            for m, rec in sorted(per_edge.items())
        ],
    }
    blob = json.dumps(payload, sort_keys=True, default=list)
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Low-level builder


class _Builder:
    def __init__(self):
        self.vertices: dict[str, None] = {}
        self.edges: list[list] = []  # [u, v, w, set of times]
        self._by_pair: dict[tuple[str, str], int] = {}
        self.contacts: dict[int, ContactInfo] = {}

    def vertex(self, name: str) -> str:
        self.vertices.setdefault(name, None)
        return name

    def wire(self, u: str, v: str, t: int) -> int:
        """Zero-weight edge existing in frame t."""
        self.vertex(u)
        self.vertex(v)
        self.edges.append([u, v, Fraction(0), {t}])
        return len(self.edges) - 1

    def contact(self, c1: str, c2: str, t: int, info: ContactInfo) -> int:
        """Unit-weight contact edge; repeated (c1, c2) pairs are merged and
        accumulate frame memberships."""
        self.vertex(c1)
        self.vertex(c2)
        key = (c1, c2)
        if key in self._by_pair:
            idx = self._by_pair[key]
            self.edges[idx][3].add(t)
            return idx
        self.edges.append([c1, c2, Fraction(1), {t}])
        idx = len(self.edges) - 1
        self._by_pair[key] = idx
        self.contacts[idx] = info
        return idx

    def finish(self, num_times: int, demands: Sequence[Demand]) -> TemporalInstance:
        return TemporalInstance(
            directed=True,
            variant="edge",
            num_times=num_times,
            vertices=tuple(self.vertices),
            edges=tuple(Edge(u, v, w, frozenset(ts)) for u, v, w, ts in self.edges),
            demands=tuple(demands),
        )


def _endpoint(part: int, pos: int) -> str:
    return f"P{part}.{pos}S"


def _junction(part: int, pos: int, label: int, slot: int) -> str:
    return f"P{part}.{pos}.L{label}.J{slot}"


def _merged_contact(m: int, labels: Sequence[int]) -> tuple[str, str]:
    tag = f"E{m}.T{'_'.join(str(l) for l in labels)}"
    return f"{tag}.c1", f"{tag}.c2"


def _fallback_contact(part: int, pos: int, label: int, m: int) -> tuple[str, str]:
    tag = f"P{part}.{pos}.L{label}.E{m}"
    return f"{tag}.c1", f"{tag}.c2"


# ---------------------------------------------------------------------------
# Bipartite construction (two demands)


def lc_to_2dtsn(lc: LabelCoverInstance) -> tuple[TemporalInstance, GadgetTrace]:
    """Compile a bipartite constraint graph into a two-frame instance.

    Frame 1 chains one bundle per left vertex (one strand per candidate
    label, one sub-bundle per incident edge, one contact path per agreeing
    right label); frame 2 mirrors this for the right side.  Contact paths
    carrying the same (edge, left label, right label) exist in both frames
    as one shared edge.
    """
    b = _Builder()
    bundles: list[BundleInfo] = []

    # frame 1: the left chain
    for i in range(len(lc.left)):
        src = b.vertex(_endpoint(1, i + 1))
        snk = b.vertex(_endpoint(1, i + 2))
        incident = [m for m, (ui, _) in enumerate(lc.edges) if ui == i]
        if not incident:
            b.wire(src, snk, 1)
            bundles.append(BundleInfo(1, i, src, snk, ()))
            continue
        strands = []
        for l in range(lc.num_labels):
            chain = []
            prev = src
            for pos, m in enumerate(incident):
                nxt = snk if pos == len(incident) - 1 else b.vertex(_junction(1, i + 1, l, pos + 1))
                agreeing = [r for (l2, r) in lc_agreeing_pairs(lc, m) if l2 == l]
                ids = []
                if agreeing:
                    for r in agreeing:
                        c1, c2 = _merged_contact(m, (l, r))
                        eid = b.contact(c1, c2, 1, ContactInfo(hyperedge=m, labels=(l, r)))
                        b.wire(prev, c1, 1)
                        b.wire(c2, nxt, 1)
                        ids.append(eid)
                else:
                    c1, c2 = _fallback_contact(1, i + 1, l, m)
                    eid = b.contact(
                        c1, c2, 1,
                        ContactInfo(hyperedge=m, labels=None, part=1, vertex=i, strand_label=l),
                    )
                    b.wire(prev, c1, 1)
                    b.wire(c2, nxt, 1)
                    ids.append(eid)
                chain.append((m, tuple(ids)))
                prev = nxt
            strands.append((l, tuple(chain)))
        bundles.append(BundleInfo(1, i, src, snk, tuple(strands)))

    # frame 2: the right chain
    for j in range(len(lc.right)):
        src = b.vertex(_endpoint(2, j + 1))
        snk = b.vertex(_endpoint(2, j + 2))
        incident = [m for m, (_, vj) in enumerate(lc.edges) if vj == j]
        if not incident:
            b.wire(src, snk, 2)
            bundles.append(BundleInfo(2, j, src, snk, ()))
            continue
        strands = []
        for r in range(lc.num_labels):
            chain = []
            prev = src
            for pos, m in enumerate(incident):
                nxt = snk if pos == len(incident) - 1 else b.vertex(_junction(2, j + 1, r, pos + 1))
                agreeing = [l for (l, r2) in lc_agreeing_pairs(lc, m) if r2 == r]
                ids = []
                if agreeing:
                    for l in agreeing:
                        c1, c2 = _merged_contact(m, (l, r))
                        eid = b.contact(c1, c2, 2, ContactInfo(hyperedge=m, labels=(l, r)))
                        b.wire(prev, c1, 2)
                        b.wire(c2, nxt, 2)
                        ids.append(eid)
                else:
                    c1, c2 = _fallback_contact(2, j + 1, r, m)
                    eid = b.contact(
                        c1, c2, 2,
                        ContactInfo(hyperedge=m, labels=None, part=2, vertex=j, strand_label=r),
                    )
                    b.wire(prev, c1, 2)
                    b.wire(c2, nxt, 2)
                    ids.append(eid)
                chain.append((m, tuple(ids)))
                prev = nxt
            strands.append((r, tuple(chain)))
        bundles.append(BundleInfo(2, j, src, snk, tuple(strands)))

    demands = (
        Demand(_endpoint(1, 1), _endpoint(1, len(lc.left) + 1), 1),
        Demand(_endpoint(2, 1), _endpoint(2, len(lc.right) + 1), 2),
    )
    instance = b.finish(2, demands)
    return instance, GadgetTrace(contacts=b.contacts, bundles=tuple(bundles))


# ---------------------------------------------------------------------------
# Hypergraph construction (k demands)


def phlc_to_kdtsn(h: KphlcInstance) -> tuple[TemporalInstance, GadgetTrace]:
    """Compile a k-partite constraint hypergraph into a k-frame instance.

    Frame t chains one bundle per part-t vertex; a strand exists per label,
    chaining one sub-bundle per incident hyperedge with one contact path per
    agreeing label k-tuple.  Tuple paths are shared across all k frames.
    """
    b = _Builder()
    bundles: list[BundleInfo] = []
    for t in range(h.k):
        part_no = t + 1
        for i in range(len(h.parts[t])):
            src = b.vertex(_endpoint(part_no, i + 1))
            snk = b.vertex(_endpoint(part_no, i + 2))
            incident = [m for m, e in enumerate(h.edges) if e[t] == i]
            if not incident:
                b.wire(src, snk, part_no)
                bundles.append(BundleInfo(part_no, i, src, snk, ()))
                continue
            strands = []
            for l in range(h.num_labels):
                chain = []
                prev = src
                for pos, m in enumerate(incident):
                    nxt = (
                        snk
                        if pos == len(incident) - 1
                        else b.vertex(_junction(part_no, i + 1, l, pos + 1))
                    )
                    tuples = [tup for tup in phlc_agreeing_tuples(h, m) if tup[t] == l]
                    ids = []
                    if tuples:
                        for tup in tuples:
                            c1, c2 = _merged_contact(m, tup)
                            eid = b.contact(c1, c2, part_no, ContactInfo(hyperedge=m, labels=tup))
                            b.wire(prev, c1, part_no)
                            b.wire(c2, nxt, part_no)
                            ids.append(eid)
                    else:
                        c1, c2 = _fallback_contact(part_no, i + 1, l, m)
                        eid = b.contact(
                            c1, c2, part_no,
                            ContactInfo(
                                hyperedge=m, labels=None, part=part_no, vertex=i, strand_label=l
                            ),
                        )
                        b.wire(prev, c1, part_no)
                        b.wire(c2, nxt, part_no)
                        ids.append(eid)
                    chain.append((m, tuple(ids)))
                    prev = nxt
                strands.append((l, tuple(chain)))
            bundles.append(BundleInfo(part_no, i, src, snk, tuple(strands)))
    demands = tuple(
        Demand(_endpoint(t + 1, 1), _endpoint(t + 1, len(h.parts[t]) + 1), t + 1)
        for t in range(h.k)
    )
    instance = b.finish(h.k, demands)
    return instance, GadgetTrace(contacts=b.contacts, bundles=tuple(bundles))


def undirect(instance: TemporalInstance) -> TemporalInstance:
    """Same weights, times and demands over undirected edges."""
    if not instance.directed:
        return instance
    return TemporalInstance(
        directed=False,
        variant=instance.variant,
        num_times=instance.num_times,
        vertices=instance.vertices,
        edges=instance.edges,
        demands=instance.demands,
        node_activity=instance.node_activity,
        allow_parallel=instance.allow_parallel,
    )


# ---------------------------------------------------------------------------
# Instance generators
#
# Incidence skeletons are "staircases": consecutive vertices get consecutive,
# monotonically advancing blocks of constraint edges.  With every part
# ordered the same way no two contact paths can appear in opposite orders in
# two frames, which keeps the merged underlying graph acyclic.  (Crossing
# incidence patterns, e.g. a four-cycle, can make the union of frames cyclic
# even though each individual frame is always a DAG.)


def lc_as_phlc(lc: LabelCoverInstance) -> KphlcInstance:
    return KphlcInstance(
        parts=(lc.left, lc.right),
        edges=tuple((i, j) for i, j in lc.edges),
        num_labels=lc.num_labels,
        num_colors=lc.num_colors,
        projections=tuple((pl, pr) for pl, pr in lc.projections),
    )


def example1_label_cover() -> LabelCoverInstance:
    """Single-edge toy instance: both left labels and the second right label
    share a color, the first right label is alone (so the optimum selects
    either merged contact path, at total cost 1)."""
    return LabelCoverInstance(
        left=("u",),
        right=("v",),
        edges=((0, 0),),
        num_labels=2,
        num_colors=2,
        projections=(((0, 0), (1, 0)),),
    )


def example1_instance() -> tuple[TemporalInstance, GadgetTrace]:
    return lc_to_2dtsn(example1_label_cover())


def _staircase_blocks(n_sources: int, n_targets: int, degree: int) -> list[list[int]]:
    if degree > n_targets:
        raise InputError("degree cannot exceed the number of right vertices")
    blocks = []
    for i in range(n_sources):
        if n_sources == 1:
            start = 0
        else:
            start = round(i * (n_targets - degree) / (n_sources - 1))
        blocks.append(list(range(start, start + degree)))
    return blocks


def gen_yes_lc(
    num_left: int, num_right: int, degree: int, num_labels: int, seed: int
) -> LabelCoverInstance:
    """Bipartite instance with a planted total labeling.

    A hidden labeling maps to a reserved color on every edge; all other
    labels receive random colors (which may create extra agreements but
    never destroy satisfiability).
    """
    rng = random.Random(seed)
    blocks = _staircase_blocks(num_left, num_right, degree)
    edges = tuple((i, j) for i in range(num_left) for j in blocks[i])
    left = tuple(f"u{i+1}" for i in range(num_left))
    right = tuple(f"v{j+1}" for j in range(num_right))
    hidden_left = [rng.randrange(num_labels) for _ in left]
    hidden_right = [rng.randrange(num_labels) for _ in right]
    num_colors = 2 * num_labels + 1
    projections = []
    for (i, j) in edges:
        pl = [rng.randrange(1, num_colors) for _ in range(num_labels)]
        pr = [rng.randrange(1, num_colors) for _ in range(num_labels)]
        pl[hidden_left[i]] = 0
        pr[hidden_right[j]] = 0
        projections.append((tuple(pl), tuple(pr)))
    return LabelCoverInstance(
        left=left,
        right=right,
        edges=edges,
        num_labels=num_labels,
        num_colors=num_colors,
        projections=tuple(projections),
    )


def _staircase_hyperedges(part_sizes: Sequence[int], num_edges: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for j in range(num_edges):
        out.append(tuple(j * size // num_edges for size in part_sizes))
    return tuple(out)


def gen_yes_phlc(
    k: int, part_sizes: Sequence[int], num_edges: int, num_labels: int, seed: int
) -> KphlcInstance:
    """k-partite hypergraph with a planted strongly-satisfying labeling."""
    if k < 2 or len(part_sizes) != k:
        raise InputError("need k >= 2 and one size per part")
    rng = random.Random(seed)
    edges = _staircase_hyperedges(part_sizes, num_edges)
    parts = tuple(
        tuple(f"p{t+1}.{i+1}" for i in range(part_sizes[t])) for t in range(k)
    )
    hidden = [[rng.randrange(num_labels) for _ in parts[t]] for t in range(k)]
    num_colors = 2 * num_labels + 1
    projections = []
    for e in edges:
        tables = []
        for t in range(k):
            tab = [rng.randrange(1, num_colors) for _ in range(num_labels)]
            tab[hidden[t][e[t]]] = 0
            tables.append(tuple(tab))
        projections.append(tuple(tables))
    return KphlcInstance(
        parts=parts,
        edges=edges,
        num_labels=num_labels,
        num_colors=num_colors,
        projections=tuple(projections),
    )


def gen_nosat_phlc(
    k: int, part_sizes: Sequence[int], num_edges: int, num_labels: int, seed: int = 0
) -> KphlcInstance:
    """k-partite hypergraph in which no hyperedge is even weakly
    satisfiable: on every edge, each (part, label) slot gets its own color."""
    if k < 2 or len(part_sizes) != k:
        raise InputError("need k >= 2 and one size per part")
    edges = _staircase_hyperedges(part_sizes, num_edges)
    parts = tuple(
        tuple(f"p{t+1}.{i+1}" for i in range(part_sizes[t])) for t in range(k)
    )
    num_colors = 1 + k * num_labels
    projections = []
    for e in edges:
        tables = []
        for t in range(k):
            tables.append(tuple(1 + t * num_labels + l for l in range(num_labels)))
        projections.append(tuple(tables))
    return KphlcInstance(
        parts=parts,
        edges=edges,
        num_labels=num_labels,
        num_colors=num_colors,
        projections=tuple(projections),
    )


# ---------------------------------------------------------------------------
# JSON forms for the CLI


def lc_to_dict(lc: LabelCoverInstance) -> dict:
    return {
        "left": list(lc.left),
        "right": list(lc.right),
        "edges": [list(e) for e in lc.edges],
        "num_labels": lc.num_labels,
        "num_colors": lc.num_colors,
        "projections": [[list(pl), list(pr)] for pl, pr in lc.projections],
    }


def phlc_to_dict(h: KphlcInstance) -> dict:
    return {
        "parts": [list(p) for p in h.parts],
        "edges": [list(e) for e in h.edges],
        "num_labels": h.num_labels,
        "num_colors": h.num_colors,
        "projections": [[list(t) for t in tabs] for tabs in h.projections],
    }
