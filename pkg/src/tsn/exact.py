"""Exact solving: exhaustive oracle, branch and bound, and the flow ILP.

`brute_force` is the reference oracle used throughout the test suite.  Its
contract is the naive one -- consider all 2^|E| edge subsets, return the
cheapest feasible one, break ties by the lexicographically smallest sorted
index tuple -- but it is implemented as a lexicographic greedy that exploits
two facts: feasibility is monotone under edge inclusion, and zero-weight
edges never change the cost.  The greedy provably returns the same subset as
the naive scan (the test suite cross-checks against a literal enumeration)
while staying fast on gadget instances that are mostly zero-weight wiring.

`solve_bb` is an independent branch-and-bound over the same search space.
`build_ilp`/`emit_lp`/`parse_lp` realise the per-time unit-flow integer
program over simple single-source/single-sink instances.
"""

from __future__ import annotations

import heapq
import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .core import (
    Demand,
    InfeasibleInstanceError,
    InputError,
    Solution,
    TemporalInstance,
    effective_times,
    first_unsatisfiable_demand,
    solution_from_edges,
)

DEFAULT_BRUTE_CAP = 20
BRUTE_CAP_ENV = "TSN_BRUTE_CAP"


class BruteForceCapError(InputError):
    """Instance exceeds the subset-enumeration cap."""


def _brute_cap(explicit: Optional[int]) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get(BRUTE_CAP_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{BRUTE_CAP_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_BRUTE_CAP


class _FrameIndex:
    """Per-time adjacency over edge indices, shared by the solvers."""

    def __init__(self, instance: TemporalInstance):
        self.instance = instance
        self.eff = [effective_times(instance, i) for i in range(len(instance.edges))]
        self.by_time: dict[int, list[int]] = {
            t: [] for t in range(1, instance.num_times + 1)
        }
        for i, ts in enumerate(self.eff):
            for t in ts:
                self.by_time[t].append(i)

    def demand_ok(self, chosen: frozenset[int] | set[int], d: Demand) -> bool:
        if d.a == d.b:
            return True
        inst = self.instance
        adj: dict[str, list[str]] = {}
        for i in self.by_time.get(d.t, ()):
            if i not in chosen:
                continue
            e = inst.edges[i]
            adj.setdefault(e.u, []).append(e.v)
            if not inst.directed:
                adj.setdefault(e.v, []).append(e.u)
        seen = {d.a}
        stack = [d.a]
        while stack:
            x = stack.pop()
            if x == d.b:
                return True
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return d.b in seen

    def feasible(self, chosen: Iterable[int]) -> bool:
        cs = set(chosen)
        return all(self.demand_ok(cs, d) for d in self.instance.demands)


# ---------------------------------------------------------------------------
# Brute force


def brute_force(instance: TemporalInstance, cap: Optional[int] = None) -> Solution:
    """Optimal solution by subset enumeration semantics.

    Raises InfeasibleInstanceError when some demand cannot be met even by
    the full edge set, and BruteForceCapError when |E| exceeds the cap
    (default 20, overridable via the TSN_BRUTE_CAP environment variable or
    the `cap` argument).
    """
    edges = instance.edges
    cap_val = _brute_cap(cap)
    if len(edges) > cap_val:
        raise BruteForceCapError(
            f"instance has {len(edges)} edges, brute-force cap is {cap_val}"
        )
    bad = first_unsatisfiable_demand(instance)
    if bad is not None:
        raise InfeasibleInstanceError(bad)

    fidx = _FrameIndex(instance)
    pos = [i for i, e in enumerate(edges) if e.w > 0]
    zero = [i for i, e in enumerate(edges) if e.w == 0]
    zero_set = set(zero)

    feas_cache: dict[frozenset[int], bool] = {}

    def feasible_with_all_zeros(p: frozenset[int]) -> bool:
        hit = feas_cache.get(p)
        if hit is None:
            hit = fidx.feasible(p | zero_set)
            feas_cache[p] = hit
        return hit

    # Optimal cost over positive subsets, zero edges included for free.
    best = [None]  # type: list[Optional[Fraction]]

    def opt_dfs(idx: int, cost: Fraction, chosen: list[int]) -> None:
        if best[0] is not None and cost >= best[0]:
            return  # weights are nonnegative, no improvement below
        if idx == len(pos):
            if feasible_with_all_zeros(frozenset(chosen)):
                best[0] = cost
            return
        e = pos[idx]
        chosen.append(e)
        opt_dfs(idx + 1, cost + edges[e].w, chosen)
        chosen.pop()
        opt_dfs(idx + 1, cost, chosen)

    opt_dfs(0, Fraction(0), [])
    assert best[0] is not None  # feasibility was checked against all edges
    opt: Fraction = best[0]

    def exists_optimal(incl_pos: frozenset[int], excl: frozenset[int]) -> bool:
        """Is there a feasible set of cost `opt` containing incl_pos (plus
        any zero edges) and avoiding excl?"""
        free = [i for i in pos if i not in incl_pos and i not in excl]
        base_cost = sum((edges[i].w for i in incl_pos), Fraction(0))
        if base_cost > opt:
            return False

        def scan(idx: int, cost: Fraction, chosen: list[int]) -> bool:
            if cost > opt:
                return False
            if idx == len(free):
                return cost == opt and feasible_with_all_zeros(
                    incl_pos | frozenset(chosen)
                )
            e = free[idx]
            if scan(idx + 1, cost + edges[e].w, chosen + [e]):
                return True
            return scan(idx + 1, cost, chosen)

        return scan(0, base_cost, [])

    # Lexicographic greedy over edge indices.  Zero-weight edges can always
    # be added to an optimal witness, so they are included outright; the
    # scan only pays for positive edges.
    incl: set[int] = set()
    incl_pos: set[int] = set()
    excl: set[int] = set()
    incl_cost = Fraction(0)
    for i in range(len(edges)):
        if incl_cost == opt and fidx.feasible(incl):
            break
        if edges[i].w == 0:
            incl.add(i)
            continue
        if exists_optimal(frozenset(incl_pos | {i}), frozenset(excl)):
            incl.add(i)
            incl_pos.add(i)
            incl_cost += edges[i].w
        else:
            excl.add(i)
    assert incl_cost == opt and fidx.feasible(incl)
    return solution_from_edges(instance, incl)


# ---------------------------------------------------------------------------
# Branch and bound


@dataclass
class BbStats:
    nodes: int = 0


def _completion_cost(
    fidx: _FrameIndex,
    included: set[int],
    excluded: set[int],
    d: Demand,
) -> Optional[Fraction]:
    """Cheapest way to finish demand d: Dijkstra in frame t where included
    edges ride free and undecided edges pay their weight."""
    inst = fidx.instance
    if d.a == d.b:
        return Fraction(0)
    adj: dict[str, list[tuple[str, Fraction]]] = {}
    for i in fidx.by_time.get(d.t, ()):
        if i in excluded:
            continue
        e = inst.edges[i]
        w = Fraction(0) if i in included else e.w
        adj.setdefault(e.u, []).append((e.v, w))
        if not inst.directed:
            adj.setdefault(e.v, []).append((e.u, w))
    dist: dict[str, Fraction] = {d.a: Fraction(0)}
    heap: list[tuple[Fraction, str]] = [(Fraction(0), d.a)]
    while heap:
        du, x = heapq.heappop(heap)
        if du > dist[x]:
            continue
        if x == d.b:
            return du
        for y, w in adj.get(x, ()):
            nd = du + w
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist.get(d.b)


def solve_bb(
    instance: TemporalInstance, stats: Optional[BbStats] = None
) -> Solution:
    """Provably optimal solution by depth-first branch and bound on edges.

    Branch order: undecided edge of largest weight appearing in the most
    frames (ties by index), include branch first.  The lower bound adds the
    cost of included edges to the largest single-demand completion cost
    (shortest-path with included edges free); completions of different
    demands can share edges, so only the max -- not a sum -- is admissible.
    """
    bad = first_unsatisfiable_demand(instance)
    if bad is not None:
        raise InfeasibleInstanceError(bad)
    if stats is None:
        stats = BbStats()

    edges = instance.edges
    fidx = _FrameIndex(instance)
    order = sorted(
        range(len(edges)),
        key=lambda i: (-edges[i].w, -len(fidx.eff[i]), i),
    )

    incumbent_cost: list[Optional[Fraction]] = [None]
    incumbent_edges: list[tuple[int, ...]] = [()]

    def unsatisfied(included: set[int]) -> list[Demand]:
        return [d for d in instance.demands if not fidx.demand_ok(included, d)]

    def node(depth: int, included: set[int], excluded: set[int], cost: Fraction) -> None:
        stats.nodes += 1
        available = included | {
            order[j] for j in range(depth, len(order)) if order[j] not in excluded
        }
        pending = unsatisfied(included)
        for d in pending:
            if not fidx.demand_ok(available, d):
                return  # this branch can never become feasible
        if not pending:
            if incumbent_cost[0] is None or cost < incumbent_cost[0]:
                incumbent_cost[0] = cost
                incumbent_edges[0] = tuple(sorted(included))
            return  # adding edges only raises cost
        bound = cost
        for d in pending:
            c = _completion_cost(fidx, included, excluded, d)
            if c is None:
                return
            if cost + c > bound:
                bound = cost + c
        if incumbent_cost[0] is not None and bound >= incumbent_cost[0]:
            return
        e = order[depth]
        node(depth + 1, included | {e}, excluded, cost + edges[e].w)
        node(depth + 1, included, excluded | {e}, cost)

    node(0, set(), set(), Fraction(0))
    assert incumbent_cost[0] is not None
    return solution_from_edges(instance, incumbent_edges[0])


# ---------------------------------------------------------------------------
# Flow ILP over simple instances (single source a, single sink b, one demand
# per time 1..k).  Soundness of the feasibility <-> satisfying-assignment
# correspondence needs a to have no in-arcs and b no out-arcs, which holds
# for every image of the simplifying reduction.


@dataclass(frozen=True)
class Constraint:
    name: str
    kind: str  # "coupling" | "conservation" | "source" | "sink"
    terms: tuple[tuple[int, str], ...]  # (coefficient, variable)
    sense: str  # ">=" | "="
    rhs: int


@dataclass(frozen=True)
class IlpModel:
    objective: tuple[tuple[Fraction, str], ...]
    constraints: tuple[Constraint, ...]
    binaries: tuple[str, ...]
    # decision variable per underlying edge, flow variable per (edge, time)
    edge_var: tuple[str, ...] = ()
    flow_var: tuple[tuple[int, int, str], ...] = ()  # (edge index, time, var)

    def variable_count(self) -> int:
        return len(self.binaries)


class _LpNames:
    """LP-safe identifier factory.

    Raw vertex names may contain characters the LP format forbids, and
    joining tokens with underscores can fuse distinct vertex pairs into one
    string, so every vertex gets a memoised sanitised token and every
    composed identifier is uniquified against the ones already issued.
    """

    _ALLOWED = re.compile(r"[^A-Za-z0-9_.]")

    def __init__(self):
        self._issued: set[str] = set()
        self._token: dict[str, str] = {}
        self._token_values: set[str] = set()

    def token(self, raw: str) -> str:
        hit = self._token.get(raw)
        if hit is not None:
            return hit
        safe = self._ALLOWED.sub("_", raw) or "v"
        candidate, n = safe, 2
        while candidate in self._token_values:
            candidate = f"{safe}__{n}"
            n += 1
        self._token[raw] = candidate
        self._token_values.add(candidate)
        return candidate

    def compose(self, tag: str, *parts) -> str:
        return self.claim(tag + "_" + "_".join(str(p) for p in parts))

    def claim(self, name: str) -> str:
        candidate, n = name, 2
        while candidate in self._issued:
            candidate = f"{name}__{n}"
            n += 1
        self._issued.add(candidate)
        return candidate


def _simple_shape(instance: TemporalInstance) -> tuple[str, str, int]:
    ds = instance.demands
    if not ds:
        raise InputError("simple instance requires at least one demand")
    a, b = ds[0].a, ds[0].b
    times = sorted(d.t for d in ds)
    if any(d.a != a or d.b != b for d in ds) or times != list(range(1, len(ds) + 1)):
        raise InputError(
            "demands must be exactly (a, b, 1..k) for a common source and sink"
        )
    if instance.num_times != len(ds):
        raise InputError("time horizon must equal the number of demands")
    return a, b, len(ds)


def build_ilp(instance: TemporalInstance) -> IlpModel:
    """Unit-flow integer program for a simple directed instance.

    Node-variant inputs are normalised to the edge variant internally (the
    model then talks about the normalised edge set).  Objective: sum of
    d_{u}_{v} * w.  Constraints: coupling d_uv >= d_uvt per active time,
    flow conservation per (time, interior vertex), unit outflow at the
    source and unit inflow at the sink per time.
    """
    if not instance.directed:
        raise InputError("the flow ILP is defined for directed instances")
    if instance.variant != "edge":
        from .variants import normalize

        instance, _ = normalize(instance, "edge")
    a, b, k = _simple_shape(instance)

    eff = [effective_times(instance, i) for i in range(len(instance.edges))]
    seen = {}
    for i, e in enumerate(instance.edges):
        if (e.u, e.v) in seen:
            raise InputError(f"parallel arcs {seen[(e.u, e.v)]} and {i} not supported")
        seen[(e.u, e.v)] = i

    names = _LpNames()
    edge_var = tuple(
        names.compose("d", names.token(e.u), names.token(e.v)) for e in instance.edges
    )
    flow_var = []
    objective = []
    constraints: list[Constraint] = []
    for i, e in enumerate(instance.edges):
        objective.append((instance.edges[i].w, edge_var[i]))
        for t in sorted(eff[i]):
            fv = names.claim(f"{edge_var[i]}_{t}")
            flow_var.append((i, t, fv))
            constraints.append(
                Constraint(
                    name=names.compose("cpl", names.token(e.u), names.token(e.v), t),
                    kind="coupling",
                    terms=((1, edge_var[i]), (-1, fv)),
                    sense=">=",
                    rhs=0,
                )
            )
    fv_of = {(i, t): name for i, t, name in flow_var}

    conservation: list[Constraint] = []
    for t in range(1, instance.num_times + 1):
        for v in instance.vertices:
            if v in (a, b):
                continue
            ins = [
                (1, fv_of[(i, t)])
                for i, e in enumerate(instance.edges)
                if e.v == v and t in eff[i]
            ]
            outs = [
                (-1, fv_of[(i, t)])
                for i, e in enumerate(instance.edges)
                if e.u == v and t in eff[i]
            ]
            if not ins and not outs:
                continue
            conservation.append(
                Constraint(
                    name=names.compose("cons", t, names.token(v)),
                    kind="conservation",
                    terms=tuple(ins + outs),
                    sense="=",
                    rhs=0,
                )
            )
    source_rows: list[Constraint] = []
    sink_rows: list[Constraint] = []
    for t in range(1, instance.num_times + 1):
        outs = [
            (1, fv_of[(i, t)])
            for i, e in enumerate(instance.edges)
            if e.u == a and t in eff[i]
        ]
        ins = [
            (1, fv_of[(i, t)])
            for i, e in enumerate(instance.edges)
            if e.v == b and t in eff[i]
        ]
        if not outs or not ins:
            raise InfeasibleInstanceError(Demand(a, b, t), f"no flow possible at time {t}")
        source_rows.append(
            Constraint(name=names.compose("src", t), kind="source", terms=tuple(outs), sense="=", rhs=1)
        )
        sink_rows.append(
            Constraint(name=names.compose("snk", t), kind="sink", terms=tuple(ins), sense="=", rhs=1)
        )

    all_constraints = tuple(constraints + conservation + source_rows + sink_rows)
    binaries = tuple(sorted(set(edge_var) | {name for _, _, name in flow_var}))
    return IlpModel(
        objective=tuple(objective),
        constraints=all_constraints,
        binaries=binaries,
        edge_var=edge_var,
        flow_var=tuple(flow_var),
    )


# ---------------------------------------------------------------------------
# LP text format


def _decimal_exact(f: Fraction) -> Optional[str]:
    """Exact decimal string for fractions whose denominator is 2^a 5^b."""
    den = f.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    digits = max(twos, fives)
    scaled = f.numerator * 10**digits // f.denominator
    if digits == 0:
        return str(scaled)
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def emit_lp(model: IlpModel) -> str:
    """Deterministic LP text (Minimize / Subject To / Binary / End).

    Objective coefficients are written as exact decimals when possible;
    otherwise every coefficient is scaled by the least common multiple of
    the denominators and the scale is recorded in a leading comment.
    """
    coefs = [c for c, _ in model.objective]
    scale = 1
    if any(_decimal_exact(c) is None for c in coefs):
        for c in coefs:
            scale = scale * c.denominator // math.gcd(scale, c.denominator)
    lines: list[str] = []
    if scale != 1:
        lines.append(f"\\ objective-scale: {scale}")
    lines.append("Minimize")
    terms = []
    for c, var in model.objective:
        if scale != 1:
            val = c * scale
            assert val.denominator == 1
            txt = str(int(val))
        else:
            txt = _decimal_exact(c)
        terms.append(f"{txt} {var}")
    lines.append(" obj: " + (" + ".join(terms) if terms else "0"))
    lines.append("Subject To")
    for con in model.constraints:
        parts = []
        for j, (coef, var) in enumerate(con.terms):
            if j == 0:
                parts.append(f"{coef} {var}" if coef >= 0 else f"- {abs(coef)} {var}")
            else:
                parts.append(f"+ {coef} {var}" if coef >= 0 else f"- {abs(coef)} {var}")
        sense = ">=" if con.sense == ">=" else "="
        lines.append(f" {con.name}: " + " ".join(parts) + f" {sense} {con.rhs}")
    lines.append("Binary")
    for var in model.binaries:
        lines.append(f" {var}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_lp(text: str) -> IlpModel:
    """Parse text produced by emit_lp back into an equivalent model."""
    scale = 1
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    idx = 0
    while idx < len(lines) and lines[idx].startswith("\\"):
        if "objective-scale:" in lines[idx]:
            scale = int(lines[idx].split(":")[1].strip())
        idx += 1
    if idx >= len(lines) or lines[idx].strip() != "Minimize":
        raise InputError("LP text must start with Minimize")
    idx += 1
    obj_line = lines[idx].strip()
    idx += 1
    if not obj_line.startswith("obj:"):
        raise InputError("missing objective row")
    objective: list[tuple[Fraction, str]] = []
    body = obj_line[len("obj:"):].strip()
    if body != "0":
        for chunk in body.split(" + "):
            coef_txt, var = chunk.rsplit(" ", 1)
            objective.append((Fraction(coef_txt) / scale, var))
    if lines[idx].strip() != "Subject To":
        raise InputError("missing Subject To section")
    idx += 1
    constraints: list[Constraint] = []
    kinds = {"cpl": "coupling", "cons": "conservation", "src": "source", "snk": "sink"}
    while idx < len(lines) and lines[idx].strip() != "Binary":
        row = lines[idx].strip()
        idx += 1
        name, rest = row.split(":", 1)
        tokens = rest.split()
        sense_pos = next(j for j, tok in enumerate(tokens) if tok in (">=", "=", "<="))
        rhs = int(tokens[sense_pos + 1])
        sense = tokens[sense_pos]
        terms: list[tuple[int, str]] = []
        j = 0
        sign = 1
        while j < sense_pos:
            tok = tokens[j]
            if tok == "+":
                sign = 1
                j += 1
                continue
            if tok == "-":
                sign = -1
                j += 1
                continue
            coef = sign * int(tok)
            var = tokens[j + 1]
            terms.append((coef, var))
            sign = 1
            j += 2
        constraints.append(
            Constraint(
                name=name.strip(),
                kind=kinds.get(name.strip().split("_", 1)[0], "coupling"),
                terms=tuple(terms),
                sense=sense,
                rhs=rhs,
            )
        )
    if idx >= len(lines) or lines[idx].strip() != "Binary":
        raise InputError("missing Binary section")
    idx += 1
    binaries: list[str] = []
    while idx < len(lines) and lines[idx].strip() != "End":
        binaries.append(lines[idx].strip())
        idx += 1
    # edge/flow index bookkeeping is not recoverable from text; equivalence
    # is judged on objective, constraints and binaries (models_equivalent).
    return IlpModel(
        objective=tuple(objective),
        constraints=tuple(constraints),
        binaries=tuple(binaries),
    )


def models_equivalent(a: IlpModel, b: IlpModel) -> bool:
    """Structural equality of objective, constraints and binaries."""
    return (
        a.objective == b.objective
        and a.constraints == b.constraints
        and a.binaries == b.binaries
    )


def assignment_satisfies(model: IlpModel, values: dict[str, int]) -> bool:
    for con in model.constraints:
        total = sum(coef * values[var] for coef, var in con.terms)
        if con.sense == ">=" and total < con.rhs:
            return False
        if con.sense == "=" and total != con.rhs:
            return False
    return True


def assignment_objective(model: IlpModel, values: dict[str, int]) -> Fraction:
    return sum((c * values[var] for c, var in model.objective), Fraction(0))
