"""Command-line surface: validate, reduce, solve, approx, gen, verify, bench.

All file outputs are deterministic for a given (input, flags, seed); run
metadata such as wall time goes to the stdout report only, never into output
files.  Exit codes: 0 success, 1 infeasible, 2 input error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

from . import approx as approx_mod
from . import exact, hardness, monotonic, variants
from .core import (
    InfeasibleInstanceError,
    InputError,
    TemporalInstance,
    dump_json,
    instance_from_dict,
    instance_to_dict,
    is_acyclic,
    is_feasible,
    is_monotonic,
    load_json,
    solution_cost,
    solution_from_dict,
    solution_to_dict,
    validate,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _digest(instance: TemporalInstance) -> dict:
    return {
        "vertices": len(instance.vertices),
        "edges": len(instance.edges),
        "demands": len(instance.demands),
        "T": instance.num_times,
        "variant": instance.variant,
        "directed": instance.directed,
        "monotonic": is_monotonic(instance),
        "acyclic": is_acyclic(instance) if instance.directed else None,
    }


_ARGV_ECHO: list[str] = []


def _report(command: str, instance: Optional[TemporalInstance], **extra) -> None:
    rep: dict = {"command": command, "argv": list(_ARGV_ECHO)}
    if instance is not None:
        rep["digest"] = _digest(instance)
    rep.update(extra)
    print(json.dumps(rep, indent=2))


def _load_instance(path: str) -> TemporalInstance:
    instance = instance_from_dict(load_json(path))
    violations = validate(instance)
    if violations:
        raise InputError("; ".join(violations))
    return instance


def cmd_validate(args) -> int:
    instance = instance_from_dict(load_json(args.input))
    violations = validate(instance)
    _report(
        "validate",
        instance if not violations else None,
        violations=violations,
        ok=not violations,
    )
    return EXIT_OK if not violations else EXIT_INPUT


def cmd_reduce(args) -> int:
    instance = _load_instance(args.input)
    started = time.perf_counter()
    if args.to in ("edge", "node", "node_and_edge"):
        image, steps = variants.normalize(instance, args.to)
        dump_json(instance_to_dict(image), args.output)
        if args.map:
            dump_json({"steps": [variants.reduction_map_to_dict(m) for m in steps]}, args.map)
    elif args.to == "simple":
        node_image, steps = variants.normalize(instance, "node")
        image, last = variants.to_simple(node_image)
        steps = steps + [last]
        dump_json(instance_to_dict(image), args.output)
        if args.map:
            dump_json({"steps": [variants.reduction_map_to_dict(m) for m in steps]}, args.map)
    elif args.to == "priority-st":
        edge_image, steps = variants.normalize(instance, "edge")
        p = monotonic.tsn_to_priority(edge_image)
        dump_json(
            {
                "vertices": list(p.vertices),
                "edges": [
                    {"u": e.u, "v": e.v, "w": str(e.w), "priority": e.priority}
                    for e in p.edges
                ],
                "max_priority": p.max_priority,
                "demands": [
                    {"a": d.a, "b": d.b, "priority": d.priority} for d in p.demands
                ],
            },
            args.output,
        )
        if args.map:
            dump_json({"steps": [variants.reduction_map_to_dict(m) for m in steps]}, args.map)
    elif args.to == "dst":
        edge_image, steps = variants.normalize(instance, "edge")
        dst = monotonic.single_source_to_dst(edge_image)
        dump_json(monotonic.dst_to_dict(dst), args.output)
        if args.map:
            dump_json({"steps": [variants.reduction_map_to_dict(m) for m in steps]}, args.map)
    else:
        raise InputError(f"unknown reduction target {args.to!r}")
    _report(
        "reduce",
        instance,
        target=args.to,
        output=args.output,
        wall_time_s=round(time.perf_counter() - started, 6),
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = _load_instance(args.input)
    started = time.perf_counter()
    stats: dict = {}
    if args.method == "brute":
        solution = exact.brute_force(instance)
    elif args.method == "bb":
        bb_stats = exact.BbStats()
        solution = exact.solve_bb(instance, bb_stats)
        stats["nodes"] = bb_stats.nodes
    elif args.method == "ilp-export":
        node_image, steps = variants.normalize(instance, "node")
        simple, last = variants.to_simple(node_image)
        model = exact.build_ilp(simple)
        text = exact.emit_lp(model)
        if not args.lp:
            raise InputError("--lp PATH is required for ilp-export")
        with open(args.lp, "w", encoding="ascii") as fh:
            fh.write(text)
        _report(
            "solve",
            instance,
            method=args.method,
            lp=args.lp,
            variables=model.variable_count(),
            constraints=len(model.constraints),
            wall_time_s=round(time.perf_counter() - started, 6),
        )
        return EXIT_OK
    else:
        raise InputError(f"unknown method {args.method!r}")
    if args.output:
        dump_json(solution_to_dict(instance, solution), args.output)
    _report(
        "solve",
        instance,
        method=args.method,
        cost=str(solution.cost),
        feasible=True,
        stats=stats,
        wall_time_s=round(time.perf_counter() - started, 6),
    )
    return EXIT_OK


def cmd_approx(args) -> int:
    instance = _load_instance(args.input)
    started = time.perf_counter()
    stats: dict = {}
    if args.method == "union":
        solution = approx_mod.shortest_paths_union(instance)
    elif args.method == "charikar":
        solution = approx_mod.charikar(instance, args.level, stats)
    else:
        raise InputError(f"unknown method {args.method!r}")
    if args.output:
        dump_json(solution_to_dict(instance, solution), args.output)
    _report(
        "approx",
        instance,
        method=args.method,
        level=args.level if args.method == "charikar" else None,
        cost=str(solution.cost),
        feasible=bool(is_feasible(instance, solution)),
        stats=stats,
        wall_time_s=round(time.perf_counter() - started, 6),
    )
    return EXIT_OK


def _generate(kind: str, args):
    """Returns (instance, trace, constraint_graph_dict)."""
    if kind == "example1":
        lc = hardness.example1_label_cover()
        inst, trace = hardness.lc_to_2dtsn(lc)
        return inst, trace, hardness.lc_to_dict(lc)
    if kind == "lc-yes":
        lc = hardness.gen_yes_lc(args.u, args.v, args.degree, args.sigma, args.seed)
        inst, trace = hardness.lc_to_2dtsn(lc)
        return inst, trace, hardness.lc_to_dict(lc)
    if kind == "phlc-yes":
        sizes = [int(s) for s in args.part_sizes.split(",")]
        h = hardness.gen_yes_phlc(args.k, sizes, args.edges, args.sigma, args.seed)
        inst, trace = hardness.phlc_to_kdtsn(h)
        return inst, trace, hardness.phlc_to_dict(h)
    if kind == "phlc-nosat":
        sizes = [int(s) for s in args.part_sizes.split(",")]
        h = hardness.gen_nosat_phlc(args.k, sizes, args.edges, args.sigma, args.seed)
        inst, trace = hardness.phlc_to_kdtsn(h)
        return inst, trace, hardness.phlc_to_dict(h)
    raise InputError(f"unknown generator kind {kind!r}")


def cmd_gen(args) -> int:
    started = time.perf_counter()
    instance, trace, source = _generate(args.kind, args)
    if args.undirected:
        instance = hardness.undirect(instance)
    dump_json(instance_to_dict(instance), args.output)
    if args.trace and trace is not None:
        dump_json(hardness.trace_to_dict(trace), args.trace)
    if args.source:
        dump_json(source, args.source)
    _report(
        "gen",
        instance,
        kind=args.kind,
        seed=args.seed,
        output=args.output,
        wall_time_s=round(time.perf_counter() - started, 6),
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = _load_instance(args.input)
    solution, claimed_feasible = solution_from_dict(load_json(args.solution))
    if solution is None:
        ok = exact_first_unsat(instance) is not None
        _report("verify", instance, ok=ok, note="infeasibility marker")
        return EXIT_OK if ok else EXIT_INPUT
    problems = []
    if any(i < 0 or i >= len(instance.edges) for i in solution.edges):
        problems.append("edge index out of range")
    else:
        recomputed = solution_cost(instance, solution)
        if recomputed != solution.cost:
            problems.append(f"cost mismatch: file says {solution.cost}, recomputed {recomputed}")
        actual = is_feasible(instance, solution)
        if actual != claimed_feasible:
            problems.append(f"feasible flag mismatch: file says {claimed_feasible}, actual {actual}")
    _report("verify", instance, ok=not problems, problems=problems)
    return EXIT_OK if not problems else EXIT_INPUT


def exact_first_unsat(instance):
    from .core import first_unsatisfiable_demand

    return first_unsatisfiable_demand(instance)


def cmd_bench(args) -> int:
    methods = [m for m in args.methods.split(",") if m]
    for method in methods:
        if method not in ("brute", "bb", "union") and not method.startswith("charikar"):
            raise InputError(f"unknown method {method!r}")
    seeds = [int(s) for s in args.seeds.split(",") if s]
    rows = []
    for seed in seeds:
        ns = argparse.Namespace(
            u=args.u, v=args.v, degree=args.degree, sigma=args.sigma,
            k=args.k, part_sizes=args.part_sizes, edges=args.edges, seed=seed,
        )
        instance, _, _ = _generate(args.kind, ns)
        # bench trusts its own generated instances: the subset cap guards
        # arbitrary user input, not this batch runner
        cap = len(instance.edges)
        optimum: Optional[Fraction] = exact.brute_force(instance, cap=cap).cost
        for method in methods:
            try:
                if method == "brute":
                    cost = exact.brute_force(instance, cap=cap).cost
                elif method == "bb":
                    cost = exact.solve_bb(instance).cost
                elif method == "union":
                    cost = approx_mod.shortest_paths_union(instance).cost
                else:  # charikar[:level]
                    level = int(method.split(":")[1]) if ":" in method else 2
                    cost = approx_mod.charikar(instance, level).cost
            except InputError:
                # method not applicable to this instance family: keep the
                # row, leave the cost empty
                cost = None
            ratio = None
            if cost is not None and optimum is not None and optimum > 0:
                ratio = str(cost / optimum)
            rows.append(
                {
                    "kind": args.kind,
                    "seed": seed,
                    "method": method,
                    "cost": str(cost) if cost is not None else "",
                    "optimum": str(optimum) if optimum is not None else "",
                    "ratio": ratio or "",
                }
            )
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["kind", "seed", "method", "cost", "optimum", "ratio"])
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check instance invariants")
    p.add_argument("-i", "--input", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reduce", help="apply a strict reduction")
    p.add_argument("--to", required=True,
                   choices=["edge", "node", "node_and_edge", "simple", "priority-st", "dst"])
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--map", help="write the reduction map here")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="exact solving / ILP export")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--method", required=True, choices=["bb", "brute", "ilp-export"])
    p.add_argument("--lp", help="LP text output path (ilp-export)")
    p.add_argument("-o", "--output", help="solution JSON path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("approx", help="approximation algorithms")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--method", required=True, choices=["union", "charikar"])
    p.add_argument("--level", type=int, default=2)
    p.add_argument("-o", "--output", help="solution JSON path")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("gen", help="generate benchmark instances")
    p.add_argument("--kind", required=True,
                   choices=["example1", "lc-yes", "phlc-yes", "phlc-nosat"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--u", type=int, default=1, help="left vertices (lc-yes)")
    p.add_argument("--v", type=int, default=1, help="right vertices (lc-yes)")
    p.add_argument("--degree", type=int, default=1, help="edges per left vertex (lc-yes)")
    p.add_argument("--sigma", type=int, default=2, help="label count")
    p.add_argument("--k", type=int, default=3, help="number of parts (phlc)")
    p.add_argument("--part-sizes", default="1,1,1", help="comma list (phlc)")
    p.add_argument("--edges", type=int, default=1, help="hyperedge count (phlc)")
    p.add_argument("--undirected", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--trace", help="write the gadget trace here")
    p.add_argument("--source", help="write the constraint-graph JSON here")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="recheck a solution file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-s", "--solution", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run generated instances through methods")
    p.add_argument("--kind", required=True,
                   choices=["example1", "lc-yes", "phlc-yes", "phlc-nosat"])
    p.add_argument("--methods", default="", help="comma list: brute,bb,union,charikar[:i]")
    p.add_argument("--seeds", default="0")
    p.add_argument("--u", type=int, default=1)
    p.add_argument("--v", type=int, default=1)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--sigma", type=int, default=2)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--part-sizes", default="1,1,1")
    p.add_argument("--edges", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    _ARGV_ECHO[:] = list(argv) if argv is not None else sys.argv[1:]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except InfeasibleInstanceError as exc:
        print(json.dumps({"command": args.command, "error": "infeasible", "detail": str(exc)}))
        return EXIT_INFEASIBLE
    except InputError as exc:
        print(json.dumps({"command": args.command, "error": "input", "detail": str(exc)}))
        return EXIT_INPUT
    except approx_mod.NoSolutionError as exc:
        print(json.dumps({"command": args.command, "error": "infeasible", "detail": str(exc)}))
        return EXIT_INFEASIBLE
    except AssertionError as exc:
        print(json.dumps({"command": args.command, "error": "internal", "detail": str(exc)}))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
