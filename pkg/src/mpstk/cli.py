"""Command-line frontend.

Subcommands: parse, subtype, project, infer, check-context, check-session,
gen qbf, topdown, bottomup, bench, graph.  Exit codes: 0 accept/holds,
1 reject/violation, 2 input error, 3 budget or timeout.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import context as ctx_mod
from .ast import SessionTypeError, size
from .bench import CSV_COLUMNS, bench_family, write_csv
from .context import BudgetExceeded, brute_force_liveness
from .hardness import (
    eval_qbf, gen_qbf_context, parse_qbf, protocol_summary, validate_reduction,
)
from .inference import infer, show_constraint
from .parse import parse
from .pipeline import run_bottomup, run_topdown
from .printer import show, show_context, show_local
from .projection import NotBalanced, ProjUndefined, project_inductive, project_subset, project_tirore
from .semantics import explore_session
from .subtyping import subtype_inductive, subtype_sim
from .typegraph import dot_global_graph, dot_type_graph, global_graph, local_graph

OK, REJECT, INPUT_ERROR, BUDGET = 0, 1, 2, 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, default=str))
    else:
        print(text)


def cmd_parse(args) -> int:
    ast = parse(args.category, _read(args.file))
    _emit(args, {"ok": True, "category": args.category, "pretty": show(ast),
                 "size": size(ast)}, show(ast))
    return OK


def cmd_subtype(args) -> int:
    t1 = parse("local", _read(args.file_a))
    t2 = parse("local", _read(args.file_b))
    if args.algo == "sim":
        r = subtype_sim(t1, t2)
        payload = {"result": r.result, "nodes_visited": r.nodes_visited,
                   "edges_visited": r.edges_visited}
        text = f"{'subtype' if r.result else 'not a subtype'}"
        if args.stats:
            text += f" (nodes={r.nodes_visited}, edges={r.edges_visited})"
    else:
        r = subtype_inductive(t1, t2, budget=args.budget)
        payload = {"result": r.result, "judgements": r.judgements}
        text = f"{'subtype' if r.result else 'not a subtype'}"
        if args.stats:
            text += f" (judgements={r.judgements})"
    _emit(args, payload, text)
    return OK if r.result else REJECT


def cmd_project(args) -> int:
    g = parse("global", _read(args.file))
    try:
        if args.algo == "subset":
            graph = project_subset(g, args.role)
            from .typegraph import graph_to_type

            t = graph_to_type(graph)
            payload = {"defined": True, "type": show_local(t),
                       "graph_nodes": len(graph.real_nodes())}
            if args.dot:
                with open(args.dot, "w") as fh:
                    fh.write(dot_type_graph(graph, f"projection onto {args.role}"))
        else:
            if args.algo == "tbc":
                t = project_tirore(g, args.role)
            else:
                t = project_inductive(g, args.role, args.algo)
            payload = {"defined": True, "type": show_local(t)}
            if args.dot:
                with open(args.dot, "w") as fh:
                    fh.write(dot_type_graph(local_graph(t), f"projection onto {args.role}"))
    except (ProjUndefined, NotBalanced) as e:
        _emit(args, {"defined": False, "reason": str(e)}, f"undefined: {e}")
        return REJECT
    _emit(args, payload, payload["type"])
    return OK


def cmd_infer(args) -> int:
    p = parse("process", _read(args.file))
    r = infer(p)
    payload = {"typable": r.typable}
    if args.emit_constraints:
        payload["constraints"] = [show_constraint(c) for c in r.derivation.constraints]
    if r.typable:
        payload["min_type"] = show_local(r.min_type)
        if args.dot:
            with open(args.dot, "w") as fh:
                fh.write(dot_type_graph(r.graph, "minimum type graph"))
        _emit(args, payload, payload["min_type"])
        return OK
    payload["failure"] = r.failure
    if r.failure_node:
        payload["failure_node"] = sorted(r.failure_node)
    _emit(args, payload, f"untypable: {r.failure}")
    return REJECT


def cmd_check_context(args) -> int:
    ctx = parse("context", _read(args.file))
    checkers = {"safety": ctx_mod.check_safety, "df": ctx_mod.check_deadlock_freedom,
                "live": ctx_mod.check_liveness}
    v = checkers[args.prop](ctx, args.budget)
    if args.dot:
        rg = ctx_mod.reachable_graph(ctx, args.budget)
        marked = set()
        if v.trace is not None:
            marked = {
                i for i, s in enumerate(rg.states)
                if any(_ctx_state_eq(rg, i, c) for c, _ in v.trace.steps)
            }
        with open(args.dot, "w") as fh:
            fh.write(ctx_mod.dot_context_graph(rg, marked))
    payload = {"prop": args.prop, "holds": v.holds, "states": v.states, "edges": v.edges}
    lines = [f"{args.prop}: {'holds' if v.holds else 'violated'} "
             f"({v.states} states, {v.edges} edges)"]
    if args.oracle and args.prop == "live":
        oracle = brute_force_liveness(ctx, bound=args.oracle_bound)
        payload["oracle"] = oracle
        lines.append(f"oracle: {'live' if oracle else 'not live'}")
    if v.trace is not None and args.trace:
        payload["trace"] = [
            {"context": show_context(c), "label": str(lab)} for c, lab in v.trace.steps
        ]
        payload["cycle_start"] = v.trace.cycle_start
        for i, (c, lab) in enumerate(v.trace.steps):
            marker = " (cycle)" if v.trace.cycle_start is not None and i >= v.trace.cycle_start else ""
            lines.append(f"  {show_context(c)}  --[{lab}]-->{marker}")
        lines.append(f"  {show_context(v.trace.final)}")
    _emit(args, payload, "\n".join(lines))
    return OK if v.holds else REJECT


def _ctx_state_eq(rg, i, ctx) -> bool:
    return rg.lts.context_of(rg.states[i]) == ctx


def cmd_check_session(args) -> int:
    sess = parse("session", _read(args.file))
    rep = explore_session(sess, depth=args.depth, runs=args.runs, seed=args.seed)
    payload = {
        "error_reached": rep.error_reached,
        "stuck_nonterminal": rep.stuck_nonterminal,
        "states": rep.states,
        "steps": rep.steps,
    }
    ok = not rep.error_reached and not rep.stuck_nonterminal
    _emit(args, payload,
          f"errors: {rep.error_reached}, stuck non-inact: {rep.stuck_nonterminal}, "
          f"states: {rep.states}")
    return OK if ok else REJECT


def cmd_gen(args) -> int:
    if args.what != "qbf":
        print(f"unknown generator {args.what}", file=sys.stderr)
        return INPUT_ERROR
    f = parse_qbf(args.formula)
    ctx = gen_qbf_context(f, args.prop)
    payload = {"context": show_context(ctx), "participants": ctx.participants(),
               "qbf_true": eval_qbf(f)}
    lines = [show_context(ctx), "", protocol_summary(f)]
    if args.validate:
        ok = validate_reduction(f, args.prop, args.budget)
        payload["reduction_valid"] = ok
        lines.append(f"reduction valid: {ok}")
        _emit(args, payload, "\n".join(lines))
        return OK if ok else REJECT
    _emit(args, payload, "\n".join(lines))
    return OK


def cmd_topdown(args) -> int:
    sess = parse("session", _read(args.session))
    g = parse("global", _read(args.global_file))
    rep = run_topdown(sess, g, args.kind)
    payload = {"accepted": rep.accepted,
               "stages": [{"name": s.name, "ok": s.ok, "detail": s.detail,
                           "millis": round(s.millis, 3)} for s in rep.stages]}
    text = "accepted" if rep.accepted else f"rejected: {rep.fail_reason()}"
    _emit(args, payload, text)
    return OK if rep.accepted else REJECT


def cmd_bottomup(args) -> int:
    sess = parse("session", _read(args.session))
    rep = run_bottomup(sess, args.prop, args.budget)
    payload = {"accepted": rep.accepted,
               "stages": [{"name": s.name, "ok": s.ok, "detail": s.detail,
                           "millis": round(s.millis, 3)} for s in rep.stages]}
    text = "holds" if rep.accepted else f"violated or untypable: {rep.fail_reason()}"
    _emit(args, payload, text)
    return OK if rep.accepted else REJECT


def _parse_params(family: str, raw: str):
    if family == "coprime":
        return [tuple(int(x) for x in chunk.split("x")) for chunk in raw.split(",")]
    if family == "lcm":
        return [[int(x) for x in chunk.split("x")] for chunk in raw.split(",")]
    return [int(x) for x in raw.split(",")]


def cmd_bench(args) -> int:
    records = bench_family(args.family, _parse_params(args.family, args.params),
                           budget=args.budget)
    if args.out:
        write_csv(records, args.out)
    print("\t".join(CSV_COLUMNS))
    for r in records:
        print("\t".join(str(x) for x in r.row()))
    return OK


def cmd_graph(args) -> int:
    text = _read(args.file)
    if args.category == "local":
        g = local_graph(parse("local", text))
        dot = dot_type_graph(g)
    else:
        gg = global_graph(parse("global", text))
        dot = dot_global_graph(gg)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(dot)
    else:
        print(dot)
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpstk", description=__doc__)
    ap.add_argument("--json", action="store_true", help="JSON output")
    ap.add_argument("--budget", type=int, default=1_000_000,
                    help="state/judgement budget")
    ap.add_argument("--seed", type=int, default=0)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("parse")
    p.add_argument("category", choices=["local", "global", "expr", "process", "session", "context"])
    p.add_argument("file")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("subtype")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--algo", choices=["sim", "inductive"], default="sim")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(fn=cmd_subtype)

    p = sub.add_parser("project")
    p.add_argument("file")
    p.add_argument("--role", required=True)
    p.add_argument("--algo", choices=["plain", "full", "tbc", "subset"], default="full")
    p.add_argument("--dot")
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("infer")
    p.add_argument("file")
    p.add_argument("--emit-constraints", action="store_true")
    p.add_argument("--dot")
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("check-context")
    p.add_argument("file")
    p.add_argument("--prop", choices=["safety", "df", "live"], required=True)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--oracle-bound", type=int, default=8)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--dot", help="write the reachable context graph")
    p.set_defaults(fn=cmd_check_context)

    p = sub.add_parser("check-session")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--runs", type=int, default=0)
    p.set_defaults(fn=cmd_check_session)

    p = sub.add_parser("gen")
    p.add_argument("what", choices=["qbf"])
    p.add_argument("--formula", required=True)
    p.add_argument("--prop", choices=["safety", "df", "live"], default="safety")
    p.add_argument("--validate", action="store_true")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("topdown")
    p.add_argument("session")
    p.add_argument("global_file")
    p.add_argument("--kind", choices=["plain", "full", "tbc", "subset"], default="full")
    p.set_defaults(fn=cmd_topdown)

    p = sub.add_parser("bottomup")
    p.add_argument("session")
    p.add_argument("--prop", choices=["safety", "df", "live"], default="safety")
    p.set_defaults(fn=cmd_bottomup)

    p = sub.add_parser("bench")
    p.add_argument("--family", required=True,
                   choices=["coprime", "inductive-blowup", "plain-nlogn",
                            "fullmerge-naive", "fullmerge-opt", "fullmerge-nlog2",
                            "subset-primes", "tirore", "lcm"])
    p.add_argument("--params", required=True,
                   help="comma-separated points; coprime: 3x4,5x7; lcm: 2x3,2x3x5")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("graph")
    p.add_argument("file")
    p.add_argument("--category", choices=["local", "global"], default="local")
    p.add_argument("--dot")
    p.set_defaults(fn=cmd_graph)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return BUDGET
    except (SessionTypeError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
