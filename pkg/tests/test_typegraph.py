"""Type graphs: construction bounds, extraction round trip, balancedness."""

import random

import pytest

from conftest import rand_global, rand_local

from mpstk.ast import INT, GMsg, GEnd, TEnd, is_closed, participants, size, unfold
from mpstk.parse import parse
from mpstk.printer import show
from mpstk.subtyping import graph_equiv
from mpstk.typegraph import (
    Action, BRA, ENDK, IN, OUT, SEL, MalformedGraph, TypeGraph,
    dot_type_graph, global_graph, graph_to_type, involves, is_balanced,
    local_graph, validate_type_graph,
)


def test_local_graph_paper_example():
    t1 = parse("local", "rec t. p+{l1: p+{l1: t}, l2: end}")
    g = local_graph(t1)
    # T1 --(+)p l1--> Sel(p,{l1:T1}) --(+)p l1--> T1, T1 --(+)p l2--> end --end--> Skip
    n_mid = g.step(g.init, Action(SEL, "p", "l1"))
    assert n_mid is not None and n_mid != g.init
    assert g.step(n_mid, Action(SEL, "p", "l1")) == g.init
    n_end = g.step(g.init, Action(SEL, "p", "l2"))
    assert g.step(n_end, Action(ENDK)) == g.skip
    assert len(g.real_nodes()) == 3


def test_local_graph_end():
    g = local_graph(TEnd())
    assert g.edges[g.init] == [(Action(ENDK), g.skip)]


def test_graph_bounds(rng):
    for _ in range(500):
        t = rand_local(rng, 12)
        if not is_closed(t):
            continue
        g = local_graph(t)
        n = size(t)
        assert len(g.real_nodes()) <= n
        assert sum(len(e) for e in g.edges) <= 2 * n
        validate_type_graph(g)


def test_graph_determinism(rng):
    for _ in range(300):
        t = rand_local(rng, 10)
        if not is_closed(t):
            continue
        g = local_graph(t)
        for edges in g.edges:
            acts = [a for a, _ in edges]
            assert len(set(acts)) == len(acts)


def test_graph_to_type_end():
    g = local_graph(TEnd())
    assert graph_to_type(g) == TEnd()


def test_graph_to_type_roundtrip(rng):
    for _ in range(500):
        t = rand_local(rng, 10)
        if not is_closed(t):
            continue
        back = graph_to_type(local_graph(t))
        assert graph_equiv(back, t), (show(t), show(back))


def test_graph_to_type_subset_example():
    from mpstk.projection import project_subset

    g = parse(
        "global",
        "p->q{l1: q->r(int); q->r{l3: r->p(int); end},"
        " l2: q->r(int); q->r{l4: r->p(bool); end}}",
    )
    t = graph_to_type(project_subset(g, "r"))
    assert show(t) == "q?(int); q&{l3: p!(int); end, l4: p!(bool); end}"


def test_malformed_graph_rejected():
    # a node mixing an input edge and a selection edge
    g = TypeGraph(0, [[(Action(IN, "p", INT), 1), (Action(SEL, "p", "l"), 1)],
                      [(Action(ENDK), 2)], []], 2, ["a", "b", "Skip"])
    with pytest.raises(MalformedGraph):
        validate_type_graph(g)


# ---------------------------------------------------------------------------
# Global graphs and balancedness


def test_global_graph_msg():
    gg = global_graph(GMsg("p", "q", INT, GEnd()))
    assert gg.succ[gg.init] and len(gg.succ[gg.init]) == 1


def test_global_graph_self_loop():
    g = parse("global", "rec t. p->q{l: t, l2: q->r{l3: end}}")
    gg = global_graph(g)
    assert gg.init in gg.succ[gg.init]


def test_global_graph_nodes_are_subformulas(rng):
    from mpstk.ast import alpha_canon, subformulas

    for _ in range(200):
        g = rand_global(rng, 10)
        if not is_closed(g):
            continue
        gg = global_graph(g)
        subs = {alpha_canon(s) for s in subformulas(g)}
        for node in gg.nodes:
            assert alpha_canon(node) in subs


def test_balanced_fixtures():
    unb = parse("global", "rec t. p->q{l: t, l2: q->r{l3: end}}")
    assert not is_balanced(unb)
    assert is_balanced(GMsg("p", "q", INT, GEnd()))
    g_if = parse("global", "rec t. q->r{l1: r->p{l1: t}, l2: r->p{l2: end}}")
    assert is_balanced(g_if)


def oracle_balanced(g) -> bool:
    """Literal cycle enumeration: some participant reachable from a cycle
    that avoids it makes the type unbalanced."""
    gg = global_graph(g)
    n = gg.node_count()
    reach = [set() for _ in range(n)]
    for u in range(n):
        stack, seen = [u], {u}
        while stack:
            v = stack.pop()
            for w in gg.succ[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        reach[u] = seen
    for p in participants(g):
        avoid = [u for u in range(n) if not involves(gg.nodes[u], p)]
        # enumerate simple cycles within `avoid` by DFS up to n steps
        for start in avoid:
            stack = [(start, [start])]
            while stack:
                v, path = stack.pop()
                for w in gg.succ[v]:
                    if w not in avoid:
                        continue
                    if w == start:
                        if any(involves(gg.nodes[x], p) for u in path for x in reach[u]):
                            return False
                        continue
                    if w not in path and len(path) <= n:
                        stack.append((w, path + [w]))
    return True


def test_balanced_oracle_agreement(rng):
    for _ in range(400):
        g = rand_global(rng, 10)
        if not is_closed(g):
            continue
        assert is_balanced(g) == oracle_balanced(g), show(g)


def test_plain_projectable_implies_balanced(rng):
    from mpstk.projection import PLAIN, ProjUndefined, project_inductive

    checked = 0
    tries = 0
    while checked < 500 and tries < 20000:
        tries += 1
        g = rand_global(rng, 9)
        if not is_closed(g):
            continue
        try:
            for p in participants(g):
                project_inductive(g, p, PLAIN)
        except ProjUndefined:
            continue
        checked += 1
        assert is_balanced(g), show(g)
    assert checked >= 200


def test_dot_export_smoke():
    t1 = parse("local", "rec t. p+{l1: p+{l1: t}, l2: end}")
    dot = dot_type_graph(local_graph(t1))
    assert dot.startswith("digraph") and "Skip" in dot
