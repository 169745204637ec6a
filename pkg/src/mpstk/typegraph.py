"""Finite labelled transition graphs for local and global types.

A local type graph has one node per (alpha-canonical) subformula reachable
from the root, a single shared Skip sink, and action-labelled edges obtained
by unfolding each node's head.  Node ids are dense ints so the product
constructions elsewhere can work on int pairs.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .ast import (
    GChoice, GMsg, GlobalT,
    LocalT, SessionTypeError,
    TBra, TEnd, TIn, TOut, TRec, TSel, TVar,
    alpha_canon, participants, unfold,
)
from .printer import show_global, show_local, show_sort

sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

IN, OUT, SEL, BRA, ENDK = "in", "out", "sel", "bra", "end"


@dataclass(frozen=True)
class Action:
    kind: str
    peer: str | None = None
    arg: object = None  # payload sort for in/out, label for sel/bra

    def __str__(self):
        if self.kind == ENDK:
            return "end"
        if self.kind == IN:
            return f"?{self.peer}({show_sort(self.arg)})"
        if self.kind == OUT:
            return f"!{self.peer}({show_sort(self.arg)})"
        op = "(+)" if self.kind == SEL else "&"
        return f"{op}{self.peer} {self.arg}"


END_ACT = Action(ENDK)


class MalformedGraph(SessionTypeError):
    pass


@dataclass
class TypeGraph:
    """Deterministic local type graph.  `edges[n]` lists (Action, target);
    `skip` is the unique sink for end actions; `desc[n]` describes node n
    (an AST node or a string), rendered lazily by `label`."""

    init: int
    edges: list[list[tuple[Action, int]]]
    skip: int | None
    desc: list = field(default_factory=list)

    def label(self, n: int) -> str:
        if n >= len(self.desc):
            return str(n)
        d = self.desc[n]
        return d if isinstance(d, str) else show_local(d)

    def node_count(self) -> int:
        return len(self.edges)

    def real_nodes(self) -> list[int]:
        return [n for n in range(len(self.edges)) if n != self.skip]

    def kind(self, n: int) -> str:
        if n == self.skip:
            return "skip"
        return self.edges[n][0][0].kind

    def out(self, n: int) -> list[tuple[Action, int]]:
        return self.edges[n]

    def step(self, n: int, act: Action) -> int | None:
        for a, m in self.edges[n]:
            if a == act:
                return m
        return None


def validate_type_graph(g: TypeGraph) -> None:
    """Well-formedness of a local type graph: every non-Skip node has edges
    all of one kind (one input / one output / selections to one peer /
    branchings to one peer / a single end edge into Skip), deterministically
    labelled."""
    for n in range(len(g.edges)):
        if n == g.skip:
            if g.edges[n]:
                raise MalformedGraph("Skip must be a sink")
            continue
        out = g.edges[n]
        if not out:
            raise MalformedGraph(f"node {n} has no outgoing edges")
        kinds = {a.kind for a, _ in out}
        if len(kinds) != 1:
            raise MalformedGraph(f"node {n} mixes edge kinds {sorted(kinds)}")
        kind = kinds.pop()
        if kind == ENDK:
            if len(out) != 1 or out[0][1] != g.skip:
                raise MalformedGraph(f"node {n}: end edge must target Skip")
        elif kind in (IN, OUT):
            if len(out) != 1:
                raise MalformedGraph(f"node {n}: {kind} node must have one edge")
        else:
            peers = {a.peer for a, _ in out}
            labs = [a.arg for a, _ in out]
            if len(peers) != 1:
                raise MalformedGraph(f"node {n}: several peers {sorted(peers)}")
            if len(set(labs)) != len(labs):
                raise MalformedGraph(f"node {n}: duplicate labels")


def head_actions(t: LocalT) -> list[tuple[Action, LocalT]]:
    """Transitions of a closed local type per the type graph rules."""
    h = unfold(t)
    if isinstance(h, TEnd):
        return [(END_ACT, None)]
    if isinstance(h, TIn):
        return [(Action(IN, h.peer, h.payload), h.cont)]
    if isinstance(h, TOut):
        return [(Action(OUT, h.peer, h.payload), h.cont)]
    if isinstance(h, TSel):
        return [(Action(SEL, h.peer, l), b) for l, b in h.branches]
    if isinstance(h, TBra):
        return [(Action(BRA, h.peer, l), b) for l, b in h.branches]
    raise SessionTypeError(f"open local type in graph construction: {h!r}")


def local_graph(t: LocalT) -> TypeGraph:
    """G(T): the graph reachable from T by the transition rules.  Nodes are
    interned by alpha-canonical form, so |nodes| <= |Sub(T)| <= |T|."""
    ids: dict = {}
    edges: list[list[tuple[Action, int]]] = []
    desc: list = []
    todo: list[tuple[int, LocalT]] = []
    skip = [None]

    def nid(u: LocalT) -> int:
        key = alpha_canon(u)
        n = ids.get(key)
        if n is None:
            n = len(edges)
            ids[key] = n
            edges.append([])
            desc.append(u)
            todo.append((n, u))
        return n

    init = nid(t)
    while todo:
        n, u = todo.pop()
        for act, cont in head_actions(u):
            if act.kind == ENDK:
                if skip[0] is None:
                    skip[0] = len(edges)
                    edges.append([])
                    desc.append("Skip")
                edges[n].append((act, skip[0]))
            else:
                edges[n].append((act, nid(cont)))
    return TypeGraph(init, edges, skip[0], desc)


def graph_to_type(g: TypeGraph, root: int | None = None) -> LocalT:
    """Extract a syntactic local type from a well-formed type graph, using
    rec binders for back edges.  local_graph(result) is graph-equivalent to
    g restricted to what is reachable from `root`."""
    validate_type_graph(g)
    root = g.init if root is None else root
    counter = [0]
    active: dict[int, list] = {}  # node -> [binder name or None]

    def build(n: int) -> LocalT:
        if n in active:
            holder = active[n]
            if holder[0] is None:
                holder[0] = f"t{counter[0]}"
                counter[0] += 1
            return TVar(holder[0])
        holder = [None]
        active[n] = holder
        out = g.out(n)
        kind = out[0][0].kind
        if kind == ENDK:
            body: LocalT = TEnd()
        elif kind == IN:
            a, m = out[0]
            body = TIn(a.peer, a.arg, build(m))
        elif kind == OUT:
            a, m = out[0]
            body = TOut(a.peer, a.arg, build(m))
        else:
            ctor = TSel if kind == SEL else TBra
            pairs = tuple(sorted(((a.arg, build(m)) for a, m in out), key=lambda kv: kv[0]))
            body = ctor(out[0][0].peer, pairs)
        del active[n]
        if holder[0] is not None:
            body = TRec(holder[0], body)
        return body

    return build(root)


# ---------------------------------------------------------------------------
# Global type graphs


@dataclass
class GlobalGraph:
    """Unlabelled transition graph over the reachable subformulas of G."""

    init: int
    succ: list[list[int]]
    nodes: list[GlobalT]

    def node_count(self) -> int:
        return len(self.succ)


def involves(g: GlobalT, p: str) -> bool:
    h = unfold(g)
    if isinstance(h, (GMsg, GChoice)):
        return p in (h.frm, h.to)
    return False


def head_conts(g: GlobalT) -> list[GlobalT]:
    h = unfold(g)
    if isinstance(h, GMsg):
        return [h.cont]
    if isinstance(h, GChoice):
        return [b for _, b in h.branches]
    return []


def global_graph(g: GlobalT) -> GlobalGraph:
    ids: dict = {}
    succ: list[list[int]] = []
    nodes: list[GlobalT] = []
    todo: list[tuple[int, GlobalT]] = []

    def nid(u: GlobalT) -> int:
        key = alpha_canon(u)
        n = ids.get(key)
        if n is None:
            n = len(succ)
            ids[key] = n
            succ.append([])
            nodes.append(u)
            todo.append((n, u))
        return n

    init = nid(g)
    while todo:
        n, u = todo.pop()
        succ[n] = [nid(c) for c in head_conts(u)]
    return GlobalGraph(init, succ, nodes)


def _has_cycle(nodes: set[int], succ) -> bool:
    """Cycle detection restricted to `nodes` (iterative colouring DFS)."""
    colour = {n: 0 for n in nodes}  # 0 white, 1 on stack, 2 done
    for start in nodes:
        if colour[start] != 0:
            continue
        stack = [(start, iter([m for m in succ[start] if m in nodes]))]
        colour[start] = 1
        while stack:
            n, it = stack[-1]
            advanced = False
            for m in it:
                if colour[m] == 1:
                    return True
                if colour[m] == 0:
                    colour[m] = 1
                    stack.append((m, iter([k for k in succ[m] if k in nodes])))
                    advanced = True
                    break
            if not advanced:
                colour[n] = 2
                stack.pop()
    return False


def is_balanced(g: GlobalT) -> bool:
    """Balanced check: G is unbalanced iff for some participant p there is a
    cycle of nodes not involving p from which a p-involving node is still
    reachable.  Per-participant backward reachability plus cycle detection,
    O(|G|^2) overall."""
    gg = global_graph(g)
    n = gg.node_count()
    preds: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for v in gg.succ[u]:
            preds[v].append(u)
    for p in sorted(participants(g)):
        involving = [u for u in range(n) if involves(gg.nodes[u], p)]
        # nodes from which p is reachable
        reach_p = set(involving)
        stack = list(involving)
        while stack:
            u = stack.pop()
            for w in preds[u]:
                if w not in reach_p:
                    reach_p.add(w)
                    stack.append(w)
        candidates = {u for u in reach_p if not involves(gg.nodes[u], p)}
        if _has_cycle(candidates, gg.succ):
            return False
    return True


# ---------------------------------------------------------------------------
# DOT export


def dot_type_graph(g: TypeGraph, title: str = "typegraph") -> str:
    lines = [f'digraph "{title}" {{', "  rankdir=LR;"]
    for n in range(len(g.edges)):
        shape = "doublecircle" if n == g.skip else "box"
        style = ' style=bold' if n == g.init else ""
        lines.append(f'  n{n} [shape={shape}{style} label="{_esc(g.label(n))}"];')
    for n, out in enumerate(g.edges):
        for a, m in out:
            lines.append(f'  n{n} -> n{m} [label="{_esc(str(a))}"];')
    lines.append("}")
    return "\n".join(lines)


def dot_global_graph(gg: GlobalGraph, title: str = "globalgraph") -> str:
    lines = [f'digraph "{title}" {{', "  rankdir=LR;"]
    for n, node in enumerate(gg.nodes):
        style = ' style=bold' if n == gg.init else ""
        lines.append(f'  n{n} [shape=box{style} label="{_esc(show_global(node))}"];')
    for n, targets in enumerate(gg.succ):
        for m in targets:
            lines.append(f"  n{n} -> n{m};")
    lines.append("}")
    return "\n".join(lines)


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')
