"""Typing-context transition system and the safety, deadlock-freedom and
liveness checkers.

States are tuples of type-graph node ids, one per participant (every type
reachable from T lives in the graph of T, so this interning is exact).
Reductions are the synchronised communications: a value exchange needs an
output and a matching input with the same payload sort, a label exchange
needs a selection whose label the branching side offers.

Liveness follows the counterwitness characterisation: a context is not
live iff some reachable state is stuck while not all-end (the finite
witness, which also refutes deadlock-freedom) or some barb can be starved
along a fair lasso.  A lasso is fair here in the strong, per-label sense
of the counterwitness definition: the set of labels it keeps taking must
equal the set of labels enabled anywhere along it, choice labels being
distinguished by their label.  The search prunes, per barb, to states none
of whose enabled reductions would discharge the barb, then keeps only
strongly-connected regions that can cover all labels enabled inside them.
A brute-force enumerator of bounded paths and lassos checks the same two
counterwitness conditions literally and serves as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import TypingContext, typing_context
from .typegraph import Action, BRA, ENDK, IN, OUT, SEL, graph_to_type, local_graph


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class Label:
    """Context LTS label.  kinds: out/in/sel/bra are single-participant
    moves (p acting toward q), comm/choice are the synchronised reductions
    (p sending to / selecting at q)."""

    kind: str
    p: str
    q: str
    arg: object = None

    def __str__(self):
        if self.kind == "comm":
            return f"{self.p}{self.q}"
        if self.kind == "choice":
            return f"{self.p}{self.q}:{self.arg}"
        if self.kind == "out":
            return f"!{self.p}{self.q}({self.arg})"
        if self.kind == "in":
            return f"?{self.p}{self.q}({self.arg})"
        op = "(+)" if self.kind == "sel" else "&"
        return f"{op}{self.p}{self.q} {self.arg}"


@dataclass(frozen=True)
class Barb:
    kind: str  # "out" | "in" | "sel" | "bra"
    p: str
    q: str

    def __str__(self):
        sym = {"out": "!", "in": "?", "sel": "(+)", "bra": "&"}[self.kind]
        return f"{sym}{self.p}{self.q}"


def observations(label: Label) -> frozenset[Barb]:
    """Barbs discharged by one synchronised reduction."""
    if label.kind == "comm":
        return frozenset([Barb("out", label.p, label.q), Barb("in", label.q, label.p)])
    if label.kind == "choice":
        return frozenset([Barb("sel", label.p, label.q), Barb("bra", label.q, label.p)])
    return frozenset()


State = tuple  # tuple of node ids, aligned with ContextLTS.participants


class ContextLTS:
    def __init__(self, ctx: TypingContext):
        self.ctx = ctx
        self.participants = [n for n, _ in ctx.entries]
        self.graphs = [local_graph(t) for _, t in ctx.entries]
        self.init: State = tuple(g.init for g in self.graphs)
        self._sync_cache: dict[State, list] = {}

    def context_of(self, state: State) -> TypingContext:
        return typing_context(
            (p, graph_to_type(g, n))
            for p, g, n in zip(self.participants, self.graphs, state)
        )

    def single_moves(self, state: State):
        """All E-IO / E-BS moves: (Label, successor state)."""
        out = []
        for i, (p, g) in enumerate(zip(self.participants, self.graphs)):
            for a, m in g.out(state[i]):
                succ = state[:i] + (m,) + state[i + 1:]
                if a.kind == OUT:
                    out.append((Label("out", p, a.peer, a.arg), succ))
                elif a.kind == IN:
                    out.append((Label("in", p, a.peer, a.arg), succ))
                elif a.kind == SEL:
                    out.append((Label("sel", p, a.peer, a.arg), succ))
                elif a.kind == BRA:
                    out.append((Label("bra", p, a.peer, a.arg), succ))
        return out

    def sync_steps(self, state: State):
        """Synchronised reductions (comm and choice) from a state."""
        cached = self._sync_cache.get(state)
        if cached is not None:
            return cached
        idx = {p: i for i, p in enumerate(self.participants)}
        out = []
        for i, (p, g) in enumerate(zip(self.participants, self.graphs)):
            kind = g.kind(state[i])
            if kind not in (OUT, SEL):
                continue
            for a, m in g.out(state[i]):
                j = idx.get(a.peer)
                if j is None or j == i:
                    continue
                gq = self.graphs[j]
                if kind == OUT:
                    m2 = gq.step(state[j], Action(IN, p, a.arg))
                    if m2 is not None:
                        succ = list(state)
                        succ[i], succ[j] = m, m2
                        out.append((Label("comm", p, a.peer), tuple(succ)))
                else:
                    m2 = gq.step(state[j], Action(BRA, p, a.arg))
                    if m2 is not None:
                        succ = list(state)
                        succ[i], succ[j] = m, m2
                        out.append((Label("choice", p, a.peer, a.arg), tuple(succ)))
        self._sync_cache[state] = out
        return out

    def barbs(self, state: State) -> frozenset[Barb]:
        out = set()
        for i, (p, g) in enumerate(zip(self.participants, self.graphs)):
            kind = g.kind(state[i])
            if kind in (OUT, IN, SEL, BRA):
                peer = g.out(state[i])[0][0].peer
                out.add(Barb({OUT: "out", IN: "in", SEL: "sel", BRA: "bra"}[kind], p, peer))
        return frozenset(out)

    def is_stuck(self, state: State) -> bool:
        return not self.sync_steps(state)

    def all_end(self, state: State) -> bool:
        return all(g.kind(state[i]) == ENDK for i, g in enumerate(self.graphs))

    def is_safe_state(self, state: State) -> bool:
        """Clause 1: an output facing an input must be able to communicate.
        Clause 2: if the branching side offers anything, every label the
        selector may pick must be accepted (selection side is universal,
        branching side existential)."""
        heads: dict[str, tuple[str, str, list]] = {}
        for i, (p, g) in enumerate(zip(self.participants, self.graphs)):
            kind = g.kind(state[i])
            if kind in (OUT, IN, SEL, BRA):
                edges = g.out(state[i])
                heads[p] = (kind, edges[0][0].peer, [a.arg for a, _ in edges])
        for p, (kind, q, args) in heads.items():
            other = heads.get(q)
            if kind == OUT and other and other[0] == IN and other[1] == p:
                if args[0] != other[2][0]:
                    return False
            if kind == SEL and other and other[0] == BRA and other[1] == p:
                if not set(args) <= set(other[2]):
                    return False
        return True


def ctx_step(ctx: TypingContext):
    """One-step relation on a typing context: single-participant labels
    plus the synchronised reductions, with successor contexts."""
    lts = ContextLTS(ctx)
    out = []
    for lab, succ in lts.single_moves(lts.init) + lts.sync_steps(lts.init):
        out.append((lab, lts.context_of(succ)))
    return out


# ---------------------------------------------------------------------------
# Reachable graph


@dataclass
class ContextGraph:
    lts: ContextLTS
    states: list[State]
    index: dict[State, int]
    edges: list[list[tuple[Label, int]]]  # synchronised successors
    parent: list[tuple[int, Label] | None]

    def edge_count(self) -> int:
        return sum(len(e) for e in self.edges)


def reachable_graph(ctx: TypingContext, budget: int = 1_000_000) -> ContextGraph:
    """Breadth-first closure under the synchronised reductions."""
    lts = ContextLTS(ctx)
    states = [lts.init]
    index = {lts.init: 0}
    edges: list[list[tuple[Label, int]]] = [[]]
    parent: list = [None]
    head = 0
    while head < len(states):
        s = states[head]
        for lab, succ in lts.sync_steps(s):
            j = index.get(succ)
            if j is None:
                if len(states) >= budget:
                    raise BudgetExceeded(f"more than {budget} reachable states")
                j = len(states)
                index[succ] = j
                states.append(succ)
                edges.append([])
                parent.append((head, lab))
            edges[head].append((lab, j))
        head += 1
    return ContextGraph(lts, states, index, edges, parent)


def barbs(ctx: TypingContext) -> frozenset[Barb]:
    lts = ContextLTS(ctx)
    return lts.barbs(lts.init)


def is_safe_state(ctx: TypingContext) -> bool:
    lts = ContextLTS(ctx)
    return lts.is_safe_state(lts.init)


# ---------------------------------------------------------------------------
# Verdicts and traces


@dataclass
class Trace:
    steps: list[tuple[TypingContext, Label]]
    final: TypingContext
    cycle_start: int | None = None  # index into steps where the lasso cycle begins


@dataclass
class Verdict:
    prop: str
    holds: bool
    trace: Trace | None
    states: int
    edges: int

    def __bool__(self):
        return self.holds


def _path_to(rg: ContextGraph, target: int) -> list[tuple[int, Label]]:
    """(state index, outgoing label) pairs along the BFS tree to target."""
    rev = []
    i = target
    while rg.parent[i] is not None:
        j, lab = rg.parent[i]
        rev.append((j, lab))
        i = j
    return list(reversed(rev))


def _make_trace(rg: ContextGraph, steps: list[tuple[int, Label]], final: int,
                cycle_start: int | None = None) -> Trace:
    ctx_steps = [(rg.lts.context_of(rg.states[i]), lab) for i, lab in steps]
    return Trace(ctx_steps, rg.lts.context_of(rg.states[final]), cycle_start)


def check_safety(ctx: TypingContext, budget: int = 1_000_000) -> Verdict:
    rg = reachable_graph(ctx, budget)
    for i, s in enumerate(rg.states):
        if not rg.lts.is_safe_state(s):
            return Verdict("safety", False, _make_trace(rg, _path_to(rg, i), i),
                           len(rg.states), rg.edge_count())
    return Verdict("safety", True, None, len(rg.states), rg.edge_count())


def check_deadlock_freedom(ctx: TypingContext, budget: int = 1_000_000) -> Verdict:
    rg = reachable_graph(ctx, budget)
    for i, s in enumerate(rg.states):
        if rg.lts.is_stuck(s) and not rg.lts.all_end(s):
            return Verdict("df", False, _make_trace(rg, _path_to(rg, i), i),
                           len(rg.states), rg.edge_count())
    return Verdict("df", True, None, len(rg.states), rg.edge_count())


def dot_context_graph(rg: ContextGraph, highlight: set[int] | None = None,
                      title: str = "contexts") -> str:
    """DOT rendering of the reachable context graph; unsafe and stuck
    states are coloured, `highlight` marks counterexample states."""
    from .printer import show_context

    highlight = highlight or set()
    lines = [f'digraph "{title}" {{', "  rankdir=LR;"]
    for i, s in enumerate(rg.states):
        attrs = []
        if not rg.lts.is_safe_state(s):
            attrs.append("color=red")
        if rg.lts.is_stuck(s) and not rg.lts.all_end(s):
            attrs.append("style=filled fillcolor=orange")
        elif i in highlight:
            attrs.append("style=filled fillcolor=lightblue")
        label = show_context(rg.lts.context_of(s)).replace('"', "'")
        lines.append(f'  n{i} [shape=box {" ".join(attrs)} label="{label}"];')
    for i, out in enumerate(rg.edges):
        for lab, j in out:
            lines.append(f'  n{i} -> n{j} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Liveness


def _sccs(nodes: list[int], succ: dict[int, list[int]]) -> list[list[int]]:
    """Tarjan, iterative."""
    indexof: dict[int, int] = {}
    low: dict[int, int] = {}
    onstack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = [0]
    for root in nodes:
        if root in indexof:
            continue
        work = [(root, iter(succ.get(root, [])))]
        indexof[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        onstack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in indexof:
                    indexof[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, iter(succ.get(w, []))))
                    advanced = True
                    break
                if w in onstack:
                    low[v] = min(low[v], indexof[w])
            if not advanced:
                work.pop()
                if work:
                    pv = work[-1][0]
                    low[pv] = min(low[pv], low[v])
                if low[v] == indexof[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        onstack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


def _starving_component(rg: ContextGraph, barb: Barb):
    """States that can sustain a fair cycle never observing `barb`.

    Restrict to states with no enabled reduction observing the barb (a fair
    path through such a state would have to take that reduction), then
    iteratively drop states whose enabled labels cannot all be covered
    inside their strongly-connected component.  Returns (component, member
    with the barb) or None.
    """
    enabled: dict[int, set[Label]] = {}
    alive = set()
    for i in range(len(rg.states)):
        labs = {lab for lab, _ in rg.edges[i]}
        enabled[i] = labs
        if not any(barb in observations(lab) for lab in labs):
            alive.add(i)
    while True:
        succ = {
            i: [j for lab, j in rg.edges[i] if j in alive] for i in alive
        }
        comps = _sccs(sorted(alive), succ)
        removed = False
        for comp in comps:
            compset = set(comp)
            internal = {
                lab
                for i in comp
                for lab, j in rg.edges[i]
                if j in compset
            }
            trivial = len(comp) == 1 and not any(
                j == comp[0] for lab, j in rg.edges[comp[0]]
            )
            for i in comp:
                if trivial or not enabled[i] <= internal:
                    alive.discard(i)
                    removed = True
        if not removed:
            break
    for comp in _sccs(sorted(alive), {i: [j for lab, j in rg.edges[i] if j in alive] for i in alive}):
        for i in comp:
            if barb in rg.lts.barbs(rg.states[i]):
                return comp, i
    return None


def _cover_walk(rg: ContextGraph, comp: list[int], start: int) -> list[tuple[int, Label]]:
    """Closed walk from `start` inside `comp` taking every internal edge at
    least once (so its taken-label set covers everything enabled there)."""
    compset = set(comp)
    inner = {i: [(lab, j) for lab, j in rg.edges[i] if j in compset] for i in comp}

    def bfs_path(a, b):
        if a == b:
            return []
        prev = {a: None}
        queue = [a]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for lab, v in inner[u]:
                if v not in prev:
                    prev[v] = (u, lab)
                    if v == b:
                        rev = []
                        w = b
                        while prev[w] is not None:
                            u2, lab2 = prev[w]
                            rev.append((u2, lab2))
                            w = u2
                        return list(reversed(rev))
                    queue.append(v)
        raise AssertionError("component not strongly connected")

    walk: list[tuple[int, Label]] = []
    here = start
    for i in comp:
        for lab, j in inner[i]:
            walk.extend(bfs_path(here, i))
            walk.append((i, lab))
            here = j
    walk.extend(bfs_path(here, start))
    return walk


def check_liveness(ctx: TypingContext, budget: int = 1_000_000) -> Verdict:
    """Not live iff a reachable stuck non-end state exists (finite
    counterwitness) or some barb admits a starving fair lasso."""
    rg = reachable_graph(ctx, budget)
    n_states, n_edges = len(rg.states), rg.edge_count()
    for i, s in enumerate(rg.states):
        if rg.lts.is_stuck(s) and not rg.lts.all_end(s):
            return Verdict("live", False, _make_trace(rg, _path_to(rg, i), i),
                           n_states, n_edges)
    all_barbs = set()
    for s in rg.states:
        all_barbs |= rg.lts.barbs(s)
    for barb in sorted(all_barbs, key=str):
        found = _starving_component(rg, barb)
        if found is None:
            continue
        comp, member = found
        stem = _path_to(rg, member)
        cycle = _cover_walk(rg, comp, member)
        trace = _make_trace(rg, stem + cycle, member, cycle_start=len(stem))
        return Verdict("live", False, trace, n_states, n_edges)
    return Verdict("live", True, None, n_states, n_edges)


# ---------------------------------------------------------------------------
# Brute-force liveness oracle


def _finite_witness(labels, states_seq, enabled_seq, barbs_seq) -> bool:
    """Literal check of both counterwitness bullets on a finite maximal
    path (s_0 -l_0-> ... -> s_f)."""
    f = len(labels)
    for k in range(f + 1):
        taken = set(labels[k:])
        enab = set().union(*enabled_seq[k:]) if enabled_seq[k:] else set()
        if taken != enab:
            return False
    for k in range(f + 1):
        obs = set()
        for lab in labels[k:]:
            obs |= observations(lab)
        if barbs_seq[k] - obs:
            return True
    return False


def _lasso_witness(labels, states_seq, enabled_seq, barbs_seq, j) -> bool:
    """Counterwitness check for stem s_0..s_j plus cycle s_j..s_m=s_j."""
    m = len(labels)
    cycle_labels = set(labels[j:])
    cycle_obs = set()
    for lab in labels[j:]:
        cycle_obs |= observations(lab)
    cycle_enabled = set().union(*enabled_seq[j:m]) if enabled_seq[j:m] else set()
    for k in range(m + 1):
        taken = set(labels[k:]) | cycle_labels
        enab = set().union(*enabled_seq[k:]) | cycle_enabled
        if taken != enab:
            return False
    for k in range(m + 1):
        obs = cycle_obs.copy()
        for lab in labels[k:]:
            obs |= observations(lab)
        if barbs_seq[k] - obs:
            return True
    return False


def brute_force_liveness(ctx: TypingContext, bound: int = 8,
                         budget: int = 2_000_000) -> bool:
    """Exhaustively enumerate paths of length <= bound from every reachable
    state, testing the two counterwitness conditions literally on finite
    maximal paths and on every lasso formed by a revisited state.  Returns
    True (live) iff no counterwitness is found."""
    rg = reachable_graph(ctx, min(budget, 100_000))
    enabled = [
        [lab for lab, _ in rg.edges[i]] for i in range(len(rg.states))
    ]
    barbs_of = [rg.lts.barbs(s) for s in rg.states]
    steps = [0]

    def dfs(path_states, path_labels) -> bool:
        """True if a counterwitness extends the current path."""
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetExceeded("brute-force liveness budget exceeded")
        cur = path_states[-1]
        enab = [enabled[i] for i in path_states]
        brb = [barbs_of[i] for i in path_states]
        if not rg.edges[cur]:
            if _finite_witness(path_labels, path_states, enab, brb):
                return True
        for j in range(len(path_states) - 1):
            if path_states[j] == cur:
                if _lasso_witness(path_labels, path_states, enab, brb, j):
                    return True
        if len(path_labels) >= bound:
            return False
        for lab, nxt in rg.edges[cur]:
            if dfs(path_states + [nxt], path_labels + [lab]):
                return True
        return False

    for start in range(len(rg.states)):
        if dfs([start], []):
            return False
    return True
