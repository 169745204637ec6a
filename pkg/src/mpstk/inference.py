"""Minimum type inference for processes.

Pipeline: derive subtype/sort constraints from the process, eliminate the
variable-to-variable constraints (tr), build the minimum type graph over
sets of type variables, solve the accumulated sort equalities with a
union-find, and read the minimum type off the graph.

The graph rules capture the variance of choices: a node stands for a type
that must be a supertype of every dependency, so selections take the union
of the dependency labels while branchings take the intersection.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

from .ast import (
    BOOL, INT, NAT,
    EAdd, EInt, ENat, ENeg, ENonDet, ENot, EOr, ETrue, EFalse, EVar,
    LocalT, PBra, PCond, PInact, PRec, PRecv, PSel, PSend, PVar, Proc,
    SessionTypeError, Sort, SortVar,
)
from .typegraph import Action, END_ACT, IN, OUT, SEL, BRA, TypeGraph, graph_to_type


class Untypable(SessionTypeError):
    def __init__(self, reason, node=None):
        suffix = f" at node {{{', '.join(sorted(node))}}}" if node else ""
        super().__init__(f"untypable: {reason}{suffix}")
        self.reason = reason
        self.node = node


# ---------------------------------------------------------------------------
# Constraints (exactly the shapes the inference rules can produce)


@dataclass(frozen=True)
class CEnd:
    rhs: str  # end <= rhs


@dataclass(frozen=True)
class CVarLe:
    lhs: str
    rhs: str  # lhs <= rhs, both type variables


@dataclass(frozen=True)
class CIn:
    peer: str
    payload: SortVar
    cont: str
    rhs: str  # peer?(payload); cont <= rhs


@dataclass(frozen=True)
class COut:
    peer: str
    payload: SortVar
    cont: str
    rhs: str


@dataclass(frozen=True)
class CSel:
    peer: str
    branches: tuple[tuple[str, str], ...]  # label -> type variable
    rhs: str


@dataclass(frozen=True)
class CBra:
    peer: str
    branches: tuple[tuple[str, str], ...]
    rhs: str


@dataclass(frozen=True)
class CSortEq:
    a: object  # Sort | SortVar
    b: object


Constraint = object


def show_constraint(c) -> str:
    if isinstance(c, CEnd):
        return f"end <= {c.rhs}"
    if isinstance(c, CVarLe):
        return f"{c.lhs} <= {c.rhs}"
    if isinstance(c, CIn):
        return f"{c.peer}?({c.payload}); {c.cont} <= {c.rhs}"
    if isinstance(c, COut):
        return f"{c.peer}!({c.payload}); {c.cont} <= {c.rhs}"
    if isinstance(c, (CSel, CBra)):
        op = "+" if isinstance(c, CSel) else "&"
        inner = ", ".join(f"{l}: {v}" for l, v in c.branches)
        return f"{c.peer}{op}{{{inner}}} <= {c.rhs}"
    return f"{c.a} = {c.b}"


# ---------------------------------------------------------------------------
# Constraint derivation


class _Fresh:
    def __init__(self):
        self.t = 0
        self.s = 0

    def tvar(self) -> str:
        self.t += 1
        return f"x{self.t}"

    def svar(self) -> SortVar:
        self.s += 1
        return SortVar(f"s{self.s}")


@dataclass
class Derivation:
    root: str
    constraints: list
    judgements: int


def derive_constraints(p: Proc) -> Derivation:
    """Run the constraint inference rules on a closed process.  Fresh
    variables are numbered deterministically; the judgement count is the
    number of rule applications (bounded by |P|)."""
    fresh = _Fresh()
    out: list = []
    seen: set = set()
    count = [0]

    def emit(c):
        # constraint sets are sets: C-True and C-Cond may both contribute
        # the same sort equation
        if c not in seen:
            seen.add(c)
            out.append(c)

    def expr(e, env) -> SortVar:
        count[0] += 1
        if isinstance(e, EVar):
            try:
                return env[e.name]
            except KeyError:
                raise Untypable(f"free value variable {e.name}") from None
        if isinstance(e, (ETrue, EFalse)):
            a = fresh.svar()
            emit(CSortEq(a, BOOL))
            return a
        if isinstance(e, ENat):
            a = fresh.svar()
            emit(CSortEq(a, NAT))
            return a
        if isinstance(e, EInt):
            a = fresh.svar()
            emit(CSortEq(a, INT))
            return a
        if isinstance(e, ENot):
            a = expr(e.arg, env)
            emit(CSortEq(a, BOOL))
            return a
        if isinstance(e, ENeg):
            a = expr(e.arg, env)
            emit(CSortEq(a, INT))
            return a
        if isinstance(e, (EOr, EAdd, ENonDet)):
            a1 = expr(e.lhs, env)
            a2 = expr(e.rhs, env)
            b = fresh.svar()
            if isinstance(e, EOr):
                for c in (CSortEq(a1, BOOL), CSortEq(a2, BOOL), CSortEq(b, BOOL)):
                    emit(c)
            elif isinstance(e, EAdd):
                for c in (CSortEq(a1, b), CSortEq(a2, b), CSortEq(b, INT)):
                    emit(c)
            else:
                for c in (CSortEq(a1, b), CSortEq(a2, b)):
                    emit(c)
            return b
        raise TypeError(f"expr constraints: {e!r}")

    def proc(p, env, forced: str | None = None) -> str:
        count[0] += 1
        if isinstance(p, PRec):
            xi = forced if forced is not None else fresh.tvar()
            proc(p.body, {**env, p.var: xi}, forced=xi)
            return xi
        xi = forced if forced is not None else fresh.tvar()
        if isinstance(p, PInact):
            emit(CEnd(xi))
            return xi
        if isinstance(p, PVar):
            try:
                psi = env[p.var]
            except KeyError:
                raise Untypable(f"free process variable {p.var}") from None
            emit(CVarLe(psi, xi))
            return xi
        if isinstance(p, PRecv):
            a = fresh.svar()
            psi = proc(p.cont, {**env, p.var: a})
            emit(CIn(p.peer, a, psi, xi))
            return xi
        if isinstance(p, PSend):
            psi = proc(p.cont, env)
            a = expr(p.expr, env)
            emit(COut(p.peer, a, psi, xi))
            return xi
        if isinstance(p, PSel):
            psi = proc(p.cont, env)
            emit(CSel(p.peer, ((p.label, psi),), xi))
            return xi
        if isinstance(p, PBra):
            vs = tuple((l, proc(b, env)) for l, b in p.branches)
            emit(CBra(p.peer, vs, xi))
            return xi
        if isinstance(p, PCond):
            psi1 = proc(p.then, env)
            psi2 = proc(p.orelse, env)
            a = expr(p.cond, env)
            for c in (CSortEq(a, BOOL), CVarLe(psi1, xi), CVarLe(psi2, xi)):
                emit(c)
            return xi
        raise TypeError(f"proc constraints: {p!r}")

    root = proc(p, {})
    return Derivation(root, out, count[0])


# ---------------------------------------------------------------------------
# tr(C): eliminate variable-to-variable constraints


def _subst_var(c, old: str, new: str):
    r = new if c.rhs == old else c.rhs
    if isinstance(c, CEnd):
        return CEnd(r)
    if isinstance(c, CVarLe):
        return CVarLe(new if c.lhs == old else c.lhs, r)
    if isinstance(c, CIn):
        return CIn(c.peer, c.payload, new if c.cont == old else c.cont, r)
    if isinstance(c, COut):
        return COut(c.peer, c.payload, new if c.cont == old else c.cont, r)
    if isinstance(c, (CSel, CBra)):
        bs = tuple((l, new if v == old else v) for l, v in c.branches)
        return type(c)(c.peer, bs, r)
    return c


def _retarget(c, rhs: str):
    if isinstance(c, CEnd):
        return CEnd(rhs)
    if isinstance(c, (CIn, COut)):
        return type(c)(c.peer, c.payload, c.cont, rhs)
    return type(c)(c.peer, c.branches, rhs)


def eliminate_transitive(constraints: list, root: str) -> tuple[list, str]:
    """Remove every variable-to-variable constraint xi <= psi.

    When the link is the only constraint defining psi, psi is renamed to xi
    (the paper's substitution).  A variable with several incoming links (a
    conditional joining two behaviours) must keep the link sources apart:
    renaming would merge two independently defined variables and lose the
    relative phase of their recursions, so such links are resolved by
    transitivity instead, copying the sources' structural definitions onto
    the target.
    """
    work = list(constraints)
    while True:
        work = [c for c in work if not (isinstance(c, CVarLe) and c.lhs == c.rhs)]
        links = [c for c in work if isinstance(c, CVarLe)]
        if not links:
            return work, root
        incoming: dict[str, int] = {}
        for c in work:
            if not isinstance(c, CSortEq):
                incoming[c.rhs] = incoming.get(c.rhs, 0) + 1
        single = next((c for c in links if incoming[c.rhs] == 1), None)
        if single is not None:
            old, new = single.rhs, single.lhs
            work = [
                _subst_var(k, old, new)
                for k in work
                if k is not single and not isinstance(k, CSortEq)
            ] + [k for k in work if isinstance(k, CSortEq)]
            if root == old:
                root = new
            continue
        # only multi-in links remain: copy transitive structural definitions
        preds: dict[str, set[str]] = {}
        for c in links:
            preds.setdefault(c.rhs, set()).add(c.lhs)
        structural: dict[str, list] = {}
        for c in work:
            if not isinstance(c, (CVarLe, CSortEq)):
                structural.setdefault(c.rhs, []).append(c)

        copies = []
        for tgt, direct in preds.items():
            stack = sorted(direct)
            seen = set(stack) | {tgt}
            while stack:
                u = stack.pop()
                copies.extend(_retarget(c, tgt) for c in structural.get(u, ()))
                for w in preds.get(u, ()):  # links form a DAG by freshness
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
        work = [c for c in work if not isinstance(c, CVarLe)] + copies


# ---------------------------------------------------------------------------
# Minimum type graph


@dataclass
class MinGraph:
    graph: TypeGraph
    node_sets: list[frozenset[str]]  # per node id; Skip gets frozenset()
    sort_eqs: list[CSortEq]


class MinGraphBuilder:
    """Builds the reachable part of the minimum type graph from a set of
    type variables, generating fresh payload sort variables per M-IO edge
    and accumulating their equalities."""

    def __init__(self, tr_constraints: list):
        self.by_rhs: dict[str, list] = {}
        self.base_eqs = [c for c in tr_constraints if isinstance(c, CSortEq)]
        for c in tr_constraints:
            if not isinstance(c, CSortEq):
                self.by_rhs.setdefault(c.rhs, []).append(c)
        self._alpha = 0

    def _fresh_alpha(self) -> SortVar:
        self._alpha += 1
        return SortVar(f"a{self._alpha}")

    def build(self, start: frozenset[str]) -> MinGraph:
        ids: dict[frozenset[str], int] = {}
        edges: list[list[tuple[Action, int]]] = []
        sets: list[frozenset[str]] = []
        desc: list = []
        todo: list[tuple[int, frozenset[str]]] = []
        eqs = list(self.base_eqs)
        skip = [None]

        def intern(s: frozenset[str]) -> int:
            n = ids.get(s)
            if n is None:
                n = len(edges)
                ids[s] = n
                edges.append([])
                sets.append(s)
                desc.append("{" + ", ".join(sorted(s)) + "}")
                todo.append((n, s))
            return n

        init = intern(start)
        while todo:
            n, s = todo.pop()
            deps = []
            for v in sorted(s):
                cs = self.by_rhs.get(v)
                if not cs:
                    raise Untypable(f"variable {v} has no defining constraint", s)
                deps.extend(cs)
            kinds = {type(c) for c in deps}
            if kinds == {CEnd}:
                if skip[0] is None:
                    skip[0] = len(edges)
                    edges.append([])
                    sets.append(frozenset())
                    desc.append("Skip")
                edges[n].append((END_ACT, skip[0]))
                continue
            if len(kinds) != 1:
                raise Untypable("mixed dependency heads", s)
            peers = {c.peer for c in deps}
            if len(peers) != 1:
                raise Untypable("mixed peers in dependencies", s)
            peer = peers.pop()
            k = kinds.pop()
            if k in (CIn, COut):
                alpha = self._fresh_alpha()
                for c in deps:
                    eqs.append(CSortEq(alpha, c.payload))
                succ = frozenset(c.cont for c in deps)
                act = Action(IN if k is CIn else OUT, peer, alpha)
                edges[n].append((act, intern(succ)))
                continue
            # selections union their labels, branchings intersect them
            label_sets = [set(l for l, _ in c.branches) for c in deps]
            if k is CSel:
                labels_here = sorted(set().union(*label_sets))
            else:
                inter = set.intersection(*label_sets)
                if not inter:
                    raise Untypable("branching dependencies share no label", s)
                labels_here = sorted(inter)
            act_kind = SEL if k is CSel else BRA
            for l in labels_here:
                succ = frozenset(
                    v for c in deps for lab, v in c.branches if lab == l
                )
                edges[n].append((Action(act_kind, peer, l), intern(succ)))
        return MinGraph(TypeGraph(init, edges, skip[0], desc), sets, eqs)


def build_min_graph(tr_constraints: list, root: str) -> MinGraph:
    return MinGraphBuilder(tr_constraints).build(frozenset([root]))


# ---------------------------------------------------------------------------
# Sort constraint solving (union-find)


class SortUnsat(Untypable):
    pass


def solve_sorts(eqs: list[CSortEq]) -> dict[SortVar, object]:
    """Most general solution of the sort equalities: each class maps to its
    concrete sort if it has one (two distinct concrete sorts are
    unsatisfiable), else to a canonical representative variable."""
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for eq in eqs:
        union(eq.a, eq.b)
    concrete: dict = {}
    for x in list(parent):
        if isinstance(x, Sort):
            r = find(x)
            if r in concrete and concrete[r] != x:
                raise SortUnsat(f"sorts {concrete[r]} and {x} forced equal")
            concrete.setdefault(r, x)
    members: dict = {}
    for x in list(parent):
        if isinstance(x, SortVar):
            members.setdefault(find(x), []).append(x)
    subst: dict[SortVar, object] = {}
    for r, vs in members.items():
        rep = concrete.get(r) or min(vs, key=lambda v: v.name)
        for v in vs:
            subst[v] = rep
    return subst


def apply_sort_subst(graph: TypeGraph, subst: dict) -> TypeGraph:
    """Rewrite edge payloads through the sort substitution and rename the
    surviving sort variables canonically (a, b, ...) in edge order."""
    canon: dict[SortVar, SortVar] = {}
    names = list(string.ascii_lowercase) + [f"a{i}" for i in range(100)]

    def conv(payload):
        if isinstance(payload, SortVar):
            payload = subst.get(payload, payload)
        if isinstance(payload, SortVar):
            if payload not in canon:
                canon[payload] = SortVar(names[len(canon)])
            return canon[payload]
        return payload

    edges = [
        [
            (Action(a.kind, a.peer, conv(a.arg)) if a.kind in (IN, OUT) else a, m)
            for a, m in out
        ]
        for out in graph.edges
    ]
    return TypeGraph(graph.init, edges, graph.skip, list(graph.desc))


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass
class InferResult:
    typable: bool
    min_type: LocalT | None = None
    graph: TypeGraph | None = None
    min_graph: MinGraph | None = None
    derivation: Derivation | None = None
    tr_constraints: list = field(default_factory=list)
    failure: str | None = None
    failure_node: frozenset | None = None


def infer(p: Proc) -> InferResult:
    d = derive_constraints(p)
    tr, root = eliminate_transitive(d.constraints, d.root)
    try:
        mg = build_min_graph(tr, root)
        subst = solve_sorts(mg.sort_eqs)
    except Untypable as e:
        return InferResult(
            False, derivation=d, tr_constraints=tr,
            failure=str(e), failure_node=getattr(e, "node", None),
        )
    graph = apply_sort_subst(mg.graph, subst)
    return InferResult(
        True, min_type=graph_to_type(graph), graph=graph, min_graph=mg,
        derivation=d, tr_constraints=tr,
    )


def infer_min_type(p: Proc) -> LocalT:
    r = infer(p)
    if not r.typable:
        raise Untypable(r.failure or "no minimum type")
    return r.min_type


# ---------------------------------------------------------------------------
# Worst-case family: lcm of branch cycles


def branch_cycle_process(d: int) -> Proc:
    """mu X. &p{l1: ... &p{l1: X, l2: X} ...} with d branch constructs in
    total, whose minimum type graph is a branch cycle of length exactly d."""
    if d < 1:
        raise ValueError("cycle length must be >= 1")
    inner: Proc = PBra("p", (("l1", PVar("X")), ("l2", PVar("X"))))
    for _ in range(d - 1):
        inner = PBra("p", (("l1", inner),))
    return PRec("X", inner)


def gen_lcm_process(divisors: list[int]) -> Proc:
    """Nested conditionals over branch cycles; the inferred minimum type
    graph has a branch cycle of length lcm(divisors)."""
    from .ast import ETrue, EFalse, ENonDet, uniquify_binders

    if not divisors:
        raise ValueError("need at least one divisor")
    p: Proc = branch_cycle_process(divisors[0])
    for d in divisors[1:]:
        p = PCond(ENonDet(ETrue(), EFalse()), branch_cycle_process(d), p)
    return uniquify_binders(p)


def branch_cycle_length(graph: TypeGraph, label: str = "l1", peer: str = "p") -> int:
    """Length of the cycle reached by following &peer label edges from the
    initial node."""
    seen: dict[int, int] = {}
    n, i = graph.init, 0
    while n not in seen:
        seen[n] = i
        step = graph.step(n, Action(BRA, peer, label))
        if step is None:
            return 0
        n, i = step, i + 1
    return i - seen[n]
