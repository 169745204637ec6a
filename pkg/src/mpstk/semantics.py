"""Operational semantics of multiparty sessions.

Expression evaluation follows the evaluation table (nondeterministic choice
yields either operand); session reduction implements r-comm, r-bra, the
conditional rules and the two error rules, with recursion unfolded during
redex search.  Exploration treats expression nondeterminism as branching in
exhaustive mode and as a seeded coin in random-walk mode.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ast import (
    EAdd, EInt, ENat, ENeg, ENonDet, ENot, EOr, ETrue, EFalse, EVar, Expr,
    PBra, PCond, PInact, PRec, PRecv, PSel, PSend, PVar, Proc,
    Session, SessionTypeError, session,
)


class EvalStuck(SessionTypeError):
    pass


def _as_bool(v: Expr) -> bool:
    if isinstance(v, ETrue):
        return True
    if isinstance(v, EFalse):
        return False
    raise EvalStuck(f"boolean expected, got {v!r}")


def _as_num(v: Expr) -> tuple[int, bool]:
    """value, is_int"""
    if isinstance(v, ENat):
        return v.value, False
    if isinstance(v, EInt):
        return v.value, True
    raise EvalStuck(f"number expected, got {v!r}")


def eval_all(e: Expr, env: dict[str, Expr] | None = None) -> frozenset[Expr]:
    """All values an expression may evaluate to (nondeterminism expands)."""
    env = env or {}

    def go(e) -> frozenset:
        if isinstance(e, (ETrue, EFalse, ENat, EInt)):
            return frozenset([e])
        if isinstance(e, EVar):
            try:
                return frozenset([env[e.name]])
            except KeyError:
                raise EvalStuck(f"unbound variable {e.name}") from None
        if isinstance(e, ENot):
            return frozenset(ETrue() if not _as_bool(v) else EFalse() for v in go(e.arg))
        if isinstance(e, ENeg):
            return frozenset(EInt(-_as_num(v)[0]) for v in go(e.arg))
        if isinstance(e, EOr):
            out = set()
            for v1 in go(e.lhs):
                for v2 in go(e.rhs):
                    out.add(ETrue() if _as_bool(v1) or _as_bool(v2) else EFalse())
            return frozenset(out)
        if isinstance(e, EAdd):
            out = set()
            for v1 in go(e.lhs):
                for v2 in go(e.rhs):
                    a, i1 = _as_num(v1)
                    b, i2 = _as_num(v2)
                    s = a + b
                    out.add(EInt(s) if i1 or i2 else ENat(s))
            return frozenset(out)
        if isinstance(e, ENonDet):
            return go(e.lhs) | go(e.rhs)
        raise TypeError(f"eval: {e!r}")

    return go(e)


def eval_expr(e: Expr, env: dict[str, Expr] | None = None,
              rng: random.Random | None = None) -> Expr:
    """Single evaluation; nondeterministic choices resolved by `rng` (left
    operand when no generator is supplied)."""
    env = env or {}
    rng_choice = (lambda: rng.random() < 0.5) if rng else (lambda: True)

    def go(e) -> Expr:
        if isinstance(e, (ETrue, EFalse, ENat, EInt)):
            return e
        if isinstance(e, EVar):
            try:
                return env[e.name]
            except KeyError:
                raise EvalStuck(f"unbound variable {e.name}") from None
        if isinstance(e, ENot):
            return EFalse() if _as_bool(go(e.arg)) else ETrue()
        if isinstance(e, ENeg):
            return EInt(-_as_num(go(e.arg))[0])
        if isinstance(e, EOr):
            return ETrue() if _as_bool(go(e.lhs)) or _as_bool(go(e.rhs)) else EFalse()
        if isinstance(e, EAdd):
            a, i1 = _as_num(go(e.lhs))
            b, i2 = _as_num(go(e.rhs))
            return EInt(a + b) if i1 or i2 else ENat(a + b)
        if isinstance(e, ENonDet):
            return go(e.lhs) if rng_choice() else go(e.rhs)
        raise TypeError(f"eval: {e!r}")

    return go(e)


# ---------------------------------------------------------------------------
# Process plumbing


def subst_proc(p: Proc, var: str, repl: Proc) -> Proc:
    if isinstance(p, PVar):
        return repl if p.var == var else p
    if isinstance(p, PRec):
        return p if p.var == var else PRec(p.var, subst_proc(p.body, var, repl))
    if isinstance(p, PSend):
        return PSend(p.peer, p.expr, subst_proc(p.cont, var, repl))
    if isinstance(p, PRecv):
        return PRecv(p.peer, p.var, subst_proc(p.cont, var, repl))
    if isinstance(p, PSel):
        return PSel(p.peer, p.label, subst_proc(p.cont, var, repl))
    if isinstance(p, PBra):
        return PBra(p.peer, tuple((l, subst_proc(b, var, repl)) for l, b in p.branches))
    if isinstance(p, PCond):
        return PCond(p.cond, subst_proc(p.then, var, repl), subst_proc(p.orelse, var, repl))
    return p


def subst_value(p: Proc, var: str, value: Expr) -> Proc:
    """Substitute a value for a free value variable (shadowed by inputs that
    rebind the same name)."""

    def in_expr(e):
        if isinstance(e, EVar):
            return value if e.name == var else e
        if isinstance(e, ENot):
            return ENot(in_expr(e.arg))
        if isinstance(e, ENeg):
            return ENeg(in_expr(e.arg))
        if isinstance(e, (EOr, EAdd, ENonDet)):
            return type(e)(in_expr(e.lhs), in_expr(e.rhs))
        return e

    if isinstance(p, PSend):
        return PSend(p.peer, in_expr(p.expr), subst_value(p.cont, var, value))
    if isinstance(p, PRecv):
        if p.var == var:
            return p
        return PRecv(p.peer, p.var, subst_value(p.cont, var, value))
    if isinstance(p, PSel):
        return PSel(p.peer, p.label, subst_value(p.cont, var, value))
    if isinstance(p, PBra):
        return PBra(p.peer, tuple((l, subst_value(b, var, value)) for l, b in p.branches))
    if isinstance(p, PCond):
        return PCond(in_expr(p.cond), subst_value(p.then, var, value),
                     subst_value(p.orelse, var, value))
    if isinstance(p, PRec):
        return PRec(p.var, subst_value(p.body, var, value))
    return p


def proc_head(p: Proc) -> Proc:
    """Unfold top-level recursions (the structural rule)."""
    steps = 0
    while isinstance(p, PRec):
        p = subst_proc(p.body, p.var, p)
        steps += 1
        if steps > 10_000:
            raise SessionTypeError("unguarded process recursion")
    return p


@dataclass(frozen=True)
class SessionState:
    sess: Session
    error: bool = False


def _with(sess: Session, updates: dict[str, Proc]) -> Session:
    return session(
        (n, updates.get(n, q)) for n, q in sess.roles
    )


def session_step(state: SessionState, rng: random.Random | None = None) -> list[SessionState]:
    """All one-step successors.  Expression nondeterminism expands to every
    value unless an rng is supplied, in which case one value is drawn.
    Label mismatches and non-boolean conditions step to the error state."""
    if state.error:
        return []
    sess = state.sess
    heads = {n: proc_head(q) for n, q in sess.roles}
    out: list[SessionState] = []

    def values(e):
        if rng is not None:
            return [eval_expr(e, rng=rng)]
        return sorted(eval_all(e), key=repr)

    for a, pa in heads.items():
        if isinstance(pa, PCond):
            try:
                for v in values(pa.cond):
                    if isinstance(v, ETrue):
                        out.append(SessionState(_with(sess, {a: pa.then})))
                    elif isinstance(v, EFalse):
                        out.append(SessionState(_with(sess, {a: pa.orelse})))
                    else:
                        out.append(SessionState(sess, error=True))  # v-err
            except EvalStuck:
                out.append(SessionState(sess, error=True))
            continue
        if isinstance(pa, PSend):
            b = pa.peer
            pb = heads.get(b)
            if isinstance(pb, PRecv) and pb.peer == a:
                try:
                    for v in values(pa.expr):
                        out.append(SessionState(_with(sess, {
                            a: pa.cont,
                            b: subst_value(pb.cont, pb.var, v),
                        })))
                except EvalStuck:
                    out.append(SessionState(sess, error=True))
        elif isinstance(pa, PSel):
            b = pa.peer
            pb = heads.get(b)
            if isinstance(pb, PBra) and pb.peer == a:
                bb = dict(pb.branches)
                if pa.label in bb:
                    out.append(SessionState(_with(sess, {a: pa.cont, b: bb[pa.label]})))
                else:
                    out.append(SessionState(sess, error=True))  # c-err
    return out


@dataclass
class ExploreReport:
    error_reached: bool = False
    stuck_nonterminal: bool = False
    states: int = 0
    steps: int = 0
    max_depth: int = 0
    stuck_examples: list = field(default_factory=list)


def _all_inact(sess: Session) -> bool:
    return all(isinstance(proc_head(q), PInact) for _, q in sess.roles)


def explore_session(sess: Session, depth: int = 12, runs: int = 0,
                    seed: int = 0, budget: int = 200_000) -> ExploreReport:
    """Exhaustive BFS to `depth` plus `runs` seeded random walks; reports
    whether an error state or a stuck non-inact state was reached."""
    report = ExploreReport()
    start = SessionState(sess)
    seen = {start}
    frontier = [start]
    d = 0
    while frontier and d < depth:
        nxt = []
        for st in frontier:
            succs = session_step(st)
            report.steps += len(succs)
            if report.steps > budget:
                raise SessionTypeError("exploration budget exceeded")
            if not succs and not st.error and not _all_inact(st.sess):
                report.stuck_nonterminal = True
                if len(report.stuck_examples) < 3:
                    report.stuck_examples.append(st.sess)
            for s2 in succs:
                if s2.error:
                    report.error_reached = True
                if s2 not in seen:
                    seen.add(s2)
                    nxt.append(s2)
        frontier = nxt
        d += 1
        report.max_depth = d
    report.states = len(seen)

    for i in range(runs):
        rng = random.Random(seed + i)
        st = start
        for _ in range(depth):
            succs = session_step(st, rng=rng)
            if not succs:
                if not st.error and not _all_inact(st.sess):
                    report.stuck_nonterminal = True
                break
            st = rng.choice(succs)
            if st.error:
                report.error_reached = True
                break
    return report
