"""Session reduction semantics and the end-to-end typed-safety oracle."""

import random

import pytest

from conftest import balanced_globals

from mpstk.ast import (
    ENat, PInact, participants, session,
)
from mpstk.parse import parse
from mpstk.printer import show
from mpstk.semantics import (
    EvalStuck, SessionState, eval_all, eval_expr, explore_session,
    proc_head, session_step, subst_value,
)


def test_eval_table_fixtures():
    assert show(eval_expr(parse("expr", "!true"))) == "false"
    assert sorted(show(v) for v in eval_all(parse("expr", "1 (+) 2"))) == ["1", "2"]
    assert show(eval_expr(parse("expr", "neg 5"))) == "-5"
    assert show(eval_expr(parse("expr", "false \\/ true"))) == "true"
    assert show(eval_expr(parse("expr", "neg -3"))) == "3"


def test_eval_stuck():
    with pytest.raises(EvalStuck):
        eval_expr(parse("expr", "true + 1"))
    with pytest.raises(EvalStuck):
        eval_expr(parse("expr", "!5"))
    with pytest.raises(EvalStuck):
        eval_expr(parse("expr", "x"))


def test_eval_seeded_nondet():
    e = parse("expr", "1 (+) 2")
    vals = {show(eval_expr(e, rng=random.Random(s))) for s in range(30)}
    assert vals == {"1", "2"}


def test_rcomm_with_substitution():
    s = parse("session", "p::q!<1>; 0 | q::p?(x); p!<x + x>; 0")
    # value passing is untyped at runtime; x is replaced by 1
    (st,) = session_step(SessionState(s))
    assert not st.error
    q = dict(st.sess.roles)["q"]
    assert show(q).startswith("p!<1 + 1>")


def test_rbra_and_cerr():
    ok = parse("session", "p::q(+)l; 0 | q::p&{l: 0, m: 0}")
    (st,) = session_step(SessionState(ok))
    assert not st.error and all(isinstance(x, PInact) for _, x in st.sess.roles)
    bad = parse("session", "p::q(+)l; 0 | q::p&{m: 0}")
    (st,) = session_step(SessionState(bad))
    assert st.error


def test_verr_on_nonboolean_condition():
    s = parse("session", "p::if 1 then 0 else 0")
    (st,) = session_step(SessionState(s))
    assert st.error


def test_cond_nondet_expands():
    s = parse("session", "p::if true (+) false then q!<1>; 0 else q!<2>; 0 | q::p?(x); 0")
    succs = session_step(SessionState(s))
    assert len(succs) == 2


def test_recursion_unfolds_in_redex_search():
    s = parse("session", "p::rec X. q!<1>; X | q::rec Y. p?(x); Y")
    (st,) = session_step(SessionState(s))
    assert not st.error
    r = explore_session(s, depth=6)
    assert not r.error_reached and not r.stuck_nonterminal


def test_explore_reports_error_depth_one():
    s = parse("session", "p::q(+)l; 0 | q::p&{m: 0}")
    r = explore_session(s, depth=3)
    assert r.error_reached


def test_explore_reports_stuck():
    s = parse("session", "p::q?(x); 0 | q::p?(x); 0")
    r = explore_session(s, depth=3)
    assert r.stuck_nonterminal and not r.error_reached


def test_subst_value_shadowing():
    p = parse("process", "q?(x); q!<x>; 0")
    q = subst_value(p, "x", ENat(9))
    # the inner x is rebound by the input, so nothing changes
    assert q == p


def test_random_walks_seeded():
    s = parse("session",
              "p::rec X. if true (+) false then q(+)stop; 0 else q(+)go; X"
              " | q::rec Y. p&{go: Y, stop: 0}")
    r = explore_session(s, depth=30, runs=20, seed=3)
    assert not r.error_reached


# ---------------------------------------------------------------------------
# End-to-end: typed sessions stay safe


def test_typed_sessions_never_error(rng):
    from mpstk.inference import infer
    from mpstk.context import check_deadlock_freedom, check_safety
    from mpstk.pipeline import synth_process
    from mpstk.projection import FULL, ProjUndefined, project_inductive

    safe_checked = df_checked = 0
    for g in balanced_globals(rng, 300, 9):
        pts = sorted(participants(g))
        if not pts:
            continue
        try:
            procs = [(p, synth_process(project_inductive(g, p, FULL))) for p in pts]
        except ProjUndefined:
            continue
        sess = session(procs)
        minima = {}
        ok = True
        for p, q in procs:
            r = infer(q)
            if not r.typable:
                ok = False
                break
            minima[p] = r.min_type
        if not ok:
            continue
        from mpstk.ast import typing_context

        ctx = typing_context(minima.items())
        report = explore_session(sess, depth=10)
        if check_safety(ctx).holds:
            safe_checked += 1
            assert not report.error_reached, show(sess)
        if check_deadlock_freedom(ctx).holds:
            df_checked += 1
            assert not report.stuck_nonterminal, show(sess)
    assert safe_checked >= 30 and df_checked >= 10


def test_exhaustive_bfs_deterministic():
    s = parse("session",
              "p::if true (+) false then q!<1>; 0 else q!<2>; 0 | q::p?(x); 0")
    r1 = explore_session(s, depth=6)
    r2 = explore_session(s, depth=6)
    assert (r1.states, r1.steps, r1.error_reached) == (r2.states, r2.steps, r2.error_reached)
