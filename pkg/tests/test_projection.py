"""Projections: the four algorithms, merges, lattice inclusions, families."""

import random

import pytest

from conftest import balanced_globals, mutate_local, rand_global, rand_local

from mpstk.ast import (
    GEnd, GMsg, INT, TBra, TEnd, TSel, TVar, TRec,
    is_closed, participants, size,
)
from mpstk.parse import parse
from mpstk.printer import show
from mpstk.projection import (
    FULL, PLAIN, NotBalanced, ProjUndefined, WorkCounter, check_association,
    gen_lowerbound_family, merge_full_naive, merge_full_optimized,
    project_inductive, project_subset, project_tirore, ptrans,
)
from mpstk.subtyping import graph_equiv, subtype_sim
from mpstk.typegraph import graph_to_type, is_balanced

G_IP = parse("global", "rec t. q->r{l1: r->p{l1: t}, l2: r->p{l1: t}}")
G_IF = parse("global", "rec t. q->r{l1: r->p{l1: t}, l2: r->p{l2: end}}")
G_CP = parse("global", "q->r{l1: rec t. q->p(int); t, l2: rec u. q->p(int); q->p(int); u}")


def test_gip_projects_under_both_merges():
    want = parse("local", "rec t. r&{l1: t}")
    for kind in (PLAIN, FULL):
        assert project_inductive(G_IP, "p", kind) == want


def test_gif_plain_undefined_full_defined():
    with pytest.raises(ProjUndefined):
        project_inductive(G_IF, "p", PLAIN)
    assert project_inductive(G_IF, "p", FULL) == parse(
        "local", "rec t. r&{l1: t, l2: end}")


def test_end_projects_to_end():
    assert project_inductive(GEnd(), "p", PLAIN) == TEnd()
    assert project_inductive(GEnd(), "p", FULL) == TEnd()


def test_msg_projection_sides():
    g = GMsg("p", "q", INT, GEnd())
    assert show(project_inductive(g, "p", FULL)) == "q!(int); end"
    assert show(project_inductive(g, "q", FULL)) == "p?(int); end"
    assert project_inductive(g, "r", FULL) == TEnd()


# ---------------------------------------------------------------------------
# Merging


def test_full_merge_union_fixture():
    a = parse("local", "q&{l1: end, l2: end}")
    b = parse("local", "q&{l3: end}")
    assert show(merge_full_naive(a, b)) == "q&{l1: end, l2: end, l3: end}"
    assert merge_full_optimized(a, b) == merge_full_naive(a, b)


def test_merge_idempotent(rng):
    for _ in range(200):
        t = rand_local(rng, 8)
        assert merge_full_naive(t, t) == t
        assert merge_full_optimized(t, t) == t


def test_merge_rec_congruence():
    a = parse("local", "rec t. q&{l1: t}")
    b = parse("local", "rec u. q&{l2: end, l1: u}")
    m = merge_full_naive(a, b)
    assert graph_equiv(m, parse("local", "rec t. q&{l1: t, l2: end}"))


def test_merge_selection_needs_equal_labels():
    a = parse("local", "q+{l1: end}")
    b = parse("local", "q+{l1: end, l2: end}")
    with pytest.raises(Exception):
        merge_full_naive(a, b)


def _mergeable_pair(rng):
    t = rand_local(rng, 8)
    return t, mutate_local(rng, t)


def test_merge_naive_vs_optimized(rng):
    agree = 0
    for _ in range(1000):
        t1, t2 = _mergeable_pair(rng)
        try:
            naive = merge_full_naive(t1, t2)
        except Exception:
            naive = None
        try:
            opt = merge_full_optimized(t1, t2)
        except Exception:
            opt = None
        assert (naive is None) == (opt is None), (show(t1), show(t2))
        if naive is not None:
            assert naive == opt or (
                is_closed(naive) and is_closed(opt) and graph_equiv(naive, opt)
            )
            agree += 1
            assert size(naive) < size(t1) + size(t2)
    assert agree > 200


def test_projection_not_larger_than_global(rng):
    for g in balanced_globals(rng, 200, 10):
        for p in participants(g):
            for kind in (PLAIN, FULL):
                try:
                    t = project_inductive(g, p, kind)
                except ProjUndefined:
                    continue
                assert size(t) <= size(g)


# ---------------------------------------------------------------------------
# Tirore-style projection


def test_tirore_fixtures():
    assert show(project_tirore(GMsg("p", "q", INT, GEnd()), "p")) == "q!(int); end"
    assert project_tirore(G_CP, "p") is not None
    with pytest.raises(ProjUndefined):
        project_tirore(G_IF, "p")
    assert show(project_tirore(G_IP, "p")) == "rec t. r&{l1: t}"


def test_tirore_rejects_unguarded_candidate():
    g = parse("global", "rec t. q->r{l: t, l2: p->q(int); end}")
    # ptrans keeps the left branch: the candidate collapses to rec t. t
    with pytest.raises(ProjUndefined):
        project_tirore(g, "p")


def test_tirore_vs_inductive_incomparable():
    # G_cp: Tirore succeeds, both inductive merges fail
    assert project_tirore(G_CP, "p")
    for kind in (PLAIN, FULL):
        with pytest.raises(ProjUndefined):
            project_inductive(G_CP, "p", kind)
    # G_if: inductive full succeeds, Tirore fails
    assert project_inductive(G_IF, "p", FULL)
    with pytest.raises(ProjUndefined):
        project_tirore(G_IF, "p")


# ---------------------------------------------------------------------------
# Subset construction


def test_subset_example():
    g = parse(
        "global",
        "p->q{l1: q->r(int); q->r{l3: r->p(int); end},"
        " l2: q->r(int); q->r{l4: r->p(bool); end}}",
    )
    t = graph_to_type(project_subset(g, "r"))
    assert show(t) == "q?(int); q&{l3: p!(int); end, l4: p!(bool); end}"


def test_subset_gif():
    t = graph_to_type(project_subset(G_IF, "p"))
    assert graph_equiv(t, parse("local", "rec t. r&{l1: t, l2: end}"))


def test_subset_not_balanced():
    g = parse("global", "rec t. p->q{l: t, l2: q->r{l3: end}}")
    with pytest.raises(NotBalanced):
        project_subset(g, "r")


def _cf_state_oracle(periods):
    """Independent count of the projection-graph states for the prime-cycle
    family: residue vectors of the a-counter modulo every period, plus the
    initial node and the node after the b-escape."""
    seen = set()
    vec = tuple(0 for _ in periods)
    while vec not in seen:
        seen.add(vec)
        vec = tuple((x + 1) % n for x, n in zip(vec, periods))
    return len(seen) + 2


def test_subset_prime_family_counts():
    for periods, lower in [([2, 3], 6), ([2, 3, 5], 30)]:
        g = gen_lowerbound_family("cf_primes", periods)
        # linear in sum(periods): one binder, one choice, one end per branch
        assert size(g) == 1 + 3 * len(periods) + sum(periods)
        graph = project_subset(g, "q")
        count = len(graph.real_nodes())
        assert count == _cf_state_oracle(periods)
        assert count >= lower


def test_subset_matches_inductive_full_on_lattice(rng):
    checked = 0
    for g in balanced_globals(rng, 300, 9):
        for p in sorted(participants(g)):
            try:
                full = project_inductive(g, p, FULL)
            except ProjUndefined:
                continue
            sub = project_subset(g, p)
            assert graph_equiv(full, sub), (show(g), p)
            checked += 1
    assert checked >= 100


def test_plain_implies_full(rng):
    checked = 0
    for g in balanced_globals(rng, 300, 9):
        for p in sorted(participants(g)):
            try:
                plain = project_inductive(g, p, PLAIN)
            except ProjUndefined:
                continue
            full = project_inductive(g, p, FULL)
            assert graph_equiv(plain, full)
            checked += 1
    assert checked >= 100


# ---------------------------------------------------------------------------
# Association


def test_association_paper_example():
    g = parse("global", "p->q{l1: r->q{l2: end}, l4: r->q{l2: end}}")
    d5 = parse("context",
               "q: p&{l1: r&{l2: end, l3: end}, l4: r&{l2: end, l5: end}},"
               " p: q+{l1: end, l4: end}, r: q+{l2: end}")
    assert check_association(d5, g, PLAIN)
    assert check_association(d5, g, FULL)
    assert check_association(d5, g, "subset")


def test_association_exact_projections(rng):
    from mpstk.ast import typing_context

    count = 0
    for g in balanced_globals(rng, 100, 8):
        pts = sorted(participants(g))
        if not pts:
            continue
        try:
            ctx = typing_context((p, project_inductive(g, p, FULL)) for p in pts)
        except ProjUndefined:
            continue
        assert check_association(ctx, g, FULL)
        count += 1
    assert count >= 20


def test_association_rejects_incompatible_selection():
    g = parse("global", "p->q{l1: r->q{l2: end}, l4: r->q{l2: end}}")
    d_bad = parse("context",
                  "q: p&{l1: r&{l2: end, l3: end}, l4: r&{l2: end, l5: end}},"
                  " p: q+{l1: end, l4: end}, r: q+{l2: end, l9: end}")
    assert not check_association(d_bad, g, FULL)


def test_association_wrong_domain():
    g = parse("global", "p->q(int); end")
    ctx = parse("context", "p: q!(int); end")
    assert not check_association(ctx, g, FULL)


# ---------------------------------------------------------------------------
# Families


def test_family_fixtures():
    assert gen_lowerbound_family("plain_nlogn", 0) == GEnd()
    g1 = gen_lowerbound_family("plain_nlogn", 1)
    assert show(g1) == "p->q{l1: r->s{a: end, b: end}, l2: r->s{a: end, b: end}}"
    assert project_inductive(g1, "r", PLAIN) is not None
    g2 = gen_lowerbound_family("fullmerge_quadratic", 2)
    t = project_inductive(g2, "p", FULL)
    assert isinstance(t, TBra) and len(t.branches) == 3
    gt = gen_lowerbound_family("tirore_quadratic", 2)
    assert show(ptrans(gt, "p")) == "rec u. q!(int); q!(int); u"
    assert project_tirore(gt, "p")


def test_fullmerge_nlog2_family():
    g = gen_lowerbound_family("fullmerge_nlog2", 3)
    t = project_inductive(g, "r", FULL)
    assert isinstance(t, TBra) and len(t.branches) == 8


def test_plain_counter_grows(rng):
    c1, c2 = WorkCounter(), WorkCounter()
    project_inductive(gen_lowerbound_family("plain_nlogn", 4), "r", PLAIN, c1)
    project_inductive(gen_lowerbound_family("plain_nlogn", 8), "r", PLAIN, c2)
    # work grows like m * 2^m: quadrupling the depth far more than doubles it
    assert c2.ops > 8 * c1.ops
