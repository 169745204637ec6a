"""CLI smoke tests: exit codes, JSON output, file plumbing."""

import json

import pytest

from mpstk.cli import main

G_IF = "rec t. q->r{l1: r->p{l1: t}, l2: r->p{l2: end}}"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def test_parse_ok(files, capsys):
    f = files("t.mpst", "rec t. p+{l1: t, l2: end}")
    assert main(["parse", "local", f]) == 0
    assert "rec t" in capsys.readouterr().out


def test_parse_error_exit_code(files, capsys):
    f = files("bad.mpst", "rec t. t")
    assert main(["parse", "local", f]) == 2


def test_subtype_json(files, capsys):
    a = files("a.mpst", "rec t. p+{l1: p+{l1: t}, l2: end}")
    b = files("b.mpst", "rec t. p+{l1: t, l2: end}")
    assert main(["--json", "subtype", a, b, "--algo", "sim", "--stats"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"] is True and out["nodes_visited"] >= 1
    assert main(["subtype", b, a]) == 1  # not a subtype


def test_subtype_inductive(files, capsys):
    a = files("a.mpst", "end")
    b = files("b.mpst", "end")
    assert main(["--json", "subtype", a, b, "--algo", "inductive"]) == 0
    assert json.loads(capsys.readouterr().out)["judgements"] == 1


def test_project_all_algos(files, capsys):
    g = files("g.mpst", G_IF)
    assert main(["project", g, "--role", "p", "--algo", "plain"]) == 1
    assert main(["project", g, "--role", "p", "--algo", "full"]) == 0
    assert main(["project", g, "--role", "p", "--algo", "tbc"]) == 1
    assert main(["--json", "project", g, "--role", "p", "--algo", "subset"]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["defined"] and out["graph_nodes"] >= 2


def test_project_dot(files, tmp_path, capsys):
    g = files("g.mpst", G_IF)
    dot = str(tmp_path / "out.dot")
    assert main(["project", g, "--role", "p", "--algo", "full", "--dot", dot]) == 0
    assert "digraph" in open(dot).read()


def test_infer(files, capsys):
    f = files("p.mpst", "rec X. p?(x); p!<x>; X")
    assert main(["--json", "infer", f, "--emit-constraints"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["typable"] and out["min_type"].startswith("rec")
    bad = files("bad.mpst", "p(+)l; if false then p!<1>; 0 else p?(x); 0")
    assert main(["infer", bad]) == 1


def test_check_context(files, capsys):
    f = files("d7.mpst",
              "q: rec t. p?(int); t, p: rec t. q!(int); t,"
              " r: s?(bool); end, s: r!(int); end")
    assert main(["check-context", f, "--prop", "df"]) == 0
    assert main(["check-context", f, "--prop", "safety", "--trace"]) == 1
    assert main(["--json", "check-context", f, "--prop", "live", "--oracle"]) == 1
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["holds"] is False and out["oracle"] is False


def test_check_session(files):
    ok = files("s.mpst", "p::q!<1>; 0 | q::p?(x); 0")
    assert main(["check-session", ok]) == 0
    bad = files("s2.mpst", "p::q(+)l; 0 | q::p&{m: 0}")
    assert main(["check-session", bad]) == 1


def test_gen_qbf(capsys):
    assert main(["gen", "qbf", "--formula", "E x. (x | x | x)",
                 "--prop", "safety", "--validate"]) == 0
    assert main(["--json", "gen", "qbf", "--formula", "A x. (x | x | x)",
                 "--prop", "df"]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["qbf_true"] is False


def test_topdown_bottomup(files):
    g = files("g.mpst", G_IF)
    sess = files(
        "sess.mpst",
        "p::rec X. r&{l1: X, l2: 0}"
        " | q::rec X. if true (+) false then r(+)l1; X else r(+)l2; 0"
        " | r::rec X. q&{l1: p(+)l1; X, l2: p(+)l2; 0}",
    )
    assert main(["topdown", sess, g, "--kind", "full"]) == 0
    assert main(["topdown", sess, g, "--kind", "plain"]) == 1
    assert main(["bottomup", sess, "--prop", "safety"]) == 0
    assert main(["bottomup", sess, "--prop", "live"]) == 0


def test_bench_csv(tmp_path, capsys):
    out = str(tmp_path / "bench.csv")
    assert main(["bench", "--family", "coprime", "--params", "3x4,5x7",
                 "--out", out]) == 0
    rows = open(out).read().strip().splitlines()
    assert rows[0] == "family,n,size,time_ns,work,outcome"
    assert rows[1].split(",")[4] == "12"
    assert rows[2].split(",")[4] == "35"


def test_graph_command(files, capsys):
    f = files("t.mpst", "rec t. p+{l1: t, l2: end}")
    assert main(["graph", f, "--category", "local"]) == 0
    assert "digraph" in capsys.readouterr().out


def test_bench_csv_deterministic_modulo_time(tmp_path):
    out1, out2 = str(tmp_path / "b1.csv"), str(tmp_path / "b2.csv")
    for out in (out1, out2):
        assert main(["bench", "--family", "lcm", "--params", "2x3,2x3x5",
                     "--out", out]) == 0

    def strip_time(path):
        rows = [r.split(",") for r in open(path).read().strip().splitlines()]
        return [r[:3] + r[4:] for r in rows]

    assert strip_time(out1) == strip_time(out2)
