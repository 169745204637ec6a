"""Pretty-printers producing the surface syntax accepted by parse.py."""

from __future__ import annotations

from .ast import (
    EAdd, EInt, ENat, ENeg, ENonDet, ENot, EOr, ETrue, EFalse, EVar,
    GEnd, GChoice, GMsg, GRec, GVar,
    PBra, PCond, PInact, PRec, PRecv, PSel, PSend, PVar,
    Session, Sort, SortVar, TypingContext,
    TBra, TEnd, TIn, TOut, TRec, TSel, TVar,
)


def show_sort(s) -> str:
    return str(s)


def show_local(t) -> str:
    if isinstance(t, TEnd):
        return "end"
    if isinstance(t, TVar):
        return t.var
    if isinstance(t, TRec):
        return f"rec {t.var}. {show_local(t.body)}"
    if isinstance(t, TOut):
        return f"{t.peer}!({show_sort(t.payload)}); {show_local(t.cont)}"
    if isinstance(t, TIn):
        return f"{t.peer}?({show_sort(t.payload)}); {show_local(t.cont)}"
    op = "+" if isinstance(t, TSel) else "&"
    inner = ", ".join(f"{l}: {show_local(b)}" for l, b in t.branches)
    return f"{t.peer}{op}{{{inner}}}"


def show_global(g) -> str:
    if isinstance(g, GEnd):
        return "end"
    if isinstance(g, GVar):
        return g.var
    if isinstance(g, GRec):
        return f"rec {g.var}. {show_global(g.body)}"
    if isinstance(g, GMsg):
        return f"{g.frm}->{g.to}({show_sort(g.payload)}); {show_global(g.cont)}"
    inner = ", ".join(f"{l}: {show_global(b)}" for l, b in g.branches)
    return f"{g.frm}->{g.to}{{{inner}}}"


# Binary expression operands are parenthesised unless atomic, which keeps
# the printer independent of the precedence table in the parser.

def _atom(e) -> bool:
    return isinstance(e, (ETrue, EFalse, ENat, EInt, EVar))


def _sub(e) -> str:
    s = show_expr(e)
    return s if _atom(e) else f"({s})"


def show_expr(e) -> str:
    if isinstance(e, ETrue):
        return "true"
    if isinstance(e, EFalse):
        return "false"
    if isinstance(e, ENat):
        return str(e.value)
    if isinstance(e, EInt):
        # non-negative integers only arise as runtime values and are never
        # parsed back, so plain digits are fine for display
        return str(e.value)
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, ENot):
        return f"!{_sub(e.arg)}"
    if isinstance(e, ENeg):
        return f"neg {_sub(e.arg)}"
    if isinstance(e, EOr):
        return f"{_sub(e.lhs)} \\/ {_sub(e.rhs)}"
    if isinstance(e, EAdd):
        return f"{_sub(e.lhs)} + {_sub(e.rhs)}"
    if isinstance(e, ENonDet):
        return f"{_sub(e.lhs)} (+) {_sub(e.rhs)}"
    raise TypeError(f"show_expr: {e!r}")


def show_process(p) -> str:
    if isinstance(p, PInact):
        return "0"
    if isinstance(p, PVar):
        return p.var
    if isinstance(p, PRec):
        return f"rec {p.var}. {show_process(p.body)}"
    if isinstance(p, PSend):
        return f"{p.peer}!<{show_expr(p.expr)}>; {show_process(p.cont)}"
    if isinstance(p, PRecv):
        return f"{p.peer}?({p.var}); {show_process(p.cont)}"
    if isinstance(p, PSel):
        return f"{p.peer}(+){p.label}; {show_process(p.cont)}"
    if isinstance(p, PBra):
        inner = ", ".join(f"{l}: {show_process(b)}" for l, b in p.branches)
        return f"{p.peer}&{{{inner}}}"
    if isinstance(p, PCond):
        return (
            f"if {show_expr(p.cond)} then {show_process(p.then)} "
            f"else {show_process(p.orelse)}"
        )
    raise TypeError(f"show_process: {p!r}")


def show_session(s: Session) -> str:
    return " | ".join(f"{n}::{show_process(p)}" for n, p in s.roles)


def show_context(c: TypingContext) -> str:
    return ", ".join(f"{n}: {show_local(t)}" for n, t in c.entries)


def show(x) -> str:
    if isinstance(x, Session):
        return show_session(x)
    if isinstance(x, TypingContext):
        return show_context(x)
    if isinstance(x, (TEnd, TVar, TRec, TOut, TIn, TSel, TBra)):
        return show_local(x)
    if isinstance(x, (GEnd, GVar, GRec, GMsg, GChoice)):
        return show_global(x)
    if isinstance(x, (PInact, PVar, PRec, PSend, PRecv, PSel, PBra, PCond)):
        return show_process(x)
    if isinstance(x, (Sort, SortVar)):
        return show_sort(x)
    return show_expr(x)
