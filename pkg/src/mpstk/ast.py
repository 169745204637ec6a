"""AST definitions for sorts, local/global types, expressions, processes,
sessions and typing contexts, plus the structural metrics used everywhere
else (size, subformulas, unfolding, free variables, guardedness).

All nodes are immutable; structural equality is plain field equality, and
alpha-insensitive comparison goes through :func:`alpha_canon`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class SessionTypeError(Exception):
    """Ill-formed input: duplicate labels, unguarded recursion, p -> p, ..."""


# ---------------------------------------------------------------------------
# Sorts


@dataclass(frozen=True)
class Sort:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class SortVar:
    """Sort variable; produced only by inference, never by the parser."""

    name: str

    def __str__(self):
        return "'" + self.name


BOOL = Sort("bool")
NAT = Sort("nat")
INT = Sort("int")

SORTS = {"bool": BOOL, "nat": NAT, "int": INT}


# ---------------------------------------------------------------------------
# Local types


class LocalT:
    __slots__ = ()


@dataclass(frozen=True)
class TEnd(LocalT):
    pass


@dataclass(frozen=True)
class TOut(LocalT):
    peer: str
    payload: Sort | SortVar
    cont: LocalT


@dataclass(frozen=True)
class TIn(LocalT):
    peer: str
    payload: Sort | SortVar
    cont: LocalT


@dataclass(frozen=True)
class TSel(LocalT):
    peer: str
    branches: tuple[tuple[str, LocalT], ...]


@dataclass(frozen=True)
class TBra(LocalT):
    peer: str
    branches: tuple[tuple[str, LocalT], ...]


@dataclass(frozen=True)
class TRec(LocalT):
    var: str
    body: LocalT


@dataclass(frozen=True)
class TVar(LocalT):
    var: str


END = TEnd()


def branches(pairs) -> tuple[tuple[str, object], ...]:
    """Normalise a branch mapping: sorted by label, labels distinct."""
    pairs = sorted(pairs, key=lambda kv: kv[0])
    labels = [l for l, _ in pairs]
    if not labels:
        raise SessionTypeError("empty branch set")
    if len(set(labels)) != len(labels):
        raise SessionTypeError(f"duplicate labels {labels}")
    return tuple(pairs)


def tsel(peer, pairs):
    return TSel(peer, branches(pairs))


def tbra(peer, pairs):
    return TBra(peer, branches(pairs))


# ---------------------------------------------------------------------------
# Global types


class GlobalT:
    __slots__ = ()


@dataclass(frozen=True)
class GEnd(GlobalT):
    pass


@dataclass(frozen=True)
class GMsg(GlobalT):
    frm: str
    to: str
    payload: Sort | SortVar
    cont: GlobalT


@dataclass(frozen=True)
class GChoice(GlobalT):
    frm: str
    to: str
    branches: tuple[tuple[str, GlobalT], ...]


@dataclass(frozen=True)
class GRec(GlobalT):
    var: str
    body: GlobalT


@dataclass(frozen=True)
class GVar(GlobalT):
    var: str


GEND = GEnd()


def gmsg(frm, to, payload, cont):
    if frm == to:
        raise SessionTypeError(f"self-communication {frm}->{to}")
    return GMsg(frm, to, payload, cont)


def gchoice(frm, to, pairs):
    if frm == to:
        raise SessionTypeError(f"self-communication {frm}->{to}")
    return GChoice(frm, to, branches(pairs))


# ---------------------------------------------------------------------------
# Expressions


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class ETrue(Expr):
    pass


@dataclass(frozen=True)
class EFalse(Expr):
    pass


@dataclass(frozen=True)
class ENat(Expr):
    value: int


@dataclass(frozen=True)
class EInt(Expr):
    value: int


@dataclass(frozen=True)
class EVar(Expr):
    name: str


@dataclass(frozen=True)
class EOr(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class ENot(Expr):
    arg: Expr


@dataclass(frozen=True)
class EAdd(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class ENonDet(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class ENeg(Expr):
    arg: Expr


TRUE = ETrue()
FALSE = EFalse()


# ---------------------------------------------------------------------------
# Processes and sessions


class Proc:
    __slots__ = ()


@dataclass(frozen=True)
class PInact(Proc):
    pass


@dataclass(frozen=True)
class PSend(Proc):
    peer: str
    expr: Expr
    cont: Proc


@dataclass(frozen=True)
class PRecv(Proc):
    peer: str
    var: str
    cont: Proc


@dataclass(frozen=True)
class PSel(Proc):
    peer: str
    label: str
    cont: Proc


@dataclass(frozen=True)
class PBra(Proc):
    peer: str
    branches: tuple[tuple[str, Proc], ...]


@dataclass(frozen=True)
class PCond(Proc):
    cond: Expr
    then: Proc
    orelse: Proc


@dataclass(frozen=True)
class PRec(Proc):
    var: str
    body: Proc


@dataclass(frozen=True)
class PVar(Proc):
    var: str


INACT = PInact()


def pbra(peer, pairs):
    return PBra(peer, branches(pairs))


@dataclass(frozen=True)
class Session:
    """Parallel composition as a map participant -> process."""

    roles: tuple[tuple[str, Proc], ...]

    def __post_init__(self):
        names = [n for n, _ in self.roles]
        if len(set(names)) != len(names):
            raise SessionTypeError(f"duplicate participants {names}")
        if not names:
            raise SessionTypeError("empty session")

    def mapping(self) -> dict[str, Proc]:
        return dict(self.roles)


def session(pairs) -> Session:
    return Session(tuple(sorted(pairs, key=lambda kv: kv[0])))


@dataclass(frozen=True)
class TypingContext:
    """Map participant -> closed local type; the state of the context LTS."""

    entries: tuple[tuple[str, LocalT], ...]

    def __post_init__(self):
        names = [n for n, _ in self.entries]
        if len(set(names)) != len(names):
            raise SessionTypeError(f"duplicate participants {names}")
        if not names:
            raise SessionTypeError("empty typing context")

    def mapping(self) -> dict[str, LocalT]:
        return dict(self.entries)

    def participants(self) -> list[str]:
        return [n for n, _ in self.entries]


def typing_context(pairs) -> TypingContext:
    return TypingContext(tuple(sorted(pairs, key=lambda kv: kv[0])))


# ---------------------------------------------------------------------------
# Size


def size(t) -> int:
    """Inductive size |t| of a local type, global type, process, expression
    or session, following the per-category definitions."""
    if isinstance(t, (TEnd, TVar, GEnd, GVar, PInact, PVar)):
        return 1
    if isinstance(t, (TRec, GRec, PRec)):
        return 1 + size(t.body)
    if isinstance(t, (TOut, TIn, GMsg)):
        return 1 + size(t.cont)
    if isinstance(t, (TSel, TBra, GChoice, PBra)):
        return 1 + sum(size(b) for _, b in t.branches)
    if isinstance(t, PSend):
        return 1 + size(t.expr) + size(t.cont)
    if isinstance(t, PRecv):
        return 1 + size(t.cont)
    if isinstance(t, PSel):
        return 1 + size(t.cont)
    if isinstance(t, PCond):
        return 1 + size(t.cond) + size(t.then) + size(t.orelse)
    if isinstance(t, (ETrue, EFalse, ENat, EInt, EVar)):
        return 1
    if isinstance(t, (ENot, ENeg)):
        return 1 + size(t.arg)
    if isinstance(t, (EOr, EAdd, ENonDet)):
        return 1 + size(t.lhs) + size(t.rhs)
    if isinstance(t, Session):
        return sum(size(p) + 1 for _, p in t.roles) + max(0, len(t.roles) - 1)
    raise TypeError(f"size: unsupported node {t!r}")


# ---------------------------------------------------------------------------
# Free variables, substitution, unfolding

_LOCAL_COMM = (TOut, TIn, TSel, TBra)
_GLOBAL_COMM = (GMsg, GChoice)


_fv_memo: dict = {}


def free_vars(t) -> frozenset[str]:
    out = _fv_memo.get(t)
    if out is not None:
        return out
    if isinstance(t, (TVar, GVar)):
        out = frozenset([t.var])
    elif isinstance(t, (TRec, GRec)):
        out = free_vars(t.body) - {t.var}
    elif isinstance(t, (TOut, TIn, GMsg)):
        out = free_vars(t.cont)
    elif isinstance(t, (TSel, TBra, GChoice)):
        out = frozenset().union(*(free_vars(b) for _, b in t.branches))
    else:
        out = frozenset()
    _fv_memo[t] = out
    return out


def is_closed(t) -> bool:
    return not free_vars(t)


def subst(t, var: str, repl):
    """Capture-avoiding substitution of `repl` for the free variable `var`.

    All substitutions performed here plug in closed recursions, so a free
    variable of `repl` can never be captured; we only respect shadowing.
    """
    if isinstance(t, (TVar, GVar)):
        return repl if t.var == var else t
    if isinstance(t, (TRec, GRec)):
        if t.var == var:
            return t
        return type(t)(t.var, subst(t.body, var, repl))
    if isinstance(t, (TOut, TIn)):
        return type(t)(t.peer, t.payload, subst(t.cont, var, repl))
    if isinstance(t, GMsg):
        return GMsg(t.frm, t.to, t.payload, subst(t.cont, var, repl))
    if isinstance(t, (TSel, TBra)):
        return type(t)(t.peer, tuple((l, subst(b, var, repl)) for l, b in t.branches))
    if isinstance(t, GChoice):
        return GChoice(t.frm, t.to, tuple((l, subst(b, var, repl)) for l, b in t.branches))
    return t


_unfold_memo: dict = {}


def unfold(t):
    """unfold(mu t.T) = unfold(T[mu t.T / t]); identity on other heads.

    Terminates on guarded types only.
    """
    out = _unfold_memo.get(t)
    if out is not None:
        return out
    u = t
    steps = 0
    while isinstance(u, (TRec, GRec)):
        u = subst(u.body, u.var, u)
        steps += 1
        if steps > 10_000:
            raise SessionTypeError("unguarded recursion in unfold")
    _unfold_memo[t] = u
    return u


# ---------------------------------------------------------------------------
# Guardedness

def check_guarded(t) -> None:
    """Reject recursion binders whose variable occurs without an intervening
    communication prefix.  mu t.t is out; mu t.mu u.p!(int);t is fine."""

    def walk(u, pending: frozenset[str]):
        if isinstance(u, (TVar, GVar)):
            if u.var in pending:
                raise SessionTypeError(f"unguarded recursion variable {u.var}")
        elif isinstance(u, (TRec, GRec)):
            walk(u.body, pending | {u.var})
        elif isinstance(u, (TOut, TIn, GMsg)):
            walk(u.cont, frozenset())
        elif isinstance(u, (TSel, TBra, GChoice)):
            for _, b in u.branches:
                walk(b, frozenset())

    walk(t, frozenset())


def check_guarded_proc(p) -> None:
    """Process recursion variables must occur under a communication prefix.

    Conditionals do not count as guards: mu X. if e then X else X would
    reduce forever without communicating and yields an unconstrained
    inference variable, so it is rejected as input.
    """

    def walk(u, pending: frozenset[str]):
        if isinstance(u, PVar):
            if u.var in pending:
                raise SessionTypeError(f"unguarded process variable {u.var}")
        elif isinstance(u, PRec):
            walk(u.body, pending | {u.var})
        elif isinstance(u, (PSend, PRecv, PSel)):
            walk(u.cont, frozenset())
        elif isinstance(u, PBra):
            for _, b in u.branches:
                walk(b, frozenset())
        elif isinstance(u, PCond):
            walk(u.then, pending)
            walk(u.orelse, pending)

    walk(p, frozenset())


# ---------------------------------------------------------------------------
# Subformulas


def subformulas(t) -> frozenset:
    """Sub(t) for closed local or global types.  The Rec clause substitutes
    the whole binder into each body subformula, so members are closed."""
    if isinstance(t, (TEnd, TVar, GEnd, GVar)):
        return frozenset([t])
    if isinstance(t, (TOut, TIn, GMsg)):
        return frozenset([t]) | subformulas(t.cont)
    if isinstance(t, (TSel, TBra, GChoice)):
        out = frozenset([t])
        for _, b in t.branches:
            out |= subformulas(b)
        return out
    if isinstance(t, (TRec, GRec)):
        inner = subformulas(t.body)
        return frozenset([t]) | frozenset(subst(s, t.var, t) for s in inner)
    raise TypeError(f"subformulas: unsupported node {t!r}")


# ---------------------------------------------------------------------------
# Participants


def participants(g) -> frozenset[str]:
    """pt(G): participants of a global type (pt(end) = pt(t) = {})."""
    if isinstance(g, (GEnd, GVar)):
        return frozenset()
    if isinstance(g, GRec):
        return participants(g.body)
    if isinstance(g, GMsg):
        return participants(g.cont) | {g.frm, g.to}
    if isinstance(g, GChoice):
        out = frozenset([g.frm, g.to])
        for _, b in g.branches:
            out |= participants(b)
        return out
    raise TypeError(f"participants: unsupported node {g!r}")


def local_peers(t) -> frozenset[str]:
    """Peers mentioned anywhere in a local type."""
    if isinstance(t, (TEnd, TVar)):
        return frozenset()
    if isinstance(t, TRec):
        return local_peers(t.body)
    if isinstance(t, (TOut, TIn)):
        return local_peers(t.cont) | {t.peer}
    out = frozenset([t.peer])
    for _, b in t.branches:
        out |= local_peers(b)
    return out


# ---------------------------------------------------------------------------
# Alpha handling


_canon_memo: dict = {}


def alpha_canon(t):
    """De Bruijn style canonical form: every binder is renamed to "%" and
    every variable to its binding distance, so two types are
    alpha-equivalent iff their canonical forms are structurally equal.

    Distances are context-free, which lets subtree canonicalisation be
    memoised on (subtree, relative offsets of its free variables); graph
    interning over heavily shared subformulas stays near-linear.
    """

    def walk(u, env: dict, depth: int):
        if isinstance(u, (TVar, GVar)):
            off = env.get(u.var)
            return type(u)(u.var if off is None else f"%{depth - off}")
        key = (u, tuple(sorted(
            (v, depth - env[v]) for v in free_vars(u) if v in env)))
        hit = _canon_memo.get(key)
        if hit is not None:
            return hit
        if isinstance(u, (TRec, GRec)):
            out = type(u)("%", walk(u.body, {**env, u.var: depth}, depth + 1))
        elif isinstance(u, (TOut, TIn)):
            out = type(u)(u.peer, u.payload, walk(u.cont, env, depth))
        elif isinstance(u, GMsg):
            out = GMsg(u.frm, u.to, u.payload, walk(u.cont, env, depth))
        elif isinstance(u, (TSel, TBra)):
            out = type(u)(u.peer, tuple((l, walk(b, env, depth)) for l, b in u.branches))
        elif isinstance(u, GChoice):
            out = GChoice(u.frm, u.to, tuple((l, walk(b, env, depth)) for l, b in u.branches))
        else:
            out = u
        _canon_memo[key] = out
        return out

    return walk(t, {}, 0)


def alpha_eq(a, b) -> bool:
    return alpha_canon(a) == alpha_canon(b)


def uniquify_binders(t, taken: set[str] | None = None):
    """Rename recursion binders so every binder in the term is distinct.
    Keeps user names when possible; applied once at parse time."""
    taken = set() if taken is None else taken

    def fresh(name):
        if name not in taken:
            taken.add(name)
            return name
        for i in itertools.count(1):
            cand = f"{name}_{i}"
            if cand not in taken:
                taken.add(cand)
                return cand

    def walk(u, env):
        if isinstance(u, (TVar, GVar, PVar)):
            return type(u)(env.get(u.var, u.var))
        if isinstance(u, (TRec, GRec, PRec)):
            name = fresh(u.var)
            return type(u)(name, walk(u.body, {**env, u.var: name}))
        if isinstance(u, (TOut, TIn)):
            return type(u)(u.peer, u.payload, walk(u.cont, env))
        if isinstance(u, GMsg):
            return GMsg(u.frm, u.to, u.payload, walk(u.cont, env))
        if isinstance(u, (TSel, TBra)):
            return type(u)(u.peer, tuple((l, walk(b, env)) for l, b in u.branches))
        if isinstance(u, GChoice):
            return GChoice(u.frm, u.to, tuple((l, walk(b, env)) for l, b in u.branches))
        if isinstance(u, PSend):
            return PSend(u.peer, u.expr, walk(u.cont, env))
        if isinstance(u, PRecv):
            return PRecv(u.peer, u.var, walk(u.cont, env))
        if isinstance(u, PSel):
            return PSel(u.peer, u.label, walk(u.cont, env))
        if isinstance(u, PBra):
            return PBra(u.peer, tuple((l, walk(b, env)) for l, b in u.branches))
        if isinstance(u, PCond):
            return PCond(u.cond, walk(u.then, env), walk(u.orelse, env))
        return u

    return walk(t, {})


# Hash values are cached on first use: the ASTs are immutable and deep, and
# the checkers put them in sets heavily, so the default recursive dataclass
# hash would dominate.


def _install_hash_cache(*classes):
    import dataclasses as _dc

    for cls in classes:
        names = tuple(f.name for f in _dc.fields(cls))

        def _h(self, _names=names, _cls=cls):
            h = self.__dict__.get("_hash")
            if h is None:
                h = hash((_cls, *[getattr(self, n) for n in _names]))
                object.__setattr__(self, "_hash", h)
            return h

        cls.__hash__ = _h


_install_hash_cache(
    Sort, SortVar,
    TEnd, TOut, TIn, TSel, TBra, TRec, TVar,
    GEnd, GMsg, GChoice, GRec, GVar,
    ETrue, EFalse, ENat, EInt, EVar, EOr, ENot, EAdd, ENonDet, ENeg,
    PInact, PSend, PRecv, PSel, PBra, PCond, PRec, PVar,
    Session, TypingContext,
)


def validate_local(t: LocalT, require_closed: bool = True) -> LocalT:
    check_guarded(t)
    if require_closed and not is_closed(t):
        raise SessionTypeError(f"free type variables {sorted(free_vars(t))}")
    return t


def validate_global(g: GlobalT, require_closed: bool = True) -> GlobalT:
    check_guarded(g)
    if require_closed and not is_closed(g):
        raise SessionTypeError(f"free type variables {sorted(free_vars(g))}")
    return g
