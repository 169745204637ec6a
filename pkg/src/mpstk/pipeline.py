"""Top-down and bottom-up verification pipelines.

Top-down: project the global type per participant, infer each process's
minimum type, and accept iff every minimum type is a subtype of the
corresponding projection (plus the participant-set side condition).
Bottom-up: infer all minimum types and model-check the assembled typing
context directly for the requested property.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .ast import (
    BOOL, FALSE, INACT, INT, NAT, TRUE,
    EInt, ENat, ENonDet, LocalT, PBra, PCond, PRec, PRecv, PSel, PSend, PVar,
    Proc, Session, typing_context,
    TBra, TEnd, TIn, TOut, TRec, TVar, participants, uniquify_binders,
)
from .context import check_deadlock_freedom, check_liveness, check_safety
from .inference import Untypable, infer
from .projection import NotBalanced, ProjUndefined, project_inductive, project_subset
from .subtyping import subtype_sim_matching


def synth_process(t: LocalT) -> Proc:
    """A process realizing a local type: literals witness the payload sorts
    and a nondeterministic conditional chain drives multi-label selections."""

    def literal(s):
        if s == BOOL:
            return TRUE
        if s == NAT:
            return ENat(1)
        if s == INT:
            return EInt(-1)
        raise ValueError(f"cannot synthesise a literal of sort {s}")

    def go(t) -> Proc:
        if isinstance(t, TEnd):
            return INACT
        if isinstance(t, TVar):
            return PVar(t.var)
        if isinstance(t, TRec):
            return PRec(t.var, go(t.body))
        if isinstance(t, TIn):
            return PRecv(t.peer, "x", go(t.cont))
        if isinstance(t, TOut):
            return PSend(t.peer, literal(t.payload), go(t.cont))
        if isinstance(t, TBra):
            return PBra(t.peer, tuple((l, go(b)) for l, b in t.branches))
        arms = [PSel(t.peer, l, go(b)) for l, b in t.branches]
        out = arms[-1]
        for arm in reversed(arms[:-1]):
            out = PCond(ENonDet(TRUE, FALSE), arm, out)
        return out

    return uniquify_binders(go(t))


@dataclass
class StageReport:
    name: str
    ok: bool
    detail: str = ""
    millis: float = 0.0


@dataclass
class PipelineReport:
    accepted: bool
    stages: list[StageReport] = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    def fail_reason(self) -> str:
        for s in self.stages:
            if not s.ok:
                return f"{s.name}: {s.detail}"
        return ""


def _timed(report: PipelineReport, name: str, fn):
    t0 = time.perf_counter()
    try:
        out = fn()
        ok, detail = True, ""
    except (ProjUndefined, NotBalanced, Untypable) as e:
        out, ok, detail = None, False, str(e)
    ms = (time.perf_counter() - t0) * 1000.0
    report.stages.append(StageReport(name, ok, detail, ms))
    return out, ok


def run_topdown(sess: Session, g, kind: str = "full") -> PipelineReport:
    """kind: plain | full | tbc | subset."""
    report = PipelineReport(accepted=False)
    roles = dict(sess.roles)
    pts = participants(g)
    if set(roles) != set(pts):
        report.stages.append(StageReport(
            "participants", False,
            f"session roles {sorted(roles)} != pt(G) {sorted(pts)}"))
        return report
    report.stages.append(StageReport("participants", True))

    projections: dict[str, object] = {}

    def project_all():
        from .projection import project_tirore

        for p in sorted(pts):
            if kind == "subset":
                projections[p] = project_subset(g, p)
            elif kind == "tbc":
                projections[p] = project_tirore(g, p)
            else:
                projections[p] = project_inductive(g, p, kind)
        return projections

    _, ok = _timed(report, "projection", project_all)
    if not ok:
        return report

    minima: dict[str, LocalT] = {}

    def infer_all():
        for p in sorted(pts):
            r = infer(roles[p])
            if not r.typable:
                raise Untypable(f"{p}: {r.failure}")
            minima[p] = r.min_type
        return minima

    _, ok = _timed(report, "inference", infer_all)
    if not ok:
        return report

    def subtype_all():
        # minimum types may carry residual sort variables; they must unify
        # with the projection's concrete sorts
        for p in sorted(pts):
            ok, _ = subtype_sim_matching(minima[p], projections[p])
            if not ok:
                raise Untypable(
                    f"{p}: minimum type is not a subtype of the projection")
        return True

    _, ok = _timed(report, "subtyping", subtype_all)
    report.accepted = ok
    return report


_PROPS = {"safety": check_safety, "df": check_deadlock_freedom, "live": check_liveness}


def run_bottomup(sess: Session, prop: str = "safety", budget: int = 1_000_000) -> PipelineReport:
    report = PipelineReport(accepted=False)
    minima: dict[str, LocalT] = {}

    def infer_all():
        for p, q in sess.roles:
            r = infer(q)
            if not r.typable:
                raise Untypable(f"{p}: {r.failure}")
            minima[p] = r.min_type
        return minima

    _, ok = _timed(report, "inference", infer_all)
    if not ok:
        return report

    ctx = typing_context(minima.items())
    t0 = time.perf_counter()
    verdict = _PROPS[prop](ctx, budget)
    ms = (time.perf_counter() - t0) * 1000.0
    report.stages.append(StageReport(f"check-{prop}", verdict.holds,
                                     "" if verdict.holds else "property violated", ms))
    report.verdicts[prop] = verdict
    report.accepted = verdict.holds
    return report
