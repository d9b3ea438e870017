"""Deciding equivalence of existentially constrained terms.

Four routes are offered:

* ``equiv_by_renaming`` / ``equiv_same_term``: the term parts are variants;
  equivalence reduces to one constraint biconditional.
* ``equiv_pattern_general``: both terms pattern-general; the renaming is read
  off positionally.
* ``equiv_via_pg``: transform both sides to pattern-general form first.
* ``equiv_general``: five checks over logical-variable and value positions,
  with no transformation.

``equiv_auto`` handles unsatisfiable inputs and picks a route.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

from .constraints import substitute
from .ecterm import ECTerm, is_satisfiable
from .model import Value, to_val
from .pg import hole_positions, is_pattern_general, pg_transform
from .solver import Backend, Exists, Formula, Status, Verdict, iff, implies
from .terms import (
    App,
    Position,
    Term,
    Val,
    Var,
    apply_subst,
    eq,
    fmt_pos,
    match,
    multihole_context,
    positions_of,
    subterm_at,
    subterms,
    variables,
)


class PreconditionError(ValueError):
    pass


class RouteDisagreement(RuntimeError):
    pass


class Outcome(Enum):
    EQUIVALENT = "EQUIVALENT"
    NOT_EQUIVALENT = "NOT-EQUIVALENT"
    UNKNOWN = "UNKNOWN"

    @property
    def exit_code(self) -> int:
        return {"EQUIVALENT": 0, "NOT-EQUIVALENT": 1, "UNKNOWN": 2}[self.value]


@dataclass(frozen=True)
class QueryRecord:
    kind: str  # "valid" or "sat"
    formula: Formula | str  # str only when loaded back from JSON
    status: Status


class Recorder:
    """Backend front that logs every query for the certificate."""

    def __init__(self, backend: Backend):
        self.backend = backend
        self.log: list[QueryRecord] = []

    def valid(self, f: Formula) -> Verdict:
        v = self.backend.check_valid(f)
        self.log.append(QueryRecord("valid", f, v.status))
        return v

    def sat(self, f: Formula) -> Verdict:
        v = self.backend.check_sat(f)
        self.log.append(QueryRecord("sat", f, v.status))
        return v


@dataclass
class EquivReport:
    verdict: Outcome
    route: str
    condition: str | None = None
    detail: str = ""
    witness: dict[Var, object] | None = None
    renaming: dict[Var, Term] | None = None
    queries: list[QueryRecord] = field(default_factory=list)

    @property
    def equivalent(self) -> bool:
        return self.verdict is Outcome.EQUIVALENT

    @property
    def not_equivalent(self) -> bool:
        return self.verdict is Outcome.NOT_EQUIVALENT

    @property
    def unknown(self) -> bool:
        return self.verdict is Outcome.UNKNOWN

    @property
    def exit_code(self) -> int:
        return self.verdict.exit_code

    def replay(self, backend: Backend) -> list[QueryRecord]:
        """Re-run every recorded query; return the ones whose status changed."""
        changed = []
        for q in self.queries:
            if isinstance(q.formula, str):
                raise TypeError("cannot replay a report loaded from JSON")
            v = backend.check_valid(q.formula) if q.kind == "valid" else backend.check_sat(q.formula)
            if v.status is not q.status:
                changed.append(q)
        return changed

    def replays(self, backend: Backend) -> bool:
        return not self.replay(backend)

    def to_json(self) -> dict:
        from .syntax import format_formula, format_term, format_var

        def show(f):
            return f if isinstance(f, str) else format_formula(f)

        def value(v):
            return v if isinstance(v, (bool, int)) else format_term(v)

        return {
            "schema": 1,
            "verdict": self.verdict.value,
            "route": self.route,
            "condition": self.condition,
            "detail": self.detail,
            "witness": None if self.witness is None else {format_var(x): value(v) for x, v in self.witness.items()},
            "renaming": None
            if self.renaming is None
            else {format_var(x): format_term(u, annotate=True) for x, u in self.renaming.items()},
            "queries": [{"kind": q.kind, "formula": show(q.formula), "status": q.status.value} for q in self.queries],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "EquivReport":
        from .syntax import parse_term_text, parse_var

        if data.get("schema") != 1:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")

        def value(v):
            return parse_term_text(v) if isinstance(v, str) else v

        witness = data.get("witness")
        renaming = data.get("renaming")
        return cls(
            verdict=Outcome(data["verdict"]),
            route=data["route"],
            condition=data.get("condition"),
            detail=data.get("detail", ""),
            witness=None if witness is None else {parse_var(k): value(v) for k, v in witness.items()},
            renaming=None if renaming is None else {parse_var(k): parse_term_text(v) for k, v in renaming.items()},
            queries=[QueryRecord(q["kind"], q["formula"], Status(q["status"])) for q in data.get("queries", [])],
        )

    def summary(self) -> str:
        from .syntax import format_subst, format_valuation

        head = self.verdict.value
        where = [f"route {self.route}"]
        if self.condition:
            where.append(f"condition {self.condition}")
        lines = [f"{head} ({', '.join(where)})"]
        if self.detail:
            lines.append(f"  {self.detail}")
        if self.witness:
            lines.append(f"  witness: {format_valuation(self.witness)}")
        if self.renaming is not None and self.equivalent:
            lines.append(f"  renaming: {format_subst(self.renaming)}")
        held = sum(q.status is Status.HOLDS for q in self.queries)
        lines.append(f"  solver queries: {len(self.queries)} ({held} held)")
        return "\n".join(lines)


def _report(rec: Recorder, verdict: Outcome, route: str, **kw) -> EquivReport:
    return EquivReport(verdict, route, queries=list(rec.log), **kw)


def _unknown(rec: Recorder, route: str, condition: str | None, reason: str) -> EquivReport:
    return _report(rec, Outcome.UNKNOWN, route, condition=condition, detail=reason)


def _require_satisfiable(e1: ECTerm, e2: ECTerm, rec: Recorder, route: str) -> EquivReport | None:
    for side, e in (("left", e1), ("right", e2)):
        v = rec.sat(Exists(e.constraint))
        if v.fails:
            raise PreconditionError(f"the {side} term is unsatisfiable")
        if v.unknown:
            return _unknown(rec, route, "satisfiability", f"satisfiability of the {side} term unknown: {v.reason}")
    return None


# --- renaming-based routes -------------------------------------------------


def _full_map(delta: Mapping[Var, Term], xs) -> dict[Var, Term]:
    return {x: delta.get(x, x) for x in xs}


def _injective_renaming(m: Mapping[Var, Term]) -> bool:
    images = list(m.values())
    return all(isinstance(u, Var) and u.sort == x.sort for x, u in m.items()) and len(set(images)) == len(images)


def find_variant_renaming(e1: ECTerm, e2: ECTerm) -> dict[Var, Var] | None:
    """A renaming δ on Var(s) with sδ = t, if the term parts are variants."""
    m = match(e1.term, e2.term)
    if m is None:
        return None
    full = _full_map(m, variables(e1.term))
    if not _injective_renaming(full):
        return None
    return full  # type: ignore[return-value]


def equiv_by_renaming(e1: ECTerm, e2: ECTerm, delta: Mapping[Var, Term], backend: Backend, route: str = "renaming") -> EquivReport:
    s, t = e1.term, e2.term
    full = _full_map(delta, variables(s))
    if not _injective_renaming(full):
        raise PreconditionError("the supplied map is not an injective renaming on the variables of the left term")
    if apply_subst(full, s) != t:
        raise PreconditionError("the renaming does not map the left term part onto the right one")
    rec = Recorder(backend)
    pending = _require_satisfiable(e1, e2, rec, route)
    if pending:
        return pending
    image = {full[x] for x in e1.logical}
    if image != e2.logical:
        extra = sorted(u.name for u in image - e2.logical) + sorted(y.name for y in e2.logical - image)
        return _report(
            rec,
            Outcome.NOT_EQUIVALENT,
            route,
            condition="logical-vars",
            detail="renamed logical variables differ from the right ones: " + ", ".join(extra),
            renaming=full,
        )
    v = rec.valid(iff(Exists(substitute(e1.constraint, full)), Exists(e2.constraint)))
    if v.unknown:
        return _unknown(rec, route, "constraint", v.reason)
    if v.fails:
        return _report(
            rec,
            Outcome.NOT_EQUIVALENT,
            route,
            condition="constraint",
            detail="the renamed constraints are not equivalent",
            witness=v.witness,
            renaming=full,
        )
    return _report(rec, Outcome.EQUIVALENT, route, renaming=full)


def equiv_same_term(e1: ECTerm, e2: ECTerm, backend: Backend) -> EquivReport:
    if e1.term != e2.term:
        raise PreconditionError("term parts differ")
    ident = {x: x for x in variables(e1.term)}
    return equiv_by_renaming(e1, e2, ident, backend, route="same-term")


# --- positional renamings --------------------------------------------------


def positional_renaming(a: Term, b: Term, fixed: frozenset[Var] = frozenset()) -> tuple[dict[Var, Var] | None, str]:
    """Pair variables of ``a`` and ``b`` at equal positions.

    Fixed variables (context holes) must coincide.  Returns the map, or None
    and the reason the two shapes do not correspond.
    """
    fwd: dict[Var, Var] = {}
    back: dict[Var, Var] = {}
    stack: list[tuple[Position, Term, Term]] = [((), a, b)]
    while stack:
        p, u, v = stack.pop()
        where = fmt_pos(p)
        if isinstance(u, Var) and isinstance(v, Var):
            if u in fixed or v in fixed:
                if u != v:
                    return None, f"hole mismatch at {where}"
                continue
            if u.sort != v.sort:
                return None, f"sorts differ at {where}"
            if fwd.setdefault(u, v) != v:
                return None, f"{u} would be renamed to both {fwd[u]} and {v}"
            if back.setdefault(v, u) != u:
                return None, f"{back[v]} and {u} would both be renamed to {v}"
        elif isinstance(u, Val) or isinstance(v, Val):
            if u != v:
                return None, f"{u} vs {v} at {where}"
        elif isinstance(u, App) and isinstance(v, App):
            if u.fn != v.fn or len(u.args) != len(v.args):
                return None, f"symbols differ at {where}: {u.fn} vs {v.fn}"
            for i, (x, y) in enumerate(zip(u.args, v.args), 1):
                stack.append((p + (i,), x, y))
        else:
            return None, f"shapes differ at {where}"
    return fwd, ""


def _context_renaming(s: Term, t: Term, ps: list[Position]) -> tuple[dict[Var, Var] | None, str]:
    cs, ct = multihole_context(s, ps), multihole_context(t, ps)
    holes = frozenset(Var(f"□{h.index}", h.sort) for h in cs.holes) | frozenset(
        Var(f"□{h.index}", h.sort) for h in ct.holes
    )
    return positional_renaming(cs.term, ct.term, holes)


# --- pattern-general route -------------------------------------------------


def equiv_pattern_general(e1: ECTerm, e2: ECTerm, backend: Backend, route: str = "pattern-general") -> EquivReport:
    for side, e in (("left", e1), ("right", e2)):
        if not is_pattern_general(e):
            raise PreconditionError(f"the {side} term is not pattern-general")
    rec = Recorder(backend)
    pending = _require_satisfiable(e1, e2, rec, route)
    if pending:
        return pending
    s, t = e1.term, e2.term
    ps, qs = positions_of(s, e1.logical), positions_of(t, e2.logical)
    if ps != qs:
        return _report(
            rec,
            Outcome.NOT_EQUIVALENT,
            route,
            condition="positions",
            detail="logical-variable positions differ: "
            f"{{{', '.join(map(fmt_pos, ps))}}} vs {{{', '.join(map(fmt_pos, qs))}}}",
        )
    theta, why = _context_renaming(s, t, ps)
    if theta is None:
        return _report(rec, Outcome.NOT_EQUIVALENT, route, condition="context", detail=why)
    rho: dict[Var, Term] = dict(theta)
    for p in ps:
        z, w = subterm_at(s, p), subterm_at(t, p)
        assert isinstance(z, Var) and isinstance(w, Var)
        if z.sort != w.sort:
            return _report(rec, Outcome.NOT_EQUIVALENT, route, condition="context", detail=f"sorts differ at {fmt_pos(p)}")
        rho[z] = w
    assert _injective_renaming(rho) and apply_subst(rho, s) == t
    assert {rho[z] for z in e1.logical} == e2.logical
    v = rec.valid(iff(Exists(substitute(e1.constraint, rho)), Exists(e2.constraint)))
    if v.unknown:
        return _unknown(rec, route, "constraint", v.reason)
    if v.fails:
        return _report(
            rec,
            Outcome.NOT_EQUIVALENT,
            route,
            condition="constraint",
            detail="the renamed constraints are not equivalent",
            witness=v.witness,
            renaming=rho,
        )
    return _report(rec, Outcome.EQUIVALENT, route, renaming=rho)


def equiv_via_pg(e1: ECTerm, e2: ECTerm, backend: Backend) -> EquivReport:
    return equiv_pattern_general(pg_transform(e1).result, pg_transform(e2).result, backend, route="pg")


# --- position classes ------------------------------------------------------


@dataclass
class PositionClasses:
    """Partition of the logical-variable and value positions under provable equality."""

    base: tuple[Position, ...]
    classes: tuple[tuple[Position, ...], ...]
    forced: dict[Position, Val]
    unresolved: tuple[str, ...] = ()

    def class_of(self, p: Position) -> tuple[Position, ...]:
        for c in self.classes:
            if p in c:
                return c
        raise KeyError(p)

    def representative(self, p: Position) -> Position:
        return self.class_of(p)[0]

    def related(self, p: Position, q: Position) -> bool:
        return q in self.class_of(p)

    @property
    def val_forced(self) -> frozenset[Position]:
        return frozenset(self.forced)

    @property
    def complete(self) -> bool:
        return not self.unresolved

    def partition(self) -> frozenset[frozenset[Position]]:
        return frozenset(frozenset(c) for c in self.classes)

    def format(self) -> str:
        from .syntax import format_classes

        return format_classes(self)


def position_classes(e: ECTerm, backend: Backend | Recorder) -> PositionClasses:
    rec = backend if isinstance(backend, Recorder) else Recorder(backend)
    s, c = e.term, e.constraint
    base = hole_positions(e)
    classes: list[list[Position]] = []
    unresolved: list[str] = []
    hyp = Exists(c)
    for p in base:
        u = subterm_at(s, p)
        home = None
        for cls in classes:
            if any(subterm_at(s, q) == u for q in cls):
                home = cls
                break
        if home is None:
            for cls in classes:
                r = subterm_at(s, cls[0])
                if r.sort != u.sort:
                    continue
                v = rec.valid(implies(hyp, eq(r, u)))
                if v.holds:
                    home = cls
                    break
                if v.unknown:
                    unresolved.append(f"{fmt_pos(cls[0])} ~ {fmt_pos(p)}: {v.reason}")
        if home is None:
            classes.append([p])
        else:
            home.append(p)

    forced: dict[Position, Val] = {}
    model: dict[Var, Value] | None = None
    for cls in classes:
        value = next((subterm_at(s, q) for q in cls if isinstance(subterm_at(s, q), Val)), None)
        if value is None:
            z = subterm_at(s, cls[0])
            if z not in c.free:
                continue  # unconstrained variable
            if model is None:
                w = rec.sat(hyp)
                if not w.holds:
                    unresolved.append(f"no witness for forced values: {w.reason or w.status.value}")
                    break
                model = w.witness or {}
            if z not in model:
                unresolved.append(f"witness lacks {z}")
                continue
            cand = to_val(model[z])
            v = rec.valid(implies(hyp, eq(z, cand)))
            if v.unknown:
                unresolved.append(f"{fmt_pos(cls[0])} = {cand}: {v.reason}")
            if not v.holds:
                continue
            value = cand
        for q in cls:
            forced[q] = value  # type: ignore[assignment]
    return PositionClasses(tuple(base), tuple(tuple(cls) for cls in classes), forced, tuple(unresolved))


def representative_substitution(e: ECTerm, pc: PositionClasses) -> dict[Var, Term]:
    """Each logical variable mapped to its forced value or to its class representative."""
    s = e.term
    first: dict[Var, Position] = {}
    for p, u in subterms(s):
        if isinstance(u, Var) and u in e.logical:
            first.setdefault(u, p)
    mu: dict[Var, Term] = {}
    for z in e.logical_ordered():
        p = first[z]
        mu[z] = pc.forced[p] if p in pc.forced else subterm_at(s, pc.representative(p))
    return mu


def _first_partition_difference(a: PositionClasses, b: PositionClasses) -> str:
    for i, p in enumerate(a.base):
        for q in a.base[i + 1 :]:
            ra, rb = a.related(p, q), b.related(p, q)
            if ra != rb:
                side = "left" if ra else "right"
                return f"positions {fmt_pos(p)} and {fmt_pos(q)} are provably equal on the {side} only"
    return "partitions differ"


def equiv_general(e1: ECTerm, e2: ECTerm, backend: Backend) -> EquivReport:
    route = "general"
    rec = Recorder(backend)
    pending = _require_satisfiable(e1, e2, rec, route)
    if pending:
        return pending
    s, t = e1.term, e2.term

    def no(cond: str, detail: str, **kw) -> EquivReport:
        return _report(rec, Outcome.NOT_EQUIVALENT, route, condition=cond, detail=detail, **kw)

    ps, qs = hole_positions(e1), hole_positions(e2)
    if ps != qs:
        return no("1", f"positions differ: {{{', '.join(map(fmt_pos, ps))}}} vs {{{', '.join(map(fmt_pos, qs))}}}")

    rho, why = _context_renaming(s, t, ps)
    if rho is None:
        return no("2", why)

    pc1 = position_classes(e1, rec)
    pc2 = position_classes(e2, rec)
    if not (pc1.complete and pc2.complete):
        return _unknown(rec, route, "3", "; ".join(pc1.unresolved + pc2.unresolved))
    if pc1.partition() != pc2.partition():
        return no("3", _first_partition_difference(pc1, pc2))

    if pc1.forced != pc2.forced:
        for p in ps:
            a, b = pc1.forced.get(p), pc2.forced.get(p)
            if a != b:
                return no("4", f"forced value at {fmt_pos(p)}: {a if a is not None else 'none'} vs "
                          f"{b if b is not None else 'none'}")

    mu1 = representative_substitution(e1, pc1)
    mu2 = representative_substitution(e2, pc2)
    theta: dict[Var, Term] = {}
    for cls in pc1.classes:
        r = cls[0]
        if r in pc1.forced:
            continue
        z, w = subterm_at(s, r), subterm_at(t, r)
        if not (isinstance(z, Var) and isinstance(w, Var)) or theta.setdefault(z, w) != w:
            return no("5", f"representatives at {fmt_pos(r)} do not induce a renaming")
    if not _injective_renaming(theta):
        return no("5", "representative correspondence is not a renaming")
    lhs = substitute(e1.constraint, {z: apply_subst(theta, u) for z, u in mu1.items()})
    rhs = substitute(e2.constraint, mu2)
    v = rec.valid(iff(Exists(lhs), Exists(rhs)))
    if v.unknown:
        return _unknown(rec, route, "5", v.reason)
    if v.fails:
        return no("5", "constraints under the representative substitutions are not equivalent", witness=v.witness)
    return _report(rec, Outcome.EQUIVALENT, route, renaming={**rho, **theta})


# --- driver ----------------------------------------------------------------


METHODS = ("auto", "general", "pg", "renaming")


def _satisfiability_report(e1: ECTerm, e2: ECTerm, rec: Recorder) -> EquivReport | None:
    v1 = rec.sat(Exists(e1.constraint))
    v2 = rec.sat(Exists(e2.constraint))
    if v1.unknown or v2.unknown:
        return _unknown(rec, "unsat", "satisfiability", v1.reason or v2.reason)
    if v1.fails and v2.fails:
        return _report(rec, Outcome.EQUIVALENT, "unsat", detail="both terms are unsatisfiable")
    if v1.fails or v2.fails:
        side = "left" if v1.fails else "right"
        return _report(
            rec, Outcome.NOT_EQUIVALENT, "unsat", condition="satisfiability", detail=f"only the {side} term is unsatisfiable"
        )
    return None


def equiv_auto(e1: ECTerm, e2: ECTerm, backend: Backend, method: str = "auto", paranoid: bool = False) -> EquivReport:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    rec = Recorder(backend)
    early = _satisfiability_report(e1, e2, rec)
    if early is not None:
        return early

    if method == "renaming":
        delta = find_variant_renaming(e1, e2)
        if delta is None:
            raise PreconditionError("the term parts are not variants of each other")
        report = equiv_by_renaming(e1, e2, delta, backend)
    elif method == "pg":
        report = equiv_via_pg(e1, e2, backend)
    elif method == "general":
        report = equiv_general(e1, e2, backend)
    elif e1.term == e2.term:
        report = equiv_same_term(e1, e2, backend)
    elif is_pattern_general(e1) and is_pattern_general(e2):
        report = equiv_pattern_general(e1, e2, backend)
    else:
        report = equiv_general(e1, e2, backend)

    if paranoid:
        for other in (equiv_general, equiv_via_pg):
            second = other(e1, e2, backend)
            if not (second.unknown or report.unknown) and second.verdict is not report.verdict:
                raise RouteDisagreement(
                    f"route {report.route} says {report.verdict.value}, route {second.route} says {second.verdict.value}"
                )
    report.queries = rec.log + report.queries
    return report


def necessity_violations(e1: ECTerm, e2: ECTerm) -> Iterator[str]:
    """Syntactic facts every equivalent satisfiable pair must exhibit."""
    from .terms import positions

    s, t = e1.term, e2.term
    if positions(s) != positions(t):
        yield "position sets differ"
        return
    if hole_positions(e1) != hole_positions(e2):
        yield "logical-variable and value positions differ"
    holes = set(hole_positions(e1))
    for p, u in subterms(s):
        if p in holes:
            continue
        v = subterm_at(t, p)
        if isinstance(u, App) != isinstance(v, App) or (isinstance(u, App) and u.fn != v.fn):
            yield f"function symbols differ at {fmt_pos(p)}"
    if hole_positions(e1) == hole_positions(e2) and _context_renaming(s, t, hole_positions(e1))[0] is None:
        yield "no renaming between the multihole contexts"
