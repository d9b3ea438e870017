"""Existentially constrained terms ``<X | s | E x1..xn. phi>``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .constraints import ExistentialConstraint, check_logical, mk_existential, substitute, variable_condition_variants
from .model import to_val
from .solver import Backend, Exists, Verdict
from .terms import BOOL, Term, Val, Var, var_set, variables


class IllFormed(ValueError):
    """A triple violating the variable conditions; ``conditions`` names which ones."""

    MESSAGES = {
        "a": "a free variable of the constraint is not a logical variable",
        "b": "a logical variable does not occur in the term",
        "c": "a bound variable occurs in the term",
        "d": "a logical variable has a term sort",
    }

    def __init__(self, conditions: Iterable[str], detail: str = ""):
        self.conditions = tuple(conditions)
        text = "; ".join(f"({c}) {self.MESSAGES[c]}" for c in self.conditions)
        super().__init__(f"{text}: {detail}" if detail else text)


class Indeterminate(RuntimeError):
    """The backend could not settle a question the caller needs a definite answer to."""


def violated_conditions(logical: frozenset[Var], s: Term, c: ExistentialConstraint) -> tuple[list[str], str]:
    vs = var_set(s)
    found, notes = [], []
    if not c.free <= logical:
        found.append("a")
        notes.append("free but not logical: " + ", ".join(sorted(x.name for x in c.free - logical)))
    if not logical <= vs:
        found.append("b")
        notes.append("not in term: " + ", ".join(sorted(x.name for x in logical - vs)))
    if c.bound_set & vs:
        found.append("c")
        notes.append("bound and in term: " + ", ".join(sorted(x.name for x in c.bound_set & vs)))
    bad_sort = [x for x in logical if not x.sort.theory]
    if bad_sort:
        found.append("d")
        notes.append("term-sorted: " + ", ".join(sorted(x.name for x in bad_sort)))
    return found, "; ".join(notes)


@dataclass(frozen=True)
class ECTerm:
    logical: frozenset[Var]
    term: Term
    constraint: ExistentialConstraint

    def __post_init__(self):
        object.__setattr__(self, "logical", frozenset(self.logical))
        found, detail = violated_conditions(self.logical, self.term, self.constraint)
        sandwiched = self.constraint.free <= self.logical <= var_set(self.term)
        # cross-check against the constraint-level formulations
        structural = [f for f in found if f != "d"]
        assert (not structural) == (sandwiched and variable_condition_variants(self.term, self.constraint))
        if found:
            raise IllFormed(found, detail)

    def logical_ordered(self) -> list[Var]:
        """Logical variables in first-occurrence order in the term."""
        return [x for x in variables(self.term) if x in self.logical]

    @property
    def bound(self) -> tuple[Var, ...]:
        return self.constraint.bound

    @property
    def body(self) -> Term:
        return self.constraint.body

    def __str__(self) -> str:
        from .syntax import format_ecterm

        return format_ecterm(self)


def mk_ecterm(logical: Iterable[Var], s: Term, c: ExistentialConstraint) -> ECTerm:
    return ECTerm(frozenset(logical), s, c)


def embed(s: Term, phi: Term) -> ECTerm:
    """The existentially constrained form of the classical constrained term ``s [phi]``."""
    check_logical(phi)
    vs = var_set(s)
    logical = frozenset(x for x in variables(phi) if x in vs)
    bound = [x for x in variables(phi) if x not in vs]
    return ECTerm(logical, s, mk_existential(bound, phi))


def is_satisfiable(e: ECTerm, backend: Backend) -> Verdict:
    return backend.check_sat(Exists(e.constraint))


def respects(sigma: Mapping[Var, Term], c: ExistentialConstraint, backend: Backend) -> Verdict:
    for x in c.free_ordered():
        if not isinstance(sigma.get(x, x), Val):
            return Verdict.no(reason=f"{x} is not mapped to a value")
    # the instance is closed, so validity and satisfiability coincide
    return backend.check_valid(Exists(substitute(c, sigma)))


def witness_substitution(e: ECTerm, backend: Backend) -> dict[Var, Val] | None:
    """An X-valued substitution with domain X respecting the constraint, or None if unsatisfiable."""
    v = is_satisfiable(e, backend)
    if v.fails:
        return None
    if v.unknown:
        raise Indeterminate(f"satisfiability unknown: {v.reason}")
    model = v.witness or {}
    gamma: dict[Var, Val] = {}
    for x in e.logical_ordered():
        # logical variables outside the constraint are unconstrained
        gamma[x] = to_val(model.get(x, False if x.sort == BOOL else 0))
    return gamma
