"""Logical constraints and existential constraints ``E x1..xn. phi``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .terms import (
    BOOL,
    TRUE,
    App,
    Term,
    Val,
    Var,
    apply_subst,
    fresh_name,
    is_theory_symbol,
    subterms,
    var_set,
    variables,
)


class ConstraintError(ValueError):
    pass


class CaptureError(ConstraintError):
    pass


def check_logical(phi: Term) -> None:
    """Raise unless ``phi`` is a Bool term over theory symbols and theory-sorted variables."""
    if phi.sort != BOOL:
        raise ConstraintError(f"constraint must have sort Bool, not {phi.sort}")
    for _, u in subterms(phi):
        if isinstance(u, App) and not is_theory_symbol(u.fn):
            raise ConstraintError(f"term symbol {u.fn!r} in a logical constraint")
        if isinstance(u, Var) and not u.sort.theory:
            raise ConstraintError(f"variable {u} of term sort {u.sort} in a logical constraint")


def is_logical(phi: Term) -> bool:
    try:
        check_logical(phi)
    except ConstraintError:
        return False
    return True


@dataclass(frozen=True)
class ExistentialConstraint:
    """A pair of a bound-variable sequence and a logical constraint.

    Equality is syntactic; bound variables are not identified up to renaming.
    """

    bound: tuple[Var, ...]
    body: Term

    def __post_init__(self):
        object.__setattr__(self, "bound", tuple(self.bound))
        check_logical(self.body)
        if len(set(self.bound)) != len(self.bound):
            raise ConstraintError("duplicate bound variable")
        missing = [x for x in self.bound if x not in var_set(self.body)]
        if missing:
            names = ", ".join(map(str, missing))
            raise ConstraintError(f"bound variable(s) {names} do not occur in the body")

    @property
    def free(self) -> frozenset[Var]:
        return var_set(self.body) - set(self.bound)

    @property
    def bound_set(self) -> frozenset[Var]:
        return frozenset(self.bound)

    def free_ordered(self) -> list[Var]:
        bound = set(self.bound)
        return [x for x in variables(self.body) if x not in bound]

    def __str__(self) -> str:
        from .syntax import format_constraint

        return format_constraint(self)


def mk_existential(bound: Iterable[Var], body: Term) -> ExistentialConstraint:
    return ExistentialConstraint(tuple(bound), body)


def plain(body: Term) -> ExistentialConstraint:
    return ExistentialConstraint((), body)


TRIVIAL = plain(TRUE)


def free_and_bound(c: ExistentialConstraint) -> tuple[frozenset[Var], frozenset[Var]]:
    return c.free, c.bound_set


def apply_subst_ec(c: ExistentialConstraint, sigma: Mapping[Var, Term]) -> ExistentialConstraint:
    """Substitute the free variables only; raise CaptureError if a bound name would be captured."""
    free = c.free
    restricted = {x: u for x, u in sigma.items() if x in free}
    bound = c.bound_set
    for x, u in restricted.items():
        clash = var_set(u) & bound
        if clash:
            raise CaptureError(f"substituting {x} would capture bound variable(s) {', '.join(map(str, clash))}")
    return ExistentialConstraint(c.bound, apply_subst(restricted, c.body))


def rename_bound(c: ExistentialConstraint, avoid: Iterable[Var]) -> ExistentialConstraint:
    """Alpha-rename bound variables that clash with ``avoid``.

    Only valid where the constraint is read semantically (solver queries).
    """
    avoid = set(avoid)
    clashing = [x for x in c.bound if x in avoid]
    if not clashing:
        return c
    taken = {v.name for v in avoid} | {v.name for v in var_set(c.body)}
    ren: dict[Var, Term] = {}
    for x in clashing:
        name = fresh_name(x.name, taken)
        taken.add(name)
        ren[x] = Var(name, x.sort)
    bound = tuple(ren.get(x, x) for x in c.bound)
    return ExistentialConstraint(bound, apply_subst(ren, c.body))  # type: ignore[arg-type]


def substitute(c: ExistentialConstraint, sigma: Mapping[Var, Term]) -> ExistentialConstraint:
    """``c sigma`` after renaming bound variables away from the range of sigma."""
    rng = set()
    for x, u in sigma.items():
        if x in c.free:
            rng |= var_set(u)
    return apply_subst_ec(rename_bound(c, rng), sigma)


def variable_condition_variants(s: Term, c: ExistentialConstraint) -> bool:
    """The three equivalent variable conditions relating a term to a constraint.

    (1) FVar ⊆ Var(s) and BVar ∩ Var(s) = ∅; (2) BVar = Var(φ) \\ Var(s);
    (3) FVar = Var(φ) ∩ Var(s).
    """
    vs = var_set(s)
    vphi = var_set(c.body)
    one = c.free <= vs and not (c.bound_set & vs)
    two = c.bound_set == vphi - vs
    three = c.free == vphi & vs
    if not one == two == three:
        raise AssertionError(f"variable conditions disagree: {one}, {two}, {three}")
    return one


def is_value(t: Term) -> bool:
    return isinstance(t, Val)
