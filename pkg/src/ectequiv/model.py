"""The fixed integer/boolean model: evaluation and bounded enumeration."""

from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .constraints import ExistentialConstraint
from .terms import BOOL, INT, App, Sort, Term, Val, Var, is_theory_symbol

Value = int | bool
Valuation = Mapping[Var, Value]

DEFAULT_GRID = (-8, 8)


class EvaluationError(ValueError):
    pass


def smt_mod(a: int, b: int) -> int:
    # SMT-LIB integer convention: 0 <= a mod b < |b|
    if b == 0:
        raise EvaluationError("mod by zero")
    return a % abs(b)


def _implies(a: bool, b: bool) -> bool:
    return (not a) or b


_OPS: dict[str, Callable[..., Value]] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "mod": smt_mod,
    "neg": operator.neg,
    "<=": operator.le,
    "<": operator.lt,
    ">=": operator.ge,
    ">": operator.gt,
    "=": operator.eq,
    "!=": operator.ne,
    "not": operator.not_,
    "=>": _implies,
    "<=>": operator.eq,
}


@lru_cache(maxsize=65536)
def compile_term(t: Term) -> Callable[[Valuation], Value]:
    """Turn a theory term into a closure over valuations."""
    if isinstance(t, Val):
        v = t.value
        return lambda rho: v
    if isinstance(t, Var):
        x = t

        def lookup(rho: Valuation) -> Value:
            try:
                return rho[x]
            except KeyError:
                raise EvaluationError(f"valuation undefined on {x}") from None

        return lookup
    if not is_theory_symbol(t.fn):
        raise EvaluationError(f"cannot evaluate term symbol {t.fn!r}")
    args = [compile_term(a) for a in t.args]
    if t.fn == "and":
        a, b = args
        return lambda rho: a(rho) and b(rho)
    if t.fn == "or":
        a, b = args
        return lambda rho: a(rho) or b(rho)
    fn = _OPS[t.fn]
    if len(args) == 1:
        (a,) = args
        return lambda rho: fn(a(rho))
    a, b = args
    return lambda rho: fn(a(rho), b(rho))


def evaluate(t: Term, rho: Valuation) -> Value:
    return compile_term(t)(rho)


def holds(phi: Term, rho: Valuation) -> bool:
    return evaluate(phi, rho) is True


def to_val(v: Value) -> Val:
    return Val(v, BOOL) if isinstance(v, bool) else Val(v, INT)


@dataclass(frozen=True)
class Grid:
    """Inclusive integer range used for bounded enumeration."""

    lo: int = DEFAULT_GRID[0]
    hi: int = DEFAULT_GRID[1]

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty grid [{self.lo}, {self.hi}]")

    def values(self, sort: Sort) -> tuple[Value, ...]:
        if sort == BOOL:
            return (False, True)
        if sort == INT:
            return tuple(range(self.lo, self.hi + 1))
        raise EvaluationError(f"no grid for term sort {sort}")

    def size(self, variables: Iterable[Var]) -> int:
        n = 1
        for x in variables:
            n *= len(self.values(x.sort))
        return n

    def contains(self, v: Value) -> bool:
        return isinstance(v, bool) or self.lo <= v <= self.hi

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"

    @classmethod
    def parse(cls, text: str) -> "Grid":
        lo, sep, hi = text.partition("..")
        if not sep:
            raise ValueError(f"grid must look like LO..HI, got {text!r}")
        return cls(int(lo), int(hi))


def valuations(xs: Iterable[Var], grid: Grid) -> Iterator[dict[Var, Value]]:
    """All assignments of grid values to ``xs``, in ascending product order."""
    xs = list(xs)
    for combo in itertools.product(*(grid.values(x.sort) for x in xs)):
        yield dict(zip(xs, combo))


def _conjuncts(t: Term) -> list[Term]:
    if isinstance(t, App) and t.fn == "and":
        return _conjuncts(t.args[0]) + _conjuncts(t.args[1])
    return [t]


def _definition(q: Var, eqn: Term, known: set[Var]) -> Term | None:
    """The right-hand side if ``eqn`` reads ``q = e`` (either way round) with e over known variables."""
    if not (isinstance(eqn, App) and eqn.fn == "="):
        return None
    for lhs, rhs in (eqn.args, eqn.args[::-1]):
        if lhs == q and _vars_of(rhs) <= known:
            return rhs
    return None


def _vars_of(t: Term) -> set[Var]:
    if isinstance(t, Var):
        return {t}
    if isinstance(t, App):
        out: set[Var] = set()
        for a in t.args:
            out |= _vars_of(a)
        return out
    return set()


@lru_cache(maxsize=4096)
def _search_plan(body: Term, known: frozenset[Var], order: tuple[Var, ...]) -> tuple[tuple[Var, Callable | None], ...]:
    """Order the unknowns; those pinned by a top-level equation are computed, not enumerated."""
    known = set(known)
    remaining = list(order)
    parts = _conjuncts(body)
    plan = []
    while remaining:
        for q in remaining:
            rhs = next((d for d in (_definition(q, e, known) for e in parts) if d is not None), None)
            if rhs is not None:
                plan.append((q, compile_term(rhs)))
                break
        else:
            q = remaining[0]
            plan.append((q, None))
        remaining.remove(q)
        known.add(q)
    return tuple(plan)


def solutions(body: Term, unknowns: Sequence[Var], rho: Valuation, grid: Grid) -> Iterator[dict[Var, Value]]:
    """Every grid assignment to ``unknowns`` that, together with ``rho``, makes ``body`` true.

    The yielded dict is reused between steps; copy it to keep it.
    """
    compiled = compile_term(body)
    plan = _search_plan(body, frozenset(rho).difference(unknowns), tuple(unknowns))
    env = dict(rho)

    def search(i: int) -> Iterator[dict[Var, Value]]:
        if i == len(plan):
            try:
                ok = compiled(env) is True
            except EvaluationError:
                ok = False
            if ok:
                yield env
            return
        q, rhs = plan[i]
        if rhs is not None:
            try:
                v = rhs(env)
            except EvaluationError:
                return
            if grid.contains(v):
                env[q] = v
                yield from search(i + 1)
            return
        for v in grid.values(q.sort):
            env[q] = v
            yield from search(i + 1)

    return search(0)


def find_existential_witness(c: ExistentialConstraint, rho: Valuation, grid: Grid) -> dict[Var, Value] | None:
    """A grid assignment to the bound variables making the body true."""
    for env in solutions(c.body, c.bound, rho, grid):
        return {q: env[q] for q in c.bound}
    return None


def eval_existential(c: ExistentialConstraint, rho: Valuation, grid: Grid) -> bool:
    """Whether some grid assignment to the bound variables makes the body true.

    Exact when the body confines its bound variables to the grid.
    """
    return find_existential_witness(c, rho, grid) is not None
