"""Pattern-general terms and the transformation that produces them."""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import mk_existential, substitute
from .ecterm import ECTerm
from .solver import Backend, Exists, Verdict, iff
from .terms import Position, Term, Val, Var, conj, eq, fresh_name, positions_of, replace_at, subterm_at, subterms, var_set


def is_value_free(e: ECTerm) -> bool:
    return not any(isinstance(u, Val) for _, u in subterms(e.term))


def is_logically_linear(e: ECTerm) -> bool:
    seen: set[Var] = set()
    for _, u in subterms(e.term):
        if isinstance(u, Var) and u in e.logical:
            if u in seen:
                return False
            seen.add(u)
    return True


def is_pattern_general(e: ECTerm) -> bool:
    return is_value_free(e) and is_logically_linear(e)


def hole_positions(e: ECTerm) -> list[Position]:
    """Positions holding a logical variable or a value, lexicographically ordered."""
    return positions_of(e.term, e.logical, with_values=True)


@dataclass(frozen=True)
class PGResult:
    result: ECTerm
    hole_positions: tuple[Position, ...]
    fresh_vars: tuple[Var, ...]
    back_substitution: dict[Var, Term]


def pg_transform(e: ECTerm, prefix: str = "w") -> PGResult:
    s = e.term
    ps = hole_positions(e)
    taken = {x.name for x in var_set(s, e.body)}
    fresh = []
    for i, p in enumerate(ps, 1):
        name = fresh_name(f"{prefix}{i}", taken)
        taken.add(name)
        fresh.append(Var(name, subterm_at(s, p).sort))
    t = s
    for p, w in zip(ps, fresh):
        t = replace_at(t, p, w)
    body = conj(e.body, *(eq(subterm_at(s, p), w) for p, w in zip(ps, fresh)))
    bound = list(e.bound) + e.logical_ordered()
    result = ECTerm(frozenset(fresh), t, mk_existential(bound, body))
    back = {w: subterm_at(s, p) for p, w in zip(ps, fresh)}
    return PGResult(result, tuple(ps), tuple(fresh), back)


def back_validity_check(e: ECTerm, r: PGResult, backend: Backend) -> Verdict:
    """Check that substituting the removed subterms back recovers the original constraint."""
    return backend.check_valid(iff(Exists(e.constraint), Exists(substitute(r.result.constraint, r.back_substitution))))
