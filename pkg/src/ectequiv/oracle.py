"""Brute-force subsumption and equivalence over a bounded integer grid.

Only instances ``s σ`` with ``Dom(σ) = X`` are enumerated.  That loses
nothing: an arbitrary X-valued ``σ`` factors as ``σ|X`` followed by a
substitution on the remaining variables, and a cover ``t γ = s σ|X``
extends to ``t (γ σ') = s σ`` with ``γ σ'`` still Y-valued and respecting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

from .constraints import ExistentialConstraint
from .ecterm import ECTerm
from .model import Grid, Value, find_existential_witness, to_val, valuations
from .solver import Backend, Exists, Verdict
from .terms import Term, Val, Var, apply_subst, match

log = logging.getLogger(__name__)

WARN_COMBINATIONS = 10**7


class GridTooSmall(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    grid: Grid = Grid(-3, 3)
    exact: bool = True  # caller asserts every satisfying value lies inside the grid
    solver: Backend | None = None  # optional cross-check for grid-unsatisfiable constraints


def _satisfied(c: ExistentialConstraint, rho: dict[Var, Value], grid: Grid) -> bool:
    return find_existential_witness(c, rho, grid) is not None


def instances(e: ECTerm, cfg: OracleConfig) -> Iterator[tuple[dict[Var, Val], Term]]:
    """Grid-valued σ with domain X respecting the constraint, paired with ``s σ``."""
    xs = e.logical_ordered()
    n = cfg.grid.size(xs)
    if n > WARN_COMBINATIONS:
        log.warning("oracle enumerates %d substitutions", n)
    seen: set[Term] = set()
    for rho in valuations(xs, cfg.grid):
        if not _satisfied(e.constraint, rho, cfg.grid):
            continue
        sigma = {x: to_val(v) for x, v in rho.items()}
        inst = apply_subst(sigma, e.term)
        if inst in seen:
            continue
        seen.add(inst)
        yield sigma, inst


def covers(e: ECTerm, inst: Term, cfg: OracleConfig) -> bool:
    """Whether ``inst = t γ`` for some Y-valued γ respecting the constraint of ``e``."""
    gamma = match(e.term, inst)
    if gamma is None:
        return False
    rho: dict[Var, Value] = {}
    for y in e.logical:
        u = gamma.get(y, y)
        if not isinstance(u, Val):
            return False
        rho[y] = u.value
    # the matcher is unique, so γ restricted to Y is forced
    return _satisfied(e.constraint, rho, cfg.grid)


def _check_grid(e: ECTerm, cfg: OracleConfig) -> None:
    if cfg.solver is None:
        return
    if next(instances(e, cfg), None) is None and cfg.solver.check_sat(Exists(e.constraint)).holds:
        raise GridTooSmall(f"constraint satisfiable but has no solution in grid {cfg.grid}")


def oracle_subsumes(e1: ECTerm, e2: ECTerm, cfg: OracleConfig = OracleConfig()) -> Verdict:
    _check_grid(e1, cfg)
    for sigma, inst in instances(e1, cfg):
        if not covers(e2, inst, cfg):
            return Verdict.no(sigma, reason="instance not covered")
    if cfg.exact:
        return Verdict.yes()
    return Verdict.maybe(f"every grid instance covered, grid {cfg.grid} not asserted exact")


def oracle_equiv(e1: ECTerm, e2: ECTerm, cfg: OracleConfig = OracleConfig()) -> Verdict:
    forward = oracle_subsumes(e1, e2, cfg)
    if forward.fails:
        return Verdict.no(forward.witness, reason="left instance not covered by right")
    backward = oracle_subsumes(e2, e1, cfg)
    if backward.fails:
        return Verdict.no(backward.witness, reason="right instance not covered by left")
    if forward.holds and backward.holds:
        return Verdict.yes()
    return Verdict.maybe(forward.reason or backward.reason)
