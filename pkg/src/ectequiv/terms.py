"""Sorted first-order terms, positions, substitutions and matching."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union


@dataclass(frozen=True)
class Sort:
    name: str
    theory: bool = False

    def __str__(self) -> str:
        return self.name


INT = Sort("Int", theory=True)
BOOL = Sort("Bool", theory=True)
THEORY_SORTS = {"Int": INT, "Bool": BOOL}


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort = INT

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Var({self.name!r}, {self.sort.name})"


@dataclass(frozen=True)
class Val:
    """A value: an integer literal or a boolean constant."""

    value: int | bool
    sort: Sort = INT

    def __post_init__(self):
        if self.sort == BOOL and not isinstance(self.value, bool):
            raise TypeError(f"boolean value expected, got {self.value!r}")
        if self.sort == INT and (isinstance(self.value, bool) or not isinstance(self.value, int)):
            raise TypeError(f"integer value expected, got {self.value!r}")

    def __str__(self) -> str:
        if self.sort == BOOL:
            return "true" if self.value else "false"
        return str(self.value)

    def __repr__(self) -> str:
        return f"Val({self.value!r})"


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...]
    sort: Sort
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.fn, self.args, self.sort)))

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"App({self.fn!r}, {self.args!r})"


Term = Union[Var, Val, App]
Position = tuple[int, ...]
Substitution = dict[Var, Term]

TRUE = Val(True, BOOL)
FALSE = Val(False, BOOL)


def val(v: int | bool) -> Val:
    return Val(v, BOOL) if isinstance(v, bool) else Val(v, INT)


class SortError(TypeError):
    pass


class PositionError(ValueError):
    pass


# theory symbols: name -> (argument sorts, result sort); "=" and "!=" are
# resolved per argument sort
THEORY_SYMBOLS: dict[str, tuple[tuple[Sort, ...], Sort]] = {
    "+": ((INT, INT), INT),
    "-": ((INT, INT), INT),
    "*": ((INT, INT), INT),
    "mod": ((INT, INT), INT),
    "neg": ((INT,), INT),
    "<=": ((INT, INT), BOOL),
    "<": ((INT, INT), BOOL),
    ">=": ((INT, INT), BOOL),
    ">": ((INT, INT), BOOL),
    "and": ((BOOL, BOOL), BOOL),
    "or": ((BOOL, BOOL), BOOL),
    "not": ((BOOL,), BOOL),
    "=>": ((BOOL, BOOL), BOOL),
    "<=>": ((BOOL, BOOL), BOOL),
}
POLYMORPHIC = {"=", "!="}


def is_theory_symbol(fn: str) -> bool:
    return fn in THEORY_SYMBOLS or fn in POLYMORPHIC


@dataclass
class Signature:
    """Term symbols declared by the user; theory symbols are built in."""

    symbols: dict[str, tuple[tuple[Sort, ...], Sort]] = field(default_factory=dict)

    def declare(self, name: str, args: Iterable[Sort], result: Sort) -> None:
        args = tuple(args)
        if is_theory_symbol(name):
            raise SortError(f"cannot redeclare theory symbol {name!r}")
        old = self.symbols.get(name)
        if old is not None and old != (args, result):
            raise SortError(f"conflicting declarations for {name!r}")
        self.symbols[name] = (args, result)

    def sorts(self) -> dict[str, Sort]:
        out = dict(THEORY_SORTS)
        for args, res in self.symbols.values():
            for s in (*args, res):
                out[s.name] = s
        return out

    def app(self, fn: str, *args: Term) -> App:
        return mk_app(fn, args, self)

    def merge(self, other: "Signature") -> "Signature":
        merged = Signature(dict(self.symbols))
        for name, (args, res) in other.symbols.items():
            merged.declare(name, args, res)
        return merged


def mk_app(fn: str, args: Iterable[Term], sig: Signature | None = None) -> App:
    """Build a sort-checked application."""
    args = tuple(args)
    if fn in POLYMORPHIC:
        if len(args) != 2:
            raise SortError(f"{fn} expects 2 arguments, got {len(args)}")
        a, b = args
        if a.sort != b.sort or not a.sort.theory:
            raise SortError(f"{fn} needs two arguments of one theory sort, got {a.sort} and {b.sort}")
        return App(fn, args, BOOL)
    if fn in THEORY_SYMBOLS:
        decl = THEORY_SYMBOLS[fn]
    elif sig is not None and fn in sig.symbols:
        decl = sig.symbols[fn]
    else:
        raise SortError(f"undeclared function symbol {fn!r}")
    arg_sorts, result = decl
    if len(arg_sorts) != len(args):
        raise SortError(f"{fn} expects {len(arg_sorts)} arguments, got {len(args)}")
    for i, (expected, a) in enumerate(zip(arg_sorts, args), 1):
        if a.sort != expected:
            raise SortError(f"argument {i} of {fn} has sort {a.sort}, expected {expected}")
    return App(fn, args, result)


# convenience constructors for theory terms
def eq(a: Term, b: Term) -> App:
    return mk_app("=", (a, b))


def conj(*parts: Term) -> Term:
    """Left-nested conjunction; the empty conjunction is true."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = App("and", (out, p), BOOL)
    return out


def op(fn: str, *args: Term) -> App:
    return mk_app(fn, args)


# --- traversal -------------------------------------------------------------


def subterms(t: Term, pos: Position = ()) -> Iterator[tuple[Position, Term]]:
    """Pre-order walk yielding (position, subterm); positions come out in lexicographic order."""
    yield pos, t
    if isinstance(t, App):
        for i, a in enumerate(t.args, 1):
            yield from subterms(a, pos + (i,))


def variables(*ts: Term) -> list[Var]:
    """Variables in left-to-right first-occurrence order."""
    seen: dict[Var, None] = {}
    for t in ts:
        for _, u in subterms(t):
            if isinstance(u, Var):
                seen.setdefault(u, None)
    return list(seen)


def var_set(*ts: Term) -> frozenset[Var]:
    return frozenset(variables(*ts))


def values_in(t: Term) -> set[Val]:
    return {u for _, u in subterms(t) if isinstance(u, Val)}


def positions(t: Term) -> list[Position]:
    return [p for p, _ in subterms(t)]


def positions_of(t: Term, symbols: Iterable[Var] | None = None, *, with_values: bool = False) -> list[Position]:
    """Positions whose symbol is one of ``symbols`` (or a value if ``with_values``).

    ``symbols=None`` without ``with_values`` is the universal filter.
    """
    if symbols is None and not with_values:
        return positions(t)
    wanted = frozenset(symbols or ())
    out = []
    for p, u in subterms(t):
        if (isinstance(u, Var) and u in wanted) or (with_values and isinstance(u, Val)):
            out.append(p)
    return out


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if not isinstance(t, App) or not 1 <= i <= len(t.args):
            raise PositionError(f"invalid position {fmt_pos(p)}")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, u: Term) -> Term:
    old = subterm_at(t, p)
    if old.sort != u.sort:
        raise SortError(f"cannot replace {old.sort} subterm at {fmt_pos(p)} by {u.sort} term")
    return _replace(t, p, u)


def _replace(t: Term, p: Position, u: Term) -> Term:
    if not p:
        return u
    assert isinstance(t, App)
    i = p[0] - 1
    args = list(t.args)
    args[i] = _replace(args[i], p[1:], u)
    return App(t.fn, tuple(args), t.sort)


def root_symbol(t: Term) -> object:
    """t(ε): the variable, the value, or the function symbol name."""
    return t.fn if isinstance(t, App) else t


def is_parallel(p: Position, q: Position) -> bool:
    n = min(len(p), len(q))
    return p[:n] != q[:n]


def fmt_pos(p: Position) -> str:
    return ".".join(map(str, p)) if p else "eps"


def parse_pos(text: str) -> Position:
    text = text.strip()
    if text in ("eps", "ε", ""):
        return ()
    return tuple(int(x) for x in text.split("."))


# --- multihole contexts ----------------------------------------------------


@dataclass(frozen=True)
class Hole:
    sort: Sort
    index: int


@dataclass(frozen=True)
class Context:
    """A term with sorted holes at ``positions``."""

    term: Term  # holes are encoded as reserved variables
    positions: tuple[Position, ...]
    holes: tuple[Hole, ...]

    def fill(self, fillers: Iterable[Term]) -> Term:
        fillers = tuple(fillers)
        if len(fillers) != len(self.holes):
            raise ValueError(f"context has {len(self.holes)} holes, got {len(fillers)} terms")
        out = self.term
        for p, hole, f in zip(self.positions, self.holes, fillers):
            if f.sort != hole.sort:
                raise SortError(f"hole {hole.index} has sort {hole.sort}, filler has {f.sort}")
            out = _replace(out, p, f)
        return out

    def same_shape(self, other: "Context") -> bool:
        return self.positions == other.positions and self.term == other.term


def _hole_var(h: Hole) -> Var:
    return Var(f"□{h.index}", h.sort)


def multihole_context(t: Term, ps: Iterable[Position]) -> Context:
    ps = tuple(ps)
    for i, p in enumerate(ps):
        for q in ps[i + 1:]:
            if not is_parallel(p, q):
                raise PositionError(f"positions {fmt_pos(p)} and {fmt_pos(q)} overlap")
    holes = []
    out = t
    for i, p in enumerate(ps, 1):
        h = Hole(subterm_at(t, p).sort, i)
        holes.append(h)
        out = _replace(out, p, _hole_var(h))
    return Context(out, ps, tuple(holes))


# --- substitutions ---------------------------------------------------------


def apply_subst(sigma: Mapping[Var, Term], t: Term) -> Term:
    if not sigma:
        return t
    return _apply(sigma, t)


def _apply(sigma: Mapping[Var, Term], t: Term) -> Term:
    if isinstance(t, Var):
        return sigma.get(t, t)
    if isinstance(t, Val):
        return t
    args = tuple(_apply(sigma, a) for a in t.args)
    return App(t.fn, args, t.sort)


def check_subst(sigma: Mapping[Var, Term]) -> None:
    for x, u in sigma.items():
        if x.sort != u.sort:
            raise SortError(f"substitution maps {x} : {x.sort} to a term of sort {u.sort}")


def domain(sigma: Mapping[Var, Term]) -> set[Var]:
    return {x for x, u in sigma.items() if u != x}


def normalize(sigma: Mapping[Var, Term]) -> Substitution:
    return {x: u for x, u in sigma.items() if u != x}


def compose(second: Mapping[Var, Term], first: Mapping[Var, Term]) -> Substitution:
    """The substitution that applies ``first`` and then ``second``."""
    out = {x: apply_subst(second, u) for x, u in first.items()}
    for x, u in second.items():
        out.setdefault(x, u)
    return normalize(out)


def restrict(sigma: Mapping[Var, Term], keep: Iterable[Var]) -> Substitution:
    keep = set(keep)
    return {x: u for x, u in sigma.items() if x in keep}


def is_renaming(delta: Mapping[Var, Term]) -> bool:
    images = [u for u in delta.values()]
    return all(isinstance(u, Var) for u in images) and len(set(images)) == len(images) and all(
        x.sort == u.sort for x, u in delta.items()
    )


def as_permutation(delta: Mapping[Var, Var]) -> dict[Var, Var]:
    """Close an injective variable map into a bijection on the variables it mentions."""
    if not is_renaming(delta):
        raise ValueError("not an injective, sort-preserving variable map")
    perm = {x: y for x, y in delta.items()}
    # chase open chains back so the map permutes dom ∪ ran
    missing = [y for y in perm.values() if y not in perm]
    free = [x for x in perm if x not in set(perm.values())]
    by_sort: dict[Sort, list[Var]] = {}
    for x in free:
        by_sort.setdefault(x.sort, []).append(x)
    for y in missing:
        perm[y] = by_sort[y.sort].pop(0)
    return perm


def invert(delta: Mapping[Var, Var]) -> dict[Var, Var]:
    perm = as_permutation(delta)
    return {y: x for x, y in perm.items()}


# --- matching --------------------------------------------------------------


def match(pattern: Term, target: Term, frozen: Iterable[Var] = ()) -> Substitution | None:
    """The matcher σ with ``pattern σ = target``, binding no frozen variable.

    Identity bindings are dropped from the result.
    """
    frozen = frozenset(frozen)
    sigma: dict[Var, Term] = {}
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            if p in frozen:
                if p != t:
                    return None
                continue
            if p.sort != t.sort:
                return None
            bound = sigma.get(p)
            if bound is None:
                sigma[p] = t
            elif bound != t:
                return None
        elif isinstance(p, Val):
            if p != t:
                return None
        else:
            if not isinstance(t, App) or t.fn != p.fn or len(t.args) != len(p.args):
                return None
            stack.extend(zip(p.args, t.args))
    return normalize(sigma)


def fresh_name(base: str, avoid: set[str]) -> str:
    """A fresh name derived from ``base`` outside ``avoid``."""
    if base not in avoid:
        return base
    k = 1
    while f"{base}_{k}" in avoid:
        k += 1
    return f"{base}_{k}"
