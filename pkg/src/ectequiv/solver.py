"""Validity and satisfiability of constraint formulas.

Two backends answer the same questions: ``SmtBackend`` drives an external
SMT-LIB2 solver over a pipe, ``GridBackend`` enumerates a bounded integer
grid.  Both return a three-valued :class:`Verdict`.
"""

from __future__ import annotations

import logging
import os
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

from .constraints import ExistentialConstraint
from .model import EvaluationError, Grid, Value, compile_term, find_existential_witness, solutions, valuations
from .terms import BOOL, INT, App, Term, Val, Var, variables

log = logging.getLogger(__name__)

DEFAULT_SOLVER = "z3 -in -t:20000"
SOLVER_ENV = "ECT_SOLVER"


# --- query formulas --------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    term: Term


@dataclass(frozen=True)
class Exists:
    constraint: ExistentialConstraint


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Iff:
    lhs: "Formula"
    rhs: "Formula"


Formula = Union[Atom, Exists, Not, And, Implies, Iff]


def lift(x: Formula | ExistentialConstraint | Term) -> Formula:
    if isinstance(x, ExistentialConstraint):
        return Exists(x)
    if isinstance(x, (Atom, Exists, Not, And, Implies, Iff)):
        return x
    if x.sort != BOOL:
        raise TypeError(f"formula expected, got term of sort {x.sort}")
    return Atom(x)


def implies(a, b) -> Implies:
    return Implies(lift(a), lift(b))


def iff(a, b) -> Iff:
    return Iff(lift(a), lift(b))


def conjunction(*parts) -> And:
    return And(tuple(lift(p) for p in parts))


def negation(a) -> Not:
    return Not(lift(a))


def children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case Not(a):
            return (a,)
        case And(args):
            return args
        case Implies(a, b) | Iff(a, b):
            return (a, b)
    return ()


def free_vars(f: Formula) -> list[Var]:
    seen: dict[Var, None] = {}

    def walk(g: Formula) -> None:
        match g:
            case Atom(t):
                for x in variables(t):
                    seen.setdefault(x, None)
            case Exists(c):
                for x in c.free_ordered():
                    seen.setdefault(x, None)
            case _:
                for h in children(g):
                    walk(h)

    walk(f)
    return list(seen)


# --- verdicts --------------------------------------------------------------


class Status(Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: dict[Var, Value] | None = None
    reason: str = ""

    @classmethod
    def yes(cls, witness: dict[Var, Value] | None = None) -> "Verdict":
        return cls(Status.HOLDS, witness)

    @classmethod
    def no(cls, witness: dict[Var, Value] | None = None, reason: str = "") -> "Verdict":
        return cls(Status.FAILS, witness, reason)

    @classmethod
    def maybe(cls, reason: str) -> "Verdict":
        return cls(Status.UNKNOWN, None, reason)

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def unknown(self) -> bool:
        return self.status is Status.UNKNOWN

    def __str__(self) -> str:
        out = self.status.value
        if self.witness:
            out += " " + ", ".join(f"{x}={_show(v)}" for x, v in self.witness.items())
        if self.reason:
            out += f" ({self.reason})"
        return out


def _show(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


class SolverError(RuntimeError):
    pass


class SolverUnavailable(SolverError):
    pass


# --- backends --------------------------------------------------------------


class Backend:
    """Shared caching front for the concrete backends."""

    name = "abstract"

    def __init__(self):
        self._cache: dict[tuple[str, Formula], Verdict] = {}
        self.queries = 0

    def check_valid(self, f) -> Verdict:
        f = lift(f)
        key = ("valid", f)
        if key not in self._cache:
            self.queries += 1
            self._cache[key] = self._valid(f)
        return self._cache[key]

    def check_sat(self, f) -> Verdict:
        f = lift(f)
        key = ("sat", f)
        if key not in self._cache:
            self.queries += 1
            self._cache[key] = self._sat(f)
        return self._cache[key]

    def _valid(self, f: Formula) -> Verdict:
        raise NotImplementedError

    def _sat(self, f: Formula) -> Verdict:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class GridBackend(Backend):
    """Bounded enumeration over a grid with Kleene three-valued evaluation.

    With ``exact=True`` the caller asserts that every satisfying value of
    every variable lies inside the grid, so a failed search is a definite
    "no".  Otherwise only witnesses found inside the grid are trusted.
    """

    name = "grid"

    def __init__(self, grid: Grid | None = None, exact: bool = False, limit: int = 2_000_000):
        super().__init__()
        self.grid = grid or Grid()
        self.exact = exact
        self.limit = limit

    def eval3(self, f: Formula, rho: dict[Var, Value]) -> bool | None:
        match f:
            case Atom(t):
                try:
                    return compile_term(t)(rho) is True
                except EvaluationError:  # e.g. mod by zero: left open
                    return None
            case Exists(c):
                if find_existential_witness(c, rho, self.grid) is not None:
                    return True
                return False if self.exact else None
            case Not(a):
                r = self.eval3(a, rho)
                return None if r is None else not r
            case And(args):
                seen_none = False
                for a in args:
                    r = self.eval3(a, rho)
                    if r is False:
                        return False
                    seen_none |= r is None
                return None if seen_none else True
            case Implies(a, b):
                ra = self.eval3(a, rho)
                if ra is False:
                    return True
                rb = self.eval3(b, rho)
                if rb is True:
                    return True
                if ra is True and rb is False:
                    return False
                return None
            case Iff(a, b):
                ra, rb = self.eval3(a, rho), self.eval3(b, rho)
                if ra is None or rb is None:
                    return None
                return ra == rb
        raise TypeError(f"not a formula: {f!r}")

    def _space(self, f: Formula) -> list[Var] | Verdict:
        xs = free_vars(f)
        if any(not x.sort.theory for x in xs):
            raise TypeError("formula has term-sorted free variables")
        if self.grid.size(xs) > self.limit:
            return Verdict.maybe(f"grid search over {len(xs)} variables exceeds limit")
        return xs

    def _counterexamples(self, f: Formula, xs: list[Var]) -> Iterator[tuple[dict[Var, Value], bool | None]]:
        """Valuations of ``xs`` with the truth value of ``f`` at each, skipping ones known to be true."""
        if self.exact and isinstance(f, Implies) and isinstance(f.lhs, Exists):
            c = f.lhs.constraint
            if not set(c.bound) & set(free_vars(f.rhs)):
                # enumerate models of the hypothesis jointly, letting its equations fix variables
                unknowns = list(c.bound) + c.free_ordered()
                for rho in valuations([x for x in xs if x not in c.free], self.grid):
                    for env in solutions(c.body, unknowns, rho, self.grid):
                        yield {x: env[x] for x in xs}, self.eval3(f.rhs, env)
                return
        for rho in valuations(xs, self.grid):
            yield rho, self.eval3(f, rho)

    def _valid(self, f: Formula) -> Verdict:
        xs = self._space(f)
        if isinstance(xs, Verdict):
            return xs
        open_case = False
        for rho, r in self._counterexamples(f, xs):
            if r is False:
                return Verdict.no(rho)
            open_case |= r is None
        if open_case:
            return Verdict.maybe("grid search inconclusive")
        if self.exact or not xs:
            return Verdict.yes()
        return Verdict.maybe(f"no counterexample in grid {self.grid}")

    def _sat(self, f: Formula) -> Verdict:
        xs = self._space(f)
        if isinstance(xs, Verdict):
            return xs
        if isinstance(f, Exists):
            c = f.constraint
            for env in solutions(c.body, list(c.bound) + c.free_ordered(), {}, self.grid):
                return Verdict.yes({x: env[x] for x in xs})
            return Verdict.no() if self.exact else Verdict.maybe(f"no model in grid {self.grid}")
        open_case = False
        for rho in valuations(xs, self.grid):
            r = self.eval3(f, rho)
            if r is True:
                return Verdict.yes(rho)
            open_case |= r is None
        if open_case:
            return Verdict.maybe("grid search inconclusive")
        if self.exact:
            return Verdict.no()
        return Verdict.maybe(f"no model in grid {self.grid}")


def resolve_solver_command(cmd: str | Sequence[str] | None = None) -> list[str]:
    """Explicit command, else ``$ECT_SOLVER``, else the z3 default."""
    if cmd is None:
        cmd = os.environ.get(SOLVER_ENV) or DEFAULT_SOLVER
    if isinstance(cmd, str):
        return shlex.split(cmd)
    return list(cmd)


def solver_available(cmd: str | Sequence[str] | None = None) -> bool:
    argv = resolve_solver_command(cmd)
    return bool(argv) and shutil.which(argv[0]) is not None


def _sort_name(x: Var) -> str:
    if x.sort == INT:
        return "Int"
    if x.sort == BOOL:
        return "Bool"
    raise SolverError(f"variable {x} has non-theory sort {x.sort}")


_SMT_OPS = {"<=>": "=", "!=": "distinct", "neg": "-"}


class _Encoder:
    """Formula to SMT-LIB text, with every existential block freshened."""

    def __init__(self):
        self.names: dict[Var, str] = {}
        self.used: set[str] = set()
        self.counter = 0

    def symbol(self, base: str) -> str:
        name = base.replace("|", "_").replace("\\", "_")
        cand = name
        while cand in self.used:
            self.counter += 1
            cand = f"{name}!{self.counter}"
        self.used.add(cand)
        return f"|{cand}|"

    def declare_free(self, xs: Iterable[Var]) -> list[str]:
        out = []
        for x in xs:
            sym = self.symbol(x.name)
            self.names[x] = sym
            out.append(f"(declare-const {sym} {_sort_name(x)})")
        return out

    def term(self, t: Term, env: dict[Var, str]) -> str:
        if isinstance(t, Var):
            return env[t]
        if isinstance(t, Val):
            if t.sort == BOOL:
                return "true" if t.value else "false"
            return str(t.value) if t.value >= 0 else f"(- {-t.value})"
        fn = _SMT_OPS.get(t.fn, t.fn)
        return f"({fn} {' '.join(self.term(a, env) for a in t.args)})"

    def formula(self, f: Formula, env: dict[Var, str]) -> str:
        match f:
            case Atom(t):
                return self.term(t, env)
            case Exists(c):
                if not c.bound:
                    return self.term(c.body, env)
                inner = dict(env)
                decls = []
                for x in c.bound:
                    sym = self.symbol(x.name)
                    inner[x] = sym
                    decls.append(f"({sym} {_sort_name(x)})")
                return f"(exists ({' '.join(decls)}) {self.term(c.body, inner)})"
            case Not(a):
                return f"(not {self.formula(a, env)})"
            case And(args):
                if not args:
                    return "true"
                return f"(and {' '.join(self.formula(a, env) for a in args)})"
            case Implies(a, b):
                return f"(=> {self.formula(a, env)} {self.formula(b, env)})"
            case Iff(a, b):
                return f"(= {self.formula(a, env)} {self.formula(b, env)})"
        raise TypeError(f"not a formula: {f!r}")


def encode_query(f: Formula, negate: bool) -> tuple[list[str], dict[Var, str]]:
    """The declarations and assertion for one query, plus the free-variable symbol table."""
    enc = _Encoder()
    xs = free_vars(f)
    lines = enc.declare_free(xs)
    body = enc.formula(f, dict(enc.names))
    lines.append(f"(assert (not {body}))" if negate else f"(assert {body})")
    return lines, dict(enc.names)


def tokenize_sexpr(text: str) -> Iterator[str]:
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            yield text[i : j + 1]
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and not (text[j] == '"' and (j + 1 >= n or text[j + 1] != '"')):
                j += 2 if text[j] == '"' else 1
            yield text[i : j + 1]
            i = j + 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()|";':
                j += 1
            yield text[i:j]
            i = j


def parse_sexpr(text: str):
    stack: list[list] = [[]]
    for tok in tokenize_sexpr(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SolverError("unbalanced solver reply")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SolverError("unbalanced solver reply")
    return stack[0]


def _model_value(node) -> Value:
    if isinstance(node, str):
        if node == "true":
            return True
        if node == "false":
            return False
        return int(node)
    if len(node) == 2 and node[0] == "-":
        return -_model_value(node[1])
    raise SolverError(f"unsupported model value {node!r}")


def parse_model(text: str, names: dict[Var, str]) -> dict[Var, Value]:
    back = {sym.strip("|"): x for x, sym in names.items()}
    (top,) = parse_sexpr(text) or [[]]
    if top and top[0] == "model":
        top = top[1:]
    out: dict[Var, Value] = {}
    for entry in top:
        if isinstance(entry, list) and entry and entry[0] == "define-fun" and not entry[2]:
            x = back.get(entry[1].strip("|"))
            if x is not None:
                out[x] = _model_value(entry[4])
    for x in names:
        out.setdefault(x, False if x.sort == BOOL else 0)
    return {x: out[x] for x in names}


class SmtSession:
    """One solver child process speaking SMT-LIB2, used for a batch of queries."""

    def __init__(self, argv: list[str]):
        self.argv = argv
        try:
            self.proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as e:
            raise SolverUnavailable(f"cannot start solver {argv[0]!r}: {e}") from e
        self.send("(set-logic ALL)")

    def send(self, *lines: str) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write("\n".join(lines) + "\n")
            self.proc.stdin.flush()
        except BrokenPipeError as e:
            raise SolverError("solver process died") from e

    def readline(self) -> str:
        assert self.proc.stdout is not None
        while True:
            line = self.proc.stdout.readline()
            if not line:
                raise SolverError("solver process closed its output")
            line = line.strip()
            if line:
                return line

    def read_sexpr(self) -> str:
        chunks = []
        depth = 0
        started = False
        while True:
            line = self.readline()
            chunks.append(line)
            for tok in tokenize_sexpr(line):
                if tok == "(":
                    depth += 1
                    started = True
                elif tok == ")":
                    depth -= 1
            if started and depth <= 0:
                return "\n".join(chunks)

    def query(self, lines: list[str], want_model: bool, names: dict[Var, str]) -> tuple[str, dict | None]:
        self.send("(push 1)", *lines, "(check-sat)")
        answer = self.readline()
        if answer.startswith("(error"):
            self.send("(pop 1)")
            raise SolverError(f"solver rejected query: {answer}")
        if answer not in ("sat", "unsat", "unknown"):
            raise SolverError(f"malformed solver reply {answer!r}")
        model = None
        if answer == "sat" and want_model:
            self.send("(get-model)")
            text = self.read_sexpr()
            if text.startswith("(error"):
                raise SolverError(f"solver could not produce a model: {text}")
            model = parse_model(text, names)
        self.send("(pop 1)")
        return answer, model

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.send("(exit)")
                self.proc.wait(timeout=2)
            except (SolverError, subprocess.TimeoutExpired):
                self.proc.kill()
        for stream in (self.proc.stdin, self.proc.stdout):
            if stream is not None:
                stream.close()


class SmtBackend(Backend):
    """Validity as unsatisfiability of the negation, solved by an external process."""

    name = "smt"

    def __init__(self, command: str | Sequence[str] | None = None, models: bool = True):
        super().__init__()
        self.argv = resolve_solver_command(command)
        self.models = models
        self._session: SmtSession | None = None

    @property
    def session(self) -> SmtSession:
        if self._session is None or self._session.proc.poll() is not None:
            self._session = SmtSession(self.argv)
        return self._session

    def _run(self, f: Formula, negate: bool) -> tuple[str, dict | None]:
        lines, names = encode_query(f, negate)
        log.debug("smt query: %s", " ".join(lines))
        try:
            return self.session.query(lines, self.models, names)
        except SolverError:
            self._drop()
            raise

    def _drop(self) -> None:
        if self._session is not None:
            self._session.close()
            self._session = None

    def _valid(self, f: Formula) -> Verdict:
        answer, model = self._run(f, negate=True)
        if answer == "unsat":
            return Verdict.yes()
        if answer == "sat":
            return Verdict.no(model)
        return Verdict.maybe("solver answered unknown")

    def _sat(self, f: Formula) -> Verdict:
        answer, model = self._run(f, negate=False)
        if answer == "sat":
            return Verdict.yes(model)
        if answer == "unsat":
            return Verdict.no()
        return Verdict.maybe("solver answered unknown")

    def close(self) -> None:
        self._drop()


@dataclass
class FallbackBackend(Backend):
    """Ask the primary backend; on Unknown, ask the secondary."""

    primary: Backend
    secondary: Backend
    name: str = field(default="fallback")

    def __post_init__(self):
        Backend.__init__(self)

    def _valid(self, f: Formula) -> Verdict:
        v = self.primary.check_valid(f)
        return self.secondary.check_valid(f) if v.unknown else v

    def _sat(self, f: Formula) -> Verdict:
        v = self.primary.check_sat(f)
        return self.secondary.check_sat(f) if v.unknown else v

    def close(self) -> None:
        self.primary.close()
        self.secondary.close()


def make_backend(kind: str = "smt", grid: Grid | None = None, exact: bool = False, solver_cmd=None) -> Backend:
    if kind == "grid":
        return GridBackend(grid, exact=exact)
    if kind == "smt":
        return SmtBackend(solver_cmd)
    raise ValueError(f"unknown backend {kind!r}")


def check_valid(q, backend: Backend) -> Verdict:
    return backend.check_valid(q)


def check_sat(q, backend: Backend) -> Verdict:
    return backend.check_sat(q)
