"""Text format for signatures and constrained terms.

Example file::

    sig f : Int Int -> T ;
    term left  = <{x} | f(x, y) | E z. x = z + z> ;
    cterm right = f(x, y) [ x mod 2 = 0 ] ;

Identifiers not declared in the signature are variables.  Their sorts are
inferred from use (default ``Int``) or given explicitly as ``x:Bool``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .constraints import ExistentialConstraint, mk_existential
from .ecterm import ECTerm, embed
from .terms import (
    BOOL,
    INT,
    POLYMORPHIC,
    THEORY_SORTS,
    THEORY_SYMBOLS,
    App,
    Signature,
    Sort,
    SortError,
    Term,
    Val,
    Var,
    fmt_pos,
    mk_app,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


UNICODE = {
    "⟨": "<",
    "⟩": "⟩",
    "∃": "E",
    "∧": "/\\",
    "∨": "\\/",
    "¬": "not",
    "⇒": "=>",
    "⇔": "<=>",
    "≥": ">=",
    "≤": "<=",
    "≠": "!=",
    "×": "*",
    "→": "->",
    "∅": "",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*|//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_'′]*)
  | (?P<op><=>|=>|->|/\\|\\/|<=|>=|!=|[<>=+\-*(){}\[\]|,;:.⟩])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch in UNICODE and ch != "⟩":
            rep = UNICODE[ch]
            if rep:
                kind = "ident" if rep in ("E", "not") else "op"
                out.append(Token(kind, rep, line, pos - line_start + 1))
            else:  # the empty-set sign stands for an empty variable list
                pass
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {ch!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind == "ws":
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = pos + s.rindex("\n") + 1
        else:
            if kind == "ident":
                s = s.replace("′", "'")
            out.append(Token(kind, s, line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# --- untyped syntax trees --------------------------------------------------


@dataclass
class RVar:
    name: str
    annot: str | None
    tok: Token


@dataclass
class RLit:
    value: int | bool


@dataclass
class RApp:
    fn: str
    args: list
    tok: Token


KEYWORDS = {"sig", "term", "cterm", "not", "mod", "true", "false"}
COMPARISONS = {"=", "!=", "<=", "<", ">=", ">"}


class Parser:
    def __init__(self, text: str, sig: Signature | None = None):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig if sig is not None else Signature()

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident" or self.tok.text in KEYWORDS:
            self.fail(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    # declarations
    def sort(self) -> Sort:
        name = self.ident().text
        return THEORY_SORTS.get(name) or Sort(name)

    def declaration(self) -> None:
        self.expect("sig")
        name = self.ident()
        self.expect(":")
        args = []
        while not self.at("->"):
            args.append(self.sort())
            if self.at(",") or self.at("*"):
                self.advance()
        self.expect("->")
        result = self.sort()
        self.expect(";")
        try:
            self.sig.declare(name.text, args, result)
        except SortError as e:
            self.fail(str(e), name)

    # expressions
    def closing_angle(self) -> bool:
        if self.tok.text == "⟩":
            return True
        return self.at(">") and (self.peek().kind == "eof" or self.peek().text == ";")

    def expr(self):
        left = self.implication()
        while self.at("<=>"):
            t = self.advance()
            left = RApp("<=>", [left, self.implication()], t)
        return left

    def implication(self):
        left = self.disjunction()
        if self.at("=>"):
            t = self.advance()
            return RApp("=>", [left, self.implication()], t)
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.at("\\/"):
            t = self.advance()
            left = RApp("or", [left, self.conjunction()], t)
        return left

    def conjunction(self):
        left = self.comparison()
        while self.at("/\\"):
            t = self.advance()
            left = RApp("and", [left, self.comparison()], t)
        return left

    def comparison(self):
        left = self.additive()
        if self.tok.kind == "op" and self.tok.text in COMPARISONS and not self.closing_angle():
            t = self.advance()
            left = RApp(t.text, [left, self.additive()], t)
        return left

    def additive(self):
        left = self.multiplicative()
        while self.at("+") or self.at("-"):
            t = self.advance()
            left = RApp(t.text, [left, self.multiplicative()], t)
        return left

    def multiplicative(self):
        left = self.unary()
        while self.at("*") or self.at("mod"):
            t = self.advance()
            left = RApp(t.text, [left, self.unary()], t)
        return left

    def unary(self):
        if self.at("not"):
            t = self.advance()
            return RApp("not", [self.unary()], t)
        if self.at("-"):
            t = self.advance()
            if self.tok.kind == "int":
                return RLit(-int(self.advance().text))
            return RApp("neg", [self.unary()], t)
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return RLit(int(t.text))
        if self.at("true") or self.at("false"):
            self.advance()
            return RLit(t.text == "true")
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        name = self.ident()
        if self.at("("):
            self.advance()
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.at(","):
                    self.advance()
                    args.append(self.expr())
            self.expect(")")
            if name.text not in self.sig.symbols:
                self.fail(f"undeclared function symbol {name.text!r}", name)
            return RApp(name.text, args, name)
        if name.text in self.sig.symbols:
            return RApp(name.text, [], name)
        annot = None
        if self.at(":"):
            self.advance()
            annot = self.ident().text
        return RVar(name.text, annot, name)

    def var_list(self, stop: set[str]) -> list[RVar]:
        out = []
        while not any(self.at(s) for s in stop):
            name = self.ident()
            annot = None
            if self.at(":"):
                self.advance()
                annot = self.ident().text
            out.append(RVar(name.text, annot, name))
            if self.at(","):
                self.advance()
        return out

    def raw_ecterm(self):
        self.expect("<")
        self.expect("{")
        logical = self.var_list({"}"})
        self.expect("}")
        self.expect("|")
        s = self.expr()
        self.expect("|")
        bound: list[RVar] = []
        if self.at("E") and self.peek().kind == "ident":
            self.advance()
            bound = self.var_list({"."})
            self.expect(".")
        phi = self.expr()
        if not self.closing_angle():
            self.fail(f"expected '>' closing the term, found {self.tok.text or 'end of input'!r}")
        self.advance()
        return logical, s, bound, phi


# --- sort inference and elaboration ----------------------------------------


class _Elaborator:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.env: dict[str, Sort] = {}
        self.changed = False

    def sort_named(self, name: str, tok: Token) -> Sort:
        sorts = self.sig.sorts()
        if name not in sorts:
            raise ParseError(f"unknown sort {name!r}", tok.line, tok.col)
        return sorts[name]

    def bind(self, v: RVar, sort: Sort) -> None:
        old = self.env.get(v.name)
        if old is None:
            self.env[v.name] = sort
            self.changed = True
        elif old != sort:
            raise ParseError(f"variable {v.name} used at sorts {old} and {sort}", v.tok.line, v.tok.col)

    def infer(self, node, expected: Sort | None = None) -> Sort | None:
        if isinstance(node, RLit):
            got = BOOL if isinstance(node.value, bool) else INT
        elif isinstance(node, RVar):
            if node.annot is not None:
                self.bind(node, self.sort_named(node.annot, node.tok))
            if expected is not None:
                self.bind(node, expected)
            return self.env.get(node.name)
        elif node.fn in POLYMORPHIC:
            a, b = node.args
            target = self.infer(a) or self.infer(b)
            if target is not None:
                self.infer(a, target)
                self.infer(b, target)
            got = BOOL
        else:
            decl = THEORY_SYMBOLS.get(node.fn) or self.sig.symbols.get(node.fn)
            if decl is None:
                raise ParseError(f"undeclared function symbol {node.fn!r}", node.tok.line, node.tok.col)
            arg_sorts, got = decl
            if len(arg_sorts) != len(node.args):
                raise ParseError(
                    f"{node.fn} expects {len(arg_sorts)} arguments, got {len(node.args)}", node.tok.line, node.tok.col
                )
            for a, srt in zip(node.args, arg_sorts):
                self.infer(a, srt)
        if expected is not None and got != expected:
            tok = getattr(node, "tok", None)
            raise ParseError(f"expected a term of sort {expected}, got {got}", *(tok.line, tok.col) if tok else (0, 0))
        return got

    def solve(self, roots: list[tuple[object, Sort | None]], names: Iterable[str]) -> None:
        self.changed = True
        while self.changed:
            self.changed = False
            for node, expected in roots:
                self.infer(node, expected)
        for n in names:
            self.env.setdefault(n, INT)
        for node, expected in roots:
            self.infer(node, expected)

    def build(self, node) -> Term:
        if isinstance(node, RLit):
            return Val(node.value, BOOL if isinstance(node.value, bool) else INT)
        if isinstance(node, RVar):
            return Var(node.name, self.env[node.name])
        args = [self.build(a) for a in node.args]
        try:
            return mk_app(node.fn, args, self.sig)
        except SortError as e:
            raise ParseError(str(e), node.tok.line, node.tok.col) from None


def _names(node, acc: list[str]) -> list[str]:
    if isinstance(node, RVar):
        acc.append(node.name)
    elif isinstance(node, RApp):
        for a in node.args:
            _names(a, acc)
    return acc


def _elaborate_ecterm(sig: Signature, raw) -> ECTerm:
    logical, s, bound, phi = raw
    el = _Elaborator(sig)
    names = [v.name for v in logical] + _names(s, []) + [v.name for v in bound] + _names(phi, [])
    el.solve([*((v, None) for v in logical), (s, None), *((v, None) for v in bound), (phi, BOOL)], names)
    xs = frozenset(Var(v.name, el.env[v.name]) for v in logical)
    body = el.build(phi)
    from .constraints import ConstraintError

    try:
        c = mk_existential([Var(v.name, el.env[v.name]) for v in bound], body)
    except ConstraintError as e:
        tok = bound[0].tok if bound else None
        raise ParseError(str(e), *(tok.line, tok.col) if tok else (0, 0)) from None
    return ECTerm(xs, el.build(s), c)


def _elaborate_cterm(sig: Signature, s_raw, phi_raw) -> tuple[Term, Term]:
    el = _Elaborator(sig)
    el.solve([(s_raw, None), (phi_raw, BOOL)], _names(s_raw, []) + _names(phi_raw, []))
    return el.build(s_raw), el.build(phi_raw)


# --- files -----------------------------------------------------------------


@dataclass
class ProblemFile:
    signature: Signature = field(default_factory=Signature)
    terms: dict[str, ECTerm] = field(default_factory=dict)
    classical: dict[str, tuple[Term, Term]] = field(default_factory=dict)  # cterm items before embedding

    def names(self) -> list[str]:
        return list(self.terms)

    def __getitem__(self, name: str) -> ECTerm:
        return self.terms[name]


def parse(text: str, sig: Signature | None = None) -> ProblemFile:
    p = Parser(text, Signature(dict(sig.symbols)) if sig else None)
    pf = ProblemFile(p.sig)
    while p.at("sig"):
        p.declaration()
    while p.tok.kind != "eof":
        if p.at("sig"):
            p.fail("declarations must precede terms")
        kind = p.tok.text
        if kind not in ("term", "cterm"):
            p.fail(f"expected 'term' or 'cterm', found {kind!r}")
        p.advance()
        name = p.ident()
        if name.text in pf.terms:
            p.fail(f"duplicate name {name.text!r}", name)
        p.expect("=")
        if kind == "term":
            pf.terms[name.text] = _elaborate_ecterm(p.sig, p.raw_ecterm())
        else:
            s_raw = p.expr()
            p.expect("[")
            phi_raw = p.expr()
            p.expect("]")
            s, phi = _elaborate_cterm(p.sig, s_raw, phi_raw)
            pf.classical[name.text] = (s, phi)
            pf.terms[name.text] = embed(s, phi)
        p.expect(";")
    return pf


def parse_ecterm_text(text: str, sig: Signature | None = None) -> ECTerm:
    p = Parser(text, sig)
    raw = p.raw_ecterm()
    if p.at(";"):
        p.advance()
    if p.tok.kind != "eof":
        p.fail("trailing input")
    return _elaborate_ecterm(p.sig, raw)


def parse_term_text(text: str, sig: Signature | None = None) -> Term:
    p = Parser(text, sig)
    raw = p.expr()
    if p.tok.kind != "eof":
        p.fail("trailing input")
    el = _Elaborator(p.sig)
    el.solve([(raw, None)], _names(raw, []))
    return el.build(raw)


def parse_var(text: str) -> Var:
    name, _, sort = text.partition(":")
    if not sort or sort == "Int":
        return Var(name, INT)
    return Var(name, THEORY_SORTS.get(sort) or Sort(sort))


# --- printing --------------------------------------------------------------

_BINARY = {
    "<=>": (1, "<=>"),
    "=>": (2, "=>"),
    "or": (3, "\\/"),
    "and": (4, "/\\"),
    "=": (5, "="),
    "!=": (5, "!="),
    "<=": (5, "<="),
    "<": (5, "<"),
    ">=": (5, ">="),
    ">": (5, ">"),
    "+": (6, "+"),
    "-": (6, "-"),
    "*": (7, "*"),
    "mod": (7, "mod"),
}
_UNARY_LEVEL = 8


class Printer:
    def __init__(self, annotate: bool = False):
        self.annotate = annotate
        self.done: set[Var] = set()

    def var(self, x: Var) -> str:
        if self.annotate and x.sort != INT and x not in self.done:
            self.done.add(x)
            return f"{x.name}:{x.sort.name}"
        return x.name

    def term(self, t: Term, ctx: int = 0) -> str:
        if isinstance(t, Var):
            return self.var(t)
        if isinstance(t, Val):
            out = str(t)
            return f"({out})" if t.sort == INT and t.value < 0 and ctx > _UNARY_LEVEL else out
        if t.fn in _BINARY:
            level, sym = _BINARY[t.fn]
            a, b = t.args
            if t.fn == "=>":
                la, lb = level + 1, level
            elif level in (1, 5):
                la, lb = level + 1, level + 1
            else:
                la, lb = level, level + 1
            out = f"{self.term(a, la)} {sym} {self.term(b, lb)}"
            return f"({out})" if level < ctx else out
        if t.fn == "not":
            out = f"not {self.term(t.args[0], _UNARY_LEVEL)}"
            return f"({out})" if ctx > _UNARY_LEVEL else out
        if t.fn == "neg":
            (a,) = t.args
            if isinstance(a, Val) or (isinstance(a, App) and a.fn == "neg"):
                out = f"-({self.term(a)})"
            else:
                out = f"-{self.term(a, _UNARY_LEVEL)}"
            return f"({out})" if ctx > _UNARY_LEVEL else out
        if not t.args:
            return t.fn
        return f"{t.fn}({', '.join(self.term(a) for a in t.args)})"

    def constraint(self, c: ExistentialConstraint) -> str:
        if not c.bound:
            return self.term(c.body)
        return f"E {', '.join(self.var(x) for x in c.bound)}. {self.term(c.body)}"

    def ecterm(self, e: ECTerm) -> str:
        xs = ", ".join(self.var(x) for x in e.logical_ordered())
        return f"<{{{xs}}} | {self.term(e.term)} | {self.constraint(e.constraint)}>"


def format_term(t: Term, annotate: bool = False) -> str:
    return Printer(annotate).term(t)


def format_var(x: Var) -> str:
    return Printer(annotate=True).var(x)


def format_constraint(c: ExistentialConstraint, annotate: bool = False) -> str:
    return Printer(annotate).constraint(c)


def format_ecterm(e: ECTerm, annotate: bool = True) -> str:
    return Printer(annotate).ecterm(e)


def format_formula(f) -> str:
    from .solver import And, Atom, Exists, Iff, Implies, Not

    def go(g) -> str:
        match g:
            case Atom(t):
                return format_term(t)
            case Exists(c):
                return f"(E {', '.join(x.name for x in c.bound)}. {format_term(c.body)})" if c.bound else format_term(c.body)
            case Not(a):
                return f"not ({go(a)})"
            case And(args):
                return " /\\ ".join(f"({go(a)})" for a in args) if args else "true"
            case Implies(a, b):
                return f"({go(a)}) => ({go(b)})"
            case Iff(a, b):
                return f"({go(a)}) <=> ({go(b)})"
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def format_subst(sigma: Mapping[Var, Term]) -> str:
    return "{" + ", ".join(f"{x} -> {format_term(u)}" for x, u in sigma.items()) + "}"


def format_valuation(rho: Mapping[Var, object]) -> str:
    def show(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        return format_term(v) if isinstance(v, (Var, Val, App)) else str(v)

    return ", ".join(f"{x}={show(v)}" for x, v in rho.items())


def format_classes(pc) -> str:
    classes = " ".join("{" + ",".join(fmt_pos(p) for p in c) + "}" for c in pc.classes)
    forced = [
        "{" + ",".join(fmt_pos(p) for p in c) + "} -> " + str(pc.forced[c[0]]) for c in pc.classes if c[0] in pc.forced
    ]
    return f"{classes}\nVal!: {', '.join(forced) if forced else 'none'}"


def format_signature(sig: Signature) -> str:
    lines = []
    for name, (args, res) in sig.symbols.items():
        lines.append(f"sig {name} : {' '.join(a.name for a in args)}{' ' if args else ''}-> {res.name} ;")
    return "\n".join(lines)


def format_problem(pf: ProblemFile) -> str:
    lines = []
    if pf.signature.symbols:
        lines.append(format_signature(pf.signature))
    for name, e in pf.terms.items():
        if name in pf.classical:
            s, phi = pf.classical[name]
            pr = Printer(annotate=True)
            lines.append(f"cterm {name} = {pr.term(s)} [ {pr.term(phi)} ] ;")
        else:
            lines.append(f"term {name} = {format_ecterm(e)} ;")
    return "\n".join(lines) + "\n"
