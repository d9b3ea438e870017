"""Worked examples with their expected results, shared by the example tests and the acceptance suite.

Each check takes a backend and raises AssertionError on mismatch.
"""

from __future__ import annotations

from ectequiv import (
    IllFormed,
    check_sat,
    check_valid,
    equiv_auto,
    equiv_by_renaming,
    equiv_general,
    equiv_pattern_general,
    equiv_via_pg,
    free_and_bound,
    is_pattern_general,
    mk_existential,
    pg_transform,
    position_classes,
    representative_substitution,
    respects,
)
from ectequiv.constraints import ConstraintError
from ectequiv.model import Grid, eval_existential
from ectequiv.oracle import OracleConfig, oracle_equiv, oracle_subsumes
from ectequiv.solver import Exists
from ectequiv.syntax import parse, parse_ecterm_text, parse_term_text
from ectequiv.terms import INT, Val, Var, parse_pos

x, y, z = Var("x", INT), Var("y", INT), Var("z", INT)
x1, y1 = Var("x'", INT), Var("y'", INT)

SIG_FF = parse("sig f : Int Int -> T ; sig g : Int -> T ;").signature
SIG_FG = parse("sig f : Int T -> T ; sig g : Int -> T ;").signature
SIG_PG = parse("sig f : Int Int -> Int ;").signature
SIG_H = parse("sig h : Int Int Int Int Int Int Int -> T ;").signature


def constraint(bound: str, body: str):
    names = [b.strip() for b in bound.split(",") if b.strip()]
    return mk_existential([Var(n, INT) for n in names], parse_term_text(body))


def ff(text):
    return parse_ecterm_text(text, SIG_FF)


# --- free and bound variables ------------------------------------------------


def check_free_bound(backend):
    cases = [
        (("x", "x >= 3 /\\ y = x * z"), ({y, z}, {x})),
        (("x, y, z", "y = x * z"), (set(), {x, y, z})),
        (("", "y = x * z"), ({x, y, z}, set())),
        (("", "true"), (set(), set())),
    ]
    for (bound, body), (free, bnd) in cases:
        got = free_and_bound(constraint(bound, body))
        assert got == (frozenset(free), frozenset(bnd)), (bound, body, got)
    try:
        constraint("y", "x >= 3")
    except ConstraintError:
        pass
    else:
        raise AssertionError("bound variable outside the body accepted")


# --- respecting substitutions and satisfiability ---------------------------------

C35 = "x >= 3 /\\ y = x * z"


def check_respects_and_sat(backend):
    c = constraint("x", C35)
    assert eval_existential(c, {y: 6, z: 2}, Grid(-8, 8)), "rho(y)=6, rho(z)=2 satisfies"
    assert check_sat(Exists(c), backend).holds, "satisfiable"
    v = check_valid(Exists(c), backend)
    assert v.fails, "not valid"
    assert v.witness is not None and not eval_existential(c, v.witness, Grid(-50, 50))
    assert check_sat(Exists(constraint("x", "x >= 3 /\\ y <= 3 /\\ x < y")), backend).fails, "unsatisfiable"
    assert check_valid(Exists(constraint("x", "x >= 3 /\\ y <= x")), backend).holds, "valid"
    sigma = {y: parse_term_text("3 + 3"), z: Val(2)}
    assert respects(sigma, c, backend).fails, "y mapped to a non-value"
    sigma2 = {x: Val(1), y: Val(6), z: Val(2)}
    assert respects(sigma2, c, backend).holds, "x below 3 but x is bound"


# --- ill-formed terms ---------------------------------------------------------


def check_ill_formed(backend):
    good = [
        "<{x} | g(x) | E y. x = 3 * y>",
        "<{x} | f(x + 2, g(y)) | E z. x = 2 * z>",
        "<{} | g(x) | true>",
    ]
    for text in good:
        parse_ecterm_text(text, SIG_FG)
    bad = [
        ("<{y} | g(x) | E z. z >= y>", "b"),
        ("<{y} | g(x) | E x. x >= y>", "c"),
        ("<{x} | f(x, y) | E z. z >= y>", "a"),
    ]
    for text, expected in bad:
        try:
            parse_ecterm_text(text, SIG_FG if "g(" in text else SIG_FF)
        except IllFormed as e:
            assert expected in e.conditions, (text, e.conditions)
        else:
            raise AssertionError(f"accepted {text}")


# --- the equivalence chain and subsumptions --------------------------------------

CHAIN = [
    "<{} | f(1, 1) | true>",
    "<{x, y} | f(x, y) | x = y /\\ x = 1>",
    "<{y} | f(1, y) | y = 1>",
    "<{x} | f(x, x) | x = 1>",
]


def check_chain(backend):
    terms = [ff(t) for t in CHAIN]
    cfg = OracleConfig(grid=Grid(-3, 3))
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            r = equiv_auto(terms[i], terms[j], backend)
            assert r.equivalent, (i, j, r.summary())
            assert oracle_equiv(terms[i], terms[j], cfg).holds, (i, j)


SUBSUMPTIONS = [
    ("<{x} | f(x, y) | x = 1>", "<{x} | f(x, y) | x >= 1>"),
    ("<{x} | f(x, x) | true>", "<{x, y} | f(x, y) | true>"),
    ("<{x, y} | f(x, y) | true>", "<{x} | f(x, y) | true>"),
]


def check_subsumptions(backend):
    cfg = OracleConfig(grid=Grid(0, 3))
    for small, large in SUBSUMPTIONS:
        a, b = ff(small), ff(large)
        assert oracle_subsumes(a, b, cfg).holds, small
        back = oracle_subsumes(b, a, cfg)
        assert back.fails, large
        assert oracle_equiv(a, b, cfg).fails
        assert equiv_auto(a, b, backend).not_equivalent, (small, large)


# --- a classical constrained-term pair whose constraints are equivalent --------


def check_counterexample(backend):
    pf = parse("sig f : Int -> T ; cterm l = f(x) [ x = x ] ; cterm r = f(x) [ true ] ;")
    assert check_valid(parse_term_text("(x = x) <=> true"), backend).holds
    r = equiv_auto(pf["l"], pf["r"], backend)
    assert r.not_equivalent, r.summary()
    assert oracle_equiv(pf["l"], pf["r"]).fails


# --- renaming ---------------------------------------------------------------


def check_renaming(backend):
    a, b = ff("<{x} | f(x, y) | x >= 0>"), ff("<{y} | f(y, x) | y >= 0>")
    r = equiv_by_renaming(a, b, {x: y, y: x}, backend)
    assert r.equivalent, r.summary()
    c, d = ff("<{x} | f(x, y) | E z. x = z + z>"), ff("<{x} | f(x, y) | x mod 2 = 0>")
    r = equiv_by_renaming(c, d, {}, backend)
    assert r.equivalent, r.summary()


# --- pattern-general terms and the PG transformation ------------------------------

PG_VERDICTS = [
    ("<{x} | f(x, y) | x >= 0>", True),
    ("<{x} | f(x, 1) | x >= 0>", False),
    ("<{x} | f(x, x) | x >= 0>", False),
    ("<{x} | f(y, f(y, x)) | x >= 0>", True),
]


def check_pattern_general(backend):
    for text, expected in PG_VERDICTS:
        assert is_pattern_general(parse_ecterm_text(text, SIG_PG)) is expected, text


PG_OUTPUTS = [
    ("<{x} | f(x, 1) | x >= 0>", "<{w1, w2} | f(w1, w2) | E x. x >= 0 /\\ x = w1 /\\ 1 = w2>"),
    ("<{x} | f(x, x) | x >= 0>", "<{w1, w2} | f(w1, w2) | E x. x >= 0 /\\ x = w1 /\\ x = w2>"),
]

CHAIN_PG = [
    "<{w1, w2} | f(w1, w2) | true /\\ 1 = w1 /\\ 1 = w2>",
    "<{w1, w2} | f(w1, w2) | E x, y. x = y /\\ x = 1 /\\ x = w1 /\\ y = w2>",
    "<{w1, w2} | f(w1, w2) | E y. y = 1 /\\ 1 = w1 /\\ y = w2>",
    "<{w1, w2} | f(w1, w2) | E x. x = 1 /\\ x = w1 /\\ x = w2>",
]


def check_pg_outputs(backend):
    for src, expected in PG_OUTPUTS:
        got = pg_transform(ff(src)).result
        assert got == ff(expected), (src, str(got))


def check_chain_after_pg(backend):
    pgs = [pg_transform(ff(t)).result for t in CHAIN]
    for got, expected in zip(pgs, CHAIN_PG):
        assert got == ff(expected), str(got)
    for i in range(len(pgs)):
        for j in range(i + 1, len(pgs)):
            r = equiv_pattern_general(pgs[i], pgs[j], backend)
            assert r.equivalent, (i, j, r.summary())
            assert equiv_via_pg(ff(CHAIN[i]), ff(CHAIN[j]), backend).equivalent


# --- position classes and representative substitutions ----------------------------

S62 = "<{x, x', y, y'} | h(x, x', 0, y, y, y', 0 * 10) | x = x' /\\ x' = 0 /\\ y = y'>"
T67 = "<{x, x', y, z} | h(z, z, z, x, x', x, z * y) | x <= x' /\\ x' <= x /\\ z = 0 /\\ y = (z + 2) * 5>"


def positions(*texts):
    return tuple(parse_pos(t) for t in texts)


def check_classes(backend):
    e = parse_ecterm_text(S62, SIG_H)
    pc = position_classes(e, backend)
    assert pc.base == positions("1", "2", "3", "4", "5", "6", "7.1", "7.2")
    expected = [positions("1", "2", "3", "7.1"), positions("4", "5", "6"), positions("7.2")]
    assert list(pc.classes) == expected
    assert pc.complete


def check_forced(backend):
    e = parse_ecterm_text(S62, SIG_H)
    pc = position_classes(e, backend)
    assert set(pc.forced) == set(positions("1", "2", "3", "7.1", "7.2"))
    assert all(pc.forced[p] == Val(0) for p in positions("1", "2", "3", "7.1"))
    assert pc.forced[parse_pos("7.2")] == Val(10)


def check_mu_x(backend):
    e = parse_ecterm_text(S62, SIG_H)
    mu = representative_substitution(e, position_classes(e, backend))
    assert mu == {x: Val(0), x1: Val(0), y: y, y1: y}


def check_mu_y_and_verdict(backend):
    s, t = parse_ecterm_text(S62, SIG_H), parse_ecterm_text(T67, SIG_H)
    ps, pt = position_classes(s, backend), position_classes(t, backend)
    assert ps.partition() == pt.partition()
    assert set(ps.forced) == set(pt.forced)
    mu = representative_substitution(t, pt)
    assert mu == {x: x, x1: x, y: Val(10), z: Val(0)}
    r = equiv_general(s, t, backend)
    assert r.equivalent, r.summary()
    assert r.renaming == {y: x}
    assert equiv_auto(s, t, backend).equivalent


CHECKS = [
    ("free and bound variables", check_free_bound),
    ("respects and satisfiability", check_respects_and_sat),
    ("ill-formed terms rejected", check_ill_formed),
    ("equivalence chain", check_chain),
    ("subsumption without equivalence", check_subsumptions),
    ("classical characterization counterexample", check_counterexample),
    ("renaming equivalences", check_renaming),
    ("pattern-general verdicts", check_pattern_general),
    ("PG outputs", check_pg_outputs),
    ("chain after PG", check_chain_after_pg),
    ("position classes", check_classes),
    ("forced positions", check_forced),
    ("representative substitution of s", check_mu_x),
    ("representative substitution of t and verdict", check_mu_y_and_verdict),
]
