import random

import pytest

from corpus import SIG, corpus
from ectequiv.ecterm import IllFormed
from ectequiv.syntax import (
    ParseError,
    format_ecterm,
    format_problem,
    format_term,
    parse,
    parse_ecterm_text,
    parse_term_text,
    parse_var,
    tokenize,
)
from ectequiv.terms import BOOL, INT, Sort, Val, Var, mk_app, op


def test_problem_file():
    pf = parse(
        """
        # a comment
        sig f : Int Int -> T ;   // another
        term left = <{x} | f(x, y) | E z. x = z + z> ;
        cterm right = f(x, y) [ x mod 2 = 0 ] ;
        """
    )
    assert pf.names() == ["left", "right"]
    assert pf["left"].bound == (Var("z"),)
    assert pf["right"].logical == {Var("x")}
    assert "right" in pf.classical


def test_unicode_input():
    e = parse_ecterm_text("⟨{x′} | f(x′, 1) | ∃z. z ≥ 0 ∧ x′ = z × 2⟩", parse("sig f : Int Int -> T ;").signature)
    assert e.logical == {Var("x'")}
    assert str(e) == "<{x'} | f(x', 1) | E z. z >= 0 /\\ x' = z * 2>"


def test_precedence():
    t = parse_term_text("x + 2 * y <= 3 /\\ not (x = 1) \\/ y > 0 => x = y <=> true")
    assert t.fn == "<=>"
    imp = t.args[0]
    assert imp.fn == "=>" and imp.args[0].fn == "or"
    assert format_term(parse_term_text("(x + 1) * 2 - (y - 3)")) == "(x + 1) * 2 - (y - 3)"
    assert parse_term_text("-3") == Val(-3)
    assert parse_term_text("-x") == op("neg", Var("x"))


def test_sort_inference_and_annotations():
    sig = parse("sig b : Bool -> T ; sig t : T -> T ;").signature
    e = parse_ecterm_text("<{p} | b(p) | p => true>", sig)
    assert e.logical == {Var("p", BOOL)}
    e = parse_ecterm_text("<{} | t(a) | true>", sig)
    assert Var("a", Sort("T")) in set(e.term.args)
    assert parse_var("q:Bool") == Var("q", BOOL)
    assert parse_var("q") == Var("q", INT)
    assert format_ecterm(parse_ecterm_text("<{p:Bool} | b(p) | p>", sig)) == "<{p:Bool} | b(p) | p>"


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("<{x} | f(x | true>", "expected"),
        ("<{x} | g(x) | true>", "undeclared"),
        ("<{x} | f(x, 1) | x + 1>", "Bool"),
        ("<{x} | f(x, 1) | x = true>", "sort"),
        ("<{x} | f(x, 1) | true> junk", "closing"),
        ("<{x} | f(x, 1) | x @ 1>", "unexpected character"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises((ParseError, ValueError, TypeError)) as info:
        parse_ecterm_text(text, parse("sig f : Int Int -> T ;").signature)
    assert fragment in str(info.value)


def test_parse_error_positions():
    with pytest.raises(ParseError) as info:
        parse("sig f : Int -> T ;\nterm a = <{x} | f(x) | x ? 1> ;")
    assert (info.value.line, info.value.col) == (2, 26)


def test_ill_formed_terms_surface():
    with pytest.raises(IllFormed):
        parse("sig g : Int -> T ; term a = <{y} | g(x) | E z. z >= y> ;")


def test_duplicate_names_and_order():
    with pytest.raises(ParseError):
        parse("sig g : Int -> T ; term a = <{x} | g(x) | true> ; term a = <{x} | g(x) | true> ;")
    with pytest.raises(ParseError):
        parse("term a = <{} | 1 | true> ; sig g : Int -> T ;")


def test_tokens_keep_primes():
    assert [t.text for t in tokenize("x′ x'")][:2] == ["x'", "x'"]


def test_corpus_terms_round_trip():
    for p in corpus(seed=7, size=60):
        for e in (p.left, p.right):
            assert parse_ecterm_text(format_ecterm(e), SIG) == e, format_ecterm(e)


def test_random_formulas_round_trip():
    rng = random.Random(3)
    x, y = Var("x"), Var("y")
    leaves = [x, y, Val(0), Val(-2), Val(5)]
    ints = ["+", "-", "*", "mod"]
    bools = ["and", "or", "=>", "<=>"]
    comparisons = ["=", "!=", "<", "<=", ">", ">="]

    def int_term(d):
        if d == 0 or rng.random() < 0.3:
            return rng.choice(leaves)
        if rng.random() < 0.15:
            return op("neg", int_term(d - 1))
        return op(rng.choice(ints), int_term(d - 1), int_term(d - 1))

    def formula(d):
        if d == 0 or rng.random() < 0.3:
            return op(rng.choice(comparisons), int_term(2), int_term(2))
        if rng.random() < 0.2:
            return mk_app("not", [formula(d - 1)])
        return mk_app(rng.choice(bools), [formula(d - 1), formula(d - 1)])

    for _ in range(300):
        f = formula(3)
        assert parse_term_text(format_term(f)) == f, format_term(f)


def test_problem_printer_round_trip():
    text = (
        "sig f : Int Int -> T ;\n"
        "term left = <{x} | f(x, y) | E z. x = z + z> ;\n"
        "cterm right = f(x, y) [ x mod 2 = 0 ] ;\n"
    )
    pf = parse(text)
    assert format_problem(pf) == text
    again = parse(format_problem(pf))
    assert again.terms == pf.terms
