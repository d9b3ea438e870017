from ectequiv.pg import (
    back_validity_check,
    hole_positions,
    is_logically_linear,
    is_pattern_general,
    is_value_free,
    pg_transform,
)
from ectequiv.syntax import parse, parse_ecterm_text
from ectequiv.terms import BOOL, Var, fmt_pos

SIG = parse("sig f : Int Int -> T ; sig g : Int -> T ; sig b : Bool -> T ; sig k : Int Int Int -> T ;").signature


def e(text):
    return parse_ecterm_text(text, SIG)


def test_value_free_and_linear_are_independent():
    assert is_value_free(e("<{x} | f(x, x) | x > 0>"))
    assert not is_logically_linear(e("<{x} | f(x, x) | x > 0>"))
    assert is_logically_linear(e("<{x} | f(x, 1) | x > 0>"))
    assert not is_value_free(e("<{x} | f(x, 1) | x > 0>"))
    # repeated non-logical variables do not matter
    assert is_pattern_general(e("<{x} | k(x, y, y) | x > 0>"))


def test_hole_positions_reach_inside_theory_subterms():
    term = e("<{x} | f(x, 0 * 10 + y) | x > 0>")
    assert [fmt_pos(p) for p in hole_positions(term)] == ["1", "2.1.1", "2.1.2"]


def test_pg_keeps_constraint_and_adds_equations_in_position_order():
    r = pg_transform(e("<{x} | k(x, 2, x) | E z. x = z + 1>"))
    assert str(r.result) == "<{w1, w2, w3} | k(w1, w2, w3) | E z, x. x = z + 1 /\\ x = w1 /\\ 2 = w2 /\\ x = w3>"
    assert [fmt_pos(p) for p in r.hole_positions] == ["1", "2", "3"]
    assert len(r.fresh_vars) == 3
    assert is_pattern_general(r.result)


def test_pg_without_holes_leaves_constraint_unchanged():
    term = e("<{} | g(y) | true>")
    r = pg_transform(term)
    assert r.result == term
    assert r.fresh_vars == ()


def test_fresh_names_avoid_existing_variables():
    r = pg_transform(e("<{x} | f(x, w1) | x > 0>"))
    assert [w.name for w in r.fresh_vars] == ["w1_1"]
    r = pg_transform(e("<{x} | f(x, 1) | E w2. x > w2 /\\ w2 > 0>"))
    assert [w.name for w in r.fresh_vars] == ["w1", "w2_1"]


def test_fresh_variables_follow_hole_sorts():
    r = pg_transform(e("<{} | b(true) | true>"))
    (w,) = r.fresh_vars
    assert w == Var("w1", BOOL)


def test_back_substitution_recovers_the_constraint(confined):
    for text in [
        "<{x} | f(x, 1) | -3 <= x /\\ x <= 3>",
        "<{x, y} | k(x, y, x) | -3 <= x /\\ x <= 3 /\\ -3 <= y /\\ y <= 3 /\\ x < y>",
        "<{} | f(2, 3) | true>",
    ]:
        term = e(text)
        r = pg_transform(term)
        assert back_validity_check(term, r, confined).holds, text
