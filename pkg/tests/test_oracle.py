import pytest

from conftest import requires_smt
from ectequiv.model import Grid
from ectequiv.oracle import GridTooSmall, OracleConfig, covers, instances, oracle_equiv, oracle_subsumes
from ectequiv.syntax import parse, parse_ecterm_text, parse_term_text
from ectequiv.terms import Val, Var

SIG = parse("sig f : Int Int -> T ; sig g : Int -> T ;").signature
SMALL = OracleConfig(grid=Grid(-3, 3))
x, y = Var("x"), Var("y")


def ect(text):
    return parse_ecterm_text(text, SIG)


def test_instances_are_distinct_and_respect_the_constraint():
    e = ect("<{x, y} | f(x, y) | x + y = 0>")
    got = list(instances(e, SMALL))
    assert len(got) == 7
    assert all(sigma[x].value + sigma[y].value == 0 for sigma, _ in got)
    assert len({inst for _, inst in got}) == 7


def test_covers_requires_value_matcher():
    e = ect("<{x} | f(x, y) | x >= 0>")
    assert covers(e, parse_term_text("f(2, y)", SIG), SMALL)
    assert not covers(e, parse_term_text("f(-1, y)", SIG), SMALL)
    # non-logical variables may be instantiated freely
    assert covers(e, parse_term_text("f(1, 1)", SIG), SMALL)
    assert not covers(e, parse_term_text("f(y, y)", SIG), SMALL)


def test_existential_parts_are_searched():
    even = ect("<{x} | g(x) | E z. x = z + z>")
    mod = ect("<{x} | g(x) | x mod 2 = 0>")
    assert oracle_equiv(even, mod, SMALL).holds


def test_subsumption_is_directional():
    small, large = ect("<{x} | f(x, y) | x = 1>"), ect("<{x} | f(x, y) | x >= 1>")
    assert oracle_subsumes(small, large, SMALL).holds
    back = oracle_subsumes(large, small, SMALL)
    assert back.fails
    assert back.witness in ({x: Val(2)}, {x: Val(3)})
    assert oracle_equiv(small, large, SMALL).fails


def test_witness_is_a_substitution_over_logical_variables():
    verdict = oracle_equiv(ect("<{x, y} | f(x, y) | true>"), ect("<{x} | f(x, x) | true>"), SMALL)
    assert verdict.fails
    assert set(verdict.witness) == {x, y}
    assert verdict.witness[x] != verdict.witness[y]


def test_approximate_grid_gives_unknown():
    a, b = ect("<{x} | g(x) | x >= 0>"), ect("<{x} | g(x) | x >= 0 /\\ x < 100>")
    verdict = oracle_equiv(a, b, OracleConfig(grid=Grid(-3, 3), exact=False))
    assert verdict.unknown
    # failures stay definite even on an approximate grid
    assert oracle_equiv(a, ect("<{x} | g(x) | x >= 1>"), OracleConfig(grid=Grid(-3, 3), exact=False)).fails


def test_unsatisfiable_terms_are_equivalent():
    a, b = ect("<{x} | g(x) | x > x>"), ect("<{x, y} | f(x, y) | false>")
    assert oracle_equiv(a, b, SMALL).holds


@requires_smt
def test_grid_too_small_is_reported(smt):
    far = ect("<{x} | g(x) | x = 50>")
    with pytest.raises(GridTooSmall):
        oracle_equiv(far, ect("<{x} | g(x) | x = 51>"), OracleConfig(grid=Grid(-3, 3), solver=smt))
    assert oracle_equiv(far, ect("<{x} | g(x) | x = 51>"), OracleConfig(grid=Grid(45, 55), solver=smt)).fails
