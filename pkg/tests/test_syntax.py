from __future__ import annotations

import pytest

from castnorm.errors import IllTypedApplication, InvalidCast, ParseError, UndeclaredVariable
from castnorm.syntax import parse_expr, parse_pattern, pretty
from castnorm.terms import BUILTIN_OPS, INT, NAT, App, Cast, Meta, Num, TyMeta, Var


def test_precedence_and_associativity(P):
    e = P("m + n * p - 1:nat < n")
    add, sub, mul = BUILTIN_OPS["add"], BUILTIN_OPS["sub"], BUILTIN_OPS["mul"]
    m, n, p = Var("m", NAT), Var("n", NAT), Var("p", NAT)
    assert e.args[0] == App(sub, (App(add, (m, App(mul, (n, p)))), Num(1, NAT)))
    assert pretty(P("m - (n - p)")) == "m - (n - p)"
    assert pretty(P("(m - n) - p")) == "m - n - p"
    assert pretty(P("-(z + w)")) == "-(z + w)"
    assert pretty(P("--z")) == "--z"


def test_cast_forms(P):
    assert P("cast(int, m)") == Cast(NAT, INT, Var("m", NAT))
    assert P("cast(nat -> int, m)") == P("cast(int, m)")
    assert P("cast(rat, cast(int, m))").body == P("cast(int, m)")


def test_relations_and_dvd(P):
    for text in ("z < w", "z <= w", "z = w", "z != w", "z dvd w"):
        assert pretty(P(text)) == text


def test_user_ops(env):
    env.declare_op("f", 1, False)
    env.declare_op("g", 2, False)
    env.declare_op("good", 1, True)
    assert pretty(parse_expr("f(z) + g(z, w)", env)) == "f(z) + g(z, w)"
    assert pretty(parse_expr("good(m)", env)) == "good(m)"
    with pytest.raises(IllTypedApplication):
        parse_expr("g(z, m)", env)


def test_comments_and_whitespace(P):
    assert P("  m   +n # trailing comment") == P("m + n")


def test_error_locations(env):
    with pytest.raises(ParseError) as info:
        parse_expr("m + ", env, line=3, source="f.problem")
    assert (info.value.line, info.value.column, info.value.source) == (3, 5, "f.problem")
    assert str(info.value).startswith("f.problem:3:5: ")
    with pytest.raises(UndeclaredVariable, match=r"1:5: .*ghost"):
        parse_expr("m + ghost", env)
    with pytest.raises(ParseError):
        parse_expr("m + n)", env)
    with pytest.raises(ParseError):
        parse_expr("3", env)


def test_type_errors(env):
    with pytest.raises(IllTypedApplication):
        parse_expr("m + z", env)
    with pytest.raises(InvalidCast):
        parse_expr("cast(nat, z)", env)
    with pytest.raises(InvalidCast):
        parse_expr("cast(rat -> int, q)", env)


def test_patterns(env):
    p = parse_pattern("cast('T, ?a + ?b)", env)
    assert isinstance(p, Cast) and isinstance(p.dst, TyMeta)
    assert isinstance(p.body.args[0], Meta)
    assert pretty(parse_pattern("cast(nat -> 'T, ?a)", env)) == "cast(nat -> 'T, ?a)"
    assert pretty(parse_pattern("1:'T", env)) == "1:'T"
