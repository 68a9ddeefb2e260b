from __future__ import annotations

import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from castnorm.errors import DeclarationError, IllTypedApplication, InvalidCast, UndeclaredVariable
from castnorm.syntax import parse_expr, pretty
from castnorm.terms import (
    BUILTIN_OPS,
    INT,
    NAT,
    PROP,
    RAT,
    App,
    Cast,
    CoercionGraph,
    Num,
    Ty,
    TypeEnv,
    Var,
    count_casts,
    iter_nodes,
    numeral_binary_view,
    replace_at,
    subterm,
    type_of,
)

import gen

m, n = Var("m", NAT), Var("n", NAT)
ADD, LT, NEG = BUILTIN_OPS["add"], BUILTIN_OPS["lt"], BUILTIN_OPS["neg"]


def test_type_of_examples(env):
    assert type_of(Cast(NAT, INT, m), env) == INT
    assert type_of(App(LT, (Cast(NAT, INT, m), Num(10, INT))), env) == PROP
    with pytest.raises(IllTypedApplication):
        type_of(App(ADD, (m, Var("z", INT))), env)


def test_type_of_rejects_bad_casts(env):
    with pytest.raises(InvalidCast):
        type_of(Cast(INT, NAT, Var("z", INT)), env)
    with pytest.raises(InvalidCast):
        type_of(Cast(NAT, INT, Var("z", INT)), env)
    with pytest.raises(UndeclaredVariable):
        type_of(Var("ghost", NAT), env)


def test_neg_is_not_defined_on_nat(env):
    with pytest.raises(IllTypedApplication):
        type_of(App(NEG, (m,)), env)


def test_coercion_exists_examples():
    g = TypeEnv.standard().graph
    assert g.exists(NAT, RAT)
    assert not g.exists(INT, NAT)
    alpha = Ty("alpha")
    h = CoercionGraph()
    h.add(NAT, alpha)
    h.add(INT, alpha)
    assert not h.exists(NAT, INT)


def _dfs(edges, src, dst):
    seen, stack = set(), [src]
    while stack:
        x = stack.pop()
        for a, b in edges:
            if a == x and b not in seen:
                seen.add(b)
                stack.append(b)
    return dst in seen


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=14))
def test_reachability_matches_dfs(pairs):
    tys = [Ty(f"t{i}") for i in range(7)]
    g = CoercionGraph()
    edges = []
    for a, b in pairs:
        try:
            g.add(tys[a], tys[b])
            edges.append((tys[a], tys[b]))
        except DeclarationError:
            assert a == b or _dfs(edges, tys[b], tys[a])
    for s in tys:
        assert not g.exists(s, s)
        for d in tys:
            assert g.exists(s, d) == (s != d and _dfs(edges, s, d))
            for e in tys:
                if g.exists(s, d) and g.exists(d, e):
                    assert g.exists(s, e)


def test_graph_rejects_cycles_and_prop():
    g = TypeEnv.standard().graph
    with pytest.raises(DeclarationError):
        g.add(RAT, NAT)
    with pytest.raises(DeclarationError):
        g.add(NAT, PROP)
    with pytest.raises(DeclarationError):
        g.add(INT, INT)


def test_count_casts_examples():
    assert count_casts(Cast(INT, RAT, Cast(NAT, INT, App(ADD, (m, n))))) == (2, 0)
    assert count_casts(App(ADD, (Cast(NAT, INT, m), Cast(NAT, INT, n)))) == (0, 2)
    assert count_casts(m) == (0, 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31))
def test_count_casts_partitions_all_casts(seed):
    env = gen.gen_env()
    e = gen.gen_expr(random.Random(seed), env)
    hc, ic = count_casts(e)
    assert hc + ic == sum(isinstance(x, Cast) for _, x in iter_nodes(e))


def _eval_sketch(text: str) -> int:
    """Evaluate a zero/one/bit0/bit1 spelling without using the library."""
    text = text.strip()
    if text == "zero":
        return 0
    if text == "one":
        return 1
    head, inner = re.fullmatch(r"(bit[01])\((.*)\)", text).groups()
    return 2 * _eval_sketch(inner) + (head == "bit1")


def test_numeral_view_examples():
    assert str(numeral_binary_view(10, INT)) == "bit0(bit1(bit0(one)))"
    assert str(numeral_binary_view(0, NAT)) == "zero"
    assert str(numeral_binary_view(7, RAT)) == "bit1(bit1(one))"
    with pytest.raises(ValueError):
        numeral_binary_view(-1, INT)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**20))
def test_numeral_view_reevaluates(v):
    view = numeral_binary_view(v, NAT)
    assert _eval_sketch(str(view)) == v
    assert view.value() == v


def test_pretty_examples():
    assert pretty(Cast(NAT, INT, m)) == "cast(int, m)"
    assert pretty(App(LT, (App(ADD, (m, n)), Num(10, NAT)))) == "m + n < 10:nat"
    assert pretty(App(NEG, (Num(3, INT),))) == "-(3:int)"


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**31))
def test_parse_pretty_round_trip(seed):
    env = gen.gen_env()
    e = gen.gen_expr(random.Random(seed), env)
    assert parse_expr(pretty(e), env) == e


def test_subterm_and_replace(P):
    e = P("cast(int, m + n) < z")
    assert subterm(e, (0, 0, 1)) == n
    assert replace_at(e, (0, 0, 1), m) == P("cast(int, m + m) < z")
    with pytest.raises(IndexError):
        subterm(e, (2,))


def test_env_declarations():
    env = TypeEnv.standard()
    env.declare_type("alpha")
    env.declare_coercion("int", "alpha")
    assert env.coercion_exists(NAT, env.type("alpha"))
    with pytest.raises(DeclarationError):
        env.declare_type("alpha")
    with pytest.raises(DeclarationError):
        env.declare_var("b", "prop")
    with pytest.raises(DeclarationError):
        env.declare_op("add", 2, False)
