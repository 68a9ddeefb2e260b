from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from castnorm.errors import ParseError, UndeclaredVariable
from castnorm.problem import parse_problem, pretty_problem

import gen

S3 = """\
# the worked example
[decls]
var m n : nat
[goals]
cast(int, m) + cast(int, n) < 10:int
"""


def test_sections_and_names():
    p = parse_problem("[decls]\nvar n : nat\nvar z : int\n[context]\nh1 : n <= 3:nat; h2 : z < 0:int\n"
                      "cast(int, n) != z\n[goals]\ng : cast(int, n) - z < 5:int\n")
    assert [h.name for h in p.context] == ["h1", "h2", None]
    assert p.hypothesis("h2").col == 23
    assert p.goals[0].name == "g" and str(p.goals[0].expr) == "cast(int, n) - z < 5:int"


def test_diagnostics_carry_positions():
    with pytest.raises(UndeclaredVariable, match=r"^f\.problem:6:16: "):
        parse_problem(S3 + "cast(int, m) + ghost < 1:int\n", source="f.problem")
    with pytest.raises(ParseError, match="out of order"):
        parse_problem("[goals]\n[decls]\n")
    with pytest.raises(ParseError, match="unknown section"):
        parse_problem("[lemmas]\n")
    with pytest.raises(ParseError, match="before the first section"):
        parse_problem("var m : nat\n")
    with pytest.raises(ParseError, match=r"^3:1: "):
        parse_problem("[decls]\nvar m : nat\nvar : nat\n")


def test_rules_section(tmp_path):
    (tmp_path / "extra.rules").write_text("op f 1 fun\nrule f_cast : f(cast('T, ?a)) = cast('T, f(?a))\n")
    text = ("[decls]\nvar m : nat\n[rules]\ninclude extra.rules\n"
            "rule my_mul : cast('T, ?a * ?b) = cast('T, ?b) * cast('T, ?a)\n[goals]\nf(cast(int, m)) = 0:int\n")
    p = parse_problem(text, base_dir=tmp_path)
    names = [r.name for r in p.db]
    assert names[-2:] == ["f_cast", "my_mul"] and names[0] == "cast_add"
    with pytest.raises(ParseError, match="cannot read"):
        parse_problem("[rules]\ninclude missing.rules\n", base_dir=tmp_path)


def test_round_trip_fixed():
    p = parse_problem(S3)
    text = pretty_problem(p)
    q = parse_problem(text)
    assert pretty_problem(q) == text
    assert [g.expr for g in q.goals] == [g.expr for g in p.goals]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_round_trip_random(seed):
    rng = random.Random(seed)
    env = gen.gen_env()
    ctx = [gen.gen_expr(rng, env, 3) for _ in range(rng.randint(0, 3))]
    goals = [gen.gen_expr(rng, env, 5) for _ in range(rng.randint(0, 3))]
    text = "[decls]\nvar m n : nat\nvar z w : int\nvar q : rat\n"
    text += "[context]\n" + "; ".join(f"h{i} : {e}" for i, e in enumerate(ctx)) + "\n"
    text += "[goals]\n" + "\n".join(map(str, goals)) + "\n"
    p = parse_problem(text)
    q = parse_problem(pretty_problem(p))
    assert [(h.name, h.expr) for h in q.context] == [(f"h{i}", e) for i, e in enumerate(ctx)]
    assert [g.expr for g in q.goals] == goals
    assert q.decls == p.decls
