"""Seeded generator of random well-typed expressions over the stdlib graph."""

from __future__ import annotations

import random

from castnorm.terms import BUILTIN_OPS, INT, NAT, PROP, RAT, App, Cast, Expr, Num, TypeEnv, check_app

LOWER = {NAT: (), INT: (NAT,), RAT: (NAT, INT)}
ARITH = ("add", "sub", "mul")
RELS = ("lt", "le", "eq", "ne", "dvd")


def gen_value(rng: random.Random, env: TypeEnv, ty, depth: int) -> Expr:
    vars_of = [v for v in env.vars.values() if v.ty == ty]
    if depth <= 0 or rng.random() < 0.25:
        if vars_of and rng.random() < 0.6:
            return rng.choice(vars_of)
        return Num(rng.choice((0, 1, 1, 2, 3, 5, 10)), ty)
    roll = rng.random()
    if roll < 0.35 and LOWER[ty]:
        src = rng.choice(LOWER[ty])
        return Cast(src, ty, gen_value(rng, env, src, depth - 1))
    if roll < 0.45 and ty != NAT:
        return App(BUILTIN_OPS["neg"], (gen_value(rng, env, ty, depth - 1),))
    op = BUILTIN_OPS[rng.choice(ARITH)]
    return App(op, (gen_value(rng, env, ty, depth - 1), gen_value(rng, env, ty, depth - 1)))


def gen_expr(rng: random.Random, env: TypeEnv, max_depth: int = 6) -> Expr:
    """A proposition or an arithmetic term of depth at most ``max_depth``."""
    depth = rng.randint(1, max_depth)
    if rng.random() < 0.7:
        ty = rng.choice((NAT, INT, RAT))
        op = BUILTIN_OPS[rng.choice(RELS)]
        e = App(op, (gen_value(rng, env, ty, depth - 1), gen_value(rng, env, ty, depth - 1)))
    else:
        e = gen_value(rng, env, rng.choice((NAT, INT, RAT)), depth)
    for _, node in _apps(e):
        check_app(node)
    return e


def _apps(e: Expr):
    from castnorm.terms import iter_nodes

    return [(p, n) for p, n in iter_nodes(e) if isinstance(n, App)]


def depth(e: Expr) -> int:
    from castnorm.terms import children

    kids = children(e)
    return 1 + max(map(depth, kids)) if kids else 0


def gen_env() -> TypeEnv:
    env = TypeEnv.standard()
    for names, ty in (("m n", "nat"), ("z w", "int"), ("q", "rat")):
        for name in names.split():
            env.declare_var(name, ty)
    return env


__all__ = ["PROP", "depth", "gen_env", "gen_expr", "gen_value"]
