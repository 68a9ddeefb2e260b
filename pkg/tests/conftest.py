from __future__ import annotations

import pytest

from castnorm.rules import prelude
from castnorm.syntax import parse_expr
from castnorm.terms import TypeEnv


def make_env() -> TypeEnv:
    env = TypeEnv.standard()
    for names, ty in (("m n p", "nat"), ("z w", "int"), ("q r", "rat")):
        for name in names.split():
            env.declare_var(name, ty)
    return env


def make_alpha_env() -> TypeEnv:
    """The abstract-type setting: nat -> int, nat -> alpha, int -> alpha only."""
    env = TypeEnv()
    env.declare_type("alpha")
    env.declare_coercion("nat", "int")
    env.declare_coercion("nat", "alpha")
    env.declare_coercion("int", "alpha")
    env.declare_var("n", "nat")
    env.declare_var("z", "int")
    return env


@pytest.fixture
def env() -> TypeEnv:
    return make_env()


@pytest.fixture
def db(env):
    return prelude(env)


@pytest.fixture
def P(env):
    """Parse an expression in the shared test environment."""
    return lambda text: parse_expr(text, env)
