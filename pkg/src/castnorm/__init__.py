"""Cast normalization for arithmetic expressions over nat, int, rat and user types.

Typical use::

    from castnorm import TypeEnv, parse_expr, prelude, normalize

    env = TypeEnv.standard()
    env.declare_var("m", "nat")
    env.declare_var("n", "nat")
    nf, trace = normalize(parse_expr("cast(int, m) + cast(int, n) < 10:int", env), prelude(env))
    print(nf)  # m + n < 10:nat
"""

from .errors import (
    CastNormError,
    ClassifyError,
    DeclarationError,
    DuplicateName,
    FuelExhausted,
    ParseError,
    RewriteFailed,
    TypingError,
)
from .normalize import (
    NormalizeOptions,
    assumption_mod_cast,
    equiv_mod_cast,
    normalize,
    push_cast,
    rw_mod_cast,
)
from .oracle import check_equiv_exhaustive, check_rule_sound, eval_expr
from .rules import RewriteRule, RuleClass, RuleDb, classify, load_rules, parse_rule, prelude
from .syntax import parse_expr, parse_pattern, pretty
from .terms import INT, NAT, PROP, RAT, App, Cast, CoercionGraph, Expr, Meta, Num, Ty, TypeEnv, Var
from .trace import Step, Trace, replay, verify

__version__ = "0.1.0"

__all__ = [
    "App", "Cast", "CastNormError", "ClassifyError", "CoercionGraph", "DeclarationError",
    "DuplicateName", "Expr", "FuelExhausted", "INT", "Meta", "NAT", "NormalizeOptions", "Num",
    "PROP", "ParseError", "RAT", "RewriteFailed", "RewriteRule", "RuleClass", "RuleDb", "Step",
    "Trace", "Ty", "TypeEnv", "TypingError", "Var", "assumption_mod_cast", "check_equiv_exhaustive",
    "check_rule_sound", "classify", "equiv_mod_cast", "eval_expr", "load_rules", "normalize",
    "parse_expr", "parse_pattern", "parse_rule", "prelude", "pretty", "push_cast", "replay",
    "rw_mod_cast", "verify",
]
