"""Exhaustive semantic oracle over nat, int and rat.

Semantics: nat subtraction truncates at zero, casts are the inclusions
nat -> int -> rat, ``dvd`` is divisibility on nat/int and "a != 0 or b = 0"
on rat.  User-declared types must be instantiated (at rat by default)
before evaluation; user-declared operators are uninterpreted.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from ..errors import InstantiationIllTyped, OracleError, UnknownUserOp
from ..rules import RewriteRule, Subst, instantiate, type_metas
from ..terms import (
    CONCRETE_TYPES,
    NAT,
    RAT,
    App,
    Cast,
    Expr,
    Meta,
    Num,
    Ty,
    TypeEnv,
    Var,
    expr_type,
    free_vars,
    iter_nodes,
    op_allowed,
)
from . import kernel
from .program import check_concrete, compile_program, domain, flat_domains

log = logging.getLogger(__name__)

DEFAULT_RANGE = 4


def eval_expr(e: Expr, assignment: Mapping[str, object]):
    """Evaluate ``e`` directly on its tree (independent of the kernels)."""
    if isinstance(e, Var):
        check_concrete(e.ty)
        v = assignment[e.name]
        return Fraction(v) if e.ty == RAT else v
    if isinstance(e, Num):
        check_concrete(e.ty)
        return Fraction(e.value) if e.ty == RAT else e.value
    if isinstance(e, Cast):
        check_concrete(e.src)
        check_concrete(e.dst)
        v = eval_expr(e.body, assignment)
        return Fraction(v) if e.dst == RAT else v
    if isinstance(e, App):
        if not e.op.builtin:
            raise UnknownUserOp(f"operator {e.op.name} is uninterpreted")
        args = [eval_expr(a, assignment) for a in e.args]
        ty = expr_type(e.args[0])
        name = e.op.name
        if name == "neg":
            return -args[0]
        a, b = args
        if name == "add":
            return a + b
        if name == "sub":
            return max(a - b, 0) if ty == NAT else a - b
        if name == "mul":
            return a * b
        if name == "lt":
            return a < b
        if name == "le":
            return a <= b
        if name == "eq":
            return a == b
        if name == "ne":
            return a != b
        if name == "dvd":
            if ty == RAT:
                return a != 0 or b == 0
            return b == 0 if a == 0 else b % a == 0
    raise OracleError(f"cannot evaluate {e!r}")


@dataclass
class Verdict:
    equivalent: bool
    counterexample: dict[str, object] | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.equivalent

    def __str__(self) -> str:
        if self.equivalent:
            return f"Equivalent ({self.checked} assignments)"
        shown = ", ".join(f"{k}={v}" for k, v in self.counterexample.items())
        return f"Counterexample({shown})"


def _variables(exprs: Sequence[Expr]) -> list[Var]:
    vs: set[Var] = set()
    for e in exprs:
        vs |= free_vars(e)
    return sorted(vs, key=lambda v: (v.name, v.ty.name))


def _decode(index: int, variables: Sequence[Var], domains: Sequence[list]) -> dict[str, object]:
    values = []
    for dom in reversed(domains):
        index, r = divmod(index, len(dom))
        values.append(dom[r])
    return {v.name: val for v, val in zip(variables, reversed(values))}


def check_equiv_exhaustive(a: Expr, b: Expr, ctx: Sequence[Expr] = (), hi: int = DEFAULT_RANGE,
                           backend: str | None = None) -> Verdict:
    """Compare ``a`` and ``b`` on every assignment satisfying ``ctx``.

    nat variables range over 0..hi, int over -hi..hi, rat over p/q with
    |p|, q <= hi.  Variables are enumerated in name order, last fastest.
    """
    ctx = list(ctx)
    variables = _variables([a, b, *ctx])
    domains = [domain(v.ty, hi) for v in variables]
    code, starts, lengths = compile_program([*ctx, a, b], variables)
    status, index, checked = kernel.find_counterexample(
        code, starts, lengths, len(ctx), *flat_domains(domains), backend=backend)
    if status == 0:
        return Verdict(True, None, checked)
    return Verdict(False, _decode(index, variables, domains), checked)


def abstract_instantiate(e: Expr, target: Ty = RAT, env: TypeEnv | None = None) -> Expr:
    """Replace every user-declared type in ``e`` by ``target``.

    Casts are rebuilt from their new (src, dst) pairs; a cast that becomes
    src == dst is the identity and disappears.
    """
    env = env or TypeEnv.standard()

    def ty(t):
        return target if isinstance(t, Ty) and t.kind == "user" else t

    def go(x: Expr) -> Expr:
        if isinstance(x, Var):
            return Var(x.name, ty(x.ty))
        if isinstance(x, Num):
            return Num(x.value, ty(x.ty))
        if isinstance(x, Meta):
            return Meta(x.name, ty(x.ty))
        if isinstance(x, Cast):
            body = go(x.body)
            src, dst = ty(x.src), ty(x.dst)
            if src == dst:
                return body
            if not env.coercion_exists(src, dst):
                raise InstantiationIllTyped(f"no coercion from {src} to {dst} at {target}")
            return Cast(src, dst, body)
        if isinstance(x, App):
            out = App(x.op, tuple(go(a) for a in x.args))
            arg_ty = expr_type(out.args[0])
            if isinstance(arg_ty, Ty) and not op_allowed(x.op, arg_ty):
                raise InstantiationIllTyped(f"{x.op.name} is not defined at type {arg_ty}")
            return out
        return x

    return go(e)


def has_abstract_types(e: Expr) -> bool:
    for _, n in iter_nodes(e):
        tys = (n.src, n.dst) if isinstance(n, Cast) else (getattr(n, "ty", None),)
        if any(isinstance(t, Ty) and t.kind == "user" for t in tys):
            return True
    return False


# Stand-in for "any user type"; evaluated at rat.
ABSTRACT = Ty("<abstract>")


@dataclass
class RuleVerdict:
    rule: str
    status: str
    instances: int = 0
    failing_instance: str | None = None
    counterexample: dict[str, object] | None = None
    note: str = ""

    @property
    def sound(self) -> bool:
        return self.status == "sound"

    def __str__(self) -> str:
        if self.status == "sound":
            return f"Sound ({self.instances} type instances)"
        if self.status == "unsound":
            shown = ", ".join(f"{k}={v}" for k, v in self.counterexample.items())
            return f"Unsound at {self.failing_instance}: counterexample {shown}"
        return f"Skipped ({self.note})"


def check_rule_sound(rule: RewriteRule, env: TypeEnv | None = None,
                     hi: int = DEFAULT_RANGE, backend: str | None = None) -> RuleVerdict:
    """Check ``lhs = rhs`` (under the rule's conditions) at every type instance.

    Type metas range over nat, int, rat and one extra abstract type that
    every concrete type coerces into.  Abstract types are evaluated at rat,
    which is what gives rules like ``cast(rat -> 'T, ...)`` an instance.
    """
    env = env or TypeEnv.standard()
    with_abstract = env.copy()
    for t in CONCRETE_TYPES:
        with_abstract.graph.add(t, ABSTRACT)
    parts = [rule.lhs, rule.rhs, *rule.conds]
    tmetas = sorted(set().union(*map(type_metas, parts)), key=lambda t: t.name)
    meta_types = {n.name: n.ty for p in parts for _, n in iter_nodes(p) if isinstance(n, Meta)}
    instances = 0
    for combo in itertools.product((*CONCRETE_TYPES, ABSTRACT), repeat=len(tmetas)):
        s = Subst(types=dict(zip(tmetas, combo)))
        s.terms = {name: Var(name, s.ty(t)) for name, t in meta_types.items()}
        inst = [instantiate(p, s, with_abstract) for p in parts]
        if any(x is None for x in inst):
            continue
        try:
            inst = [abstract_instantiate(x, RAT, env) if has_abstract_types(x) else x
                    for x in inst]
            verdict = check_equiv_exhaustive(inst[0], inst[1], inst[2:], hi, backend)
        except (UnknownUserOp, InstantiationIllTyped) as err:
            log.warning("rule %s: %s; soundness check skipped", rule.name, err)
            return RuleVerdict(rule.name, "skipped", instances, note=str(err))
        instances += 1
        if not verdict:
            where = ", ".join(f"{m}={t}" for m, t in zip(tmetas, combo)) or "no type metas"
            return RuleVerdict(rule.name, "unsound", instances, where, verdict.counterexample)
    if instances == 0:
        return RuleVerdict(rule.name, "skipped", 0, note="no well-typed instance")
    return RuleVerdict(rule.name, "sound", instances)


__all__ = [
    "DEFAULT_RANGE",
    "RuleVerdict",
    "Verdict",
    "abstract_instantiate",
    "check_equiv_exhaustive",
    "check_rule_sound",
    "eval_expr",
    "has_abstract_types",
]
