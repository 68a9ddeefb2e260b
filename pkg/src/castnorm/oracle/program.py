"""Compile concrete expressions to flat postfix programs for the kernels.

All values are rationals ``num/den`` with ``den > 0`` in lowest terms;
naturals and integers have ``den == 1`` and truth values are 0/1.  Casts
between nat, int and rat are inclusions, so they compile to nothing.

An instruction is three int64 words ``(opcode, a, b)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..errors import AbstractTypePresent, UnknownUserOp
from ..terms import NAT, PROP, RAT, App, Cast, Expr, Num, Ty, Var, expr_type

OP_VAR = 0
OP_CONST = 1
OP_ADD = 2
OP_SUB = 3
OP_TSUB = 4
OP_MUL = 5
OP_NEG = 6
OP_LT = 7
OP_LE = 8
OP_EQ = 9
OP_NE = 10
OP_DVD_INT = 11
OP_DVD_RAT = 12

_SIMPLE = {"add": OP_ADD, "mul": OP_MUL, "neg": OP_NEG, "lt": OP_LT, "le": OP_LE,
           "eq": OP_EQ, "ne": OP_NE}


def check_concrete(ty) -> None:
    if not isinstance(ty, Ty) or ty.kind == "user":
        raise AbstractTypePresent(f"type {ty} has no concrete semantics; instantiate it first")


def compile_expr(e: Expr, var_index: dict[Var, int], out: list[int]) -> None:
    if isinstance(e, Var):
        check_concrete(e.ty)
        out += (OP_VAR, var_index[e], 0)
    elif isinstance(e, Num):
        check_concrete(e.ty)
        out += (OP_CONST, e.value, 1)
    elif isinstance(e, Cast):
        check_concrete(e.src)
        check_concrete(e.dst)
        compile_expr(e.body, var_index, out)
    elif isinstance(e, App):
        if not e.op.builtin:
            raise UnknownUserOp(f"operator {e.op.name} is uninterpreted")
        for a in e.args:
            compile_expr(a, var_index, out)
        ty = expr_type(e.args[0])
        check_concrete(ty)
        name = e.op.name
        if name == "sub":
            out += (OP_TSUB if ty == NAT else OP_SUB, 0, 0)
        elif name == "dvd":
            out += (OP_DVD_RAT if ty == RAT else OP_DVD_INT, 0, 0)
        else:
            out += (_SIMPLE[name], 0, 0)
    else:
        raise TypeError(f"cannot compile {e!r}")


def compile_program(exprs: Sequence[Expr], variables: Sequence[Var]):
    """Return ``(code, starts, lengths)`` for ``exprs`` over ``variables``."""
    index = {v: i for i, v in enumerate(variables)}
    code: list[int] = []
    starts, lengths = [], []
    for e in exprs:
        starts.append(len(code) // 3)
        compile_expr(e, index, code)
        lengths.append(len(code) // 3 - starts[-1])
    return code, starts, lengths


def domain(ty: Ty, hi: int) -> list[Fraction | int | bool]:
    """Enumeration domain of one variable, sorted."""
    if ty == NAT:
        return list(range(0, hi + 1))
    if ty == PROP:
        return [False, True]
    if ty == RAT:
        vals = {Fraction(p, q) for p in range(-hi, hi + 1) for q in range(1, hi + 1)}
        return sorted(vals)
    if ty.kind == "builtin-int":
        return list(range(-hi, hi + 1))
    raise AbstractTypePresent(f"type {ty} has no concrete semantics; instantiate it first")


def flat_domains(domains: Sequence[Sequence]) -> tuple[list[int], list[int], list[int], list[int]]:
    nums, dens, offs, lens = [], [], [], []
    for dom in domains:
        offs.append(len(nums))
        lens.append(len(dom))
        for v in dom:
            f = Fraction(v)
            nums.append(f.numerator)
            dens.append(f.denominator)
    return nums, dens, offs, lens
