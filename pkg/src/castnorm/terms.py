"""Typed expression trees, the coercion graph and cast-counting utilities.

Expressions are immutable and hashable.  Patterns used by rewrite rules are
built from the same node classes: a pattern may additionally contain
:class:`Meta` leaves and :class:`TyMeta` in any type position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from .errors import (
    DeclarationError,
    IllTypedApplication,
    InvalidCast,
    UndeclaredVariable,
)


@dataclass(frozen=True)
class Ty:
    name: str
    kind: str = "user"

    def __str__(self) -> str:
        return self.name


NAT = Ty("nat", "builtin-nat")
INT = Ty("int", "builtin-int")
RAT = Ty("rat", "builtin-rat")
PROP = Ty("prop", "builtin-prop")
BUILTIN_TYPES = {t.name: t for t in (NAT, INT, RAT, PROP)}
CONCRETE_TYPES = (NAT, INT, RAT)


@dataclass(frozen=True)
class TyMeta:
    """A type variable in a rule pattern, written ``'T``."""

    name: str

    def __str__(self) -> str:
        return "'" + self.name


TyLike = Union[Ty, TyMeta]


@dataclass(frozen=True)
class OpSym:
    name: str
    arity: int
    rel: bool = False
    builtin: bool = False


ADD = OpSym("add", 2, builtin=True)
SUB = OpSym("sub", 2, builtin=True)
MUL = OpSym("mul", 2, builtin=True)
NEG = OpSym("neg", 1, builtin=True)
LT = OpSym("lt", 2, rel=True, builtin=True)
LE = OpSym("le", 2, rel=True, builtin=True)
EQ = OpSym("eq", 2, rel=True, builtin=True)
NE = OpSym("ne", 2, rel=True, builtin=True)
DVD = OpSym("dvd", 2, rel=True, builtin=True)
BUILTIN_OPS = {op.name: op for op in (ADD, SUB, MUL, NEG, LT, LE, EQ, NE, DVD)}


class Expr:
    """Base class of expression and pattern nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        from .syntax import pretty

        return pretty(self)


@dataclass(frozen=True, repr=False)
class Var(Expr):
    name: str
    ty: Ty

    def __repr__(self) -> str:
        return f"Var({self.name}:{self.ty})"


@dataclass(frozen=True, repr=False)
class Num(Expr):
    value: int
    ty: TyLike

    def __repr__(self) -> str:
        return f"Num({self.value}:{self.ty})"


@dataclass(frozen=True, repr=False)
class App(Expr):
    op: OpSym
    args: tuple[Expr, ...]
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.op.name, self.args)))

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"App({self.op.name}, {list(self.args)!r})"


@dataclass(frozen=True, repr=False)
class Cast(Expr):
    src: TyLike
    dst: TyLike
    body: Expr
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash(("cast", self.src, self.dst, self.body)))

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Cast({self.src}->{self.dst}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Meta(Expr):
    """A term metavariable ``?x``; only legal inside rule patterns."""

    name: str
    ty: TyLike

    def __repr__(self) -> str:
        return f"Meta(?{self.name}:{self.ty})"


def app(op: OpSym, *args: Expr) -> App:
    return App(op, tuple(args))


def cast(src: TyLike, dst: TyLike, body: Expr) -> Cast:
    return Cast(src, dst, body)


# ---------------------------------------------------------------------------
# coercions and declarations


class CoercionGraph:
    """Directed acyclic graph of base coercions.

    A coercion from ``S`` to ``T`` exists iff ``T`` is reachable from ``S``.
    Edges are only added while an environment is being declared; queries
    never mutate anything but the reachability cache.
    """

    def __init__(self, edges: Sequence[tuple[Ty, Ty]] = ()):
        self._succ: dict[Ty, set[Ty]] = {}
        self._reach: dict[Ty, frozenset[Ty]] = {}
        for src, dst in edges:
            self.add(src, dst)

    @property
    def edges(self) -> frozenset[tuple[Ty, Ty]]:
        return frozenset((s, d) for s, ds in self._succ.items() for d in ds)

    def add(self, src: Ty, dst: Ty) -> None:
        if PROP in (src, dst):
            raise DeclarationError("prop cannot take part in a coercion")
        if src == dst:
            raise DeclarationError(f"self coercion {src} -> {dst}")
        if src in self.reachable(dst):
            raise DeclarationError(f"coercion {src} -> {dst} would create a cycle")
        self._succ.setdefault(src, set()).add(dst)
        self._reach.clear()

    def reachable(self, src: Ty) -> frozenset[Ty]:
        """All types strictly reachable from ``src``."""
        cached = self._reach.get(src)
        if cached is not None:
            return cached
        seen: set[Ty] = set()
        stack = list(self._succ.get(src, ()))
        while stack:
            t = stack.pop()
            if t not in seen:
                seen.add(t)
                stack.extend(self._succ.get(t, ()))
        result = frozenset(seen)
        self._reach[src] = result
        return result

    def exists(self, src: Ty, dst: Ty) -> bool:
        return src != dst and dst in self.reachable(src)

    def copy(self) -> CoercionGraph:
        return CoercionGraph(sorted(self.edges, key=lambda e: (e[0].name, e[1].name)))


def coercion_exists(g: CoercionGraph, src: Ty, dst: Ty) -> bool:
    return g.exists(src, dst)


class TypeEnv:
    """Declared types, coercions, operators and variable typings."""

    def __init__(self) -> None:
        self.types: dict[str, Ty] = dict(BUILTIN_TYPES)
        self.graph = CoercionGraph()
        self.ops: dict[str, OpSym] = dict(BUILTIN_OPS)
        self.vars: dict[str, Var] = {}

    @classmethod
    def standard(cls) -> TypeEnv:
        env = cls()
        env.declare_coercion("nat", "int")
        env.declare_coercion("int", "rat")
        return env

    def copy(self) -> TypeEnv:
        other = TypeEnv()
        other.types = dict(self.types)
        other.graph = self.graph.copy()
        other.ops = dict(self.ops)
        other.vars = dict(self.vars)
        return other

    def declare_type(self, name: str) -> Ty:
        if name in self.types or name in self.ops or name == "cast":
            raise DeclarationError(f"type {name} already declared")
        ty = Ty(name)
        self.types[name] = ty
        return ty

    def declare_coercion(self, src: str, dst: str) -> None:
        self.graph.add(self.type(src), self.type(dst))

    def declare_op(self, name: str, arity: int, rel: bool) -> OpSym:
        if name in self.ops or name in self.types or name == "cast":
            raise DeclarationError(f"operator {name} already declared")
        if arity < 1:
            raise DeclarationError(f"operator {name} needs arity >= 1")
        op = OpSym(name, arity, rel)
        self.ops[name] = op
        return op

    def declare_var(self, name: str, ty_name: str) -> Var:
        ty = self.type(ty_name)
        if ty == PROP:
            raise DeclarationError(f"variable {name} cannot have type prop")
        if name in self.vars or name in self.ops or name in self.types:
            raise DeclarationError(f"name {name} already declared")
        v = Var(name, ty)
        self.vars[name] = v
        return v

    def type(self, name: str) -> Ty:
        try:
            return self.types[name]
        except KeyError:
            raise DeclarationError(f"unknown type {name}") from None

    def coercion_exists(self, src: Ty, dst: Ty) -> bool:
        return self.graph.exists(src, dst)


# ---------------------------------------------------------------------------
# typing


def expr_type(e: Expr) -> TyLike:
    """Type of an already well-formed node, read off structurally."""
    if isinstance(e, (Var, Num, Meta)):
        return e.ty
    if isinstance(e, Cast):
        return e.dst
    if isinstance(e, App):
        return PROP if e.op.rel else expr_type(e.args[0])
    raise TypeError(f"not an expression: {e!r}")


def op_allowed(op: OpSym, ty: Ty) -> bool:
    if ty == PROP:
        return op.name in ("eq", "ne")
    if op.name == "neg":
        return ty != NAT
    return True


def check_app(e: App) -> None:
    """Check one application node whose children are already well typed."""
    tys = [expr_type(a) for a in e.args]
    ty = tys[0]
    if any(t != ty for t in tys):
        raise IllTypedApplication(
            f"{e.op.name} applied to mixed types {', '.join(map(str, tys))}")
    if isinstance(ty, Ty) and not op_allowed(e.op, ty):
        raise IllTypedApplication(f"{e.op.name} is not defined at type {ty}")


def type_of(e: Expr, env: TypeEnv) -> Ty:
    """Check ``e`` against ``env`` and return its type."""
    if isinstance(e, Var):
        declared = env.vars.get(e.name)
        if declared is None:
            raise UndeclaredVariable(f"undeclared variable {e.name}")
        if declared.ty != e.ty:
            raise IllTypedApplication(f"variable {e.name} has type {declared.ty}, not {e.ty}")
        return e.ty
    if isinstance(e, Num):
        if not isinstance(e.ty, Ty) or e.ty == PROP or e.ty.name not in env.types:
            raise IllTypedApplication(f"bad numeral type {e.ty}")
        if e.value < 0:
            raise IllTypedApplication("numerals are nonnegative")
        return e.ty
    if isinstance(e, Cast):
        body_ty = type_of(e.body, env)
        if body_ty != e.src:
            raise InvalidCast(f"cast source {e.src} does not match body type {body_ty}")
        if not isinstance(e.dst, Ty) or not env.coercion_exists(e.src, e.dst):
            raise InvalidCast(f"no coercion from {e.src} to {e.dst}")
        return e.dst
    if isinstance(e, App):
        if env.ops.get(e.op.name) != e.op:
            raise IllTypedApplication(f"unknown operator {e.op.name}")
        if len(e.args) != e.op.arity:
            raise IllTypedApplication(f"{e.op.name} expects {e.op.arity} arguments")
        arg_tys = [type_of(a, env) for a in e.args]
        ty = arg_tys[0]
        if any(t != ty for t in arg_tys):
            raise IllTypedApplication(
                f"{e.op.name} applied to mixed types {', '.join(map(str, arg_tys))}")
        if not op_allowed(e.op, ty):
            raise IllTypedApplication(f"{e.op.name} is not defined at type {ty}")
        return PROP if e.op.rel else ty
    raise IllTypedApplication(f"not a closed expression: {e!r}")


# ---------------------------------------------------------------------------
# structure


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, App):
        return e.args
    if isinstance(e, Cast):
        return (e.body,)
    return ()


def with_children(e: Expr, kids: Sequence[Expr]) -> Expr:
    if isinstance(e, App):
        return App(e.op, tuple(kids))
    if isinstance(e, Cast):
        (body,) = kids
        return Cast(e.src, e.dst, body)
    return e


def subterm(e: Expr, path: Sequence[int]) -> Expr:
    for i in path:
        e = children(e)[i]
    return e


def replace_at(e: Expr, path: Sequence[int], new: Expr) -> Expr:
    if not path:
        return new
    kids = list(children(e))
    i = path[0]
    kids[i] = replace_at(kids[i], path[1:], new)
    return with_children(e, kids)


def iter_nodes(e: Expr, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Expr]]:
    """Pre-order walk yielding (path, node)."""
    yield path, e
    for i, k in enumerate(children(e)):
        yield from iter_nodes(k, path + (i,))


def free_vars(e: Expr) -> set[Var]:
    return {n for _, n in iter_nodes(e) if isinstance(n, Var)}


def types_in(e: Expr) -> set[Ty]:
    out: set[Ty] = set()
    for _, n in iter_nodes(e):
        if isinstance(n, Cast):
            out.update(t for t in (n.src, n.dst) if isinstance(t, Ty))
        elif isinstance(n, (Var, Num)) and isinstance(n.ty, Ty):
            out.add(n.ty)
    return out


def count_casts(e: Expr) -> tuple[int, int]:
    """Return (head casts, internal casts).

    Head casts form the maximal chain of casts starting at the root; every
    other cast node is internal.  Metas count as cast-free leaves.
    """
    hc = 0
    while isinstance(e, Cast):
        hc += 1
        e = e.body
    ic = sum(1 for _, n in iter_nodes(e) if isinstance(n, Cast))
    return hc, ic


# ---------------------------------------------------------------------------
# numerals


@dataclass(frozen=True)
class NumeralView:
    """zero/one/bit0/bit1 spelling of a numeral."""

    head: str
    arg: NumeralView | None = None

    def value(self) -> int:
        if self.head == "zero":
            return 0
        if self.head == "one":
            return 1
        inner = self.arg.value()
        return 2 * inner + (1 if self.head == "bit1" else 0)

    def __str__(self) -> str:
        return self.head if self.arg is None else f"{self.head}({self.arg})"


def numeral_binary_view(v: int, ty: Ty | None = None) -> NumeralView:
    if v < 0:
        raise ValueError("numerals are nonnegative")
    if v == 0:
        return NumeralView("zero")
    if v == 1:
        return NumeralView("one")
    q, r = divmod(v, 2)
    return NumeralView("bit1" if r else "bit0", numeral_binary_view(q))
