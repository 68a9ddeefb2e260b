"""Cast normalization.

:func:`normalize` runs four passes over an expression:

1. top down, lift every numeral ``(k : T)`` with ``k >= 2`` to ``cast(T, k:nat)``;
2. bottom up, rewrite with elim rules left-to-right and move rules
   right-to-left, splitting ``P(cast x, cast y)`` with differing sources
   when nothing else fires;
3. top down, squash rules left-to-right until nothing changes;
4. top down, turn ``cast(T, k:nat)`` back into ``k:T``.

Every rewrite is recorded as a :class:`~castnorm.trace.Step` and costs one
unit of fuel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import FuelExhausted, RewriteFailed
from .rules import L2R, R2L, RewriteRule, RuleClass, RuleDb, rewrite
from .terms import NAT, App, Cast, Expr, Num, children, iter_nodes, numeral_binary_view, \
    replace_at, with_children
from .trace import NUMERAL_LIFT, NUMERAL_RESTORE, SPLIT_LEFT, SPLIT_RIGHT, Step, Trace, replay

log = logging.getLogger(__name__)

DEFAULT_FUEL = 10_000


@dataclass(frozen=True)
class NormalizeOptions:
    fuel: int = DEFAULT_FUEL
    mode: str = "normalize"

    def __post_init__(self) -> None:
        if self.fuel < 1:
            raise ValueError("fuel must be at least 1")
        if self.mode not in ("normalize", "push"):
            raise ValueError(f"unknown mode {self.mode!r}")


class _Engine:
    def __init__(self, db: RuleDb, ctx: Sequence[Expr] = (), fuel: int = DEFAULT_FUEL):
        self.db = db
        self.env = db.env
        self.ctx = tuple(ctx)
        self.fuel = fuel
        self.used = 0
        self.steps: list[Step] = []
        self._settled: set[Expr] = set()
        self._discharge = make_discharger(db, self.ctx, fuel) if self.ctx else None

    def record(self, pass_: str, rule: str, direction: str, path, before: Expr,
               after: Expr, note: str = "") -> None:
        if self.used >= self.fuel:
            raise FuelExhausted(self.fuel)
        self.used += 1
        self.steps.append(Step(pass_, rule, direction, tuple(path), before, after, note))

    def try_rule(self, rule: RewriteRule, direction: str, e: Expr, path, pass_: str) -> Expr | None:
        res = rewrite(rule, direction, e, self.env)
        if res is None:
            return None
        out, conds = res
        if conds and not (self._discharge and self._discharge(conds)):
            return None
        self.record(pass_, rule.name, direction, path, e, out)
        return out

    def first_rule(self, cls: RuleClass, direction: str, e: Expr, path, pass_: str) -> Expr | None:
        for rule in self.db.candidates(cls, direction, e):
            out = self.try_rule(rule, direction, e, path, pass_)
            if out is not None:
                return out
        return None

    # -- traversals -------------------------------------------------------

    def top_down(self, e: Expr, path: tuple[int, ...], node: Callable) -> Expr:
        while True:
            new = node(e, path)
            if new is None:
                break
            e = new
        kids = children(e)
        if kids:
            new_kids = [self.top_down(k, path + (i,), node) for i, k in enumerate(kids)]
            if any(a is not b for a, b in zip(new_kids, kids)):
                e = with_children(e, new_kids)
        return e

    def bottom_up(self, e: Expr, path: tuple[int, ...], node: Callable) -> Expr:
        while True:
            if e in self._settled:
                return e
            kids = children(e)
            if kids:
                new_kids = [self.bottom_up(k, path + (i,), node) for i, k in enumerate(kids)]
                if any(a is not b for a, b in zip(new_kids, kids)):
                    e = with_children(e, new_kids)
            new = node(e, path)
            if new is None:
                self._settled.add(e)
                return e
            e = new

    # -- pass 1 / 4 ---------------------------------------------------------

    def lift_node(self, e: Expr, path) -> Expr | None:
        if (isinstance(e, Num) and e.ty != NAT and e.value >= 2
                and self.env.coercion_exists(NAT, e.ty)):
            new = Cast(NAT, e.ty, Num(e.value, NAT))
            self.record("1", NUMERAL_LIFT, L2R, path, e, new,
                        note=str(numeral_binary_view(e.value)))
            return new
        return None

    def lift_numerals(self, e: Expr) -> Expr:
        return self.top_down(e, (), self.lift_node)

    def restore_node(self, e: Expr, path) -> Expr | None:
        if isinstance(e, Cast) and e.src == NAT and isinstance(e.body, Num):
            new = Num(e.body.value, e.dst)
            self.record("4", NUMERAL_RESTORE, R2L, path, e, new,
                        note=str(numeral_binary_view(e.body.value)))
            return new
        return None

    def restore_numerals(self, e: Expr) -> Expr:
        return self.top_down(e, (), self.restore_node)

    # -- pass 2 -------------------------------------------------------------

    def move_elim_node(self, e: Expr, path) -> Expr | None:
        out = self.first_rule(RuleClass.ELIM, L2R, e, path, "2")
        if out is None:
            out = self.first_rule(RuleClass.MOVE, R2L, e, path, "2")
        if out is None:
            out = self.split(e, path)
        return out

    def move_elim(self, e: Expr) -> Expr:
        self._settled = set()
        return self.bottom_up(e, (), self.move_elim_node)

    def split(self, e: Expr, path) -> Expr | None:
        if not (isinstance(e, App) and len(e.args) == 2):
            return None
        a, b = e.args
        if isinstance(a, Cast) and isinstance(b, Cast):
            if a.dst != b.dst or a.src == b.src:
                return None
            if self.env.coercion_exists(a.src, b.src):
                new = Cast(b.src, a.dst, Cast(a.src, b.src, a.body))
                self.record("split", SPLIT_LEFT, R2L, path + (0,), a, new)
                return App(e.op, (new, b))
            if self.env.coercion_exists(b.src, a.src):
                new = Cast(a.src, b.dst, Cast(b.src, a.src, b.body))
                self.record("split", SPLIT_RIGHT, R2L, path + (1,), b, new)
                return App(e.op, (a, new))
            return None
        if isinstance(a, Cast) and isinstance(b, Num):
            new = self.split_numeral(a, b, path + (1,))
            return None if new is None else App(e.op, (a, new))
        if isinstance(b, Cast) and isinstance(a, Num):
            new = self.split_numeral(b, a, path + (0,))
            return None if new is None else App(e.op, (new, b))
        return None

    def split_numeral(self, other: Cast, num: Num, path) -> Expr | None:
        """Rewrite ``0:Z`` or ``1:Z`` as a cast from ``other``'s source type.

        Justified by whichever squash rule maps the cast form back to the
        native numeral.
        """
        if num.value > 1 or num.ty != other.dst:
            return None
        lifted = Cast(other.src, other.dst, Num(num.value, other.src))
        for rule in self.db.candidates(RuleClass.SQUASH, L2R, lifted):
            res = rewrite(rule, L2R, lifted, self.env)
            if res is not None and res[0] == num and not res[1]:
                self.record("split", rule.name, R2L, path, num, lifted)
                return lifted
        return None

    # -- pass 3 -------------------------------------------------------------

    def squash_node(self, e: Expr, path) -> Expr | None:
        return self.first_rule(RuleClass.SQUASH, L2R, e, path, "3")

    def squash(self, e: Expr) -> Expr:
        while True:
            before = self.used
            e = self.top_down(e, (), self.squash_node)
            if self.used == before:
                return e

    # -- push_cast ----------------------------------------------------------

    def push_node(self, e: Expr, path) -> Expr | None:
        out = self.first_rule(RuleClass.MOVE, L2R, e, path, "push")
        if out is None:
            out = self.first_rule(RuleClass.SQUASH, L2R, e, path, "push")
        return out

    def push(self, e: Expr) -> Expr:
        self._settled = set()
        return self.bottom_up(e, (), self.push_node)

    # -- drivers --------------------------------------------------------------

    def normalize(self, e: Expr) -> Expr:
        e = self.lift_numerals(e)
        e = self.move_elim(e)
        e = self.squash(e)
        return self.restore_numerals(e)

    def rewrite_once(self, e: Expr, rule: RewriteRule, direction: str) -> Expr:
        """Leftmost-outermost single application of ``rule``."""
        for path, node in iter_nodes(e):
            out = self.try_rule(rule, direction, node, path, "rw")
            if out is not None:
                return replace_at(e, path, out)
        raise RewriteFailed(rule.name)

    def trace(self, start: Expr, end: Expr) -> Trace:
        return Trace(start, end, list(self.steps), self.used)

    def exhausted(self, start: Expr) -> FuelExhausted:
        partial = replay(start, self.steps)
        trace = Trace(start, partial, list(self.steps), self.used, exhausted=True)
        return FuelExhausted(self.fuel, partial, trace)


def _opts(opts: NormalizeOptions | None, fuel: int | None) -> NormalizeOptions:
    if opts is None:
        opts = NormalizeOptions()
    if fuel is not None:
        opts = NormalizeOptions(fuel, opts.mode)
    return opts


def _run(e: Expr, db: RuleDb, ctx, opts: NormalizeOptions, body: Callable) -> tuple[Expr, Trace]:
    eng = _Engine(db, ctx, opts.fuel)
    try:
        out = body(eng, e)
    except FuelExhausted:
        raise eng.exhausted(e) from None
    return out, eng.trace(e, out)


def normalize(e: Expr, db: RuleDb, ctx: Sequence[Expr] = (),
              opts: NormalizeOptions | None = None, *, fuel: int | None = None) -> tuple[Expr, Trace]:
    """Normalize ``e``; returns the normal form and a replayable trace.

    Raises :class:`FuelExhausted` carrying the partial expression and trace
    when the rewrite budget runs out.
    """
    opts = _opts(opts, fuel)
    if opts.mode == "push":
        return push_cast(e, db, ctx, opts)
    return _run(e, db, ctx, opts, _Engine.normalize)


def push_cast(e: Expr, db: RuleDb, ctx: Sequence[Expr] = (),
              opts: NormalizeOptions | None = None, *, fuel: int | None = None) -> tuple[Expr, Trace]:
    """Push casts toward the leaves with move and squash rules (no elim, no splitting)."""
    return _run(e, db, ctx, _opts(opts, fuel), _Engine.push)


def pass_lift_numerals(e: Expr, db: RuleDb) -> tuple[Expr, list[Step]]:
    out, trace = _run(e, db, (), NormalizeOptions(), _Engine.lift_numerals)
    return out, trace.steps


def pass_move_elim(e: Expr, db: RuleDb, ctx: Sequence[Expr] = (),
                   fuel: int = DEFAULT_FUEL) -> tuple[Expr, list[Step]]:
    out, trace = _run(e, db, ctx, NormalizeOptions(fuel), _Engine.move_elim)
    return out, trace.steps


def split_heuristic(node: Expr, db: RuleDb) -> tuple[Expr, Step] | None:
    eng = _Engine(db)
    out = eng.split(node, ())
    return None if out is None else (out, eng.steps[-1])


def pass_squash(e: Expr, db: RuleDb, fuel: int = DEFAULT_FUEL) -> tuple[Expr, list[Step]]:
    out, trace = _run(e, db, (), NormalizeOptions(fuel), _Engine.squash)
    return out, trace.steps


def pass_restore_numerals(e: Expr, db: RuleDb) -> tuple[Expr, list[Step]]:
    out, trace = _run(e, db, (), NormalizeOptions(), _Engine.restore_numerals)
    return out, trace.steps


def make_discharger(db: RuleDb, ctx: Sequence[Expr], fuel: int = DEFAULT_FUEL):
    """Side-condition discharger: each condition must be mod-cast equal to a hypothesis.

    Conditions and hypotheses are normalized without a context, so
    discharge never recurses into further conditional rewriting.
    """
    hyp_forms: list[Expr] | None = None

    def nf(e: Expr) -> Expr | None:
        try:
            return normalize(e, db, (), fuel=fuel)[0]
        except FuelExhausted:
            return None

    def discharge(conds: Sequence[Expr]) -> bool:
        nonlocal hyp_forms
        if hyp_forms is None:
            hyp_forms = [nf(h) for h in ctx]
        for c in conds:
            target = nf(c)
            if target is None or target not in hyp_forms:
                return False
        return True

    return discharge


def equiv_mod_cast(a: Expr, b: Expr, db: RuleDb, ctx: Sequence[Expr] = (),
                   opts: NormalizeOptions | None = None) -> bool:
    if a == b:
        return True
    try:
        return normalize(a, db, ctx, opts)[0] == normalize(b, db, ctx, opts)[0]
    except FuelExhausted as err:
        log.warning("equiv_mod_cast: %s; treating as not equivalent", err)
        return False


def assumption_mod_cast(goal: Expr, ctx: Sequence[Expr], db: RuleDb,
                        opts: NormalizeOptions | None = None) -> int | None:
    """Index of the first hypothesis that closes ``goal`` modulo casts."""
    for i, h in enumerate(ctx):
        if equiv_mod_cast(goal, h, db, ctx, opts):
            return i
    return None


def rw_mod_cast(e: Expr, rules: Sequence[tuple[str | RewriteRule, str]], db: RuleDb,
                ctx: Sequence[Expr] = (), opts: NormalizeOptions | None = None) -> tuple[Expr, Trace]:
    """Normalize, then alternate single rewrites with the listed rules and normalization.

    A rule is given by name (looked up in ``db``) or as a :class:`RewriteRule`;
    the latter lets a one-off lemma be used without adding it to the
    normalization rule set.
    """
    opts = _opts(opts, None)
    resolved = []
    for name, direction in rules:
        rule = name if isinstance(name, RewriteRule) else db.get(name)
        if rule is None:
            raise RewriteFailed(name, "no such rule")
        if direction not in (L2R, R2L):
            raise ValueError(f"bad direction {direction!r}")
        resolved.append((rule, direction))

    def body(eng: _Engine, cur: Expr) -> Expr:
        cur = eng.normalize(cur)
        for rule, direction in resolved:
            cur = eng.rewrite_once(cur, rule, direction)
            cur = eng.normalize(cur)
        return cur

    return _run(e, db, ctx, opts, body)
