"""Rewrite rules: parsing, automatic elim/move/squash classification,
first-order matching and instantiation.

A rule ``lhs = rhs`` is classified from the head-cast / internal-cast
counts of its two sides:

* elim   -- lhs has no head cast but at least one internal cast;
* move   -- lhs is exactly one head cast over a cast-free body, and rhs has
  no head cast but at least one internal cast;
* squash -- lhs has head casts only, rhs has no internal casts, and rhs has
  strictly fewer head casts.

Anything else is rejected unless the rule carries an explicit class.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Iterator, Sequence

from .errors import ClassifyError, DeclarationError, DuplicateName, ParseError, TypingError
from .syntax import Parser, tokenize
from .terms import (
    PROP,
    App,
    Cast,
    Expr,
    Meta,
    Num,
    Ty,
    TyLike,
    TyMeta,
    TypeEnv,
    Var,
    check_app,
    count_casts,
    expr_type,
    iter_nodes,
    op_allowed,
    replace_at,
    subterm,
)

log = logging.getLogger(__name__)

L2R = "L2R"
R2L = "R2L"


class RuleClass(str, enum.Enum):
    ELIM = "elim"
    MOVE = "move"
    SQUASH = "squash"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# classification


def is_elim(lhs: tuple[int, int], rhs: tuple[int, int]) -> bool:
    return lhs[0] == 0 and lhs[1] >= 1


def is_move(lhs: tuple[int, int], rhs: tuple[int, int]) -> bool:
    return lhs[0] == 1 and lhs[1] == 0 and rhs[0] == 0 and rhs[1] >= 1


def is_squash(lhs: tuple[int, int], rhs: tuple[int, int]) -> bool:
    return lhs[0] >= 1 and lhs[1] == 0 and rhs[1] == 0 and lhs[0] > rhs[0]


def classify(lhs: Expr, rhs: Expr) -> RuleClass:
    lc, rc = count_casts(lhs), count_casts(rhs)
    if is_elim(lc, rc):
        return RuleClass.ELIM
    if is_move(lc, rc):
        return RuleClass.MOVE
    if is_squash(lc, rc):
        return RuleClass.SQUASH
    raise ClassifyError(lc, rc)


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: Expr
    rhs: Expr
    conds: tuple[Expr, ...] = ()
    cls: RuleClass = RuleClass.ELIM
    override: RuleClass | None = None
    line: int | None = None

    def sides(self, direction: str) -> tuple[Expr, Expr]:
        return (self.lhs, self.rhs) if direction == L2R else (self.rhs, self.lhs)

    def __str__(self) -> str:
        cls = f" [{self.override}]" if self.override else ""
        cond = f" [cond: {', '.join(map(str, self.conds))}]" if self.conds else ""
        return f"rule {self.name}{cls}{cond} : {_side(self.lhs)} = {_side(self.rhs)}"


def _side(e: Expr) -> str:
    return f"({e})" if isinstance(e, App) and e.op.rel else str(e)


def _head_key(p: Expr):
    if isinstance(p, App):
        return p.op.name
    if isinstance(p, Cast):
        return "cast"
    if isinstance(p, Num):
        return ("num", p.value)
    if isinstance(p, Var):
        return ("var", p.name)
    return None


class RuleDb:
    """Ordered rule collection indexed by class, direction and head symbol.

    ``env`` supplies the coercion graph used when instantiating rules.
    """

    def __init__(self, env: TypeEnv, rules: Iterable[RewriteRule] = ()):
        self.env = env
        self.rules: list[RewriteRule] = []
        self._by_name: dict[str, RewriteRule] = {}
        self._index: dict[tuple, list[RewriteRule]] = {}
        for r in rules:
            self.add(r)

    def add(self, rule: RewriteRule) -> None:
        if rule.name in self._by_name:
            raise DuplicateName(f"duplicate rule name {rule.name}")
        self.rules.append(rule)
        self._by_name[rule.name] = rule
        self._index.clear()

    def extend(self, rules: Iterable[RewriteRule]) -> RuleDb:
        for r in rules:
            self.add(r)
        return self

    def copy(self, env: TypeEnv | None = None) -> RuleDb:
        return RuleDb(env or self.env, self.rules)

    def get(self, name: str) -> RewriteRule | None:
        return self._by_name.get(name)

    def of_class(self, cls: RuleClass) -> list[RewriteRule]:
        return [r for r in self.rules if r.cls == cls]

    def candidates(self, cls: RuleClass, direction: str, e: Expr) -> list[RewriteRule]:
        """Rules of ``cls`` whose directed source side could match ``e``."""
        key = _head_key(e)
        ix = (cls, direction, key)
        hit = self._index.get(ix)
        if hit is None:
            hit = [r for r in self.of_class(cls)
                   if _head_key(r.sides(direction)[0]) in (None, key)]
            self._index[ix] = hit
        return hit

    def __iter__(self) -> Iterator[RewriteRule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)


# ---------------------------------------------------------------------------
# pattern type inference


class _Unifier:
    def __init__(self) -> None:
        self.parent: dict[TyMeta, TyLike] = {}
        self.meta_types: dict[str, TyLike] = {}

    def find(self, t: TyLike) -> TyLike:
        while isinstance(t, TyMeta) and t in self.parent:
            t = self.parent[t]
        return t

    def unify(self, a: TyLike, b: TyLike, what: str) -> None:
        a, b = self.find(a), self.find(b)
        if a == b:
            return
        if isinstance(a, TyMeta) and (not isinstance(b, TyMeta) or a.name.startswith("_")):
            self.parent[a] = b
        elif isinstance(b, TyMeta):
            self.parent[b] = a
        else:
            raise TypingError(f"type mismatch in {what}: {a} vs {b}")

    def infer(self, e: Expr) -> TyLike:
        if isinstance(e, Meta):
            seen = self.meta_types.setdefault(e.name, e.ty)
            self.unify(seen, e.ty, f"?{e.name}")
            return e.ty
        if isinstance(e, Num):
            return e.ty
        if isinstance(e, Var):
            return e.ty
        if isinstance(e, Cast):
            self.unify(e.src, self.infer(e.body), "cast source")
            if self.find(e.dst) == PROP:
                raise TypingError("cannot cast into prop")
            return e.dst
        if isinstance(e, App):
            tys = [self.infer(a) for a in e.args]
            for t in tys[1:]:
                self.unify(tys[0], t, e.op.name)
            return PROP if e.op.rel else tys[0]
        raise TypingError(f"unexpected pattern node {e!r}")

    def resolve(self, e: Expr) -> Expr:
        if isinstance(e, Meta):
            return Meta(e.name, self.find(self.meta_types[e.name]))
        if isinstance(e, Num):
            ty = self.find(e.ty)
            if ty == PROP:
                raise TypingError("numerals cannot have type prop")
            return Num(e.value, ty)
        if isinstance(e, Cast):
            src, dst = self.find(e.src), self.find(e.dst)
            if src == dst:
                raise TypingError(f"cast from {src} to itself")
            return Cast(src, dst, self.resolve(e.body))
        if isinstance(e, App):
            out = App(e.op, tuple(self.resolve(a) for a in e.args))
            ty = expr_type(out.args[0])
            if isinstance(ty, Ty) and not op_allowed(e.op, ty):
                raise TypingError(f"{e.op.name} is not defined at type {ty}")
            return out
        return e


def infer_rule_types(body: Expr, conds: Sequence[Expr]) -> tuple[Expr, tuple[Expr, ...]]:
    u = _Unifier()
    u.infer(body)
    for c in conds:
        u.unify(u.infer(c), PROP, "side condition")
    return u.resolve(body), tuple(u.resolve(c) for c in conds)


def metas(e: Expr) -> set[str]:
    return {n.name for _, n in iter_nodes(e) if isinstance(n, Meta)}


def type_metas(e: Expr) -> set[TyMeta]:
    out: set[TyMeta] = set()
    for _, n in iter_nodes(e):
        if isinstance(n, Cast):
            tys = (n.src, n.dst)
        elif isinstance(n, (Meta, Num)):
            tys = (n.ty,)
        else:
            continue
        out.update(t for t in tys if isinstance(t, TyMeta))
    return out


# ---------------------------------------------------------------------------
# rule parsing


def parse_rule(line: str, env: TypeEnv, *, lineno: int = 1, source: str | None = None,
               col: int = 1) -> RewriteRule:
    """Parse ``rule NAME [CLASS]? ([cond: e, ...])? : lhs = rhs``."""
    p = Parser(line, env, patterns=True, line=lineno, col=col, source=source)
    p.expect("rule")
    name_tok = p.expect_kind("ident")
    override = None
    conds: list[Expr] = []
    while p.accept("["):
        tok = p.expect_kind("ident")
        if tok.text == "cond":
            p.expect(":")
            conds.append(p.parse_expr())
            while p.accept(","):
                conds.append(p.parse_expr())
        else:
            try:
                override = RuleClass(tok.text)
            except ValueError:
                p.error("expected elim, move, squash or cond", tok)
        p.expect("]")
    p.expect(":")
    body_tok = p.peek()
    body = p.parse_expr()
    p.expect_eof()
    if not (isinstance(body, App) and body.op.name == "eq"):
        raise ParseError("rule body must be an equation lhs = rhs", body_tok.line,
                         body_tok.col, source)
    try:
        body, conds_t = infer_rule_types(body, conds)
    except TypingError as err:
        raise ParseError(f"rule {name_tok.text}: {err}", body_tok.line, body_tok.col,
                         source) from None
    lhs, rhs = body.args
    lhs_metas = metas(lhs)
    stray = (metas(rhs) | set().union(*map(metas, conds_t))) - lhs_metas
    if stray:
        names = ", ".join("?" + m for m in sorted(stray))
        raise ParseError(f"rule {name_tok.text}: {names} not bound by the lhs",
                         body_tok.line, body_tok.col, source)
    try:
        auto = classify(lhs, rhs)
    except ClassifyError as err:
        if override is None:
            raise ClassifyError(err.lhs_counts, err.rhs_counts, name_tok.text) from None
        auto = None
    if override is not None and override != auto:
        log.warning("rule %s: class overridden to %s (automatic: %s)", name_tok.text,
                    override, auto or "unclassifiable")
    return RewriteRule(name_tok.text, lhs, rhs, conds_t, override or auto, override, lineno)


def apply_declaration(line: str, env: TypeEnv, *, lineno: int = 1,
                      source: str | None = None) -> None:
    """Apply one ``type``/``coe``/``op``/``var`` declaration line to ``env``."""
    toks = [t for t in tokenize(line, lineno, source) if t.kind != "eof"]
    words = [t.text for t in toks]
    first = toks[0] if toks else None

    def bad(msg: str, tok=first):
        raise ParseError(msg, tok.line if tok else lineno, tok.col if tok else 1, source)

    try:
        if words[0] == "type" and len(words) == 2 and toks[1].kind == "ident":
            env.declare_type(words[1])
        elif words[0] == "coe" and len(words) == 4 and words[2] == "->":
            env.declare_coercion(words[1], words[3])
        elif words[0] == "op" and len(words) == 4 and toks[2].kind == "num" \
                and words[3] in ("fun", "rel"):
            env.declare_op(words[1], int(words[2]), words[3] == "rel")
        elif words[0] == "var" and ":" in words and words.index(":") >= 2 \
                and len(words) == words.index(":") + 2:
            for v in words[1:words.index(":")]:
                env.declare_var(v, words[-1])
        else:
            bad(f"malformed declaration {line.strip()!r}")
    except DeclarationError as err:
        bad(str(err))


DECL_KEYWORDS = ("type", "coe", "op", "var")


def iter_rule_lines(text: str, first_line: int = 1) -> Iterator[tuple[int, str]]:
    for i, raw in enumerate(text.splitlines(), start=first_line):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            yield i, raw


def load_rules(text: str, env: TypeEnv | None = None, *, base: RuleDb | None = None,
               source: str | None = None, first_line: int = 1,
               errors: list[Exception] | None = None) -> RuleDb:
    """Parse a rule file and append its rules to ``base`` (default: the prelude).

    Declaration lines (``type``/``coe``/``op``) are applied to ``env`` as
    they are met.  When ``errors`` is given, per-rule failures are collected
    there instead of raised.
    """
    if base is None:
        base = prelude(env)
    db = base.copy(env or base.env)
    for lineno, raw in iter_rule_lines(text, first_line):
        word = raw.split(None, 1)[0]
        try:
            if word in DECL_KEYWORDS:
                apply_declaration(raw, db.env, lineno=lineno, source=source)
                continue
            rule = parse_rule(raw, db.env, lineno=lineno, source=source)
            db.add(rule)
        except (ParseError, ClassifyError, DuplicateName) as err:
            if not isinstance(err, ParseError):
                err.where = f"{source or '<rules>'}:{lineno}"
            if errors is None:
                raise
            errors.append(err)
    return db


def prelude_text() -> str:
    return resources.files("castnorm").joinpath("prelude.rules").read_text(encoding="utf-8")


def prelude(env: TypeEnv | None = None) -> RuleDb:
    """The standard rule set, loaded into ``env`` (default: nat -> int -> rat)."""
    env = env or TypeEnv.standard()
    return load_rules(prelude_text(), env, base=RuleDb(env), source="prelude.rules")


# ---------------------------------------------------------------------------
# matching and instantiation


@dataclass
class Subst:
    terms: dict[str, Expr] = field(default_factory=dict)
    types: dict[TyMeta, Ty] = field(default_factory=dict)

    def ty(self, t: TyLike) -> Ty | None:
        return self.types.get(t) if isinstance(t, TyMeta) else t


def _match_ty(pt: TyLike, t: TyLike, s: Subst) -> bool:
    if isinstance(pt, TyMeta):
        bound = s.types.get(pt)
        if bound is None:
            s.types[pt] = t
            return True
        return bound == t
    return pt == t


def _match(p: Expr, e: Expr, s: Subst) -> bool:
    if isinstance(p, Meta):
        if not _match_ty(p.ty, expr_type(e), s):
            return False
        bound = s.terms.get(p.name)
        if bound is None:
            s.terms[p.name] = e
            return True
        return bound == e
    if isinstance(p, App):
        return (isinstance(e, App) and e.op == p.op
                and all(_match(pa, ea, s) for pa, ea in zip(p.args, e.args)))
    if isinstance(p, Cast):
        return (isinstance(e, Cast) and _match_ty(p.src, e.src, s)
                and _match_ty(p.dst, e.dst, s) and _match(p.body, e.body, s))
    if isinstance(p, Num):
        return isinstance(e, Num) and e.value == p.value and _match_ty(p.ty, e.ty, s)
    return p == e


def match(p: Expr, e: Expr, subst: Subst | None = None) -> Subst | None:
    s = Subst(dict(subst.terms), dict(subst.types)) if subst else Subst()
    return s if _match(p, e, s) else None


def instantiate(p: Expr, s: Subst, env: TypeEnv | None = None) -> Expr | None:
    """Apply ``s`` to ``p``; None if a meta is unbound or the result is ill typed."""
    if isinstance(p, Meta):
        return s.terms.get(p.name)
    if isinstance(p, Num):
        ty = s.ty(p.ty)
        return None if ty is None else Num(p.value, ty)
    if isinstance(p, Cast):
        src, dst = s.ty(p.src), s.ty(p.dst)
        if src is None or dst is None or src == dst:
            return None
        if env is not None and not env.coercion_exists(src, dst):
            return None
        body = instantiate(p.body, s, env)
        if body is None or expr_type(body) != src:
            return None
        return Cast(src, dst, body)
    if isinstance(p, App):
        args = []
        for a in p.args:
            ia = instantiate(a, s, env)
            if ia is None:
                return None
            args.append(ia)
        out = App(p.op, tuple(args))
        try:
            check_app(out)
        except TypingError:
            return None
        return out
    return p


def rewrite(rule: RewriteRule, direction: str, e: Expr,
            env: TypeEnv | None) -> tuple[Expr, tuple[Expr, ...]] | None:
    """Rewrite the root of ``e``; return the result and the instantiated side conditions."""
    src, dst = rule.sides(direction)
    s = match(src, e)
    if s is None:
        return None
    out = instantiate(dst, s, env)
    if out is None:
        return None
    conds = []
    for c in rule.conds:
        ic = instantiate(c, s, env)
        if ic is None:
            return None
        conds.append(ic)
    return out, tuple(conds)


Discharger = Callable[[Sequence[Expr]], bool]


def apply_rule_at(rule: RewriteRule, direction: str, e: Expr, path: Sequence[int],
                  ctx: Sequence[Expr] = (), db: RuleDb | None = None,
                  discharge: Discharger | None = None):
    """Rewrite the subterm of ``e`` at ``path``; return ``(new_e, step)`` or None.

    Side conditions are discharged against ``ctx`` by mod-cast equality unless
    an explicit ``discharge`` callback is supplied.
    """
    from .normalize import make_discharger
    from .trace import Step

    db = db or prelude()
    target = subterm(e, path)
    res = rewrite(rule, direction, target, db.env)
    if res is None:
        return None
    out, conds = res
    if conds:
        discharge = discharge or make_discharger(db, ctx)
        if not discharge(conds):
            return None
    step = Step("rw", rule.name, direction, tuple(path), target, out)
    return replace_at(e, path, out), step
