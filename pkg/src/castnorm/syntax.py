"""Tokenizer, recursive-descent parser and canonical printer.

Precedence, lowest to highest: relations (``= != < <= dvd``), ``+ -``,
``*``, unary ``-``, atoms.  Every numeral carries a type ascription
(``10:nat``) and ``cast(T, e)`` infers its source from ``e``.

In pattern mode the parser also accepts term metas ``?x`` (optionally
ascribed, ``?x:'T``), type metas ``'T`` and explicit-source casts
``cast(nat -> 'T, p)``.  Pattern types are left partially unknown (fresh
type metas) and resolved later by rule type inference.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidCast, ParseError, TypingError, UndeclaredVariable
from .terms import (
    BUILTIN_OPS,
    App,
    Cast,
    Expr,
    Meta,
    Num,
    OpSym,
    Ty,
    TyLike,
    TyMeta,
    TypeEnv,
    Var,
    expr_type,
    check_app,
    type_of,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<meta>\?[A-Za-z_][A-Za-z0-9_']*)
  | (?P<tymeta>'[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.']*)
  | (?P<op><=|!=|->|[-+*<=(),:\[\];])
    """,
    re.VERBOSE,
)

REL_SYMBOLS = {"=": "eq", "!=": "ne", "<": "lt", "<=": "le", "dvd": "dvd"}
SYMBOL_OF = {"add": "+", "sub": "-", "mul": "*", "eq": "=", "ne": "!=", "lt": "<",
             "le": "<=", "dvd": "dvd"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, source: str | None = None, col: int = 1) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class Parser:
    """Parses expressions (or patterns) against a :class:`TypeEnv`."""

    def __init__(self, text: str, env: TypeEnv, *, patterns: bool = False,
                 line: int = 1, col: int = 1, source: str | None = None):
        self.env = env
        self.patterns = patterns
        self.source = source
        self.tokens = tokenize(text, line, source, col)
        self.pos = 0
        self._fresh = 0

    # -- token stream ---------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.text == text and tok.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.next()

    def expect_kind(self, kind: str) -> Token:
        if self.peek().kind != kind:
            self.error(f"expected {kind}")
        return self.next()

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = tok.text or "end of input"
        raise ParseError(f"{message}, found {found!r}", tok.line, tok.col, self.source)

    def expect_eof(self) -> None:
        if self.peek().kind != "eof":
            self.error("unexpected trailing input")

    def fresh_tymeta(self) -> TyMeta:
        self._fresh += 1
        return TyMeta(f"_{self._fresh}")

    # -- grammar --------------------------------------------------------

    def parse_expr(self) -> Expr:
        start = self.peek()
        lhs = self.parse_arith()
        tok = self.peek()
        rel = REL_SYMBOLS.get(tok.text) if tok.kind in ("op", "ident") else None
        if rel is not None:
            self.next()
            rhs = self.parse_arith()
            lhs = self.mk_app(BUILTIN_OPS[rel], [lhs, rhs], start)
        return lhs

    def parse_arith(self) -> Expr:
        start = self.peek()
        e = self.parse_term()
        while self.at("+") or self.at("-"):
            op = BUILTIN_OPS["add" if self.next().text == "+" else "sub"]
            e = self.mk_app(op, [e, self.parse_term()], start)
        return e

    def parse_term(self) -> Expr:
        start = self.peek()
        e = self.parse_factor()
        while self.accept("*"):
            e = self.mk_app(BUILTIN_OPS["mul"], [e, self.parse_factor()], start)
        return e

    def parse_factor(self) -> Expr:
        start = self.peek()
        if self.accept("-"):
            return self.mk_app(BUILTIN_OPS["neg"], [self.parse_factor()], start)
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            self.expect(":")
            return self.mk_num(int(tok.text), self.parse_type(), tok)
        if tok.kind == "meta":
            if not self.patterns:
                self.error("metavariables are only allowed in rules")
            self.next()
            ty = self.parse_type() if self.accept(":") else self.fresh_tymeta()
            return Meta(tok.text[1:], ty)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        if tok.kind == "ident" and tok.text == "cast":
            return self.parse_cast()
        if tok.kind == "ident" and tok.text not in REL_SYMBOLS:
            self.next()
            if self.accept("("):
                op = self.env.ops.get(tok.text)
                if op is None or op.builtin:
                    self.error(f"unknown operator {tok.text}", tok)
                args = [self.parse_expr()]
                while self.accept(","):
                    args.append(self.parse_expr())
                self.expect(")")
                return self.mk_app(op, args, tok)
            if self.patterns:
                self.error(f"free variable {tok.text} in a rule pattern (use ?{tok.text})", tok)
            var = self.env.vars.get(tok.text)
            if var is None:
                raise self._typing(UndeclaredVariable(f"undeclared variable {tok.text}"), tok)
            return var
        self.error("expected an expression")

    def parse_cast(self) -> Expr:
        start = self.next()
        self.expect("(")
        first = self.parse_type()
        src: TyLike | None = None
        if self.accept("->"):
            src, dst = first, self.parse_type()
        else:
            dst = first
        self.expect(",")
        body = self.parse_expr()
        self.expect(")")
        if self.patterns:
            return Cast(src if src is not None else self.fresh_tymeta(), dst, body)
        body_ty = expr_type(body)
        if src is not None and src != body_ty:
            self.error(f"cast source {src} does not match {body_ty}", start)
        if not self.env.coercion_exists(body_ty, dst):
            raise self._typing(InvalidCast(f"no coercion from {body_ty} to {dst}"), start)
        return Cast(body_ty, dst, body)

    def parse_type(self) -> TyLike:
        tok = self.peek()
        if tok.kind == "tymeta":
            if not self.patterns:
                self.error("type metavariables are only allowed in rules")
            self.next()
            return TyMeta(tok.text[1:])
        if tok.kind == "ident":
            self.next()
            ty = self.env.types.get(tok.text)
            if ty is None:
                self.error(f"unknown type {tok.text}", tok)
            return ty
        self.error("expected a type")

    # -- node construction ------------------------------------------------

    def _typing(self, err: TypingError, tok: Token) -> TypingError:
        loc = ParseError("", tok.line, tok.col, self.source).location()
        return type(err)(loc + str(err))

    def mk_num(self, value: int, ty: TyLike, tok: Token) -> Num:
        if isinstance(ty, Ty) and ty.name == "prop":
            self.error("numerals cannot have type prop", tok)
        return Num(value, ty)

    def mk_app(self, op: OpSym, args: list[Expr], tok: Token) -> App:
        if len(args) != op.arity:
            self.error(f"{op.name} expects {op.arity} arguments", tok)
        e = App(op, tuple(args))
        if not self.patterns:
            try:
                check_app(e)
            except TypingError as err:
                raise self._typing(err, tok) from None
        return e


def parse_expr(text: str, env: TypeEnv, *, line: int = 1, col: int = 1,
               source: str | None = None) -> Expr:
    p = Parser(text, env, line=line, col=col, source=source)
    e = p.parse_expr()
    p.expect_eof()
    type_of(e, env)
    return e


def parse_pattern(text: str, env: TypeEnv) -> Expr:
    """Parse a pattern without type inference (see :mod:`castnorm.rules`)."""
    p = Parser(text, env, patterns=True)
    e = p.parse_expr()
    p.expect_eof()
    return e


# ---------------------------------------------------------------------------
# printing

_REL, _ADD, _MUL, _NEG, _ATOM = range(5)


def _level(e: Expr) -> int:
    if isinstance(e, App) and e.op.builtin:
        if e.op.rel:
            return _REL
        if e.op.name in ("add", "sub"):
            return _ADD
        if e.op.name == "mul":
            return _MUL
        return _NEG
    return _ATOM


def _wrap(e: Expr, min_level: int) -> str:
    s = pretty(e)
    return f"({s})" if _level(e) < min_level else s


def pretty(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Num):
        return f"{e.value}:{e.ty}"
    if isinstance(e, Meta):
        return "?" + e.name
    if isinstance(e, Cast):
        if isinstance(e.src, Ty) and (isinstance(e.dst, TyMeta) or isinstance(e.body, Meta)):
            return f"cast({e.src} -> {e.dst}, {pretty(e.body)})"
        return f"cast({e.dst}, {pretty(e.body)})"
    if isinstance(e, App):
        op = e.op
        if not op.builtin:
            return f"{op.name}({', '.join(pretty(a) for a in e.args)})"
        if op.name == "neg":
            (arg,) = e.args
            if isinstance(arg, Num):
                return f"-({pretty(arg)})"
            return "-" + _wrap(arg, _NEG)
        lhs, rhs = e.args
        sym = SYMBOL_OF[op.name]
        if op.rel:
            return f"{_wrap(lhs, _ADD)} {sym} {_wrap(rhs, _ADD)}"
        level = _level(e)
        return f"{_wrap(lhs, level)} {sym} {_wrap(rhs, level + 1)}"
    raise TypeError(f"cannot print {e!r}")
