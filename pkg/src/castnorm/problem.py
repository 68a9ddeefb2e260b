"""Problem files: declarations, rules, hypotheses and goals for the CLI.

Layout (every section optional, but in this order)::

    [decls]
    var m n : nat
    [rules]
    include extra.rules
    rule my_rule : ...
    [context]
    h : n <= m; h2 : cast(int, n) < 5:int
    [goals]
    g : cast(int, m - n) = cast(int, m) - cast(int, n)

Entries in ``[context]`` and ``[goals]`` are separated by newlines or
semicolons and may carry an ``IDENT :`` name prefix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError
from .rules import DECL_KEYWORDS, RuleDb, apply_declaration, load_rules, prelude, prelude_text
from .syntax import parse_expr, tokenize
from .terms import Expr, TypeEnv

SECTIONS = ("decls", "rules", "context", "goals")
PRELUDE_NAME = "prelude.rules"

_SECTION_RE = re.compile(r"^\s*\[(\w+)\]\s*$")
_NAME_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_.']*)\s*:(?!=)")


@dataclass
class Entry:
    name: str | None
    expr: Expr
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"{self.name} : {self.expr}" if self.name else str(self.expr)


@dataclass
class Problem:
    env: TypeEnv
    db: RuleDb
    decls: list[str] = field(default_factory=list)
    rule_lines: list[str] = field(default_factory=list)
    context: list[Entry] = field(default_factory=list)
    goals: list[Entry] = field(default_factory=list)
    source: str | None = None

    @property
    def hypotheses(self) -> list[Expr]:
        return [h.expr for h in self.context]

    def hypothesis(self, name: str) -> Entry | None:
        return next((h for h in self.context if h.name == name), None)


def read_rule_file(path: str | Path) -> tuple[str, str]:
    """Text and display name of a rule file; ``prelude.rules`` falls back to the packaged one."""
    p = Path(path)
    if not p.exists() and p.name == PRELUDE_NAME and str(path) == PRELUDE_NAME:
        return prelude_text(), PRELUDE_NAME
    return p.read_text(encoding="utf-8"), str(path)


def _split_sections(text: str, source: str | None) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    order = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(raw.split("#", 1)[0])
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno, raw.index("[") + 1, source)
            if SECTIONS.index(name) <= order:
                raise ParseError(f"section [{name}] out of order (expected {', '.join(SECTIONS)})",
                                 lineno, raw.index("[") + 1, source)
            order = SECTIONS.index(name)
            current = sections.setdefault(name, [])
            continue
        if not raw.split("#", 1)[0].strip():
            continue
        if current is None:
            col = len(raw) - len(raw.lstrip()) + 1
            raise ParseError("content before the first section header", lineno, col, source)
        current.append((lineno, raw.split("#", 1)[0]))
    return sections


def _entries(lines: Iterable[tuple[int, str]], env: TypeEnv, source: str | None) -> list[Entry]:
    out = []
    for lineno, raw in lines:
        start = 0
        for piece in raw.split(";"):
            col = start + 1
            start += len(piece) + 1
            if not piece.strip():
                continue
            name = None
            m = _NAME_RE.match(piece)
            if m:
                name = m.group(1)
                col += m.end()
                piece = piece[m.end():]
            lead = len(piece) - len(piece.lstrip())
            e = parse_expr(piece.strip(), env, line=lineno, col=col + lead, source=source)
            out.append(Entry(name, e, lineno, col + lead))
    return out


def _decl_canonical(line: str, lineno: int, source: str | None) -> str:
    return " ".join(t.text for t in tokenize(line, lineno, source) if t.kind != "eof")


def parse_problem(text: str, *, source: str | None = None, base_dir: str | Path | None = None,
                  extra_rules: Sequence[str | Path] = (), env: TypeEnv | None = None) -> Problem:
    """Parse a problem file.

    Rules are loaded in order: prelude, the problem's ``[rules]`` section
    (``include`` lines resolved against ``base_dir``), then ``extra_rules``.
    """
    sections = _split_sections(text, source)
    env = env or TypeEnv.standard()
    base_dir = Path(base_dir) if base_dir is not None else Path(".")

    decls = []
    for lineno, raw in sections.get("decls", []):
        if raw.split(None, 1)[0] not in DECL_KEYWORDS:
            col = len(raw) - len(raw.lstrip()) + 1
            raise ParseError(f"expected a declaration, got {raw.strip()!r}", lineno, col, source)
        apply_declaration(raw, env, lineno=lineno, source=source)
        decls.append(_decl_canonical(raw, lineno, source))

    db = prelude(env)
    rule_lines = []
    for lineno, raw in sections.get("rules", []):
        stripped = raw.strip()
        if stripped.startswith("include "):
            target = stripped[len("include "):].strip()
            path = base_dir / target if not Path(target).is_absolute() else Path(target)
            if target == PRELUDE_NAME and not path.exists():
                path = Path(PRELUDE_NAME)
            try:
                body, name = read_rule_file(path)
            except OSError as err:
                raise ParseError(f"cannot read {target}: {err.strerror}", lineno,
                                 raw.index("include") + 1, source) from None
            db = load_rules(body, env, base=db, source=name)
        else:
            db = load_rules(raw, env, base=db, source=source, first_line=lineno)
        rule_lines.append(stripped)
    for path in extra_rules:
        body, name = read_rule_file(path)
        db = load_rules(body, env, base=db, source=name)

    context = _entries(sections.get("context", []), env, source)
    goals = _entries(sections.get("goals", []), env, source)
    return Problem(env, db, decls, rule_lines, context, goals, source)


def load_problem(path: str | Path, extra_rules: Sequence[str | Path] = ()) -> Problem:
    p = Path(path)
    return parse_problem(p.read_text(encoding="utf-8"), source=str(path), base_dir=p.parent,
                         extra_rules=extra_rules)


def pretty_problem(problem: Problem) -> str:
    """Canonical text of ``problem``; parsing it back gives the same problem."""
    parts = []
    for name, lines in (("decls", problem.decls), ("rules", problem.rule_lines),
                        ("context", problem.context), ("goals", problem.goals)):
        if lines:
            parts.append(f"[{name}]")
            parts.extend(str(x) for x in lines)
    return "\n".join(parts) + ("\n" if parts else "")
