"""Rewrite traces: replayable certificates that ``input = output``.

Each :class:`Step` replaces the subterm ``before`` found at ``path`` (child
indices from the root) by ``after``.  :func:`replay` re-executes the steps
mechanically; :func:`verify` additionally re-derives every step from its
named rule or builtin, independently of the normalizer that produced it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CastNormError
from .terms import NAT, Cast, Expr, Num, TypeEnv, replace_at, subterm

PASSES = ("1", "2", "3", "4", "split", "push", "rw")
NUMERAL_LIFT = "numeral-lift"
NUMERAL_RESTORE = "numeral-restore"
SPLIT_LEFT = "split-left"
SPLIT_RIGHT = "split-right"
BUILTIN_TAGS = (NUMERAL_LIFT, NUMERAL_RESTORE, SPLIT_LEFT, SPLIT_RIGHT)

TRACE_SCHEMA = {
    "type": "object",
    "required": ["input", "output", "fuel_used", "steps"],
    "properties": {
        "input": {"type": "string"},
        "output": {"type": "string"},
        "fuel_used": {"type": "integer", "minimum": 0},
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["pass", "rule", "dir", "path", "before", "after"],
                "properties": {
                    "pass": {"type": "string", "enum": list(PASSES)},
                    "rule": {"type": "string"},
                    "dir": {"enum": ["L2R", "R2L"]},
                    "path": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "before": {"type": "string"},
                    "after": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
    },
}


class ReplayError(CastNormError):
    pass


@dataclass(frozen=True)
class Step:
    pass_: str
    rule: str
    dir: str
    path: tuple[int, ...]
    before: Expr
    after: Expr
    note: str = field(default="", compare=False)

    def to_json(self) -> dict:
        return {"pass": self.pass_, "rule": self.rule, "dir": self.dir,
                "path": list(self.path), "before": str(self.before), "after": str(self.after)}

    @classmethod
    def from_json(cls, data: dict, env: TypeEnv) -> Step:
        from .syntax import parse_expr

        return cls(data["pass"], data["rule"], data["dir"], tuple(data["path"]),
                   parse_expr(data["before"], env), parse_expr(data["after"], env))

    def __str__(self) -> str:
        path = ".".join(map(str, self.path)) or "root"
        note = f"  [{self.note}]" if self.note else ""
        return (f"[{self.pass_}] {self.rule} {self.dir} @{path}: "
                f"{self.before}  ~>  {self.after}{note}")


@dataclass
class Trace:
    input: Expr
    output: Expr
    steps: list[Step] = field(default_factory=list)
    fuel_used: int = 0
    exhausted: bool = False

    def to_json(self) -> dict:
        return {"input": str(self.input), "output": str(self.output),
                "fuel_used": self.fuel_used, "steps": [s.to_json() for s in self.steps]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)

    @classmethod
    def from_json(cls, data: dict, env: TypeEnv) -> Trace:
        from .syntax import parse_expr

        return cls(parse_expr(data["input"], env), parse_expr(data["output"], env),
                   [Step.from_json(s, env) for s in data["steps"]], data["fuel_used"])


def replay(start: Expr, steps: Sequence[Step]) -> Expr:
    cur = start
    for i, s in enumerate(steps):
        try:
            found = subterm(cur, s.path)
        except IndexError:
            raise ReplayError(f"step {i}: path {list(s.path)} does not exist") from None
        if found != s.before:
            raise ReplayError(f"step {i}: expected {s.before} at {list(s.path)}, found {found}")
        cur = replace_at(cur, s.path, s.after)
    return cur


def replays(trace: Trace) -> bool:
    try:
        return replay(trace.input, trace.steps) == trace.output
    except ReplayError:
        return False


def _flip(direction: str) -> str:
    return "R2L" if direction == "L2R" else "L2R"


def justify_step(step: Step, db, ctx: Sequence[Expr] = ()) -> str | None:
    """Return None if ``step`` is an instance of its rule or builtin, else a reason."""
    from .normalize import make_discharger
    from .rules import rewrite

    env = db.env
    b, a = step.before, step.after
    if step.rule == NUMERAL_LIFT:
        ok = (isinstance(b, Num) and b.ty != NAT and env.coercion_exists(NAT, b.ty)
              and a == Cast(NAT, b.ty, Num(b.value, NAT)))
        return None if ok else "not a numeral lift"
    if step.rule == NUMERAL_RESTORE:
        ok = isinstance(a, Num) and b == Cast(NAT, a.ty, Num(a.value, NAT))
        return None if ok else "not a numeral restore"
    if step.rule in (SPLIT_LEFT, SPLIT_RIGHT):
        ok = (isinstance(b, Cast) and isinstance(a, Cast) and isinstance(a.body, Cast)
              and a.dst == b.dst and a.body.body == b.body and a.body.src == b.src
              and a.src == a.body.dst and env.coercion_exists(b.src, a.src))
        return None if ok else "not a cast split"
    rule = db.get(step.rule)
    if rule is None:
        return f"unknown rule {step.rule}"
    forward = rewrite(rule, step.dir, b, env)
    if forward is not None and forward[0] == a:
        conds = forward[1]
    else:
        backward = rewrite(rule, _flip(step.dir), a, env)
        if backward is None or backward[0] != b:
            return f"{step.rule} {step.dir} does not rewrite {b} to {a}"
        conds = backward[1]
    if conds and not make_discharger(db, ctx)(conds):
        return f"side conditions of {step.rule} not discharged"
    return None


def verify(trace: Trace, db, ctx: Sequence[Expr] = ()) -> list[str]:
    """All problems found in ``trace``; an empty list means it certifies input = output."""
    problems = []
    for i, s in enumerate(trace.steps):
        reason = justify_step(s, db, ctx)
        if reason:
            problems.append(f"step {i}: {reason}")
    try:
        if replay(trace.input, trace.steps) != trace.output:
            problems.append("replay does not reach the recorded output")
    except ReplayError as err:
        problems.append(str(err))
    return problems
