"""``castnorm`` command-line front end.

Exit codes: 0 success, 1 parse/type/declaration error, 2 fuel exhausted,
3 non-equivalence or a failed check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .errors import CastNormError, FuelExhausted, OracleError, ParseError
from .normalize import DEFAULT_FUEL, NormalizeOptions, normalize, push_cast
from .oracle import (
    DEFAULT_RANGE,
    abstract_instantiate,
    check_equiv_exhaustive,
    check_rule_sound,
    has_abstract_types,
)
from .problem import PRELUDE_NAME, Entry, Problem, load_problem, read_rule_file
from .rules import RuleDb, load_rules
from .terms import RAT, Expr, TypeEnv
from .trace import Trace

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FUEL = 2
EXIT_DIFFERENT = 3

log = logging.getLogger("castnorm")


def _label(entry: Entry, index: int) -> str:
    return entry.name or f"goal {index + 1}"


def _prefix(entry: Entry) -> str:
    return f"{entry.name}: " if entry.name else ""


def _emit_trace(trace: Trace, args, out: TextIO, name: str | None = None) -> None:
    if args.json:
        data = trace.to_json()
        if name:
            data["name"] = name
        if trace.exhausted:
            data["exhausted"] = True
        out.write(json.dumps(data, ensure_ascii=False) + "\n")
    elif args.trace:
        for step in trace.steps:
            out.write(f"  {step}\n")


def _fuel_report(err: FuelExhausted, entry: Entry, args, out: TextIO) -> int:
    log.error("%s%s", _prefix(entry), err)
    if err.trace is not None:
        if args.json:
            _emit_trace(err.trace, args, out, entry.name)
        else:
            out.write(f"{_prefix(entry)}{err.expr}  (partial, fuel exhausted)\n")
            for step in err.trace.steps:
                out.write(f"  {step}\n")
    return EXIT_FUEL


def _run_goals(problem: Problem, args, out: TextIO, fn) -> int:
    status = EXIT_OK
    opts = NormalizeOptions(fuel=args.fuel)
    for goal in problem.goals:
        try:
            nf, trace = fn(goal.expr, problem.db, problem.hypotheses, opts)
        except FuelExhausted as err:
            status = max(status, _fuel_report(err, goal, args, out))
            continue
        if args.json:
            _emit_trace(trace, args, out, goal.name)
        else:
            out.write(f"{_prefix(goal)}{nf}\n")
            _emit_trace(trace, args, out)
    return status


def cmd_normalize(problem: Problem, args, out: TextIO) -> int:
    return _run_goals(problem, args, out, normalize)


def cmd_push(problem: Problem, args, out: TextIO) -> int:
    return _run_goals(problem, args, out, push_cast)


def _semantic_hint(a: Expr, b: Expr, ctx: Sequence[Expr], hi: int) -> str | None:
    try:
        verdict = check_equiv_exhaustive(a, b, ctx, hi)
    except OracleError:
        return None
    if verdict:
        return f"no counterexample at range {hi}"
    shown = ", ".join(f"{k}={v}" for k, v in verdict.counterexample.items())
    return f"counterexample: {shown}"


def cmd_equiv(problem: Problem, args, out: TextIO) -> int:
    """Close each goal with a hypothesis modulo casts.

    The candidate is the hypothesis named by ``--using``, else the last one;
    ``--from-context`` tries every hypothesis.  Without a context, the first
    two goals are compared with each other.
    """
    ctx = problem.hypotheses
    opts = NormalizeOptions(fuel=args.fuel)
    if args.using and problem.hypothesis(args.using) is None:
        log.error("no hypothesis named %s", args.using)
        return EXIT_ERROR
    if problem.context:
        pairs = []
        for goal in problem.goals:
            if args.from_context:
                cands = problem.context
            elif args.using:
                cands = [problem.hypothesis(args.using)]
            else:
                cands = [problem.context[-1]]
            pairs.append((goal, cands))
    elif len(problem.goals) == 2:
        pairs = [(problem.goals[0], [problem.goals[1]])]
    elif not problem.goals:
        return EXIT_OK
    else:
        log.error("equiv needs a [context] or exactly two goals")
        return EXIT_ERROR

    status = EXIT_OK
    for i, (goal, cands) in enumerate(pairs):
        try:
            goal_nf, goal_trace = normalize(goal.expr, problem.db, ctx, opts)
            found, shown = None, []
            for cand in cands:
                cand_nf, cand_trace = normalize(cand.expr, problem.db, ctx, opts)
                shown.append((cand, cand_nf, cand_trace))
                if cand_nf == goal_nf:
                    found = cand
                    break
        except FuelExhausted as err:
            status = max(status, _fuel_report(err, goal, args, out))
            continue
        label = _label(goal, i)
        if found is not None:
            by = f" by {found.name}" if found.name else ""
            out.write(f"{label}: equivalent mod casts{by}\n")
            if args.trace or args.json:
                _emit_trace(goal_trace, args, out, goal.name)
                _emit_trace(shown[-1][2], args, out, found.name)
            continue
        status = max(status, EXIT_DIFFERENT)
        out.write(f"{label}: not equivalent mod casts\n")
        out.write(f"  goal normal form:      {goal_nf}\n")
        for cand, cand_nf, _ in shown:
            out.write(f"  {(cand.name or 'candidate') + ' normal form:':<22} {cand_nf}\n")
        if len(shown) == 1:
            others = [h.expr for h in problem.context if h is not shown[0][0]]
            hint = _semantic_hint(goal.expr, shown[0][0].expr, others, args.range)
            if hint:
                out.write(f"  {hint}\n")
    return status


def _is_rule_file(path: str) -> bool:
    if path == PRELUDE_NAME or path.endswith(".rules"):
        return True
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        return False
    return not any(line.strip().startswith("[") for line in text.splitlines())


def _load_rule_file(path: str, errors: list | None = None) -> RuleDb:
    text, name = read_rule_file(path)
    env = TypeEnv.standard()
    return load_rules(text, env, base=RuleDb(env), source=name, errors=errors)


def cmd_classify(path: str, args, out: TextIO) -> int:
    errors: list[Exception] = []
    db = _load_rule_file(path, errors)
    for rule in db:
        marker = " (override)" if rule.override else ""
        out.write(f"{rule.name} → {rule.cls}{marker}\n")
    for err in errors:
        out.write(f"error: {format_error(err)}\n")
    return EXIT_ERROR if errors else EXIT_OK


def _check_rules(path: str, args, out: TextIO) -> int:
    db = _load_rule_file(path)
    status = EXIT_OK
    for rule in db:
        verdict = check_rule_sound(rule, db.env, args.range)
        out.write(f"{rule.name}: {verdict}\n")
        if verdict.status == "unsound":
            status = EXIT_DIFFERENT
    return status


def _check_goals(problem: Problem, args, out: TextIO) -> int:
    status = EXIT_OK
    opts = NormalizeOptions(fuel=args.fuel)
    ctx = problem.hypotheses
    for i, goal in enumerate(problem.goals):
        label = _label(goal, i)
        try:
            nf, _ = normalize(goal.expr, problem.db, ctx, opts)
        except FuelExhausted as err:
            status = max(status, _fuel_report(err, goal, args, out))
            continue
        a, b, hyps, note = goal.expr, nf, ctx, ""
        if any(has_abstract_types(x) for x in (a, b, *hyps)):
            try:
                a, b = (abstract_instantiate(x, RAT, problem.env) for x in (a, b))
                hyps = [abstract_instantiate(h, RAT, problem.env) for h in hyps]
            except OracleError as err:
                out.write(f"{label}: skipped ({err})\n")
                continue
            note = " [abstract types instantiated at rat]"
        try:
            verdict = check_equiv_exhaustive(a, b, hyps, args.range)
        except OracleError as err:
            log.warning("%s: %s; check skipped", label, err)
            out.write(f"{label}: skipped ({err})\n")
            continue
        out.write(f"{label}: {nf}: {verdict}{note}\n")
        if not verdict:
            status = EXIT_DIFFERENT
    return status


def cmd_check(path: str, args, out: TextIO) -> int:
    if _is_rule_file(path):
        return _check_rules(path, args, out)
    return _check_goals(load_problem(path, args.rules), args, out)


def format_error(err: Exception) -> str:
    if isinstance(err, ParseError):
        return str(err)
    where = getattr(err, "where", None)
    return f"{where}: {err}" if where else str(err)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rules", action="append", default=[], metavar="FILE",
                        help="extra rule file, loaded after the prelude and the problem's rules")
    common.add_argument("--fuel", type=int, default=DEFAULT_FUEL, metavar="N",
                        help=f"rewrite step budget (default {DEFAULT_FUEL})")
    common.add_argument("--range", type=int, default=DEFAULT_RANGE, metavar="N",
                        help=f"oracle enumeration bound (default {DEFAULT_RANGE})")
    common.add_argument("--trace", action="store_true", help="print rewrite steps")
    common.add_argument("--json", action="store_true", help="emit traces as JSON lines")

    parser = argparse.ArgumentParser(prog="castnorm", description="Normalize casts in arithmetic goals.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("normalize", parents=[common], help="print normal forms of the goals").add_argument("file")
    sub.add_parser("push", parents=[common], help="push casts toward the leaves").add_argument("file")
    p = sub.add_parser("equiv", parents=[common], help="close goals with hypotheses modulo casts")
    p.add_argument("file")
    p.add_argument("--from-context", action="store_true", help="try every hypothesis")
    p.add_argument("--using", metavar="NAME", help="compare against this hypothesis")
    sub.add_parser("classify", help="classify the rules of a rule file").add_argument("file")
    sub.add_parser("check", parents=[common],
                   help="check rules (rule file) or goals (problem file) with the oracle").add_argument("file")
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.WARNING, format="castnorm: %(levelname)s: %(message)s")
    try:
        if args.command == "classify":
            return cmd_classify(args.file, args, out)
        if args.command == "check":
            return cmd_check(args.file, args, out)
        problem = load_problem(args.file, args.rules)
        handler = {"normalize": cmd_normalize, "push": cmd_push, "equiv": cmd_equiv}[args.command]
        return handler(problem, args, out)
    except OSError as err:
        print(f"castnorm: error: {err.filename}: {err.strerror}", file=sys.stderr)
        return EXIT_ERROR
    except CastNormError as err:
        print(f"castnorm: error: {format_error(err)}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        out.flush()


if __name__ == "__main__":
    sys.exit(main())
