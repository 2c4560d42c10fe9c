"""Command-line entry point: ``refstore <command> ...``.

Exit codes: 0 success / equivalent / valid, 1 distinguished / invalid /
ill-typed, 2 inconclusive or timed out, 64 usage error, 65 unreadable input,
70 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .equiv import DEFAULT_LADDER, Distinguished, Equivalent, probe_equiv, strict_equiv
from .guarded import Timeout
from .interp import Call, EvalError, UnknownLabel, eval_pure, observe, probe, run_term
from .laws import format_table, run_laws
from .normalize import OutOfFragment, normalize
from .rewrite import TraceSyntaxError, check_trace, parse_trace, rule_set
from .store import StoreError, dump_config
from .syntax import ParseError, Term, parse, parse_program, show, show_type
from .typecheck import TypeCheckError, infer
from .values import show_value

EX_OK, EX_NO, EX_UNKNOWN = 0, 1, 2
EX_USAGE, EX_DATAERR, EX_SOFTWARE = 64, 65, 70


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Inputs


def load_program(target: str) -> dict[str, Term]:
    path = Path(target.split("#", 1)[0])
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_program(text)
    except ParseError as e:
        raise InputError(f"{path}:{e.line_no}:{e.col_no}: {e.msg_text}") from None


def load_term(target: str) -> tuple[str, Term]:
    """``FILE`` or ``FILE#name``; without a name, ``main`` or the last definition."""
    defs = load_program(target)
    if "#" in target:
        name = target.split("#", 1)[1]
        if name not in defs:
            raise InputError(f"{target}: no definition named {name!r} (have {', '.join(defs)})")
        return name, defs[name]
    if not defs:
        raise InputError(f"{target}: no definitions")
    name = "main" if "main" in defs else list(defs)[-1]
    return name, defs[name]


def parse_ladder(text: str) -> tuple[int, ...]:
    try:
        ladder = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad fuel ladder {text!r}") from None
    if not ladder or any(f < 0 for f in ladder):
        raise UsageError(f"bad fuel ladder {text!r}")
    return ladder


_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_script(text: str) -> list[Call]:
    """``incr,incr,read`` or ``set(3),get``; arguments are closed pure terms."""
    calls = []
    for part in _split_top(text):
        m = _CALL.match(part)
        if not m:
            raise UsageError(f"bad script entry {part!r}")
        arg = None
        if m.group(2) is not None:
            try:
                arg = eval_pure({}, parse(m.group(2)))
            except (ParseError, EvalError) as e:
                raise UsageError(f"bad argument in {part!r}: {e}") from None
        calls.append(Call(m.group(1), arg))
    return calls


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        parts.append(cur)
    return [p for p in parts if p.strip()]


# ---------------------------------------------------------------------------
# Commands


class Report:
    """Human-readable lines followed by one machine-readable summary line."""

    def __init__(self, command: str, deterministic: bool):
        self.command = command
        self.deterministic = deterministic
        self.lines: list[str] = []
        self.summary: dict = {"command": command}
        self.t0 = time.perf_counter()

    def say(self, line: str = ""):
        self.lines.append(line)

    def emit(self, out) -> None:
        if not self.deterministic:
            self.summary["seconds"] = round(time.perf_counter() - self.t0, 4)
        for line in self.lines:
            print(line, file=out)
        print("summary: " + json.dumps(self.summary, sort_keys=True, default=str), file=out)


def cmd_check(args, rep: Report) -> int:
    defs = load_program(args.file)
    ctx: dict = {}
    bad = 0
    types = {}
    for name, t in defs.items():
        try:
            ty = infer(ctx, t)
            rep.say(f"{name} : {show_type(ty)}")
            types[name] = show_type(ty)
        except TypeCheckError as e:
            rep.say(f"{name} : type error [{e.rule}] at {list(e.path)}: {e.message}")
            bad += 1
    rep.summary.update(inputs=[args.file], types=types, errors=bad)
    return EX_NO if bad else EX_OK


def _typed(t: Term, rep: Report) -> bool:
    try:
        infer({}, t)
        return True
    except TypeCheckError as e:
        rep.say(f"type error [{e.rule}] at {list(e.path)}: {e.message}")
        rep.summary.update(verdict="ill-typed")
        return False


def cmd_run(args, rep: Report) -> int:
    name, t = load_term(args.file)
    rep.summary.update(inputs=[args.file], definition=name, fuel=args.fuel)
    if not _typed(t, rep):
        return EX_NO
    out = observe(t, args.fuel) if args.canonical else run_term(t, args.fuel)
    if isinstance(out, Timeout):
        rep.say(f"{name}: timeout after {args.fuel} steps")
        rep.summary.update(verdict="timeout")
        return EX_UNKNOWN
    rep.say(f"{name}: steps={out.steps} value={show_value(out.result)}")
    if args.dump_config:
        rep.say(dump_config(out))
    rep.summary.update(verdict="converged", value=show_value(out.result), steps=out.steps, cells=len(out.heap))
    return EX_OK


def cmd_probe(args, rep: Report) -> int:
    name, t = load_term(args.file)
    script = parse_script(args.script)
    rep.summary.update(inputs=[args.file], definition=name, fuel=args.fuel, script=[str(c) for c in script])
    if not _typed(t, rep):
        return EX_NO
    try:
        trace = probe(t, script, args.fuel)
    except UnknownLabel as e:
        raise UsageError(f"unknown method {e.args[0]!r}") from None
    for r in trace:
        rep.say(str(r))
    rep.summary.update(
        results=[None if r.timed_out else r.result for r in trace[1:]],
        steps=[r.steps for r in trace],
        timed_out=any(r.timed_out for r in trace),
    )
    return EX_UNKNOWN if any(r.timed_out for r in trace) else EX_OK


def cmd_equiv(args, rep: Report) -> int:
    (n1, t1), (n2, t2) = load_term(args.file1), load_term(args.file2)
    ladder = parse_ladder(args.fuel_ladder)
    rep.summary.update(inputs=[args.file1, args.file2], mode=args.mode, fuel_ladder=list(ladder),
                       ignore_steps=args.ignore_steps)
    if not (_typed(t1, rep) and _typed(t2, rep)):
        return EX_NO
    try:
        if args.mode == "strict":
            v = strict_equiv(t1, t2, ladder, args.ignore_steps)
        else:
            rep.summary["max_script"] = args.max_script
            v = probe_equiv(t1, t2, args.max_script, ladder, args.ignore_steps)
    except TypeError as e:
        raise InputError(str(e)) from None
    rep.say(f"{_label(args.file1, n1)} vs {_label(args.file2, n2)}: {v.describe()}")
    if isinstance(v, Distinguished):
        rep.say(f"  left:  {_block(v.left)}")
        rep.say(f"  right: {_block(v.right)}")
        witness = [str(c) for c in v.witness] if isinstance(v.witness, tuple) else None
        rep.summary.update(verdict="distinguished", witness=witness, fuel=v.fuel, reason=v.reason)
    elif isinstance(v, Equivalent):
        rep.summary.update(verdict="equivalent", evidence=v.evidence, bounds=v.bounds)
    else:
        rep.summary.update(verdict="inconclusive", timeouts=v.timeouts, bounds=v.bounds)
    return v.code


def _label(target: str, name: str) -> str:
    return target if "#" in target or name == "main" else f"{target}#{name}"


def _block(x) -> str:
    if isinstance(x, list):
        return "; ".join(x)
    return str(x).replace("\n", "\n         ")


def cmd_derive(args, rep: Report) -> int:
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {args.trace}: {e.strerror}") from None
    try:
        tr = parse_trace(text)
    except TraceSyntaxError as e:
        raise InputError(f"{args.trace}: {e}") from None
    report = check_trace(tr)
    rep.say(f"start: {show(tr.start)}")
    for st, sr in zip(tr.steps, report.steps):
        mark = "ok" if sr.ok else "FAILED"
        note = f"  ({st.note})" if st.note else ""
        rep.say(f"step {sr.index}: {st.rule} at {list(st.path)} {st.direction}: {mark}{note}")
        if sr.ok and args.verbose:
            rep.say(f"  = {show(sr.term)}")
        if not sr.ok:
            rep.say(f"  {sr.message}")
    rep.say(f"verdict: {'Valid' if report.valid else 'Invalid'}: {report.message}")
    failed = next((s.index for s in report.steps if not s.ok), None)
    rep.summary.update(inputs=[args.trace], steps=len(tr.steps), valid=report.valid, failed_step=failed,
                       final=show(report.final))
    return EX_OK if report.valid else EX_NO


def cmd_normalize(args, rep: Report) -> int:
    defs = load_program(args.file)
    if "#" in args.file:
        name, t = load_term(args.file)
        defs = {name: t}
    out = {}
    bad = 0
    for name, t in defs.items():
        try:
            nf = normalize(t)
            rep.say(f"{name} = {show(nf)}")
            out[name] = show(nf)
        except OutOfFragment as e:
            rep.say(f"{name}: out of fragment: {e}")
            bad += 1
    rep.summary.update(inputs=[args.file], normal_forms=out, out_of_fragment=bad)
    return EX_NO if bad else EX_OK


def cmd_laws(args, rep: Report) -> int:
    names = {r.name for r in rule_set()}
    for r in args.rule or []:
        if r not in names:
            raise UsageError(f"unknown rule {r!r}")
    results = run_laws(args.cases, args.seed, args.rule or None, parse_ladder(args.fuel_ladder))
    rep.say(format_table(results))
    rep.summary.update(cases=args.cases, seed=args.seed, passed=sum(r.ok for r in results),
                       rules=len(results), failing=[r.rule for r in results if not r.ok])
    return EX_OK if all(r.ok for r in results) else EX_NO


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--deterministic", action="store_true", default=argparse.SUPPRESS,
                        help="omit timings so reports are byte-identical")
    p = _Parser(prog="refstore", description="Workbench for a monadic language with general references.",
                parents=[common])
    p.add_argument("--version", action="version", version=f"refstore {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    c = sub.add_parser("check", help="typecheck every definition in a file")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("run", help="run a closed computation from the empty heap")
    c.add_argument("file", help="FILE or FILE#name")
    c.add_argument("--fuel", type=int, default=256)
    c.add_argument("--dump-config", action="store_true")
    c.add_argument("--canonical", action="store_true", help="canonicalize locations before printing")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("probe", help="call methods of an object in order")
    c.add_argument("file")
    c.add_argument("--script", required=True, help='e.g. "incr,incr,read" or "set(3),get"')
    c.add_argument("--fuel", type=int, default=256)
    c.set_defaults(func=cmd_probe)

    c = sub.add_parser("equiv", help="test two programs for observational equivalence")
    c.add_argument("file1")
    c.add_argument("file2")
    c.add_argument("--mode", choices=("strict", "probe"), default="strict")
    c.add_argument("--max-script", type=int, default=6)
    c.add_argument("--fuel-ladder", default=",".join(map(str, DEFAULT_LADDER)))
    c.add_argument("--ignore-steps", action="store_true")
    c.set_defaults(func=cmd_equiv)

    c = sub.add_parser("derive", help="check a derivation trace")
    c.add_argument("trace")
    c.add_argument("-v", "--verbose", action="store_true", help="print the term after each step")
    c.set_defaults(func=cmd_derive)

    c = sub.add_parser("normalize", help="normal forms of straight-line definitions")
    c.add_argument("file")
    c.set_defaults(func=cmd_normalize)

    c = sub.add_parser("laws", help="run the law suite and print a per-rule table")
    c.add_argument("--cases", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--rule", action="append", help="restrict to a rule (repeatable)")
    c.add_argument("--fuel-ladder", default=",".join(map(str, DEFAULT_LADDER)))
    c.set_defaults(func=cmd_laws)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"refstore: {e}", file=sys.stderr)
        return EX_USAGE
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    for flag in ("fuel", "cases", "max_script"):
        if getattr(args, flag, 0) is not None and getattr(args, flag, 0) < 0:
            print(f"refstore: --{flag.replace('_', '-')} must be non-negative", file=sys.stderr)
            return EX_USAGE
    rep = Report(args.command, getattr(args, "deterministic", False))
    try:
        code = args.func(args, rep)
    except UsageError as e:
        print(f"refstore: {e}", file=sys.stderr)
        return EX_USAGE
    except InputError as e:
        print(f"refstore: {e}", file=sys.stderr)
        return EX_DATAERR
    except (EvalError, StoreError, AssertionError, RecursionError) as e:
        print(f"refstore: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EX_SOFTWARE
    rep.emit(sys.stdout)
    return code


def entry() -> None:
    sys.exit(main())
