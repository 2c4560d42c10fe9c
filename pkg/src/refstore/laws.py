"""The law suite: random instances of every rule, rewritten and then tested.

Each case builds a closed program containing a redex of the rule, rewrites
it with the engine (so the right-hand side is the engine's own output), and
checks both programs with the equivalence tester: strictly for laws that
hold as configurations, by probing the Cell interface for representation
independence.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable

from .equiv import DEFAULT_LADDER, Equivalent, Inconclusive, probe_equiv, strict_equiv
from .gen import Gen, wrap
from .rewrite import IsoWitness, RuleError, apply_rule, get_rule, rule_set
from .syntax import (
    INT, NEG, SEQ, UNIT, Alloc, App, BinOp, Bind, Field, Get, Ifz, IntLit, Lam,
    Map, Pair, Prod, Proj, RecordLit, Ref, Ret, Set, Step, Term, Var, parse, show,
)


@dataclass(frozen=True)
class LawCase:
    rule: str
    term: Term
    path: tuple[int, ...]
    bindings: dict = field(default_factory=dict)
    witness: IsoWitness | None = None
    direction: str = "ltr"


@dataclass
class LawResult:
    rule: str
    cases: int = 0
    passed: int = 0
    inconclusive: int = 0
    failed: int = 0
    errors: int = 0
    seconds: float = 0.0
    first_failure: str = ""

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.errors == 0 and self.passed > 0


Maker = Callable[[Gen], LawCase]


def _context(g: Gen, redex_maker, rule: str, **kw) -> LawCase:
    """Put a redex after a prefix of allocations, sometimes under a continuation."""
    prefix, ctx = g.cells()
    redex, ty = redex_maker(g, ctx)
    path = (1,) * len(prefix)
    body = redex
    if g.rng.random() < 0.4:
        x = g.fresh("w")
        body = Bind(x, redex, g.comp({**ctx, x: ty}, g.ground_type(), 1))
        path += (0,)
    return LawCase(rule, wrap(prefix, body), path, **kw)


def _ref_of(g: Gen, ctx) -> tuple[str, object]:
    return g.rng.choice(g.refs(ctx))


def _set_get(g, ctx):
    r, s = _ref_of(g, ctx)
    return Bind(SEQ, Set(Var(r), g.pure(ctx, s, 2)), Get(Var(r))), s


def _alloc_set(g, ctx):
    s = g.cell_type()
    a = g.pure(ctx, s, 2)
    x = g.fresh("x")
    return Bind(x, Alloc(a), Bind(SEQ, Set(Var(x), a), Ret(Var(x)))), Ref(s)


def _set_set(g, ctx):
    r, s = _ref_of(g, ctx)
    return Bind(SEQ, Set(Var(r), g.pure(ctx, s, 2)), Set(Var(r), g.pure(ctx, s, 2))), UNIT


def _get_get(g, ctx):
    (r1, s1), (r2, s2) = _ref_of(g, ctx), _ref_of(g, ctx)
    x, y = g.fresh("x"), g.fresh("y")
    return Bind(x, Get(Var(r1)), Bind(y, Get(Var(r2)), Ret(Pair(Var(x), Var(y))))), Prod(s1, s2)


def _get_set(g, ctx):
    r, s = _ref_of(g, ctx)
    x = g.fresh("x")
    return Bind(x, Get(Var(r)), Bind(SEQ, Set(Var(r), Var(x)), Ret(Var(x)))), s


def _get_discard(g, ctx):
    r, _ = _ref_of(g, ctx)
    ty = g.ground_type()
    return Bind(SEQ, Get(Var(r)), g.comp(ctx, ty, 2)), ty


def _rec_unfold(g, ctx):
    ty = g.ground_type()
    return g.rec_redex(ctx, ty, 2), ty


def _bind_left_unit(g, ctx):
    s, ty = g.ground_type(), g.ground_type()
    x = g.fresh("x")
    return Bind(x, Ret(g.pure(ctx, s, 2)), g.comp({**ctx, x: s}, ty, 2)), ty


def _bind_right_unit(g, ctx):
    ty = g.ground_type()
    x = g.fresh("x")
    return Bind(x, g.comp(ctx, ty, 2), Ret(Var(x))), ty


def _bind_assoc(g, ctx):
    s1, s2, ty = g.bind_type(ctx), g.bind_type(ctx), g.ground_type()
    x, y = g.fresh("x"), g.fresh("y")
    m = g.comp(ctx, s1, 1)
    k = g.comp({**ctx, x: s1}, s2, 1)
    n = g.comp({**ctx, y: s2}, ty, 1)
    return Bind(y, Bind(x, m, k), n), ty


def _map_def(g, ctx):
    s, ty = g.ground_type(), g.ground_type()
    z = g.fresh("z")
    return Map(Lam(z, g.pure({**ctx, z: s}, ty, 2), s), g.comp(ctx, s, 2)), ty


def _step_central(g, ctx):
    ty = g.ground_type()
    return Bind(SEQ, Step(), g.comp(ctx, ty, 2)), ty


def _alloc_permute(g, ctx):
    s1, s2 = g.cell_type(), g.cell_type()
    l, k = g.fresh("l"), g.fresh("k")
    redex = Bind(l, Alloc(g.pure(ctx, s1, 2)), Bind(k, Alloc(g.pure(ctx, s2, 2)), Ret(Pair(Var(l), Var(k)))))
    return redex, Prod(Ref(s1), Ref(s2))


def _beta_fn(g, ctx):
    s, ty = g.ground_type(), g.ground_type()
    x = g.fresh("x")
    return App(Lam(x, g.comp({**ctx, x: s}, ty, 2), s), g.pure(ctx, s, 2)), ty


def _beta_ifz(g, ctx):
    ty = g.ground_type()
    return Ifz(IntLit(g.rng.randint(-1, 1)), g.comp(ctx, ty, 2), g.comp(ctx, ty, 2)), ty


def _simplify(g, ctx):
    ty = g.ground_type()
    return g.comp(ctx, ty, 3), ty


def _ret_of(g: Gen, rule: str, make_pure) -> LawCase:
    """A pure redex under ``ret``, after some cells."""
    def redex(g, ctx):
        t, ty = make_pure(g, ctx)
        return Ret(t), ty
    case = _context(g, redex, rule)
    return LawCase(rule, case.term, case.path + (0,))


def _pure_eta_fn(g, ctx):
    z, q = g.fresh("z"), g.fresh("q")
    f = g.rng.choice([NEG, Lam(q, BinOp("+", Var(q), IntLit(g.rng.randint(-2, 2))), INT)])
    return App(Lam(z, App(f, Var(z)), INT), g.pure(ctx, INT, 1)), INT


def _pure_fst(g, ctx):
    s1, s2 = g.ground_type(), g.ground_type()
    return Proj(1, Pair(g.pure(ctx, s1, 2), g.pure(ctx, s2, 2))), s1


def _pure_snd(g, ctx):
    s1, s2 = g.ground_type(), g.ground_type()
    return Proj(2, Pair(g.pure(ctx, s1, 2), g.pure(ctx, s2, 2))), s2


def _pure_eta_pair(g, ctx):
    s1, s2 = g.ground_type(), g.ground_type()
    p = g.pure(ctx, Prod(s1, s2), 2)
    return Pair(Proj(1, p), Proj(2, p)), Prod(s1, s2)


def _pure_record(g, ctx):
    s1, s2 = g.ground_type(), g.ground_type()
    lab = g.rng.choice(["a", "b"])
    return Field(RecordLit((("a", g.pure(ctx, s1, 2)), ("b", g.pure(ctx, s2, 2)))), lab), (s1 if lab == "a" else s2)


def _pure_arith(g: Gen, rule: str) -> LawCase:
    """Arithmetic subterm of a ret; the ring rule applies to it as a whole."""
    def redex(g, ctx):
        e = g.pure(ctx, INT, 3)
        while not isinstance(e, (IntLit, BinOp, App)) or (isinstance(e, App) and e.fn != NEG):
            e = BinOp("+", e, g.pure(ctx, INT, 1))
        return Ret(e), INT
    case = _context(g, redex, rule)
    return LawCase(rule, case.term, case.path + (0,))


def _eta_case(g: Gen) -> LawCase:
    case = _ret_of(g, "eta-fn", _pure_eta_fn)
    return LawCase("eta-fn", case.term, case.path + (0,))


WITNESSES = {
    "neg": IsoWitness(NEG, NEG),
    "shift": IsoWitness(parse("\\(x : Int). x + 1"), parse("\\(x : Int). x - 1")),
}


def rep_indep_case(g: Gen, witness: IsoWitness | None = None) -> LawCase:
    """The Cell form of representation independence at a random initial value."""
    w = witness or g.rng.choice(list(WITNESSES.values()))
    e = g.pure({}, INT, 2)
    l, v = g.fresh("l"), g.fresh("v")
    term = Bind(l, Alloc(e), Ret(Pair(Get(Var(l)), Lam(v, Set(Var(l), Var(v)), INT))))
    return LawCase("rep-indep", term, (), witness=w)


MAKERS: dict[str, Maker] = {
    "set-get": lambda g: _context(g, _set_get, "set-get"),
    "alloc-set": lambda g: _context(g, _alloc_set, "alloc-set"),
    "set-set": lambda g: _context(g, _set_set, "set-set"),
    "get-get-commute": lambda g: _context(g, _get_get, "get-get-commute"),
    "get-set": lambda g: _context(g, _get_set, "get-set"),
    "get-discard": lambda g: _context(g, _get_discard, "get-discard"),
    "rec-unfold": lambda g: _context(g, _rec_unfold, "rec-unfold"),
    "bind-left-unit": lambda g: _context(g, _bind_left_unit, "bind-left-unit"),
    "bind-right-unit": lambda g: _context(g, _bind_right_unit, "bind-right-unit"),
    "bind-assoc": lambda g: _context(g, _bind_assoc, "bind-assoc"),
    "map-def": lambda g: _context(g, _map_def, "map-def"),
    "beta-fn": lambda g: _context(g, _beta_fn, "beta-fn"),
    "eta-fn": _eta_case,
    "beta-fst": lambda g: _ret_of(g, "beta-fst", _pure_fst),
    "beta-snd": lambda g: _ret_of(g, "beta-snd", _pure_snd),
    "eta-pair": lambda g: _ret_of(g, "eta-pair", _pure_eta_pair),
    "beta-record": lambda g: _ret_of(g, "beta-record", _pure_record),
    "beta-ifz": lambda g: _context(g, _beta_ifz, "beta-ifz"),
    "step-central": lambda g: _context(g, _step_central, "step-central"),
    "alloc-permute": lambda g: _context(g, _alloc_permute, "alloc-permute"),
    "rep-indep": rep_indep_case,
    "simplify": lambda g: _context(g, _simplify, "simplify"),
    "ring": lambda g: _pure_arith(g, "ring"),
}


def make_case(rule: str, seed: int) -> LawCase:
    return MAKERS[rule](Gen(random.Random(f"{rule}/{seed}")))


def rewrite_case(case: LawCase) -> Term:
    return apply_rule(case.term, case.rule, case.path, case.bindings, case.witness, case.direction)


def check_case(case: LawCase, ladder=DEFAULT_LADDER, max_script: int = 4):
    """Rewrite the case and test the two sides; returns (rhs, verdict)."""
    rhs = rewrite_case(case)
    if get_rule(case.rule).evidence == "probe":
        return rhs, probe_equiv(case.term, rhs, max_script, ladder)
    return rhs, strict_equiv(case.term, rhs, ladder)


def run_law(rule: str, cases: int = 100, seed: int = 0, ladder=DEFAULT_LADDER, max_script: int = 4) -> LawResult:
    res = LawResult(rule)
    t0 = time.perf_counter()
    for i in range(cases):
        case = make_case(rule, seed * 100_003 + i)
        res.cases += 1
        try:
            _, verdict = check_case(case, ladder, max_script)
        except RuleError as e:
            res.errors += 1
            res.first_failure = res.first_failure or f"case {i}: {show(case.term)} at {list(case.path)}: {e}"
            continue
        if isinstance(verdict, Equivalent):
            res.passed += 1
        elif isinstance(verdict, Inconclusive):
            res.inconclusive += 1
        else:
            res.failed += 1
            res.first_failure = res.first_failure or f"case {i}: {show(case.term)}: {verdict.describe()}"
    res.seconds = time.perf_counter() - t0
    return res


def run_laws(cases: int = 100, seed: int = 0, rules: list[str] | None = None,
             ladder=DEFAULT_LADDER) -> list[LawResult]:
    names = rules or [r.name for r in rule_set()]
    return [run_law(name, cases, seed, ladder) for name in names]


def format_table(results: list[LawResult]) -> str:
    head = f"{'rule':<18} {'cases':>6} {'pass':>6} {'inconcl':>8} {'fail':>5} {'error':>6}  status"
    lines = [head, "-" * len(head)]
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        lines.append(f"{r.rule:<18} {r.cases:>6} {r.passed:>6} {r.inconclusive:>8} {r.failed:>5} {r.errors:>6}  {status}")
    for r in results:
        if r.first_failure:
            lines.append(f"  {r.rule}: {r.first_failure}")
    return "\n".join(lines)
