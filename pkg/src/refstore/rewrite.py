"""Equational rewriting: the rule catalogue, single steps, and derivation traces.

Schematic rules are written in the surface syntax.  Their free variables
are metavariables; their binders are pattern binders, matched against any
binder name in the subject term.  Rules that need substitution, an
isomorphism witness or normalization are implemented directly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable

from .normalize import OutOfFragment, is_arith, normalize, normalize_arith
from .syntax import (
    SEQ, Alloc, App, BinOp, Bind, Field, Fn, Get, Ifz, IntLit, Lam, Map, Parser, Ret,
    ParseError, Path, PathError, PrimFn, Proj, Rec, RecordLit, Set, Step, Term,
    Type, Var, alpha_eq, bound_in_child, children, fresh_name, free_vars, parse,
    rebuild, replace_at, show, show_type, subst, subst_many, subterm_at,
    subterms, all_names,
)
from .typecheck import Context, TypeCheckError, context_at, infer


class RuleError(Exception):
    pass


class NoMatch(RuleError):
    pass


class TypeRegression(RuleError):
    pass


class UndischargedObligation(RuleError):
    pass


class ObligationFailed(UndischargedObligation):
    def __init__(self, equation: str, counterexample: object):
        super().__init__(f"obligation {equation} fails at x = {counterexample}")
        self.equation = equation
        self.counterexample = counterexample


# ---------------------------------------------------------------------------
# Isomorphism witnesses


@dataclass(frozen=True)
class IsoWitness:
    fplus: Term
    fminus: Term
    # discharge method per round trip: f+(f- x) = x, then f-(f+ x) = x
    status: tuple[str, str] = ("pending", "pending")

    def __str__(self) -> str:
        return f"({show(self.fplus)}, {show(self.fminus)})"


@dataclass(frozen=True)
class IsoValid:
    witness: IsoWitness
    sigma: Type
    tau: Type


def _iso_pool(ty: Type) -> list:
    from .syntax import Int, Prod, Unit
    from .values import IntV, PairV, UNIT_V

    match ty:
        case Int():
            return [IntV(0)] + [IntV(s * n) for n in range(1, 17) for s in (1, -1)]
        case Unit():
            return [UNIT_V]
        case Prod(a, b):
            return [PairV(x, y) for x in _iso_pool(a) for y in _iso_pool(b)]
    return []


def _round_trip(outer: Term, inner: Term, ty: Type, label: str, ctx: Context) -> str:
    from .interp import apply, eval_pure
    from .values import show_value, value_key

    x = fresh_name("x", all_names(outer) | all_names(inner))
    composite = App(outer, App(inner, Var(x)))
    try:
        if alpha_eq(normalize(composite), Var(x)):
            return "normalization"
    except OutOfFragment:
        pass
    if free_vars(outer) or free_vars(inner):
        raise UndischargedObligation(f"cannot discharge {label}: witness is open and does not normalize")
    pool = _iso_pool(ty)
    if not pool:
        raise UndischargedObligation(f"cannot discharge {label}: no test pool for {show_type(ty)}")
    f, g = eval_pure({}, outer), eval_pure({}, inner)
    for v in pool:
        if value_key(apply(f, apply(g, v))) != value_key(v):
            raise ObligationFailed(label, show_value(v))
    return "pool-testing"


def _fn_type(ctx: Context, f: Term, dom: Type) -> Type:
    try:
        return infer(ctx, f)
    except TypeCheckError:
        if isinstance(f, Lam) and f.ann is None:
            return Fn(dom, infer({**ctx, f.param: dom}, f.body))
        raise


def check_iso(w: IsoWitness, sigma: Type, tau: Type | None = None, ctx: Context | None = None) -> IsoValid:
    """Discharge both round-trip obligations of an isomorphism sigma ~ tau.

    Each is tried by normalization first, then by testing on the type's pool.
    Raises ObligationFailed with a counterexample.
    """
    ctx = dict(ctx or {})
    try:
        fp_ty = _fn_type(ctx, w.fplus, sigma)
    except TypeCheckError as e:
        raise UndischargedObligation(f"f+ does not typecheck: {e}") from None
    if not isinstance(fp_ty, Fn) or fp_ty.dom != sigma:
        raise UndischargedObligation(f"f+ has type {show_type(fp_ty)}, expected {show_type(sigma)} -> _")
    tau = fp_ty.cod if tau is None else tau
    if fp_ty.cod != tau:
        raise UndischargedObligation(f"f+ has type {show_type(fp_ty)}, expected {show_type(Fn(sigma, tau))}")
    try:
        fm_ty = _fn_type(ctx, w.fminus, tau)
    except TypeCheckError as e:
        raise UndischargedObligation(f"f- does not typecheck: {e}") from None
    if fm_ty != Fn(tau, sigma):
        raise UndischargedObligation(f"f- has type {show_type(fm_ty)}, expected {show_type(Fn(tau, sigma))}")
    s1 = _round_trip(w.fplus, w.fminus, tau, "f+(f- x) = x", ctx)
    s2 = _round_trip(w.fminus, w.fplus, sigma, "f-(f+ x) = x", ctx)
    return IsoValid(replace(w, status=(s1, s2)), sigma, tau)


# ---------------------------------------------------------------------------
# First-order matching with binders

_MARK = "%"


def _marker(p: str) -> str:
    return p + _MARK


def _same_data(p: Term, t: Term) -> bool:
    match p:
        case Lam(_, _, ann):
            return ann is None or ann == t.ann
        case Rec(_, _, _, dom, cod):
            return (dom is None or dom == t.dom) and (cod is None or cod == t.cod)
        case IntLit(n):
            return n == t.value
        case BinOp(op):
            return op == t.op
        case Proj(i):
            return i == t.index
        case Field(_, lab):
            return lab == t.label
        case RecordLit(fs):
            return [lab for lab, _ in fs] == [lab for lab, _ in t.fields]
        case PrimFn(n):
            return n == t.name
    return True


class _Matcher:
    def __init__(self, metas):
        self.metas = set(metas)
        self.inst: dict[str, Term] = {}
        self.names: dict[str, str] = {}

    def match(self, p: Term, t: Term, scope: tuple = ()) -> bool:
        if isinstance(p, Var):
            if p.name in self.metas:
                return self._bind(p.name, t, scope)
            if not isinstance(t, Var):
                return False
            for pn, tn in reversed(scope):
                if tn == t.name:
                    return pn == p.name
                if pn == p.name:
                    return False
            return t.name == p.name
        if type(p) is not type(t) or not _same_data(p, t):
            return False
        pk, tk = children(p), children(t)
        if len(pk) != len(tk):
            return False
        for i, (a, b) in enumerate(zip(pk, tk)):
            pb, tb = bound_in_child(p, i), bound_in_child(t, i)
            for pn, tn in zip(pb, tb):
                self.names.setdefault(pn, tn)
            if not self.match(a, b, scope + tuple(zip(pb, tb))):
                return False
        return True

    def _bind(self, v: str, t: Term, scope) -> bool:
        fv = free_vars(t)
        sub = {tn: Var(_marker(pn)) for pn, tn in scope if tn in fv}
        norm = subst_many(t, sub)
        if v in self.inst:
            return alpha_eq(self.inst[v], norm)
        self.inst[v] = norm
        return True

    # -- instantiation of the other side

    def instantiate(self, p: Term, env: tuple = ()) -> Term:
        match p:
            case Var(n) if n in self.metas:
                if n not in self.inst:
                    raise NoMatch(f"rule needs a binding for {n}")
                return self._resolve(self.inst[n], env)
            case Var(n):
                for pn, name in reversed(env):
                    if pn == n:
                        return Var(name)
                return p
            case Bind(x, a, b):
                x2 = self._choose(x, b, env)
                return Bind(x2, self.instantiate(a, env), self.instantiate(b, env + ((x, x2),)))
            case Lam(x, body, ann):
                x2 = self._choose(x, body, env)
                return Lam(x2, self.instantiate(body, env + ((x, x2),)), ann)
        kids = children(p)
        if not kids:
            return p
        return rebuild(p, [self.instantiate(k, env) for k in kids])

    def _resolve(self, t: Term, env) -> Term:
        sub = {}
        for n in free_vars(t):
            if not n.endswith(_MARK):
                continue
            pn = n[: -len(_MARK)]
            name = next((nm for q, nm in reversed(env) if q == pn), None)
            if name is None:
                raise NoMatch(f"side condition: a metavariable depends on the variable bound by {pn!r}")
            if name == SEQ:
                raise NoMatch("side condition: the discarded result must not be used")
            sub[n] = Var(name)
        return subst_many(t, sub)

    def _needed(self, p: Term, env) -> set[str]:
        out: set[str] = set()
        for _, q in subterms(p):
            if not isinstance(q, Var):
                continue
            if q.name in self.metas and q.name in self.inst:
                for n in free_vars(self.inst[q.name]):
                    if n.endswith(_MARK):
                        pn = n[: -len(_MARK)]
                        out |= {nm for r, nm in env if r == pn}
                    else:
                        out.add(n)
            else:
                out |= {nm for r, nm in env if r == q.name}
        return out

    def _choose(self, p: str, body: Term, env) -> str:
        if p == SEQ:
            return SEQ
        base = self.names.get(p, p)
        needed = self._needed(body, env)
        if base in needed:
            avoid = set(needed)
            for t in self.inst.values():
                avoid |= all_names(t)
            base = fresh_name(base, avoid)
        return base


# ---------------------------------------------------------------------------
# Rules


@dataclass(frozen=True)
class Application:
    """What a single rewrite step may consult besides the subterm."""
    bindings: dict = field(default_factory=dict)
    witness: IsoWitness | None = None
    ctx: Context = field(default_factory=dict)


Custom = Callable[[Term, Application], Term]


@dataclass(frozen=True)
class Rule:
    name: str
    citation: str
    lhs_text: str
    rhs_text: str
    metas: tuple[str, ...] = ()
    evidence: str = "strict"  # how the law is tested: "strict" or "probe"
    ltr: Custom | None = None
    rtl: Custom | None = None

    @property
    def schematic(self) -> bool:
        return self.ltr is None

    @property
    def lhs(self) -> Term:
        return parse(self.lhs_text)

    @property
    def rhs(self) -> Term:
        return parse(self.rhs_text)

    def apply(self, sub: Term, direction: str, app: Application) -> Term:
        if direction not in ("ltr", "rtl"):
            raise RuleError(f"unknown direction {direction!r}")
        if self.schematic:
            src, dst = (self.lhs, self.rhs) if direction == "ltr" else (self.rhs, self.lhs)
            return _apply_schema(self.metas, src, dst, sub, app.bindings)
        if direction == "ltr":
            return self.ltr(sub, app)
        if self.rtl is not None:
            return self.rtl(sub, app)
        return _rtl_by_lhs(self, sub, app)


def _apply_schema(metas, src: Term, dst: Term, sub: Term, bindings: dict) -> Term:
    m = _Matcher(metas)
    if not m.match(src, sub):
        raise NoMatch(f"subterm does not match {show(src)}")
    for k, v in bindings.items():
        if k not in metas:
            raise RuleError(f"unknown metavariable {k!r}")
        if k in m.inst:
            if not alpha_eq(m.inst[k], v):
                raise NoMatch(f"binding {k} = {show(v)} disagrees with the matched {show(m.inst[k])}")
        else:
            m.inst[k] = v
    return m.instantiate(dst)


def _rtl_by_lhs(rule: Rule, sub: Term, app: Application) -> Term:
    lhs = app.bindings.get("lhs")
    if lhs is None:
        raise NoMatch(f"{rule.name} right to left needs `bind lhs=(...)`")
    rest = {k: v for k, v in app.bindings.items() if k != "lhs"}
    out = rule.ltr(lhs, replace(app, bindings=rest))
    if not alpha_eq(out, sub):
        raise NoMatch(f"{show(lhs)} does not rewrite to the subterm")
    return lhs


def _rec_unfold(sub: Term, app: Application) -> Term:
    match sub:
        case App(Rec(f, x, body) as r, a):
            return Bind(SEQ, Step(), subst_many(body, {f: r, x: a}))
    raise NoMatch("expected an application of a recursive function")


def _bind_left_unit(sub: Term, app: Application) -> Term:
    match sub:
        case Bind(x, Ret(v), k):
            return k if x == SEQ else subst(k, x, v)
    raise NoMatch("expected x <- ret v; k")


def _beta_fn(sub: Term, app: Application) -> Term:
    match sub:
        case App(Lam(x, body), a):
            return subst(body, x, a)
    raise NoMatch("expected (\\x. e) a")


def _eta_fn(sub: Term, app: Application) -> Term:
    match sub:
        case Lam(x, App(f, Var(y))) if y == x and x not in free_vars(f):
            return f
    raise NoMatch("expected \\x. f x with x not free in f")


def _eta_fn_rtl(sub: Term, app: Application) -> Term:
    ann = None
    try:
        ty = infer(app.ctx, sub)
        ann = ty.dom if isinstance(ty, Fn) else None
    except TypeCheckError:
        pass
    x = fresh_name("x", free_vars(sub) | set(app.ctx))
    return Lam(x, App(sub, Var(x)), ann)


def _beta_record(sub: Term, app: Application) -> Term:
    match sub:
        case Field(RecordLit(fs), lab):
            for k, v in fs:
                if k == lab:
                    return v
    raise NoMatch("expected {..., l -> e, ...}.l")


def _beta_ifz(sub: Term, app: Application) -> Term:
    match sub:
        case Ifz(IntLit(n), z, nz):
            return z if n == 0 else nz
    raise NoMatch("expected ifz on an integer literal")


def _simplify(sub: Term, app: Application) -> Term:
    try:
        nf = normalize(sub)
        res = app.bindings.get("result")
        if res is None:
            return nf
        if alpha_eq(normalize(res), nf):
            return res
    except OutOfFragment as e:
        raise NoMatch(str(e)) from None
    raise NoMatch("stated result is not equal to the subterm by simplification")


def _ring(sub: Term, app: Application) -> Term:
    if not is_arith(sub):
        raise NoMatch("expected an arithmetic expression")
    nf = normalize_arith(sub)
    res = app.bindings.get("result")
    if res is None:
        return nf
    if is_arith(res) and alpha_eq(normalize_arith(res), nf):
        return res
    raise NoMatch("stated result is not equal to the subterm by ring identities")


def _witness(app: Application) -> IsoWitness:
    w = app.witness
    if w is None:
        raise UndischargedObligation("representation independence needs an iso witness")
    if free_vars(w.fplus) or free_vars(w.fminus):
        raise RuleError("iso witnesses must be closed terms")
    return w


def _cell_type(sub_alloc_arg: Term, app: Application) -> Type:
    try:
        return infer(app.ctx, sub_alloc_arg)
    except TypeCheckError as e:
        raise NoMatch(f"cannot type the allocated value: {e.message}") from None


def _conjugate(t: Term, l: str, fp: Term, fm: Term) -> Term:
    match t:
        case Get(Var(n)) if n == l:
            return Map(fm, t)
        case Set(Var(n) as r, a) if n == l:
            return Set(r, App(fp, _conjugate(a, l, fp, fm)))
        case Var(n) if n == l:
            raise NoMatch(f"{l} is used other than through get/set")
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, [
        k if l in bound_in_child(t, i) else _conjugate(k, l, fp, fm)
        for i, k in enumerate(kids)
    ])


def _deconjugate(t: Term, l: str, fp: Term, fm: Term) -> Term:
    match t:
        case Map(f, Get(Var(n)) as g) if n == l:
            if not alpha_eq(f, fm):
                raise NoMatch(f"read of {l} is not conjugated by f-")
            return g
        case Set(Var(n) as r, App(f, a)) if n == l:
            if not alpha_eq(f, fp):
                raise NoMatch(f"write to {l} is not conjugated by f+")
            return Set(r, _deconjugate(a, l, fp, fm))
        case Var(n) if n == l:
            raise NoMatch(f"{l} is used other than through the conjugated interface")
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, [
        k if l in bound_in_child(t, i) else _deconjugate(k, l, fp, fm)
        for i, k in enumerate(kids)
    ])


def _rep_indep(sub: Term, app: Application) -> Term:
    match sub:
        case Bind(l, Alloc(e), k) if l != SEQ:
            pass
        case _:
            raise NoMatch("expected l <- alloc e; k")
    w = _witness(app)
    k2 = _conjugate(k, l, w.fplus, w.fminus)
    check_iso(w, _cell_type(e, app), ctx=app.ctx)
    return Bind(l, Alloc(App(w.fplus, e)), k2)


def _rep_indep_rtl(sub: Term, app: Application) -> Term:
    w = _witness(app)
    match sub:
        case Bind(l, Alloc(App(f, e)), k) if l != SEQ and alpha_eq(f, w.fplus):
            pass
        case _:
            raise NoMatch("expected l <- alloc (f+ e); k")
    k2 = _deconjugate(k, l, w.fplus, w.fminus)
    check_iso(w, _cell_type(e, app), ctx=app.ctx)
    return Bind(l, Alloc(e), k2)


_STORE = "store laws"
_MONAD = "monad laws"
_PURE = "beta/eta laws"
_STEP = "step commutes with all monadic operations"
_UNIV = "univalent reference laws"

RULES: tuple[Rule, ...] = (
    Rule("set-get", _STORE, "set e a; get e", "step; set e a; ret a", ("e", "a")),
    Rule("alloc-set", _STORE, "x <- alloc a; set x a; ret x", "alloc a", ("a",)),
    Rule("set-set", _STORE, "set e a; set e b", "set e b", ("e", "a", "b")),
    Rule("get-get-commute", _STORE, "x <- get e; y <- get d; ret (x, y)",
         "y <- get d; x <- get e; ret (x, y)", ("e", "d")),
    Rule("get-set", _STORE, "x <- get e; set e x; ret x", "get e", ("e",)),
    Rule("get-discard", _STORE, "get e; k", "step; k", ("e", "k")),
    Rule("rec-unfold", "guarded recursion: one step per unfolding", "(rec f x. e) a", "step; [rec f x. e / f, a / x] e",
         ltr=_rec_unfold),
    Rule("bind-left-unit", _MONAD, "x <- ret v; k", "[v / x] k", ltr=_bind_left_unit),
    Rule("bind-right-unit", _MONAD, "x <- m; ret x", "m", ("m",)),
    Rule("bind-assoc", _MONAD, "y <- (x <- m; k); n", "x <- m; y <- k; n", ("m", "k", "n")),
    Rule("map-def", _MONAD, "map f m", "x <- m; ret (f x)", ("f", "m")),
    Rule("beta-fn", _PURE, "(\\x. e) a", "[a / x] e", ltr=_beta_fn),
    Rule("eta-fn", _PURE, "\\x. f x", "f", ltr=_eta_fn, rtl=_eta_fn_rtl),
    Rule("beta-fst", _PURE, "fst (a, b)", "a", ("a", "b")),
    Rule("beta-snd", _PURE, "snd (a, b)", "b", ("a", "b")),
    Rule("eta-pair", _PURE, "(fst p, snd p)", "p", ("p",)),
    Rule("beta-record", _PURE, "{..., l -> e, ...}.l", "e", ltr=_beta_record),
    Rule("beta-ifz", _PURE, "ifz n then a else b", "a if n = 0, else b", ltr=_beta_ifz),
    Rule("step-central", _STEP, "step; m", "x <- m; step; ret x", ("m",)),
    Rule("alloc-permute", _UNIV, "l <- alloc a; k <- alloc b; ret (l, k)",
         "k <- alloc b; l <- alloc a; ret (l, k)", ("a", "b")),
    Rule("rep-indep", _UNIV, "l <- alloc e; K[get l, set l a]",
         "l <- alloc (f+ e); K[map f- (get l), set l (f+ a)]",
         evidence="probe", ltr=_rep_indep, rtl=_rep_indep_rtl),
    Rule("simplify", "normalization of the straight-line fragment", "e", "normal form of e",
         evidence="strict", ltr=_simplify, rtl=_simplify),
    Rule("ring", "integer ring identities", "e", "linear normal form of e",
         ltr=_ring, rtl=_ring),
)

_BY_NAME = {r.name: r for r in RULES}


def rule_set() -> list[Rule]:
    return list(RULES)


def get_rule(name: str) -> Rule:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise RuleError(f"unknown rule {name!r}") from None


def apply_rule(t: Term, rule: str | Rule, path: Path = (), bindings: dict | None = None,
               witness: IsoWitness | None = None, direction: str = "ltr",
               ctx: Context | None = None, check_types: bool = True) -> Term:
    """Rewrite the subterm of ``t`` at ``path`` by one rule instance."""
    r = get_rule(rule) if isinstance(rule, str) else rule
    try:
        sub = subterm_at(t, tuple(path))
    except PathError as e:
        raise NoMatch(f"no subterm at {list(path)}: {e}") from None
    ty0 = None
    if check_types:
        try:
            ty0 = infer(ctx, t)
        except TypeCheckError as e:
            raise RuleError(f"input term does not typecheck: {e}") from None
    local = context_at(ctx, t, tuple(path))
    new = r.apply(sub, direction, Application(dict(bindings or {}), witness, local))
    out = replace_at(t, tuple(path), new)
    if check_types:
        try:
            ty1 = infer(ctx, out)
        except TypeCheckError as e:
            raise TypeRegression(f"result does not typecheck: {e}") from None
        if ty1 != ty0:
            raise TypeRegression(f"type changed from {show_type(ty0)} to {show_type(ty1)}")
    return out


def matching_paths(t: Term, rule: str | Rule, direction: str = "ltr", ctx: Context | None = None,
                   witness: IsoWitness | None = None) -> list[Path]:
    """Paths at which ``rule`` applies without extra bindings."""
    out = []
    for path, _ in subterms(t):
        try:
            apply_rule(t, rule, path, witness=witness, direction=direction, ctx=ctx)
        except (RuleError, TypeCheckError):
            continue
        out.append(path)
    return out


# ---------------------------------------------------------------------------
# Derivation traces


@dataclass(frozen=True)
class TraceStep:
    rule: str
    path: Path = ()
    direction: str = "ltr"
    bindings: tuple[tuple[str, Term], ...] = ()
    iso: IsoWitness | None = None
    note: str = ""


@dataclass(frozen=True)
class DerivationTrace:
    start: Term
    steps: tuple[TraceStep, ...]
    end: Term | None = None


@dataclass(frozen=True)
class StepReport:
    index: int
    rule: str
    path: Path
    ok: bool
    message: str = ""
    term: Term | None = None


@dataclass(frozen=True)
class TraceReport:
    valid: bool
    steps: tuple[StepReport, ...]
    final: Term
    message: str = ""


def check_trace(tr: DerivationTrace, ctx: Context | None = None) -> TraceReport:
    term = tr.start
    reports: list[StepReport] = []
    for i, st in enumerate(tr.steps, 1):
        try:
            before = subterm_at(term, st.path)
        except PathError:
            before = None
        try:
            term = apply_rule(term, st.rule, st.path, dict(st.bindings), st.iso, st.direction, ctx)
        except (RuleError, TypeCheckError) as e:
            where = "" if before is None else f"; subterm was {show(before)}"
            reports.append(StepReport(i, st.rule, st.path, False, f"{e}{where}"))
            return TraceReport(False, tuple(reports), term, f"step {i} ({st.rule}) failed")
        reports.append(StepReport(i, st.rule, st.path, True, "", term))
    if tr.end is not None and not alpha_eq(term, tr.end):
        return TraceReport(False, tuple(reports), term,
                           f"final term {show(term)} is not alpha-equal to the stated end {show(tr.end)}")
    return TraceReport(True, tuple(reports), term, "valid")


class TraceSyntaxError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


_DIRECTIVE = re.compile(r"^(start|rule|end)\b")
_RULE = re.compile(r"^rule\s+(?P<name>[\w-]+)\s+at\s+\[(?P<path>[\d,\s]*)\](?P<rest>.*)$", re.S)
_NOTE = re.compile(r"(^|\s)--\s?(.*)$")


def parse_trace(text: str) -> DerivationTrace:
    blocks: list[tuple[int, str, list[str]]] = []  # line, body, notes
    for n, raw in enumerate(text.splitlines(), 1):
        m = _NOTE.search(raw)
        note = m.group(2).strip() if m else ""
        line = raw[: m.start()] if m else raw
        if not line.strip():
            if note and blocks:
                blocks[-1][2].append(note)
            continue
        if _DIRECTIVE.match(line):
            blocks.append((n, line.strip(), [note] if note else []))
        elif blocks and line[:1].isspace():
            blocks[-1] = (blocks[-1][0], blocks[-1][1] + " " + line.strip(), blocks[-1][2] + ([note] if note else []))
        else:
            raise TraceSyntaxError(f"expected start, rule or end, found {line.strip()!r}", n)
    start = end = None
    steps: list[TraceStep] = []
    for n, body, notes in blocks:
        try:
            if body.startswith("start"):
                if start is not None or steps:
                    raise TraceSyntaxError("`start` must come first, once", n)
                start = parse(body[len("start"):])
            elif body.startswith("end"):
                if end is not None:
                    raise TraceSyntaxError("duplicate `end`", n)
                end = parse(body[len("end"):])
            else:
                if end is not None:
                    raise TraceSyntaxError("rule after `end`", n)
                steps.append(_parse_step(body, " ".join(notes), n))
        except ParseError as e:
            raise TraceSyntaxError(f"{e.msg_text} (column {e.col_no})", n) from None
    if start is None:
        raise TraceSyntaxError("missing `start`", 1)
    return DerivationTrace(start, tuple(steps), end)


def _parse_step(body: str, note: str, n: int) -> TraceStep:
    m = _RULE.match(body)
    if not m:
        raise TraceSyntaxError("expected `rule NAME at [PATH] ...`", n)
    path = tuple(int(x) for x in m.group("path").replace(",", " ").split())
    p = Parser(m.group("rest"))
    direction, bindings, iso = "ltr", [], None
    while p.tok.kind != "eof":
        word = p.ident()
        if word == "dir":
            direction = p.ident()
            if direction not in ("ltr", "rtl"):
                raise TraceSyntaxError(f"direction must be ltr or rtl, not {direction!r}", n)
        elif word == "bind":
            key = p.ident()
            p.expect("=")
            bindings.append((key, p.arg()))
        elif word == "iso":
            iso = IsoWitness(p.arg(), p.arg())
        else:
            raise TraceSyntaxError(f"unknown rule option {word!r}", n)
    get_rule(m.group("name"))
    return TraceStep(m.group("name"), path, direction, tuple(bindings), iso, note)


def format_trace(tr: DerivationTrace) -> str:
    lines = [f"start {show(tr.start)}"]
    for st in tr.steps:
        parts = [f"rule {st.rule} at [{','.join(map(str, st.path))}]"]
        if st.direction != "ltr":
            parts.append(f"dir {st.direction}")
        for k, v in st.bindings:
            parts.append(f"bind {k}=({show(v)})")
        if st.iso is not None:
            parts.append(f"iso ({show(st.iso.fplus)}) ({show(st.iso.fminus)})")
        line = " ".join(parts)
        if st.note:
            line += f"  -- {st.note}"
        lines.append(line)
    if tr.end is not None:
        lines.append(f"end {show(tr.end)}")
    return "\n".join(lines) + "\n"
