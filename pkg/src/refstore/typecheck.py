"""Bidirectional typechecking for the monadic language with references."""

from __future__ import annotations

from .syntax import (
    INT, UNIT, Alloc, App, BinOp, Bind, Field, Fn, Get, Ifz, IntLit, Lam,
    Map, Pair, Path, PrimFn, Prod, Proj, Rec, Record, RecordLit, Ref, Ret, Set,
    Step, T, Term, Type, UnitLit, Var, children, show_type,
)

Context = dict[str, Type]


class TypeCheckError(Exception):
    """A typing failure, with the rule that failed and the subterm path."""

    def __init__(self, rule: str, path: Path, message: str):
        super().__init__(f"[{rule}] at {list(path)}: {message}")
        self.rule = rule
        self.path = path
        self.message = message


def _fail(rule: str, path: Path, msg: str):
    raise TypeCheckError(rule, path, msg)


def _expect_eq(rule: str, path: Path, expected: Type, actual: Type):
    if expected != actual:
        _fail(rule, path, f"expected {show_type(expected)}, got {show_type(actual)}")


def _infer(ctx: Context, t: Term, path: Path) -> tuple[Type, Term]:
    match t:
        case Var(n):
            if n not in ctx:
                _fail("var", path, f"unbound variable {n!r}")
            return ctx[n], t
        case IntLit():
            return INT, t
        case UnitLit():
            return UNIT, t
        case PrimFn("neg"):
            return Fn(INT, INT), t
        case BinOp(op, a, b):
            a2 = _check(ctx, a, INT, path + (0,))
            b2 = _check(ctx, b, INT, path + (1,))
            return INT, BinOp(op, a2, b2)
        case Lam(x, body, ann):
            if ann is None:
                _fail("lam", path, f"cannot infer the type of unannotated parameter {x!r}")
            cod, body2 = _infer({**ctx, x: ann}, body, path + (0,))
            return Fn(ann, cod), Lam(x, body2, ann)
        case App(Lam(x, body, None), a):
            ta, a2 = _infer(ctx, a, path + (1,))
            cod, body2 = _infer({**ctx, x: ta}, body, path + (0, 0))
            return cod, App(Lam(x, body2, None), a2)
        case App(f, a):
            fty, f2 = _infer(ctx, f, path + (0,))
            if not isinstance(fty, Fn):
                _fail("app", path, f"applying a non-function of type {show_type(fty)}")
            a2 = _check(ctx, a, fty.dom, path + (1,))
            return fty.cod, App(f2, a2)
        case Pair(a, b):
            ta, a2 = _infer(ctx, a, path + (0,))
            tb, b2 = _infer(ctx, b, path + (1,))
            return Prod(ta, tb), Pair(a2, b2)
        case Proj(i, e):
            ty, e2 = _infer(ctx, e, path + (0,))
            if not isinstance(ty, Prod):
                _fail("proj", path, f"projection from non-product {show_type(ty)}")
            return (ty.fst if i == 1 else ty.snd), Proj(i, e2)
        case RecordLit(fs):
            tys, terms = [], []
            for k, (lab, e) in enumerate(fs):
                ty, e2 = _infer(ctx, e, path + (k,))
                tys.append((lab, ty))
                terms.append((lab, e2))
            return Record(tuple(tys)), RecordLit(tuple(terms))
        case Field(e, lab):
            ty, e2 = _infer(ctx, e, path + (0,))
            if not isinstance(ty, Record) or ty.get(lab) is None:
                _fail("field", path, f"no field {lab!r} in {show_type(ty)}")
            return ty.get(lab), Field(e2, lab)
        case Ret(e):
            ty, e2 = _infer(ctx, e, path + (0,))
            return T(ty), Ret(e2)
        case Bind(x, a, b):
            ta, a2 = _infer(ctx, a, path + (0,))
            if not isinstance(ta, T):
                _fail("bind", path + (0,), f"bound term must be a computation, got {show_type(ta)}")
            tb, b2 = _infer({**ctx, x: ta.body}, b, path + (1,))
            if not isinstance(tb, T):
                _fail("bind", path + (1,), f"continuation must be a computation, got {show_type(tb)}")
            return tb, Bind(x, a2, b2)
        case Alloc(e):
            ty, e2 = _infer(ctx, e, path + (0,))
            return T(Ref(ty)), Alloc(e2, ty)
        case Get(r):
            ty, r2 = _infer(ctx, r, path + (0,))
            if not isinstance(ty, Ref):
                _fail("get", path, f"reading from non-reference {show_type(ty)}")
            return T(ty.body), Get(r2)
        case Set(r, v):
            ty, r2 = _infer(ctx, r, path + (0,))
            if not isinstance(ty, Ref):
                _fail("set", path, f"writing to non-reference {show_type(ty)}")
            v2 = _check(ctx, v, ty.body, path + (1,))
            return T(UNIT), Set(r2, v2)
        case Step():
            return T(UNIT), t
        case Rec(f, x, body, dom, cod):
            if dom is None or cod is None:
                _fail("rec", path, "cannot infer an unannotated recursive function")
            if not isinstance(cod, T):
                _fail("rec", path, f"recursive function body must be a computation, got {show_type(cod)}")
            fty = Fn(dom, cod)
            body2 = _check({**ctx, f: fty, x: dom}, body, cod, path + (0,))
            return fty, Rec(f, x, body2, dom, cod)
        case Map(Lam(x, body, None), m):
            tm, m2 = _infer(ctx, m, path + (1,))
            if not isinstance(tm, T):
                _fail("map", path + (1,), f"expected a computation, got {show_type(tm)}")
            cod, body2 = _infer({**ctx, x: tm.body}, body, path + (0, 0))
            return T(cod), Map(Lam(x, body2, None), m2)
        case Map(f, m):
            fty, f2 = _infer(ctx, f, path + (0,))
            if not isinstance(fty, Fn):
                _fail("map", path, f"mapping a non-function of type {show_type(fty)}")
            m2 = _check(ctx, m, T(fty.dom), path + (1,))
            return T(fty.cod), Map(f2, m2)
        case Ifz(c, z, n):
            c2 = _check(ctx, c, INT, path + (0,))
            ty, z2 = _infer(ctx, z, path + (1,))
            n2 = _check(ctx, n, ty, path + (2,))
            return ty, Ifz(c2, z2, n2)
    raise TypeError(f"not a term: {t!r}")


def _check(ctx: Context, t: Term, ty: Type, path: Path) -> Term:
    match t, ty:
        case Lam(x, body, ann), Fn(dom, cod):
            if ann is not None:
                _expect_eq("lam", path, dom, ann)
            return Lam(x, _check({**ctx, x: dom}, body, cod, path + (0,)), ann)
        case Rec(f, x, body, dom, cod), Fn(fdom, fcod):
            if not isinstance(fcod, T):
                _fail("rec", path, f"recursive function must return a computation, not {show_type(fcod)}")
            if dom is not None:
                _expect_eq("rec", path, fdom, dom)
            if cod is not None:
                _expect_eq("rec", path, fcod, cod)
            body2 = _check({**ctx, f: ty, x: fdom}, body, fcod, path + (0,))
            return Rec(f, x, body2, dom, cod)
        case Ret(e), T(body):
            return Ret(_check(ctx, e, body, path + (0,)))
        case Bind(x, a, b), T():
            ta, a2 = _infer(ctx, a, path + (0,))
            if not isinstance(ta, T):
                _fail("bind", path + (0,), f"bound term must be a computation, got {show_type(ta)}")
            return Bind(x, a2, _check({**ctx, x: ta.body}, b, ty, path + (1,)))
        case Pair(a, b), Prod(fa, fb):
            return Pair(_check(ctx, a, fa, path + (0,)), _check(ctx, b, fb, path + (1,)))
        case RecordLit(fs), Record(tfs):
            if [lab for lab, _ in fs] != [lab for lab, _ in tfs]:
                _fail("record", path, f"record labels do not match {show_type(ty)}")
            return RecordLit(tuple(
                (lab, _check(ctx, e, fty, path + (k,)))
                for k, ((lab, e), (_, fty)) in enumerate(zip(fs, tfs))
            ))
        case Ifz(c, z, n), _:
            return Ifz(
                _check(ctx, c, INT, path + (0,)),
                _check(ctx, z, ty, path + (1,)),
                _check(ctx, n, ty, path + (2,)),
            )
        case Alloc(e), T(Ref(body)):
            return Alloc(_check(ctx, e, body, path + (0,)), body)
        case Set(r, v), T():
            rty, r2 = _infer(ctx, r, path + (0,))
            if not isinstance(rty, Ref):
                _fail("set", path, f"writing to non-reference {show_type(rty)}")
            _expect_eq("set", path, ty, T(UNIT))
            return Set(r2, _check(ctx, v, rty.body, path + (1,)))
        case App(f, a), _:
            fty, f2 = _infer(ctx, f, path + (0,))
            if not isinstance(fty, Fn):
                _fail("app", path, f"applying a non-function of type {show_type(fty)}")
            _expect_eq("app", path, ty, fty.cod)
            return App(f2, _check(ctx, a, fty.dom, path + (1,)))
    actual, t2 = _infer(ctx, t, path)
    if actual != ty:
        _fail(_rule_name(t), path, f"expected {show_type(ty)}, got {show_type(actual)}")
    return t2


def _rule_name(t: Term) -> str:
    return type(t).__name__.lower()


def infer(ctx: Context | None, t: Term) -> Type:
    return _infer(dict(ctx or {}), t, ())[0]


def check(ctx: Context | None, t: Term, ty: Type) -> None:
    _check(dict(ctx or {}), t, ty, ())


def elaborate(t: Term, ty: Type | None = None, ctx: Context | None = None) -> tuple[Term, Type]:
    """Typecheck ``t`` and return it with allocation type tags filled in."""
    ctx = dict(ctx or {})
    if ty is None:
        ty, t2 = _infer(ctx, t, ())
        return t2, ty
    return _check(ctx, t, ty, ()), ty


def context_at(ctx: Context | None, t: Term, path: Path) -> Context:
    """Best-effort typing context in scope at ``path``.

    Binders whose type cannot be determined are left out of the result.
    """
    ctx = dict(ctx or {})
    for i in path:
        match t:
            case Bind(x, a, _) if i == 1:
                try:
                    ta = infer(ctx, a)
                except TypeCheckError:
                    ta = None
                if isinstance(ta, T):
                    ctx[x] = ta.body
                else:
                    ctx.pop(x, None)
            case Lam(x, _, ann):
                if ann is not None:
                    ctx[x] = ann
                else:
                    ctx.pop(x, None)
            case Rec(f, x, _, dom, cod):
                if dom is not None and cod is not None:
                    ctx[f] = Fn(dom, cod)
                    ctx[x] = dom
                else:
                    ctx.pop(f, None)
                    ctx.pop(x, None)
        t = children(t)[i]
    return ctx

