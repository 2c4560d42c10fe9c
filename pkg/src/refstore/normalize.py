"""Normal forms for the straight-line (recursion-free) fragment.

Monad laws are oriented left to right, ``map`` is unfolded into a bind,
beta/eta and projection redexes are contracted, and integer arithmetic is
brought into a linear normal form: positive atoms, then subtracted atoms,
then a constant (``i - 1``, ``neg x + y + 2``, ...).
"""

from __future__ import annotations

from .syntax import (
    NEG, SEQ, Alloc, App, BinOp, Bind, Field, Get, Ifz, IntLit, Lam, Map, Pair,
    PrimFn, Proj, Rec, RecordLit, Ret, Set, Step, Term, UnitLit, Var,
    all_names, alpha_key, children, fresh_name, free_vars, rebuild, show, subst,
)


class OutOfFragment(ValueError):
    pass


def in_fragment(t: Term) -> bool:
    if isinstance(t, Rec):
        return False
    return all(in_fragment(k) for k in children(t))


def normalize(t: Term) -> Term:
    """Normal form of a recursion-free term; raises OutOfFragment otherwise."""
    if not in_fragment(t):
        raise OutOfFragment("recursive functions are outside the straight-line fragment")
    return _norm(t)


# ---------------------------------------------------------------------------
# Linear arithmetic

Linear = tuple[dict, int]  # atom key -> (atom, coefficient), constant


def is_arith(t: Term) -> bool:
    return isinstance(t, (IntLit, BinOp)) or (isinstance(t, App) and t.fn == NEG)


def _linear(t: Term, atom) -> Linear:
    """Linearize ``t``; ``atom`` maps non-arithmetic leaves to terms."""
    coeffs: dict = {}
    const = 0

    def go(t: Term, sign: int):
        nonlocal const
        match t:
            case IntLit(n):
                const += sign * n
            case BinOp(op, a, b):
                go(a, sign)
                go(b, sign if op == "+" else -sign)
            case App(PrimFn("neg"), a):
                go(a, -sign)
            case _:
                leaf = atom(t)
                if is_arith(leaf):
                    go(leaf, sign)
                    return
                key = alpha_key(leaf)
                old = coeffs.get(key, (leaf, 0))[1]
                coeffs[key] = (leaf, old + sign)

    go(t, 1)
    return {k: v for k, v in coeffs.items() if v[1] != 0}, const


def _render(lin: Linear) -> Term:
    coeffs, const = lin
    atoms = sorted(coeffs.values(), key=lambda ac: show(ac[0]))
    pos = [a for a, c in atoms for _ in range(c) if c > 0]
    neg = [a for a, c in atoms for _ in range(-c) if c < 0]
    if pos:
        out = pos[0]
        for a in pos[1:]:
            out = BinOp("+", out, a)
    elif neg:
        out = App(NEG, neg.pop(0))
    else:
        return IntLit(const)
    for a in neg:
        out = BinOp("-", out, a)
    if const > 0:
        out = BinOp("+", out, IntLit(const))
    elif const < 0:
        out = BinOp("-", out, IntLit(-const))
    return out


def normalize_arith(t: Term) -> Term:
    """Linear normal form of the arithmetic skeleton of ``t`` only."""
    return _render(_linear(t, lambda leaf: leaf))


# ---------------------------------------------------------------------------
# The normalizer


def _avoid(*terms: Term) -> set[str]:
    out: set[str] = set()
    for t in terms:
        out |= all_names(t)
    return out


def _norm(t: Term) -> Term:
    if is_arith(t):
        return _render(_linear(t, _norm_leaf))
    match t:
        case Var() | UnitLit() | PrimFn() | Step():
            return t
        case App(f, a):
            f2, a2 = _norm(f), _norm(a)
            if isinstance(f2, Lam):
                return _norm(subst(f2.body, f2.param, a2))
            if f2 == NEG:
                return _norm(App(NEG, a2))
            return App(f2, a2)
        case Lam(x, body, ann):
            body2 = _norm(body)
            if isinstance(body2, App) and body2.arg == Var(x) and x not in free_vars(body2.fn):
                return body2.fn
            return Lam(x, body2, ann)
        case Pair(a, b):
            a2, b2 = _norm(a), _norm(b)
            if (isinstance(a2, Proj) and isinstance(b2, Proj) and a2.index == 1
                    and b2.index == 2 and a2.expr == b2.expr):
                return a2.expr
            return Pair(a2, b2)
        case Proj(i, e):
            e2 = _norm(e)
            if isinstance(e2, Pair):
                return e2.fst if i == 1 else e2.snd
            return Proj(i, e2)
        case Field(e, lab):
            e2 = _norm(e)
            if isinstance(e2, RecordLit):
                return dict(e2.fields)[lab]
            return Field(e2, lab)
        case Ifz(c, z, n):
            c2 = _norm(c)
            if isinstance(c2, IntLit):
                return _norm(z if c2.value == 0 else n)
            return Ifz(c2, _norm(z), _norm(n))
        case Map(f, m):
            x = fresh_name("x", _avoid(f, m))
            return _norm(Bind(x, m, Ret(App(f, Var(x)))))
        case Bind(x, a, b):
            return _norm_bind(x, _norm(a), b)
        case RecordLit() | Ret() | Alloc() | Get() | Set():
            return rebuild(t, [_norm(k) for k in children(t)])
    raise OutOfFragment(f"cannot normalize {show(t)}")


def _norm_leaf(t: Term) -> Term:
    return _norm(t)


def _norm_bind(x: str, a: Term, b: Term) -> Term:
    """Normalize ``x <- a; b`` where ``a`` is already normal."""
    match a:
        case Ret(v):
            return _norm(subst(b, x, v))
        case Bind(y, a1, a2):
            if y != SEQ and y in free_vars(b):
                y2 = fresh_name(y, _avoid(a2, b) | {x})
                a2 = subst(a2, y, Var(y2))
                y = y2
            return _norm_bind(y, a1, Bind(x, a2, b))
    b2 = _norm(b)
    if b2 == Ret(Var(x)) and x != SEQ:
        return a
    if x != SEQ and x not in free_vars(b2):
        x = SEQ
    return Bind(x, a, b2)
