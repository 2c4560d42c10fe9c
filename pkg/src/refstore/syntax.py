"""Abstract syntax, concrete grammar, printer, substitution and alpha-equivalence.

Concrete syntax, by example::

    def posCounter =
      l <- alloc 0;
      ret {incr -> i <- get l; set l (i + 1), read -> get l}

``e; e'`` abbreviates ``_ <- e; e'``.  Lambda, ``rec`` and ``ifz`` bodies
extend as far to the right as possible.  Comments start with ``--``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class Int:
    pass


@dataclass(frozen=True)
class Fn:
    dom: Type
    cod: Type


@dataclass(frozen=True)
class Prod:
    fst: Type
    snd: Type


@dataclass(frozen=True)
class Record:
    fields: tuple[tuple[str, Type], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.fields]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate record label in {labels}")

    def get(self, label: str) -> Type | None:
        for lab, ty in self.fields:
            if lab == label:
                return ty
        return None


@dataclass(frozen=True)
class T:
    body: Type


@dataclass(frozen=True)
class Ref:
    body: Type


Type = Union[Unit, Int, Fn, Prod, Record, T, Ref]

UNIT = Unit()
INT = Int()


def Cell(sigma: Type) -> Type:
    """The read/write interface ``T s * (s -> T Unit)`` of a reference cell."""
    return Prod(T(sigma), Fn(sigma, T(UNIT)))


def is_ground(ty: Type) -> bool:
    match ty:
        case Unit() | Int():
            return True
        case Prod(a, b):
            return is_ground(a) and is_ground(b)
        case Ref(body):
            return is_ground(body)
        case _:
            return False


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    param: str
    body: Term
    ann: Type | None = None


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Pair:
    fst: Term
    snd: Term


@dataclass(frozen=True)
class Proj:
    index: int  # 1 or 2
    expr: Term


@dataclass(frozen=True)
class RecordLit:
    fields: tuple[tuple[str, Term], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.fields]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate record label in {labels}")


@dataclass(frozen=True)
class Field:
    expr: Term
    label: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" or "-"
    left: Term
    right: Term


@dataclass(frozen=True)
class PrimFn:
    name: str  # only "neg"


@dataclass(frozen=True)
class UnitLit:
    pass


@dataclass(frozen=True)
class Ret:
    expr: Term


@dataclass(frozen=True)
class Bind:
    var: str
    first: Term
    rest: Term


@dataclass(frozen=True)
class Alloc:
    expr: Term
    # filled in by the typechecker; not part of the surface syntax
    tag: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Get:
    ref: Term


@dataclass(frozen=True)
class Set:
    ref: Term
    value: Term


@dataclass(frozen=True)
class Step:
    pass


@dataclass(frozen=True)
class Rec:
    fn: str
    param: str
    body: Term
    dom: Type | None = None
    cod: Type | None = None  # type of the body, a T-type


@dataclass(frozen=True)
class Map:
    fn: Term
    comp: Term


@dataclass(frozen=True)
class Ifz:
    cond: Term
    zero: Term
    nonzero: Term


Term = Union[
    Var, Lam, App, Pair, Proj, RecordLit, Field, IntLit, BinOp, PrimFn, UnitLit,
    Ret, Bind, Alloc, Get, Set, Step, Rec, Map, Ifz,
]

NEG = PrimFn("neg")
SEQ = "_"  # binder name used by `e; e'`

Path = tuple[int, ...]


# ---------------------------------------------------------------------------
# Generic traversal


def children(t: Term) -> tuple[Term, ...]:
    match t:
        case Lam(_, body, _):
            return (body,)
        case App(f, a):
            return (f, a)
        case Pair(a, b):
            return (a, b)
        case Proj(_, e) | Field(e, _) | Ret(e) | Alloc(e) | Get(e):
            return (e,)
        case RecordLit(fs):
            return tuple(e for _, e in fs)
        case BinOp(_, a, b):
            return (a, b)
        case Bind(_, a, b):
            return (a, b)
        case Set(r, v):
            return (r, v)
        case Rec(_, _, body, _, _):
            return (body,)
        case Map(f, m):
            return (f, m)
        case Ifz(c, z, n):
            return (c, z, n)
        case _:
            return ()


def rebuild(t: Term, kids: tuple[Term, ...] | list[Term]) -> Term:
    kids = tuple(kids)
    match t:
        case Lam(x, _, ann):
            return Lam(x, kids[0], ann)
        case App():
            return App(*kids)
        case Pair():
            return Pair(*kids)
        case Proj(i, _):
            return Proj(i, kids[0])
        case Field(_, lab):
            return Field(kids[0], lab)
        case Ret():
            return Ret(kids[0])
        case Alloc(_, tag):
            return Alloc(kids[0], tag)
        case Get():
            return Get(kids[0])
        case RecordLit(fs):
            return RecordLit(tuple((lab, k) for (lab, _), k in zip(fs, kids)))
        case BinOp(op, _, _):
            return BinOp(op, *kids)
        case Bind(x, _, _):
            return Bind(x, *kids)
        case Set():
            return Set(*kids)
        case Rec(f, x, _, dom, cod):
            return Rec(f, x, kids[0], dom, cod)
        case Map():
            return Map(*kids)
        case Ifz():
            return Ifz(*kids)
        case _:
            return t


def bound_in_child(t: Term, i: int) -> tuple[str, ...]:
    """Names bound by ``t`` in its ``i``-th child."""
    match t:
        case Lam(x, _, _):
            return (x,)
        case Bind(x, _, _) if i == 1:
            return (x,)
        case Rec(f, x, _, _, _):
            return (f, x)
        case _:
            return ()


# Terms are immutable, so free variables are cached per node.  Entries keep
# their node alive, which rules out stale ids; the cache is simply dropped
# when it grows large.
_FV_CACHE: dict[int, tuple[Term, frozenset[str]]] = {}
_FV_CACHE_LIMIT = 200_000


def free_vars(t: Term) -> frozenset[str]:
    hit = _FV_CACHE.get(id(t))
    if hit is not None and hit[0] is t:
        return hit[1]
    if isinstance(t, Var):
        fv = frozenset((t.name,))
    else:
        out: set[str] = set()
        for i, k in enumerate(children(t)):
            out |= free_vars(k) - set(bound_in_child(t, i))
        fv = frozenset(out)
    if len(_FV_CACHE) >= _FV_CACHE_LIMIT:
        _FV_CACHE.clear()
    _FV_CACHE[id(t)] = (t, fv)
    return fv


def all_names(t: Term) -> set[str]:
    """Every variable name occurring in ``t``, bound or free."""
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        match u:
            case Var(n):
                out.add(n)
            case Lam(x, _, _) | Bind(x, _, _):
                out.add(x)
            case Rec(f, x, _, _, _):
                out.update((f, x))
        stack.extend(children(u))
    return out


def size(t: Term) -> int:
    return 1 + sum(size(k) for k in children(t))


def subterms(t: Term, path: Path = ()) -> Iterator[tuple[Path, Term]]:
    """Pre-order enumeration of ``(path, subterm)`` pairs."""
    yield path, t
    for i, k in enumerate(children(t)):
        yield from subterms(k, path + (i,))


class PathError(LookupError):
    pass


def subterm_at(t: Term, path: Path) -> Term:
    for depth, i in enumerate(path):
        kids = children(t)
        if not 0 <= i < len(kids):
            raise PathError(f"path {list(path)} invalid at depth {depth}")
        t = kids[i]
    return t


def replace_at(t: Term, path: Path, new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    i = path[0]
    if not 0 <= i < len(kids):
        raise PathError(f"path index {i} out of range")
    kids[i] = replace_at(kids[i], path[1:], new)
    return rebuild(t, kids)


def binders_along(t: Term, path: Path) -> list[str]:
    """Names bound between the root and the subterm at ``path``, outermost first."""
    out: list[str] = []
    for i in path:
        out.extend(bound_in_child(t, i))
        t = children(t)[i]
    return out


# ---------------------------------------------------------------------------
# Fresh names and substitution

_SUFFIX = re.compile(r"^(.*?)(\d+)$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base == SEQ:
        base = "x"
    m = _SUFFIX.match(base)
    stem = m.group(1) if m and m.group(1) else base
    if base not in avoid:
        return base
    n = 1
    while f"{stem}{n}" in avoid:
        n += 1
    return f"{stem}{n}"


def subst_many(t: Term, sub: dict[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    if not sub:
        return t
    if isinstance(t, Var):
        return sub.get(t.name, t)
    kids = children(t)
    if not kids:
        return t
    binds_any = any(bound_in_child(t, i) for i in range(len(kids)))
    if not binds_any:
        return rebuild(t, [subst_many(k, sub) for k in kids])

    # binder node: rename binders that would capture free variables of the
    # substituted terms
    match t:
        case Bind(x, a, b):
            a2 = subst_many(a, sub)
            x2, b2 = _under_binders((x,), b, sub)
            return Bind(x2[0], a2, b2)
        case Lam(x, body, ann):
            x2, body2 = _under_binders((x,), body, sub)
            return Lam(x2[0], body2, ann)
        case Rec(f, x, body, dom, cod):
            (f2, x2), body2 = _under_binders((f, x), body, sub)
            return Rec(f2, x2, body2, dom, cod)
    raise AssertionError(t)


def _under_binders(names: tuple[str, ...], body: Term, sub: dict[str, Term]):
    inner = {k: v for k, v in sub.items() if k not in names}
    inner = {k: v for k, v in inner.items() if k in free_vars(body)}
    if not inner:
        return names, body
    danger: set[str] = set()
    for v in inner.values():
        danger |= free_vars(v)
    new_names = []
    rename: dict[str, Term] = {}
    avoid = danger | free_vars(body) | set(inner) | set(names)
    for n in names:
        if n in danger and n != SEQ:
            n2 = fresh_name(n, avoid)
            avoid.add(n2)
            rename[n] = Var(n2)
            new_names.append(n2)
        else:
            new_names.append(n)
    if rename:
        body = subst_many(body, rename)
    return tuple(new_names), subst_many(body, inner)


def subst(t: Term, x: str, s: Term) -> Term:
    return subst_many(t, {x: s})


def rename_free(t: Term, old: str, new: str) -> Term:
    return subst_many(t, {old: Var(new)})


# ---------------------------------------------------------------------------
# Alpha-equivalence


def alpha_key(t: Term, scope: tuple[str, ...] = ()) -> tuple:
    """A hashable key equal for exactly the alpha-equivalent terms.

    Bound variables become de Bruijn indices; annotations are kept.
    """
    match t:
        case Var(n):
            for depth, m in enumerate(reversed(scope)):
                if m == n:
                    return ("b", depth)
            return ("f", n)
        case Lam(x, body, ann):
            return ("lam", ann, alpha_key(body, scope + (x,)))
        case Bind(x, a, b):
            return ("bind", alpha_key(a, scope), alpha_key(b, scope + (x,)))
        case Rec(f, x, body, dom, cod):
            return ("rec", dom, cod, alpha_key(body, scope + (f, x)))
        case IntLit(n):
            return ("int", n)
        case BinOp(op, a, b):
            return ("op", op, alpha_key(a, scope), alpha_key(b, scope))
        case PrimFn(n):
            return ("prim", n)
        case Proj(i, e):
            return ("proj", i, alpha_key(e, scope))
        case Field(e, lab):
            return ("field", lab, alpha_key(e, scope))
        case RecordLit(fs):
            return ("record",) + tuple((lab, alpha_key(e, scope)) for lab, e in fs)
        case _:
            return (type(t).__name__,) + tuple(alpha_key(k, scope) for k in children(t))


def alpha_eq(a: Term, b: Term) -> bool:
    return alpha_key(a) == alpha_key(b)


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {
    "ret", "alloc", "get", "set", "step", "rec", "map", "fst", "snd",
    "neg", "ifz", "then", "else", "def",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym><-|->|[\\λ.;,(){}:+\-*=\[\]])
    """,
    re.VERBOSE,
)


class ParseError(SyntaxError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg_text = msg
        self.line_no = line
        self.col_no = col


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, kw, sym, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        col = pos - line_start + 1
        if kind == "ident" and s in KEYWORDS:
            kind = "kw"
        if kind == "sym" and s == "λ":
            s = "\\"
        if kind != "ws":
            toks.append(Token(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Parser

_CLOSERS = {")": "(", "}": "{", "]": "["}


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self._check_balance()

    def _check_balance(self):
        stack: list[Token] = []
        for tok in self.toks:
            if tok.kind != "sym":
                continue
            if tok.text in "({[":
                stack.append(tok)
            elif tok.text in _CLOSERS:
                if not stack or stack[-1].text != _CLOSERS[tok.text]:
                    raise ParseError(f"unbalanced {tok.text!r}", tok.line, tok.col)
                stack.pop()
        if stack:
            tok = stack[-1]
            raise ParseError(f"unclosed {tok.text!r}", tok.line, tok.col)

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("sym", "kw")

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "ident":
            if self.tok.kind == "kw":
                self.error(f"unexpected keyword {self.tok.text!r}")
            self.error(f"expected identifier, found {self.describe(self.tok)}")
        return self.advance().text

    def error(self, msg: str):
        raise ParseError(msg, self.tok.line, self.tok.col)

    @staticmethod
    def describe(tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    # -- types
    def type_(self) -> Type:
        left = self.prod_type()
        if self.at("->"):
            self.advance()
            return Fn(left, self.type_())
        return left

    def prod_type(self) -> Type:
        left = self.type_app()
        while self.at("*"):
            self.advance()
            left = Prod(left, self.type_app())
        return left

    def type_app(self) -> Type:
        if self.tok.kind == "ident" and self.tok.text in ("T", "Ref", "Cell"):
            head = self.advance().text
            arg = self.type_app()
            return {"T": T, "Ref": Ref, "Cell": Cell}[head](arg)
        return self.type_atom()

    def type_atom(self) -> Type:
        tok = self.tok
        if tok.kind == "ident" and tok.text == "Unit":
            self.advance()
            return UNIT
        if tok.kind == "ident" and tok.text == "Int":
            self.advance()
            return INT
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return UNIT
            ty = self.type_()
            self.expect(")")
            return ty
        if self.at("{"):
            self.advance()
            fields: list[tuple[str, Type]] = []
            while not self.at("}"):
                lab_tok = self.tok
                lab = self.ident()
                if any(lab == f for f, _ in fields):
                    raise ParseError(f"duplicate record label {lab!r}", lab_tok.line, lab_tok.col)
                self.expect(":")
                fields.append((lab, self.type_()))
                if not self.at("}"):
                    self.expect(",")
            self.advance()
            return Record(tuple(fields))
        self.error(f"expected a type, found {self.describe(tok)}")

    # -- terms
    def term(self) -> Term:
        if self.tok.kind == "ident" and self.peek().text == "<-":
            x = self.advance().text
            self.advance()
            first = self.expr()
            self.expect(";")
            return Bind(x, first, self.term())
        e = self.expr()
        if self.at(";"):
            self.advance()
            return Bind(SEQ, e, self.term())
        return e

    def binder(self) -> tuple[str, Type | None]:
        if self.at("("):
            self.advance()
            x = self.ident()
            self.expect(":")
            ty = self.type_()
            self.expect(")")
            return x, ty
        return self.ident(), None

    def expr(self) -> Term:
        if self.at("\\"):
            self.advance()
            x, ann = self.binder()
            self.expect(".")
            return Lam(x, self.term(), ann)
        if self.at("rec"):
            self.advance()
            f = self.ident()
            x, dom = self.binder()
            cod = None
            if self.at(":"):
                self.advance()
                cod = self.type_()
            self.expect(".")
            return Rec(f, x, self.term(), dom, cod)
        if self.at("ifz"):
            self.advance()
            c = self.arith()
            self.expect("then")
            z = self.term()
            self.expect("else")
            return Ifz(c, z, self.term())
        return self.arith()

    def arith(self) -> Term:
        left = self.app()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = BinOp(op, left, self.app())
        return left

    def starts_atom(self) -> bool:
        tok = self.tok
        if tok.kind in ("int", "ident"):
            return True
        return tok.text in ("(", "{", "step", "neg") and tok.kind in ("sym", "kw")

    def app(self) -> Term:
        tok = self.tok
        unary = {"ret": Ret, "alloc": Alloc, "get": Get}
        if tok.kind == "kw" and tok.text in unary:
            self.advance()
            head = unary[tok.text](self.arg())
        elif tok.kind == "kw" and tok.text in ("fst", "snd"):
            self.advance()
            head = Proj(1 if tok.text == "fst" else 2, self.arg())
        elif tok.kind == "kw" and tok.text in ("set", "map"):
            self.advance()
            a = self.arg()
            b = self.arg()
            head = Set(a, b) if tok.text == "set" else Map(a, b)
        else:
            head = self.arg()
        while self.starts_atom():
            head = App(head, self.arg())
        return head

    def arg(self) -> Term:
        e = self.atom()
        while self.at(".") and self.peek().kind == "ident":
            self.advance()
            e = Field(e, self.advance().text)
        return e

    def atom(self) -> Term:
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text))
        if self.at("-") and self.peek().kind == "int":
            self.advance()
            return IntLit(-int(self.advance().text))
        if tok.kind == "ident":
            if tok.text == SEQ:
                self.error("'_' cannot be used as a variable")
            self.advance()
            return Var(tok.text)
        if self.at("step"):
            self.advance()
            return Step()
        if self.at("neg"):
            self.advance()
            return NEG
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return UnitLit()
            a = self.term()
            if self.at(","):
                self.advance()
                b = self.term()
                self.expect(")")
                return Pair(a, b)
            self.expect(")")
            return a
        if self.at("{"):
            self.advance()
            fields: list[tuple[str, Term]] = []
            while not self.at("}"):
                lab_tok = self.tok
                lab = self.ident()
                if any(lab == f for f, _ in fields):
                    raise ParseError(f"duplicate record label {lab!r}", lab_tok.line, lab_tok.col)
                self.expect("->")
                fields.append((lab, self.term()))
                if not self.at("}"):
                    self.expect(",")
            self.advance()
            return RecordLit(tuple(fields))
        if tok.kind == "kw":
            self.error(f"unexpected keyword {tok.text!r}")
        self.error(f"unexpected {self.describe(tok)}")

    def done(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.describe(self.tok)} after end of term")


def parse(text: str) -> Term:
    p = Parser(text)
    t = p.term()
    p.done()
    return t


def parse_type(text: str) -> Type:
    p = Parser(text)
    ty = p.type_()
    p.done()
    return ty


def parse_program(text: str) -> dict[str, Term]:
    """Parse a source file into named, closed-over-earlier-definitions terms.

    A file holding a bare term yields ``{"main": term}``.  Later definitions
    may mention earlier ones; those references are inlined.
    """
    p = Parser(text)
    if not p.at("def"):
        t = p.term()
        p.done()
        return {"main": t}
    defs: dict[str, Term] = {}
    while p.at("def"):
        p.advance()
        name_tok = p.tok
        name = p.ident()
        if name in defs:
            raise ParseError(f"duplicate definition {name!r}", name_tok.line, name_tok.col)
        p.expect("=")
        body = p.term()
        used = {n: defs[n] for n in free_vars(body) if n in defs}
        defs[name] = subst_many(body, used)
    p.done()
    return defs


# ---------------------------------------------------------------------------
# Printer


def show_type(ty: Type) -> str:
    return _ty(ty, 0)


def _ty(ty: Type, prec: int) -> str:
    # prec 0: arrow ok; 1: product operand; 2: argument of T/Ref
    match ty:
        case Unit():
            return "Unit"
        case Int():
            return "Int"
        case Record(fs):
            return "{" + ", ".join(f"{lab} : {_ty(t, 0)}" for lab, t in fs) + "}"
        case Fn(a, b):
            s = f"{_ty(a, 1)} -> {_ty(b, 0)}"
            return f"({s})" if prec > 0 else s
        case Prod(a, b):
            s = f"{_ty(a, 1)} * {_ty(b, 2)}"
            return f"({s})" if prec > 1 else s
        case T(b):
            s = f"T {_ty(b, 2)}"
            return f"({s})" if prec > 2 else s
        case Ref(b):
            s = f"Ref {_ty(b, 2)}"
            return f"({s})" if prec > 2 else s
    raise TypeError(f"not a type: {ty!r}")


# printing contexts, loosest first
_TERM, _EXPR, _SUM, _APP, _ARG = range(5)


def show(t: Term) -> str:
    return _pr(t, _TERM)


def _wrap(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _binder(x: str, ann: Type | None) -> str:
    return f"({x} : {show_type(ann)})" if ann is not None else x


def _pr(t: Term, ctx: int) -> str:
    match t:
        case Var(n):
            return n
        case IntLit(n):
            return f"(-{-n})" if n < 0 else str(n)
        case UnitLit():
            return "()"
        case Step():
            return "step"
        case PrimFn(n):
            return n
        case Pair(a, b):
            return f"({_pr(a, _TERM)}, {_pr(b, _TERM)})"
        case RecordLit(fs):
            return "{" + ", ".join(f"{lab} -> {_pr(e, _TERM)}" for lab, e in fs) + "}"
        case Field(e, lab):
            return f"{_pr(e, _ARG)}.{lab}"
        case Bind(x, a, b):
            head = f"{_pr(a, _EXPR)}; " if x == SEQ or x not in free_vars(b) else f"{x} <- {_pr(a, _EXPR)}; "
            return _wrap(head + _pr(b, _TERM), ctx > _TERM)
        case Lam(x, body, ann):
            return _wrap(f"\\{_binder(x, ann)}. {_pr(body, _TERM)}", ctx > _TERM)
        case Rec(f, x, body, dom, cod):
            c = f" : {show_type(cod)}" if cod is not None else ""
            return _wrap(f"rec {f} {_binder(x, dom)}{c}. {_pr(body, _TERM)}", ctx > _TERM)
        case Ifz(c, z, n):
            s = f"ifz {_pr(c, _SUM)} then {_pr(z, _TERM)} else {_pr(n, _TERM)}"
            return _wrap(s, ctx > _TERM)
        case BinOp(op, a, b):
            return _wrap(f"{_pr(a, _SUM)} {op} {_pr(b, _APP)}", ctx > _SUM)
        case App(f, a):
            return _wrap(f"{_pr(f, _APP)} {_pr(a, _ARG)}", ctx > _APP)
        case Proj(i, e):
            return _wrap(f"{'fst' if i == 1 else 'snd'} {_pr(e, _ARG)}", ctx > _APP)
        case Ret(e):
            return _wrap(f"ret {_pr(e, _ARG)}", ctx > _APP)
        case Alloc(e, _):
            return _wrap(f"alloc {_pr(e, _ARG)}", ctx > _APP)
        case Get(e):
            return _wrap(f"get {_pr(e, _ARG)}", ctx > _APP)
        case Set(r, v):
            return _wrap(f"set {_pr(r, _ARG)} {_pr(v, _ARG)}", ctx > _APP)
        case Map(f, m):
            return _wrap(f"map {_pr(f, _ARG)} {_pr(m, _ARG)}", ctx > _APP)
    raise TypeError(f"not a term: {t!r}")
