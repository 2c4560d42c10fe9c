"""Runtime values of the interpreter."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .syntax import (
    Lam, Prod, Rec, Record, Ref, Term, Type, Unit, Int, alpha_key, free_vars,
    show, show_type,
)


@dataclass(frozen=True)
class IntV:
    n: int


@dataclass(frozen=True)
class UnitV:
    pass


@dataclass(frozen=True)
class PairV:
    fst: Value
    snd: Value


@dataclass(frozen=True)
class RecordV:
    fields: tuple[tuple[str, Value], ...]

    def get(self, label: str) -> Value | None:
        for lab, v in self.fields:
            if lab == label:
                return v
        return None


@dataclass(frozen=True)
class LocV:
    loc: int
    tag: Type


# Environments are name-sorted tuples, trimmed to the free variables of the
# code they close over.
Env = tuple[tuple[str, "Value"], ...]


@dataclass(frozen=True)
class ClosureV:
    env: Env
    param: str
    body: Term
    ann: Type | None = None


@dataclass(frozen=True)
class RecClosureV:
    env: Env
    fn: str
    param: str
    body: Term
    dom: Type | None = None
    cod: Type | None = None


@dataclass(frozen=True)
class PrimV:
    name: str


@dataclass(frozen=True)
class CompV:
    """A suspended computation: run it against a heap to get a result."""
    env: Env
    term: Term


@dataclass(frozen=True)
class RecCallV:
    """``(rec f x. e) v`` as a suspended computation."""
    fn: RecClosureV
    arg: Value


Value = Union[IntV, UnitV, PairV, RecordV, LocV, ClosureV, RecClosureV, PrimV, CompV, RecCallV]

UNIT_V = UnitV()


def make_env(env: dict[str, Value], names) -> Env:
    return tuple(sorted((n, env[n]) for n in names if n in env))


def closure_term(v: ClosureV | RecClosureV) -> Term:
    if isinstance(v, ClosureV):
        return Lam(v.param, v.body, v.ann)
    return Rec(v.fn, v.param, v.body, v.dom, v.cod)


def value_locs(v: Value) -> Iterator[int]:
    """Locations mentioned directly by ``v``, left to right."""
    match v:
        case LocV(loc, _):
            yield loc
        case PairV(a, b):
            yield from value_locs(a)
            yield from value_locs(b)
        case RecordV(fs):
            for _, x in fs:
                yield from value_locs(x)
        case ClosureV(env) | RecClosureV(env) | CompV(env):
            for _, x in env:
                yield from value_locs(x)
        case RecCallV(fn, arg):
            yield from value_locs(fn)
            yield from value_locs(arg)


def rename_locs(v: Value, m: dict[int, int]) -> Value:
    match v:
        case LocV(loc, tag):
            return LocV(m[loc], tag)
        case PairV(a, b):
            return PairV(rename_locs(a, m), rename_locs(b, m))
        case RecordV(fs):
            return RecordV(tuple((lab, rename_locs(x, m)) for lab, x in fs))
        case ClosureV(env, p, body, ann):
            return ClosureV(_rename_env(env, m), p, body, ann)
        case RecClosureV(env, f, p, body, dom, cod):
            return RecClosureV(_rename_env(env, m), f, p, body, dom, cod)
        case CompV(env, term):
            return CompV(_rename_env(env, m), term)
        case RecCallV(fn, arg):
            return RecCallV(rename_locs(fn, m), rename_locs(arg, m))
    return v


def _rename_env(env: Env, m: dict[int, int]) -> Env:
    return tuple((n, rename_locs(x, m)) for n, x in env)


def value_key(v: Value) -> tuple:
    """Structural key; code is compared up to alpha-equivalence."""
    match v:
        case IntV(n):
            return ("int", n)
        case UnitV():
            return ("unit",)
        case PairV(a, b):
            return ("pair", value_key(a), value_key(b))
        case RecordV(fs):
            return ("record",) + tuple((lab, value_key(x)) for lab, x in fs)
        case LocV(loc, tag):
            return ("loc", loc, show_type(tag))
        case ClosureV(env) | RecClosureV(env):
            return ("fun", repr(alpha_key(closure_term(v))), _env_key(env))
        case PrimV(name):
            return ("prim", name)
        case CompV(env, term):
            return ("comp", repr(alpha_key(term)), _env_key(env))
        case RecCallV(fn, arg):
            return ("call", value_key(fn), value_key(arg))
    raise TypeError(f"not a value: {v!r}")


def _env_key(env: Env) -> tuple:
    return tuple((n, value_key(x)) for n, x in env)


def show_value(v: Value) -> str:
    match v:
        case IntV(n):
            return str(n)
        case UnitV():
            return "()"
        case PairV(a, b):
            return f"({show_value(a)}, {show_value(b)})"
        case RecordV(fs):
            return "{" + ", ".join(f"{lab} = {show_value(x)}" for lab, x in fs) + "}"
        case LocV(loc, tag):
            return f"#{loc}"
        case ClosureV() | RecClosureV():
            return f"<fun {show(closure_term(v))}{_show_env(v.env)}>"
        case PrimV(name):
            return name
        case CompV(env, term):
            return f"<comp {show(term)}{_show_env(env)}>"
        case RecCallV(fn, arg):
            return f"<call {show_value(fn)} {show_value(arg)}>"
    raise TypeError(f"not a value: {v!r}")


def _show_env(env: Env) -> str:
    if not env:
        return ""
    return " | " + ", ".join(f"{n} = {show_value(x)}" for n, x in env)


def ground_value(v: Value):
    """Plain Python rendering of a first-order value (ints, (), tuples)."""
    match v:
        case IntV(n):
            return n
        case UnitV():
            return ()
        case PairV(a, b):
            return (ground_value(a), ground_value(b))
    raise TypeError(f"not a first-order value: {show_value(v)}")


def value_has_type(v: Value, ty: Type) -> bool:
    """Shallow dynamic type check; code values are accepted at any type."""
    match v, ty:
        case IntV(), Int():
            return True
        case UnitV(), Unit():
            return True
        case PairV(a, b), Prod(ta, tb):
            return value_has_type(a, ta) and value_has_type(b, tb)
        case RecordV(fs), Record(tfs):
            return [lab for lab, _ in fs] == [lab for lab, _ in tfs] and all(
                value_has_type(x, t) for (_, x), (_, t) in zip(fs, tfs)
            )
        case LocV(_, tag), Ref(body):
            return tag == body
        case (ClosureV() | RecClosureV() | PrimV() | CompV() | RecCallV()), _:
            return True
    return False


def trim_env(env: dict[str, Value], term: Term, bound=()) -> Env:
    return make_env(env, free_vars(term) - set(bound))
