"""Call-by-value definitional interpreter.

Pure terms evaluate to values; terms of type ``T A`` evaluate to suspended
computations (:class:`CompV`) which, given a heap, unfold into a
:class:`~refstore.guarded.Delayed` tree over ``(heap, value)`` pairs.

Step costs: ``get``, ``step`` and each application of a recursive function
cost one step; ``ret``, ``alloc``, ``set``, ``map`` and sequencing are free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from . import guarded
from .guarded import Timeout
from .store import EMPTY_HEAP, Config, Heap, alloc_cell, canonicalize, get_cell, set_cell
from .syntax import (
    INT, UNIT, Alloc, App, BinOp, Bind, Field, Get, Ifz, IntLit, Lam, Map, Pair,
    PrimFn, Prod, Proj, Rec, Record, RecordLit, Ref, Ret, Set, Step, T, Term,
    Type, UnitLit, Var, show_type,
)
from .typecheck import elaborate
from .values import (
    UNIT_V, ClosureV, CompV, IntV, LocV, PairV, PrimV, RecCallV, RecClosureV,
    RecordV, UnitV, Value, ground_value, show_value, trim_env,
)

Env = dict[str, Value]
_COMP_FORMS = (Ret, Bind, Alloc, Get, Set, Step, Map)


class EvalError(RuntimeError):
    """Raised only for ill-typed input; typechecked programs never hit it."""


class UnknownLabel(KeyError):
    pass


# ---------------------------------------------------------------------------
# Pure evaluation


def eval_pure(env: Env, t: Term) -> Value:
    match t:
        case Var(n):
            if n not in env:
                raise EvalError(f"unbound variable {n!r}")
            return env[n]
        case IntLit(n):
            return IntV(n)
        case UnitLit():
            return UNIT_V
        case PrimFn(name):
            return PrimV(name)
        case BinOp(op, a, b):
            x, y = _int(eval_pure(env, a)), _int(eval_pure(env, b))
            return IntV(x + y if op == "+" else x - y)
        case Lam(x, body, ann):
            return ClosureV(trim_env(env, body, (x,)), x, body, ann)
        case Rec(f, x, body, dom, cod):
            return RecClosureV(trim_env(env, body, (f, x)), f, x, body, dom, cod)
        case App(f, a):
            return apply(eval_pure(env, f), eval_pure(env, a))
        case Pair(a, b):
            return PairV(eval_pure(env, a), eval_pure(env, b))
        case Proj(i, e):
            v = eval_pure(env, e)
            if not isinstance(v, PairV):
                raise EvalError(f"projection from {show_value(v)}")
            return v.fst if i == 1 else v.snd
        case RecordLit(fs):
            return RecordV(tuple((lab, eval_pure(env, e)) for lab, e in fs))
        case Field(e, lab):
            v = eval_pure(env, e)
            if not isinstance(v, RecordV) or v.get(lab) is None:
                raise EvalError(f"no field {lab!r} in {show_value(v)}")
            return v.get(lab)
        case Ifz(c, z, n):
            return eval_pure(env, z if _int(eval_pure(env, c)) == 0 else n)
        case _ if isinstance(t, _COMP_FORMS):
            return CompV(trim_env(env, t), t)
    raise EvalError(f"cannot evaluate {t!r}")


def _int(v: Value) -> int:
    if not isinstance(v, IntV):
        raise EvalError(f"expected an integer, got {show_value(v)}")
    return v.n


def apply(f: Value, a: Value) -> Value:
    match f:
        case ClosureV(env, x, body):
            return eval_pure({**dict(env), x: a}, body)
        case RecClosureV():
            return RecCallV(f, a)
        case PrimV("neg"):
            return IntV(-_int(a))
    raise EvalError(f"applying non-function {show_value(f)}")


# ---------------------------------------------------------------------------
# Computations


def exec_comp(c: Value, heap: Heap) -> guarded.Delayed:
    """Unfold a computation value against ``heap`` into a delayed ``(heap, value)``."""
    match c:
        case CompV(env, term):
            return _exec(term, dict(env), heap)
        case RecCallV(fn, arg):
            env = {**dict(fn.env), fn.fn: fn, fn.param: arg}
            return guarded.later(lambda: _exec(fn.body, env, heap))
    raise EvalError(f"running a non-computation {show_value(c)}")


def _exec(t: Term, env: Env, heap: Heap) -> guarded.Delayed:
    match t:
        case Ret(e):
            return guarded.now((heap, eval_pure(env, e)))
        case Bind(x, a, b):
            return guarded.bind(
                _exec(a, env, heap),
                lambda hv: _exec(b, {**env, x: hv[1]}, hv[0]),
            )
        case Alloc(e, tag):
            v = eval_pure(env, e)
            tag = tag if tag is not None else guess_tag(v)
            heap2, loc = alloc_cell(heap, tag, v)
            return guarded.now((heap2, LocV(loc, tag)))
        case Get(r):
            ref = _loc(eval_pure(env, r))
            return guarded.fmap(lambda v: (heap, v), get_cell(heap, ref.loc, ref.tag))
        case Set(r, e):
            ref = _loc(eval_pure(env, r))
            return guarded.now((set_cell(heap, ref.loc, eval_pure(env, e), ref.tag), UNIT_V))
        case Step():
            return guarded.later(lambda: guarded.now((heap, UNIT_V)))
        case Map(f, m):
            fv = eval_pure(env, f)
            return guarded.bind(_exec(m, env, heap), lambda hv: guarded.now((hv[0], apply(fv, hv[1]))))
    return exec_comp(eval_pure(env, t), heap)


def _loc(v: Value) -> LocV:
    if not isinstance(v, LocV):
        raise EvalError(f"expected a reference, got {show_value(v)}")
    return v


def guess_tag(v: Value) -> Type:
    """Type tag of a first-order value, for allocations the checker did not tag."""
    match v:
        case IntV():
            return INT
        case UnitV():
            return UNIT
        case PairV(a, b):
            return Prod(guess_tag(a), guess_tag(b))
        case LocV(_, tag):
            return Ref(tag)
    raise EvalError(f"untagged allocation of {show_value(v)}; elaborate the term first")


def run_comp(c: Value, heap: Heap = EMPTY_HEAP, fuel: int = 256) -> Config | Timeout:
    out = guarded.run(exec_comp(c, heap), fuel)
    if isinstance(out, Timeout):
        return out
    h, v = out.value
    return Config(h, v, out.steps)


def prepare(t: Term) -> tuple[Term, Type]:
    """Typecheck a closed computation and fill in allocation tags."""
    t2, ty = elaborate(t)
    if not isinstance(ty, T):
        raise EvalError(f"expected a computation, got a term of type {show_type(ty)}")
    return t2, ty


def run_term(t: Term, fuel: int = 256, heap: Heap = EMPTY_HEAP) -> Config | Timeout:
    t2, _ = prepare(t)
    return run_comp(eval_pure({}, t2), heap, fuel)


Observation = Union[Config, Timeout]


def observe(t: Term, fuel: int = 256) -> Observation:
    """Run a closed computation from the empty heap; canonical configuration or timeout."""
    out = run_term(t, fuel)
    return out if isinstance(out, Timeout) else canonicalize(out)


def same_observation(a: Observation, b: Observation, ignore_steps: bool = False) -> bool:
    if isinstance(a, Timeout) or isinstance(b, Timeout):
        return isinstance(a, Timeout) and isinstance(b, Timeout)
    ka, kb = a.key(), b.key()
    if ignore_steps:
        ka, kb = ka[1:], kb[1:]
    return ka == kb


# ---------------------------------------------------------------------------
# Probing objects through their method interface


@dataclass(frozen=True)
class Call:
    label: str
    arg: Value | None = None

    def __str__(self) -> str:
        return self.label if self.arg is None else f"{self.label}({show_value(self.arg)})"


MethodScript = tuple[Call, ...]


@dataclass(frozen=True)
class CallResult:
    call: Call | None  # None for object construction
    result: object  # plain Python rendering of the ground result, or None on timeout
    steps: int | None
    timed_out: bool = False

    def key(self, ignore_steps: bool = False):
        return (self.result, self.timed_out) if ignore_steps else (self.result, self.steps, self.timed_out)

    def __str__(self) -> str:
        what = "<init>" if self.call is None else str(self.call)
        if self.timed_out:
            return f"{what} -> timeout"
        return f"{what} -> {self.result!r} [{self.steps} steps]"


@dataclass(frozen=True)
class ObjectState:
    obj: Value
    heap: Heap


def methods_of(obj: Value) -> dict[str, Value]:
    match obj:
        case RecordV(fs):
            return dict(fs)
        case PairV(a, b):
            return {"get": a, "set": b}
    raise EvalError(f"not an object: {show_value(obj)}")


def method_types(ty: Type) -> list[tuple[str, Type]]:
    """Method labels and types of an object type (a record, or a Cell pair)."""
    match ty:
        case Record(fs):
            return list(fs)
        case Prod(a, b):
            return [("get", a), ("set", b)]
    raise EvalError(f"not an object type: {show_type(ty)}")


def _result_of(v: Value) -> object:
    try:
        return ground_value(v)
    except TypeError:
        return show_value(v)


def construct(t: Term, fuel: int) -> tuple[CallResult, ObjectState | None]:
    """Run an object-producing computation from the empty heap."""
    t2, _ = prepare(t)
    out = guarded.run(exec_comp(eval_pure({}, t2), EMPTY_HEAP), fuel)
    if isinstance(out, Timeout):
        return CallResult(None, None, None, True), None
    heap, obj = out.value
    return CallResult(None, None, out.steps), ObjectState(obj, heap)


def call_method(state: ObjectState, call: Call, fuel: int) -> tuple[CallResult, ObjectState | None]:
    methods = methods_of(state.obj)
    if call.label not in methods:
        raise UnknownLabel(call.label)
    m = methods[call.label]
    comp = m if call.arg is None else apply(m, call.arg)
    out = guarded.run(exec_comp(comp, state.heap), fuel)
    if isinstance(out, Timeout):
        return CallResult(call, None, None, True), None
    heap, v = out.value
    return CallResult(call, _result_of(v), out.steps), ObjectState(state.obj, heap)


def probe(t: Term, script: Sequence[Call], fuel: int = 256) -> list[CallResult]:
    """Construct the object, then thread the heap through ``script``.

    The first entry describes construction.  The trace stops at the first
    timeout.  The final heap is deliberately not part of the result.
    """
    first, state = construct(t, fuel)
    trace = [first]
    for call in script:
        if state is None:
            break
        res, state = call_method(state, call, fuel)
        trace.append(res)
    return trace

