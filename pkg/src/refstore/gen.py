"""Seeded random generators: types, well-typed programs, configurations, delayed trees.

Every generator draws from an explicit ``random.Random`` so that a case is
reproducible from its seed alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable

from . import guarded
from .store import Config, Heap
from .syntax import (
    INT, NEG, SEQ, UNIT, Alloc, App, BinOp, Bind, Field, Fn, Get, Ifz, IntLit,
    Int, Lam, Map, Pair, Prod, Proj, Rec, RecordLit, Ref, Ret, Set, Step, T,
    Term, Type, Unit, UnitLit, Var,
)
from .values import ClosureV, IntV, LocV, PairV, UNIT_V, Value

Context = dict[str, Type]


@dataclass(frozen=True)
class GenConfig:
    depth: int = 3
    int_range: int = 4
    max_cells: int = 3
    max_locations: int = 4


class Gen:
    """Random well-typed terms over a typing context."""

    def __init__(self, seed: int | random.Random = 0, config: GenConfig = GenConfig()):
        self.rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        self.cfg = config
        self._names = 0

    def fresh(self, base: str) -> str:
        self._names += 1
        return f"{base}{self._names}"

    def literal(self) -> IntLit:
        r = self.cfg.int_range
        return IntLit(self.rng.randint(-r, r))

    # -- types

    def ground_type(self, depth: int = 1) -> Type:
        r = self.rng.random()
        if depth > 0 and r < 0.2:
            return Prod(self.ground_type(depth - 1), self.ground_type(depth - 1))
        return UNIT if r < 0.35 else INT

    def cell_type(self) -> Type:
        return INT if self.rng.random() < 0.6 else self.ground_type()

    # -- pure terms

    def pure(self, ctx: Context, ty: Type, depth: int | None = None) -> Term:
        depth = self.cfg.depth if depth is None else depth
        rng = self.rng
        same = sorted(n for n, t in ctx.items() if t == ty)
        if same and (rng.random() < 0.4 or isinstance(ty, Ref)):
            return Var(rng.choice(same))
        match ty:
            case Int():
                if depth <= 0:
                    return self.literal()
                k = rng.randrange(8)
                if k <= 1:
                    return self.literal()
                if k == 2:
                    return BinOp(rng.choice("+-"), self.pure(ctx, INT, depth - 1), self.pure(ctx, INT, depth - 1))
                if k == 3:
                    return App(NEG, self.pure(ctx, INT, depth - 1))
                if k == 4:
                    return Ifz(self.pure(ctx, INT, depth - 1), self.pure(ctx, INT, depth - 1),
                               self.pure(ctx, INT, depth - 1))
                if k == 5:
                    x = self.fresh("x")
                    return App(Lam(x, self.pure({**ctx, x: INT}, INT, depth - 1), INT), self.pure(ctx, INT, depth - 1))
                if k == 6:
                    return Field(RecordLit((("a", self.pure(ctx, INT, depth - 1)), ("b", self.pure(ctx, INT, depth - 1)))),
                                 rng.choice("ab"))
                return Proj(1, Pair(self.pure(ctx, INT, depth - 1), UnitLit()))
            case Unit():
                return UnitLit() if depth <= 0 or rng.random() < 0.7 else Proj(2, Pair(self.pure(ctx, INT, 0), UnitLit()))
            case Prod(a, b):
                return Pair(self.pure(ctx, a, depth - 1), self.pure(ctx, b, depth - 1))
            case Fn(dom, cod):
                x = self.fresh("x")
                return Lam(x, self.pure({**ctx, x: dom}, cod, depth - 1), dom)
            case T(body):
                return self.comp(ctx, body, depth)
            case Ref():
                raise LookupError(f"no variable of reference type in scope")
        raise TypeError(ty)

    # -- computations

    def refs(self, ctx: Context) -> list[tuple[str, Type]]:
        return sorted((n, t.body) for n, t in ctx.items() if isinstance(t, Ref))

    def comp(self, ctx: Context, ty: Type, depth: int | None = None, rec: bool = False) -> Term:
        """A computation of type ``T ty``; ``rec`` allows recursive-function redexes."""
        depth = self.cfg.depth if depth is None else depth
        rng = self.rng
        refs = self.refs(ctx)
        readable = [n for n, s in refs if s == ty]
        choices = []
        if not isinstance(ty, Ref) or any(t == ty for t in ctx.values()):
            choices.append("ret")
        if readable:
            choices += ["get", "get"]
        if isinstance(ty, Ref) and self._can_build(ctx, ty.body):
            choices += ["alloc", "alloc"]
        if ty == UNIT and refs:
            choices.append("set-only")
        if ty == UNIT:
            choices.append("step-only")
        if depth > 0:
            choices += ["bind", "bind", "step", "map", "ifz", "beta"]
            if refs:
                choices += ["set", "set"]
            if rec:
                choices.append("rec")
        if not choices:
            raise LookupError(f"cannot build a computation of type T {ty}")
        d = depth - 1
        match rng.choice(choices):
            case "ret":
                return Ret(self.pure(ctx, ty, max(d, 0)))
            case "get":
                return Get(Var(rng.choice(readable)))
            case "alloc":
                return Alloc(self.pure(ctx, ty.body, max(d, 0)))
            case "set-only":
                n, s = rng.choice(refs)
                return Set(Var(n), self.pure(ctx, s, max(d, 0)))
            case "step-only":
                return Step()
            case "set":
                n, s = rng.choice(refs)
                return Bind(SEQ, Set(Var(n), self.pure(ctx, s, d)), self.comp(ctx, ty, d, rec))
            case "step":
                return Bind(SEQ, Step(), self.comp(ctx, ty, d, rec))
            case "bind":
                sigma = self.bind_type(ctx)
                x = self.fresh("v")
                return Bind(x, self.comp(ctx, sigma, d, rec), self.comp({**ctx, x: sigma}, ty, d, rec))
            case "map":
                sigma = self.ground_type()
                x = self.fresh("y")
                if isinstance(ty, Ref) and not any(t == ty for t in ctx.values()):
                    return self.comp(ctx, ty, d, rec)
                return Map(Lam(x, self.pure({**ctx, x: sigma}, ty, d), sigma), self.comp(ctx, sigma, d, rec))
            case "ifz":
                return Ifz(self.pure(ctx, INT, d), self.comp(ctx, ty, d, rec), self.comp(ctx, ty, d, rec))
            case "beta":
                sigma = self.ground_type()
                x = self.fresh("z")
                return App(Lam(x, self.comp({**ctx, x: sigma}, ty, d, rec), sigma), self.pure(ctx, sigma, d))
            case "rec":
                return self.rec_redex(ctx, ty, d)
        raise AssertionError

    def _can_build(self, ctx: Context, ty: Type) -> bool:
        if isinstance(ty, Ref):
            return any(t == ty for t in ctx.values())
        return True

    def bind_type(self, ctx: Context) -> Type:
        r = self.rng.random()
        if r < 0.35:
            return Ref(self.cell_type())
        refs = self.refs(ctx)
        if refs and r < 0.5:
            return Ref(self.rng.choice(refs)[1])
        return self.ground_type()

    def rec_redex(self, ctx: Context, ty: Type, depth: int) -> Term:
        """``(rec f (x : Int) : T ty. body) n`` counting down from a small ``n``."""
        f, x = self.fresh("f"), self.fresh("n")
        inner = {**ctx, x: INT}
        base = self.comp(inner, ty, max(depth - 1, 0))
        if self.rng.random() < 0.75:
            effect = self.comp(inner, UNIT, 1)
            again = App(Var(f), BinOp("-", Var(x), IntLit(1)))
            body = Ifz(Var(x), base, Bind(SEQ, effect, again))
        else:
            body = base
        return App(Rec(f, x, body, INT, T(ty)), IntLit(self.rng.randint(0, 3)))

    # -- program scaffolding

    def cells(self, n: int | None = None) -> tuple[list[tuple[str, Term]], Context]:
        """A prefix of allocations ``r1 <- alloc e1; ...`` and the context it creates."""
        n = self.rng.randint(1, self.cfg.max_cells) if n is None else n
        prefix, ctx = [], {}
        for _ in range(n):
            refs = self.refs(ctx)
            if refs and self.rng.random() < 0.2:
                target = self.rng.choice(refs)[0]
                ty = ctx[target]
                init: Term = Var(target)
            else:
                ty = self.cell_type()
                init = self.pure({}, ty, 1)
            r = self.fresh("r")
            prefix.append((r, Alloc(init)))
            ctx[r] = Ref(ty)
        return prefix, ctx

    def program(self, result: Type | None = None, rec: bool = False) -> Term:
        """A closed computation with a few cells allocated up front."""
        prefix, ctx = self.cells()
        ty = self.ground_type() if result is None else result
        return wrap(prefix, self.comp(ctx, ty, self.cfg.depth, rec))


def wrap(prefix: list[tuple[str, Term]], body: Term) -> Term:
    for name, first in reversed(prefix):
        body = Bind(name, first, body)
    return body


def prefix_path(prefix: list) -> tuple[int, ...]:
    return (1,) * len(prefix)


# ---------------------------------------------------------------------------
# Configurations


def gen_config(rng: random.Random, max_locations: int = 4, value_range: int = 2) -> Config:
    """A random well-tagged configuration over scattered location numbers.

    Values are drawn from a small range so that ties, the hard case for
    canonicalization, are common.  Closure cells may close over any cell,
    including themselves, producing cyclic heaps.
    """
    n = rng.randint(0, max_locations)
    locs = rng.sample(range(3 * max_locations + 3), n)
    kinds: dict[int, str] = {}
    world: dict[int, Type] = {}
    ref_target: dict[int, int] = {}
    for i, loc in enumerate(locs):
        options = ["int", "int", "pair", "clo"] + (["ref", "ref"] if i else [])
        kind = rng.choice(options)
        kinds[loc] = kind
        match kind:
            case "int":
                world[loc] = INT
            case "pair":
                world[loc] = Prod(INT, INT)
            case "clo":
                world[loc] = Fn(UNIT, T(INT))
            case "ref":
                target = rng.choice(locs[:i])
                ref_target[loc] = target
                world[loc] = Ref(world[target])

    def small() -> IntV:
        return IntV(rng.randint(0, value_range))

    cells: dict[int, Value] = {}
    for loc in locs:
        match kinds[loc]:
            case "int":
                cells[loc] = small()
            case "pair":
                cells[loc] = PairV(small(), small())
            case "ref":
                t = ref_target[loc]
                cells[loc] = LocV(t, world[t])
            case "clo":
                t = rng.choice(locs)
                body = Get(Var("r")) if world[t] == INT else Ret(IntLit(rng.randint(0, value_range)))
                cells[loc] = ClosureV((("r", LocV(t, world[t])),), "u", body, UNIT)
    result: Value
    pick = rng.random()
    if locs and pick < 0.4:
        t = rng.choice(locs)
        result = LocV(t, world[t])
    elif len(locs) > 1 and pick < 0.6:
        a, b = rng.choice(locs), rng.choice(locs)
        result = PairV(LocV(a, world[a]), LocV(b, world[b]))
    else:
        result = small() if rng.random() < 0.8 else UNIT_V
    return Config(Heap(world, cells), result, rng.randint(0, 2))


def permute_config(rng: random.Random, c: Config) -> Config:
    """The same configuration under a random renaming to fresh location numbers."""
    from .store import rename_config

    locs = c.heap.locations()
    targets = rng.sample(range(100, 100 + 3 * len(locs) + 3), len(locs))
    return rename_config(c, dict(zip(locs, targets)))


def mutate_config(rng: random.Random, c: Config) -> Config:
    """Change one stored integer or the step count; the result may or may not be equivalent."""
    ints = [loc for loc in c.heap.locations() if isinstance(c.heap.cells[loc], IntV)]
    if ints and rng.random() < 0.7:
        loc = rng.choice(ints)
        cells = {**c.heap.cells, loc: IntV(rng.randint(0, 2))}
        return Config(Heap(c.heap.world, cells), c.result, c.steps)
    return Config(c.heap, c.result, rng.randint(0, 2))


# ---------------------------------------------------------------------------
# Delayed trees


@dataclass(frozen=True)
class DelayedSpec:
    """A printable recipe for a delayed tree, so failures can be reported."""
    kind: str  # "now", "delay", "bind", "fix"
    value: int = 0
    child: "DelayedSpec | None" = None
    cont: tuple = ()  # (delays, offset) of the continuation for "bind"

    def build(self) -> guarded.Delayed:
        match self.kind:
            case "now":
                return guarded.now(self.value)
            case "delay":
                return guarded.delay(self.child.build())
            case "bind":
                delays, offset = self.cont
                return guarded.bind(self.child.build(), _table_cont(delays, offset))
            case "fix":
                start, stride = self.value, self.cont[0]
                return countdown_fix(stride)(start)
        raise ValueError(self.kind)


def _table_cont(delays: int, offset: int) -> Callable[[Any], guarded.Delayed]:
    def k(v):
        d = guarded.now(v + offset)
        for _ in range(delays):
            d = guarded.delay(d)
        return d
    return k


def gen_delayed(rng: random.Random, depth: int = 4) -> DelayedSpec:
    r = rng.random()
    if depth <= 0 or r < 0.2:
        return DelayedSpec("now", rng.randint(-3, 3))
    if r < 0.45:
        return DelayedSpec("delay", child=gen_delayed(rng, depth - 1))
    if r < 0.9:
        return DelayedSpec("bind", child=gen_delayed(rng, depth - 1),
                           cont=(rng.randint(0, 3), rng.randint(-2, 2)))
    return DelayedSpec("fix", rng.randint(0, 4), cont=(rng.randint(1, 2),))


def countdown_fix(stride: int = 1) -> Callable[[Any], guarded.Delayed]:
    """Guarded countdown: unfold until the argument is at most zero."""
    def h(self):
        def body(n):
            if n <= 0:
                return guarded.now(n)
            return self(n - stride)
        return body
    return guarded.lob_fix(h)


@dataclass(frozen=True)
class FixSpec:
    """A random monadic functional for the unfolding law."""
    stop: int
    stride: int
    pre: int  # delays before recursing
    post: int  # delays before returning
    offset: int

    def h(self):
        def functional(self_call):
            def body(n):
                if n <= self.stop:
                    d = guarded.now(n + self.offset)
                    for _ in range(self.post):
                        d = guarded.delay(d)
                    return d
                d = guarded.now(n - self.stride)
                for _ in range(self.pre):
                    d = guarded.delay(d)
                return guarded.bind(d, self_call)
            return body
        return functional


def gen_fix(rng: random.Random) -> tuple[FixSpec, int]:
    spec = FixSpec(rng.randint(-2, 2), rng.randint(0, 3), rng.randint(0, 2), rng.randint(0, 2), rng.randint(-3, 3))
    return spec, rng.randint(-3, 12)
