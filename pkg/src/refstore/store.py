"""Worlds, heaps, the three store operations, and heap canonicalization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from . import guarded
from .syntax import Type, show_type
from .values import Value, rename_locs, show_value, value_has_type, value_key, value_locs

Location = int

# Canonical search over unreachable cells branches on ties; above this many
# unreachable cells it commits to the first tie instead.
EXACT_CANON_LIMIT = 12


class StoreError(Exception):
    pass


class DanglingLocation(StoreError):
    pass


class TagMismatch(StoreError):
    pass


class SizeLimit(StoreError):
    pass


@dataclass(frozen=True)
class Heap:
    """A world (location -> type tag) with a valuation of every location."""

    world: Mapping[Location, Type] = field(default_factory=dict)
    cells: Mapping[Location, Value] = field(default_factory=dict)

    def __post_init__(self):
        if set(self.world) != set(self.cells):
            raise StoreError("world and store domains differ")

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, loc: Location) -> bool:
        return loc in self.cells

    def locations(self) -> list[Location]:
        return sorted(self.cells)

    def tag(self, loc: Location) -> Type:
        if loc not in self.world:
            raise DanglingLocation(f"location #{loc} not in heap")
        return self.world[loc]


EMPTY_HEAP = Heap()


def alloc_cell(h: Heap, tag: Type, v: Value, debug: bool = False) -> tuple[Heap, Location]:
    if debug and not value_has_type(v, tag):
        raise TagMismatch(f"{show_value(v)} does not have type {show_type(tag)}")
    loc = max(h.cells, default=-1) + 1
    return Heap({**h.world, loc: tag}, {**h.cells, loc: v}), loc


def _check_tag(h: Heap, loc: Location, tag: Type | None):
    actual = h.tag(loc)
    if tag is not None and actual != tag:
        raise TagMismatch(f"location #{loc} holds {show_type(actual)}, used at {show_type(tag)}")


def get_cell(h: Heap, loc: Location, tag: Type | None = None) -> guarded.Delayed:
    """Read a cell: one step, heap untouched."""
    _check_tag(h, loc, tag)
    return guarded.delay(guarded.now(h.cells[loc]))


def set_cell(h: Heap, loc: Location, v: Value, tag: Type | None = None, debug: bool = False) -> Heap:
    _check_tag(h, loc, tag)
    if debug and not value_has_type(v, h.world[loc]):
        raise TagMismatch(f"{show_value(v)} does not have type {show_type(h.world[loc])}")
    return Heap(h.world, {**h.cells, loc: v})


@dataclass(frozen=True)
class Config:
    heap: Heap
    result: Value
    steps: int

    def key(self) -> tuple:
        return (self.steps, value_key(self.result), heap_key(self.heap))

    def same(self, other: Config) -> bool:
        return self.key() == other.key()


def heap_key(h: Heap) -> tuple:
    """Exact structural key of a heap, location numbers included."""
    return tuple((loc, show_type(h.world[loc]), value_key(h.cells[loc])) for loc in h.locations())


def check_config(c: Config) -> None:
    for loc in _reachable_order(c.heap, [c.result]):
        if loc not in c.heap:
            raise DanglingLocation(f"result mentions #{loc}, absent from heap")


def rename_config(c: Config, m: dict[Location, Location]) -> Config:
    world = {m[loc]: ty for loc, ty in c.heap.world.items()}
    cells = {m[loc]: rename_locs(v, m) for loc, v in c.heap.cells.items()}
    return Config(Heap(world, cells), rename_locs(c.result, m), c.steps)


def _reachable_order(h: Heap, roots: list[Value], seen: dict[Location, int] | None = None) -> list[Location]:
    """Pre-order depth-first traversal through heap contents, left to right."""
    seen = {} if seen is None else seen
    order: list[Location] = []
    stack: list[Location] = []
    for root in reversed(roots):
        stack.extend(reversed(list(value_locs(root))))
    while stack:
        loc = stack.pop()
        if loc in seen:
            continue
        seen[loc] = len(seen)
        order.append(loc)
        if loc in h.cells:
            stack.extend(reversed(list(value_locs(h.cells[loc]))))
    return order


def canonicalize(c: Config) -> Config:
    """Rename locations to 0, 1, 2, ... so that permuted heaps coincide.

    Locations reachable from the result are numbered in depth-first,
    left-to-right order.  The rest are numbered by choosing, at each stage,
    the unvisited root whose depth-first segment serializes smallest.
    """
    numbering: dict[Location, int] = {}
    _reachable_order(c.heap, [c.result], numbering)
    remaining = frozenset(c.heap.cells) - set(numbering)
    if remaining:
        numbering = _canon_rest(c.heap, numbering, remaining)
    return rename_config(c, numbering)


def _segment(h: Heap, numbering: dict[Location, int], root: Location):
    m = dict(numbering)
    m[root] = len(m)
    order = [root]
    order += _reachable_order(h, [h.cells[root]], m)
    sig = repr(tuple(
        (show_type(h.world[loc]), value_key(rename_locs(h.cells[loc], m)))
        for loc in order
    ))
    return sig, m


def _canon_rest(h: Heap, numbering: dict[Location, int], remaining: frozenset) -> dict[Location, int]:
    exact = len(remaining) <= EXACT_CANON_LIMIT
    memo: dict = {}

    def best(numbering: dict[Location, int], remaining: frozenset):
        if not remaining:
            return "", numbering
        referenced = tuple(sorted(
            (loc, numbering[loc])
            for r in remaining for loc in value_locs(h.cells[r]) if loc in numbering
        ))
        key = (remaining, referenced)
        if key in memo:
            sig, m_rest = memo[key]
            return sig, {**numbering, **m_rest}
        cands = [_segment(h, numbering, r) for r in sorted(remaining)]
        low = min(sig for sig, _ in cands)
        ties = [m for sig, m in cands if sig == low]
        if not exact:
            ties = ties[:1]
        out = None
        for m in ties:
            rest_sig, m_full = best(m, remaining - set(m))
            total = low + "|" + rest_sig
            if out is None or total < out[0]:
                out = (total, m_full)
        memo[key] = (out[0], {k: v for k, v in out[1].items() if k in remaining})
        return out

    return best(numbering, remaining)[1]


def bijection_equiv(c1: Config, c2: Config, limit: int = 8) -> bool:
    """Exhaustively search for a location bijection mapping ``c1`` onto ``c2``."""
    n = len(c1.heap)
    if n > limit or len(c2.heap) > limit:
        raise SizeLimit(f"bijection search limited to {limit} locations")
    if n != len(c2.heap) or c1.steps != c2.steps:
        return False
    src = c1.heap.locations()
    target = c2.key()
    for perm in itertools.permutations(c2.heap.locations()):
        if rename_config(c1, dict(zip(src, perm))).key() == target:
            return True
    return False


def dump_config(c: Config) -> str:
    """Deterministic textual form; locations listed in ascending order."""
    lines = [f"steps: {c.steps}", f"result: {show_value(c.result)}", "heap:"]
    for loc in c.heap.locations():
        lines.append(f"  #{loc} : {show_type(c.heap.world[loc])} = {show_value(c.heap.cells[loc])}")
    if not len(c.heap):
        lines[-1] = "heap: {}"
    return "\n".join(lines)
