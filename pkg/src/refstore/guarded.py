"""Fuel-indexed delayed computations.

A :class:`Delayed` is a lazily unfolded tree: ``Now`` leaves carry a value,
``Later`` nodes stand for one use of the later-algebra structure and cost
one unit of fuel.  Running a tree with fuel ``n`` either converges within
``n`` ``Later`` nodes or times out.  ``Bind`` nodes are interpreted by a
trampoline, so deep or long-running trees do not grow the Python stack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Union


@dataclass(frozen=True)
class Now:
    value: Any


@dataclass(frozen=True, eq=False)
class Later:
    thunk: Callable[[], "Delayed"]


@dataclass(frozen=True, eq=False)
class BindD:
    first: "Delayed"
    cont: Callable[[Any], "Delayed"]


Delayed = Union[Now, Later, BindD]


@dataclass(frozen=True)
class Converged:
    value: Any
    steps: int


@dataclass(frozen=True)
class Timeout:
    fuel: int


Outcome = Union[Converged, Timeout]


def now(v: Any) -> Delayed:
    return Now(v)


def delay(d: Delayed) -> Delayed:
    return Later(lambda: d)


def later(thunk: Callable[[], Delayed]) -> Delayed:
    """Like :func:`delay` but builds the delayed tree only when it is reached."""
    return Later(thunk)


def bind(d: Delayed, f: Callable[[Any], Delayed]) -> Delayed:
    return BindD(d, f)


def fmap(f: Callable[[Any], Any], d: Delayed) -> Delayed:
    return BindD(d, lambda v: Now(f(v)))


UNIT_VALUE = ()

step: Delayed = Later(lambda: Now(UNIT_VALUE))


def run(d: Delayed, fuel: int) -> Outcome:
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    conts: list[Callable[[Any], Delayed]] = []
    steps = 0
    while True:
        if isinstance(d, BindD):
            conts.append(d.cont)
            d = d.first
        elif isinstance(d, Later):
            if steps >= fuel:
                return Timeout(fuel)
            steps += 1
            d = d.thunk()
        elif not conts:
            return Converged(d.value, steps)
        else:
            d = conts.pop()(d.value)


def lob_fix(h: Callable[[Callable[[Any], Delayed]], Callable[[Any], Delayed]]) -> Callable[[Any], Delayed]:
    """Guarded fixed point of a monadic functional.

    Every unfolding is guarded by one ``Later``, so ``lob_fix(h)(a)`` behaves
    as ``step; h(lob_fix(h))(a)`` at every fuel.
    """
    def fixed(a: Any) -> Delayed:
        return Later(lambda: h(fixed)(a))
    return fixed
