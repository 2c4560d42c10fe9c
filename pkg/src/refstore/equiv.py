"""Observational equivalence testing.

Two modes: strict comparison of canonical configurations, for laws that
hold on the nose, and bounded probing through an object's methods, for laws
that hold only at an abstract interface.  Verdicts are evidence up to the
printed bounds, not proofs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

from .guarded import Timeout
from .interp import (
    Call, CallResult, MethodScript, Observation, ObjectState, call_method,
    construct, method_types, observe, prepare, probe, same_observation,
)
from .store import dump_config, heap_key
from .syntax import Fn, Int, Prod, T, Term, Type, Unit, show_type
from .values import IntV, PairV, UNIT_V, Value

DEFAULT_LADDER = (4, 16, 64, 256)
INT_POOL = (-2, -1, 0, 1, 2)


class UnsupportedType(TypeError):
    pass


@dataclass(frozen=True)
class Equivalent:
    evidence: int
    bounds: str

    code = 0

    def describe(self) -> str:
        return f"Equivalent ({self.evidence} checks; no distinguishing context up to {self.bounds})"


@dataclass(frozen=True)
class Distinguished:
    witness: object  # a MethodScript for probing, or a fuel level for strict mode
    left: object
    right: object
    fuel: int
    reason: str = ""

    code = 1

    def describe(self) -> str:
        if isinstance(self.witness, tuple):
            w = "script [" + ", ".join(str(c) for c in self.witness) + "]"
            return f"Distinguished by {w} at fuel {self.fuel}: {self.reason}"
        return f"Distinguished by the top-level run at fuel {self.fuel}: {self.reason}"


@dataclass(frozen=True)
class Inconclusive:
    timeouts: int
    bounds: str

    code = 2

    def describe(self) -> str:
        return f"Inconclusive ({self.timeouts} timeouts; bounds {self.bounds})"


Verdict = Union[Equivalent, Distinguished, Inconclusive]


def _ladder_text(ladder: Sequence[int]) -> str:
    return "fuel " + ",".join(str(f) for f in ladder)


def _show_obs(o: Observation) -> str:
    return "timeout" if isinstance(o, Timeout) else dump_config(o)


def strict_equiv(t1: Term, t2: Term, ladder: Sequence[int] = DEFAULT_LADDER,
                 ignore_steps: bool = False) -> Verdict:
    """Compare canonical configurations of two closed computations at each fuel."""
    _, ty1 = prepare(t1)
    _, ty2 = prepare(t2)
    if ty1 != ty2:
        raise TypeError(f"types differ: {show_type(ty1)} vs {show_type(ty2)}")
    checks = timeouts = 0
    for fuel in ladder:
        o1, o2 = observe(t1, fuel), observe(t2, fuel)
        t_1, t_2 = isinstance(o1, Timeout), isinstance(o2, Timeout)
        if t_1 and t_2:
            timeouts += 1
            continue
        if t_1 != t_2:
            if ignore_steps:
                timeouts += 1
                continue
            return Distinguished(fuel, _show_obs(o1), _show_obs(o2), fuel, "convergence differs")
        checks += 1
        if not same_observation(o1, o2, ignore_steps):
            reason = _config_difference(o1, o2)
            return Distinguished(fuel, _show_obs(o1), _show_obs(o2), fuel, reason)
    bounds = _ladder_text(ladder) + (", steps ignored" if ignore_steps else "")
    if checks == 0:
        return Inconclusive(timeouts, bounds)
    return Equivalent(checks, bounds)


def _config_difference(a, b) -> str:
    if len(a.heap) != len(b.heap):
        return f"heap sizes differ ({len(a.heap)} vs {len(b.heap)})"
    if a.steps != b.steps:
        return f"step counts differ ({a.steps} vs {b.steps})"
    if a.key()[1] != b.key()[1]:
        return "results differ"
    return "heap contents differ"


# ---------------------------------------------------------------------------
# Scripts


def value_pool(ty: Type) -> list[Value]:
    match ty:
        case Int():
            return [IntV(n) for n in INT_POOL]
        case Unit():
            return [UNIT_V]
        case Prod(a, b):
            return [PairV(x, y) for x, y in itertools.product(value_pool(a), value_pool(b))]
    raise UnsupportedType(f"no test pool for arguments of type {show_type(ty)}")


def _ground_result(ty: Type) -> bool:
    match ty:
        case Int() | Unit():
            return True
        case Prod(a, b):
            return _ground_result(a) and _ground_result(b)
    return False


def method_calls(object_type: Type) -> list[Call]:
    """Every single call available on an object, in label order then pool order."""
    calls: list[Call] = []
    for label, mty in method_types(object_type):
        match mty:
            case T(res) if _ground_result(res):
                calls.append(Call(label))
            case Fn(dom, T(res)) if _ground_result(res):
                calls.extend(Call(label, v) for v in value_pool(dom))
            case _:
                raise UnsupportedType(f"method {label!r} of type {show_type(mty)} is not testable")
    return calls


def _object_type(t: Term) -> Type:
    _, ty = prepare(t)
    return ty.body


def gen_scripts(object_type: Type, length: int) -> list[MethodScript]:
    """All scripts of exactly ``length`` calls, in lexicographic order."""
    calls = method_calls(object_type)
    return [tuple(s) for s in itertools.product(calls, repeat=length)]


def scripts_up_to(object_type: Type, max_len: int) -> list[MethodScript]:
    out: list[MethodScript] = []
    for n in range(1, max_len + 1):
        out.extend(gen_scripts(object_type, n))
    return out


@dataclass
class _Stats:
    executed: int = 0  # script extensions actually run
    covered: int = 0  # scripts whose traces are known to agree
    timeouts: int = 0


def probe_equiv(t1: Term, t2: Term, max_len: int = 6, ladder: Sequence[int] = DEFAULT_LADDER,
                ignore_steps: bool = False, dedup: bool = True) -> Verdict:
    """Breadth-first search for a method script whose traces differ.

    Scripts sharing a prefix share its execution, so the witness reported is
    the shortest, then lexicographically first, distinguishing script.  With
    ``dedup``, a pair of heaps already reached by an earlier script is not
    explored again: both objects are fixed, so the heaps determine every
    continuation.  The scripts skipped this way still count as covered.
    """
    ty1, ty2 = _object_type(t1), _object_type(t2)
    if ty1 != ty2:
        raise TypeError(f"object types differ: {show_type(ty1)} vs {show_type(ty2)}")
    calls = method_calls(ty1)
    stats = _Stats()
    for fuel in ladder:
        found = _probe_at(t1, t2, calls, max_len, fuel, ignore_steps, stats, dedup)
        if found is not None:
            script, reason = found
            return Distinguished(
                script,
                [str(r) for r in probe(t1, script, fuel)],
                [str(r) for r in probe(t2, script, fuel)],
                fuel,
                reason,
            )
    bounds = f"scripts of length <= {max_len}, {_ladder_text(ladder)}"
    if ignore_steps:
        bounds += ", steps ignored"
    if stats.covered == 0:
        return Inconclusive(stats.timeouts, bounds)
    return Equivalent(stats.covered, bounds)


def _subtree(width: int, depth: int) -> int:
    """Scripts in a full subtree of the given remaining depth, root included."""
    return sum(width ** k for k in range(depth + 1))


def _probe_at(t1, t2, calls, max_len, fuel, ignore_steps, stats, dedup=True):
    r1, s1 = construct(t1, fuel)
    r2, s2 = construct(t2, fuel)
    if r1.key(ignore_steps) != r2.key(ignore_steps):
        return (), "construction differs"
    if s1 is None:
        stats.timeouts += 1
        return None
    seen = {(heap_key(s1.heap), heap_key(s2.heap))}
    frontier: list[tuple[MethodScript, ObjectState, ObjectState]] = [((), s1, s2)]
    for depth in range(1, max_len + 1):
        nxt = []
        for script, a, b in frontier:
            for call in calls:
                ra, na = call_method(a, call, fuel)
                rb, nb = call_method(b, call, fuel)
                stats.executed += 1
                s = script + (call,)
                if ra.key(ignore_steps) != rb.key(ignore_steps):
                    return s, _call_difference(ra, rb)
                if na is None:
                    stats.timeouts += 1
                    continue
                if dedup:
                    key = (heap_key(na.heap), heap_key(nb.heap))
                    if key in seen:
                        stats.covered += _subtree(len(calls), max_len - depth)
                        continue
                    seen.add(key)
                stats.covered += 1
                nxt.append((s, na, nb))
        frontier = nxt
    return None


def _call_difference(a: CallResult, b: CallResult) -> str:
    if a.timed_out != b.timed_out:
        return "convergence differs"
    if a.result != b.result:
        return f"results differ ({a.result!r} vs {b.result!r})"
    return f"step counts differ ({a.steps} vs {b.steps})"


__all__ = [
    "DEFAULT_LADDER", "INT_POOL", "Equivalent", "Distinguished", "Inconclusive",
    "Verdict", "UnsupportedType", "strict_equiv", "probe_equiv", "gen_scripts",
    "scripts_up_to", "method_calls", "value_pool",
]
