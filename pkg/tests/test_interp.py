import pytest

from conftest import CORPUS
from refstore.guarded import Timeout
from refstore.interp import Call, UnknownLabel, observe, probe, run_term, same_observation
from refstore.syntax import parse, parse_program
from refstore.typecheck import TypeCheckError
from refstore.values import IntV, LocV, UNIT_V


def run(src, fuel=256):
    return run_term(parse(src), fuel)


@pytest.mark.parametrize("src, value, steps", [
    ("ret 3", IntV(3), 0),
    ("step", UNIT_V, 1),
    ("l <- alloc 0; get l", IntV(0), 1),
    ("l <- alloc 0; set l 4; get l", IntV(4), 1),
    ("l <- alloc 1; x <- get l; y <- get l; ret (x + y)", IntV(2), 2),
    ("map neg (ret 5)", IntV(-5), 0),
    ("(rec f (n : Int) : T Int. ifz n then ret 0 else f (n - 1)) 3", IntV(0), 4),
    (r"(\(x : Int). ret (x, x)) 2", None, 0),
    ("{a -> ret 1, b -> step}.b", UNIT_V, 1),
])
def test_costs_and_values(src, value, steps):
    out = run(src)
    assert out.steps == steps
    if value is not None:
        assert out.result == value


def test_alloc_and_set_are_free_and_grow_the_heap():
    out = run("l <- alloc 0; k <- alloc (1, ()); set l 2; ret k")
    assert out.steps == 0 and len(out.heap) == 2 and out.result == LocV(1, out.heap.world[1])


def test_divergence_times_out():
    t = "(rec f (n : Int) : T Int. f (n + 1)) 0"
    for fuel in (0, 5, 100):
        assert run(t, fuel) == Timeout(fuel)


def test_landin_knot():
    defs = parse_program((CORPUS / "landin.ref").read_text())
    out = run_term(defs["knot"], 10)
    assert (out.result, out.steps) == (IntV(0), 4)
    assert run_term(defs["knot"], 3) == Timeout(3)
    assert run_term(defs["diverge"], 500) == Timeout(500)


def test_ill_typed_programs_are_rejected():
    with pytest.raises(TypeCheckError):
        run("get 3")


def test_observe_canonicalizes():
    a = observe(parse("l <- alloc 1; k <- alloc 2; ret k"))
    b = observe(parse("k <- alloc 2; l <- alloc 1; ret k"))
    assert same_observation(a, b)
    assert not same_observation(observe(parse("step")), observe(parse("ret ()")))
    assert same_observation(observe(parse("step")), observe(parse("ret ()")), ignore_steps=True)


def test_probe_counters(counters):
    script = [Call("incr"), Call("incr"), Call("read")]
    for name in ("posCounter", "negCounter"):
        trace = probe(counters[name], script)
        assert [r.result for r in trace[1:]] == [(), (), 2]
        assert [r.steps for r in trace] == [0, 1, 1, 1]


def test_probe_cell_pair():
    t = parse(r"l <- alloc 5; ret (get l, \(v : Int). set l v)")
    trace = probe(t, [Call("get"), Call("set", IntV(8)), Call("get")])
    assert [r.result for r in trace[1:]] == [5, (), 8]


def test_probe_unknown_method(counters):
    with pytest.raises(UnknownLabel):
        probe(counters["posCounter"], [Call("reset")])


def test_probe_stops_at_timeout():
    t = parse("ret {spin -> (rec f (n : Int) : T Unit. f n) 0, ok -> ret 1}")
    trace = probe(t, [Call("ok"), Call("spin"), Call("ok")], fuel=20)
    assert len(trace) == 3 and trace[-1].timed_out
