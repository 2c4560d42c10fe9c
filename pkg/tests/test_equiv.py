import pytest

from refstore.equiv import (
    Distinguished, Equivalent, Inconclusive, UnsupportedType, gen_scripts, method_calls,
    probe_equiv, scripts_up_to, strict_equiv, value_pool,
)
from refstore.syntax import INT, UNIT, Prod, parse, parse_type


def test_strict_equivalent_up_to_layout():
    a = parse("l <- alloc 1; k <- alloc (); ret (l, k)")
    b = parse("k <- alloc (); l <- alloc 1; ret (l, k)")
    v = strict_equiv(a, b)
    assert isinstance(v, Equivalent) and v.code == 0


def test_strict_sees_steps_unless_ignored():
    a, b = parse("step; ret 1"), parse("ret 1")
    v = strict_equiv(a, b)
    assert isinstance(v, Distinguished) and v.code == 1 and "step" in v.reason
    assert isinstance(strict_equiv(a, b, ignore_steps=True), Equivalent)


def test_strict_sees_heap_contents():
    v = strict_equiv(parse("l <- alloc 0; ret ()"), parse("l <- alloc 1; ret ()"))
    assert isinstance(v, Distinguished)


def test_both_diverging_is_inconclusive():
    loop = "(rec f (n : Int) : T Int. f n) 0"
    v = strict_equiv(parse(loop), parse(loop))
    assert isinstance(v, Inconclusive) and v.code == 2 and v.timeouts == 4


def test_one_side_diverging_is_distinguished():
    v = strict_equiv(parse("(rec f (n : Int) : T Int. f n) 0"), parse("ret 0"))
    assert isinstance(v, Distinguished) and v.fuel == 4


def test_script_enumeration():
    ty = parse_type("{incr : T Unit, read : T Int}")
    assert [str(c) for c in method_calls(ty)] == ["incr", "read"]
    assert len(gen_scripts(ty, 3)) == 8
    assert len(scripts_up_to(ty, 6)) == 126
    cell = parse_type("T Int * (Int -> T Unit)")
    assert len(method_calls(cell)) == 1 + len(value_pool(INT))


def test_value_pool():
    assert len(value_pool(Prod(INT, UNIT))) == len(value_pool(INT))
    with pytest.raises(UnsupportedType):
        method_calls(parse_type("{f : Int -> Int}"))


def test_probe_counters(counters):
    v = probe_equiv(counters["posCounter"], counters["negCounter"], 6)
    assert isinstance(v, Equivalent) and v.evidence == 126 * 4


def test_probe_witness_is_replayed(counters):
    v = probe_equiv(counters["posCounter"], counters["zeroCounter"], 6)
    assert isinstance(v, Distinguished)
    assert [str(c) for c in v.witness] == ["incr", "read"]
    assert v.left[-1] != v.right[-1]


def test_probe_dedup_does_not_change_verdicts(counters):
    for other in ("negCounter", "zeroCounter"):
        a = probe_equiv(counters["posCounter"], counters[other], 5)
        b = probe_equiv(counters["posCounter"], counters[other], 5, dedup=False)
        assert type(a) is type(b)
        assert getattr(a, "witness", None) == getattr(b, "witness", None)


def test_probe_detects_a_broken_conjugation():
    good = parse(r"l <- alloc 5; ret (get l, \(v : Int). set l v)")
    bad = parse(r"l <- alloc (5 + 1); ret (map (\(x : Int). x + 1) (get l), \(v : Int). set l (v + 1))")
    v = probe_equiv(good, bad, 2)
    assert isinstance(v, Distinguished) and len(v.witness) == 1


def test_probe_step_counts_matter(counters):
    slow = parse("l <- alloc 0; ret {incr -> i <- get l; step; set l (i + 1), read -> get l}")
    assert isinstance(probe_equiv(counters["posCounter"], slow, 2), Distinguished)
    assert isinstance(probe_equiv(counters["posCounter"], slow, 2, ignore_steps=True), Equivalent)
