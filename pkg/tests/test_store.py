import random

import pytest
from hypothesis import given, strategies as st

from refstore import guarded
from refstore.gen import gen_config, mutate_config, permute_config
from refstore.store import (
    EMPTY_HEAP, Config, DanglingLocation, Heap, SizeLimit, StoreError, TagMismatch,
    alloc_cell, bijection_equiv, canonicalize, check_config, dump_config, get_cell, set_cell,
)
from refstore.syntax import INT, UNIT, Prod, Ref
from refstore.values import IntV, LocV, PairV, UNIT_V


def test_alloc_get_set():
    h, l0 = alloc_cell(EMPTY_HEAP, INT, IntV(1))
    h, l1 = alloc_cell(h, Ref(INT), LocV(l0, INT))
    assert (l0, l1) == (0, 1)
    assert guarded.run(get_cell(h, l0), 5) == guarded.Converged(IntV(1), 1)
    h2 = set_cell(h, l0, IntV(7))
    assert guarded.run(get_cell(h2, l0), 5).value == IntV(7)
    assert guarded.run(get_cell(h, l0), 5).value == IntV(1)  # heaps are persistent


def test_store_errors():
    h, l = alloc_cell(EMPTY_HEAP, INT, IntV(1))
    with pytest.raises(DanglingLocation):
        get_cell(h, 9)
    with pytest.raises(TagMismatch):
        set_cell(h, l, IntV(0), tag=UNIT)
    with pytest.raises(TagMismatch):
        alloc_cell(h, INT, UNIT_V, debug=True)
    with pytest.raises(StoreError):
        Heap({0: INT}, {})
    with pytest.raises(DanglingLocation):
        check_config(Config(h, LocV(5, INT), 0))


def test_canonical_numbering_follows_reachability():
    world = {7: INT, 3: Ref(INT), 5: INT}
    cells = {7: IntV(1), 3: LocV(7, INT), 5: IntV(0)}
    c = canonicalize(Config(Heap(world, cells), LocV(3, Ref(INT)), 2))
    assert c.result == LocV(0, Ref(INT))
    assert c.heap.cells == {0: LocV(1, INT), 1: IntV(1), 2: IntV(0)}


def test_unreachable_cells_ordered_by_content():
    a = Config(Heap({4: INT, 9: INT}, {4: IntV(2), 9: IntV(1)}), UNIT_V, 0)
    b = Config(Heap({1: INT, 2: INT}, {1: IntV(1), 2: IntV(2)}), UNIT_V, 0)
    assert canonicalize(a).key() == canonicalize(b).key()


def test_bijection_limit():
    n = 9
    h = Heap({i: INT for i in range(n)}, {i: IntV(0) for i in range(n)})
    with pytest.raises(SizeLimit):
        bijection_equiv(Config(h, UNIT_V, 0), Config(h, UNIT_V, 0))


def test_canonicalize_is_idempotent_and_renaming_invariant():
    rng = random.Random(1)
    for _ in range(300):
        c = gen_config(rng, 6)
        k = canonicalize(c)
        assert canonicalize(k).key() == k.key()
        assert canonicalize(permute_config(rng, c)).key() == k.key()
        assert sorted(k.heap.cells) == list(range(len(c.heap)))


@given(st.integers(0, 2**32), st.sampled_from(["perm", "mut", "indep"]))
def test_canonicalize_matches_bijection_search(seed, kind):
    rng = random.Random(seed)
    c1 = gen_config(rng, 4)
    c2 = {"perm": lambda: permute_config(rng, c1),
          "mut": lambda: permute_config(rng, mutate_config(rng, c1)),
          "indep": lambda: gen_config(rng, 4)}[kind]()
    assert (canonicalize(c1).key() == canonicalize(c2).key()) == bijection_equiv(c1, c2)


def test_dump_is_deterministic():
    c = Config(Heap({0: Prod(INT, INT)}, {0: PairV(IntV(1), IntV(2))}), LocV(0, Prod(INT, INT)), 3)
    assert dump_config(c) == "steps: 3\nresult: #0\nheap:\n  #0 : Int * Int = (1, 2)"
