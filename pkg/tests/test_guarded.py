import random

import pytest
from hypothesis import given, strategies as st

from refstore import guarded
from refstore.gen import countdown_fix, gen_delayed


def test_now_costs_nothing():
    assert guarded.run(guarded.now(3), 0) == guarded.Converged(3, 0)


def test_each_later_costs_one():
    d = guarded.delay(guarded.delay(guarded.now("x")))
    assert guarded.run(d, 1) == guarded.Timeout(1)
    assert guarded.run(d, 2) == guarded.Converged("x", 2)


def test_negative_fuel_rejected():
    with pytest.raises(ValueError):
        guarded.run(guarded.now(0), -1)


def test_fmap_and_bind():
    d = guarded.fmap(lambda v: v * 2, guarded.delay(guarded.now(4)))
    assert guarded.run(d, 5) == guarded.Converged(8, 1)


def test_lob_fix_unfold_costs_a_step():
    f = countdown_fix()
    assert guarded.run(f(0), 10) == guarded.Converged(0, 1)
    assert guarded.run(f(3), 10) == guarded.Converged(0, 4)
    assert guarded.run(f(3), 3) == guarded.Timeout(3)


def test_deep_trees_do_not_overflow_the_stack():
    assert guarded.run(countdown_fix()(50_000), 100_000).steps == 50_001
    d = guarded.now(0)
    for _ in range(20_000):
        d = guarded.bind(d, lambda v: guarded.now(v + 1))
    assert guarded.run(d, 0) == guarded.Converged(20_000, 0)


def test_divergence_times_out_at_every_fuel():
    loop = guarded.lob_fix(lambda self: lambda a: self(a))
    for n in (0, 1, 7, 100):
        assert guarded.run(loop(()), n) == guarded.Timeout(n)


@given(st.integers(0, 2**32), st.integers(0, 40))
def test_fuel_monotone(seed, extra):
    spec = gen_delayed(random.Random(seed))
    full = guarded.run(spec.build(), 10_000)
    assert isinstance(full, guarded.Converged)
    assert guarded.run(spec.build(), full.steps + extra) == full
    if full.steps:
        assert isinstance(guarded.run(spec.build(), full.steps - 1), guarded.Timeout)


@given(st.integers(0, 2**32))
def test_steps_add_under_bind(seed):
    rng = random.Random(seed)
    a, b = gen_delayed(rng), gen_delayed(rng)
    ra, rb = guarded.run(a.build(), 10_000), guarded.run(b.build(), 10_000)
    both = guarded.run(guarded.bind(a.build(), lambda _: b.build()), 10_000)
    assert both == guarded.Converged(rb.value, ra.steps + rb.steps)
