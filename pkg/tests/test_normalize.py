import random

import pytest
from hypothesis import given, strategies as st

from refstore.gen import Gen
from refstore.interp import observe, same_observation
from refstore.normalize import OutOfFragment, normalize, normalize_arith
from refstore.syntax import alpha_eq, parse, show


@pytest.mark.parametrize("src, nf", [
    ("neg (neg i + 1)", "i - 1"),
    ("1 + x - 1", "x"),
    ("neg 0", "0"),
    ("neg x + y + 2", "y - x + 2"),
    ("x - x", "0"),
])
def test_linear_arithmetic(src, nf):
    assert show(normalize_arith(parse(src))) == nf


@pytest.mark.parametrize("src, nf", [
    ("x <- ret 1; ret (x + 1)", "ret 2"),
    ("x <- get l; ret x", "get l"),
    ("y <- (x <- get l; ret (x, x)); ret (fst y)", "get l"),
    ("map neg (get l)", "x <- get l; ret (neg x)"),
    (r"(\x. ret x) 3", "ret 3"),
    ("ifz 0 then ret 1 else ret 2", "ret 1"),
    ("{a -> ret 1, b -> step}.b", "step"),
    ("x <- get l; step", "get l; step"),
])
def test_normal_forms(src, nf):
    assert alpha_eq(normalize(parse(src)), parse(nf))


def test_recursion_is_out_of_fragment():
    with pytest.raises(OutOfFragment):
        normalize(parse("(rec f x. f x) 1"))


def test_assoc_avoids_capture():
    t = parse("x <- (x <- get l; get m); ret (x, x)")
    nf = normalize(t)
    assert same_observation(
        observe(parse(f"l <- alloc 1; m <- alloc 2; {show(t)}")),
        observe(parse(f"l <- alloc 1; m <- alloc 2; {show(nf)}")),
    )


@given(st.integers(0, 2**32))
def test_normalize_preserves_observations(seed):
    t = Gen(random.Random(seed)).program()
    nf = normalize(t)
    assert same_observation(observe(t), observe(nf))
    assert alpha_eq(normalize(nf), nf)
