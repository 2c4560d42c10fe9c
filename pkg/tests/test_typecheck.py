import random

import pytest
from hypothesis import given, strategies as st

from refstore.gen import Gen
from refstore.syntax import INT, UNIT, Cell, Fn, Ref, T, parse, parse_type
from refstore.typecheck import TypeCheckError, check, elaborate, infer


@pytest.mark.parametrize("src, ty", [
    ("ret 1", "T Int"),
    ("l <- alloc 0; get l", "T Int"),
    ("alloc (1, ())", "T (Ref (Int * Unit))"),
    (r"\(x : Int). ret x", "Int -> T Int"),
    ("(rec f (n : Int) : T Int. f n) 3", "T Int"),
    ("step", "T Unit"),
    ("map neg (ret 2)", "T Int"),
    ("l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}",
     "T {incr : T Unit, read : T Int}"),
])
def test_infer(src, ty):
    assert infer({}, parse(src)) == parse_type(ty)


def test_cell_type():
    t = parse(r"l <- alloc 5; ret (get l, \(v : Int). set l v)")
    assert infer({}, t) == T(Cell(INT))
    assert Cell(INT) == parse_type("T Int * (Int -> T Unit)")


@pytest.mark.parametrize("src, path", [
    ("ret (1 + ())", (0, 1)),
    ("get 3", ()),
    ("l <- alloc 0; set l ()", (1, 1)),
    ("x", ()),
    ("fst 1", ()),
])
def test_type_errors_locate_the_subterm(src, path):
    with pytest.raises(TypeCheckError) as e:
        infer({}, parse(src))
    assert tuple(e.value.path) == path
    assert e.value.rule


def test_context_and_check():
    ctx = {"l": Ref(INT)}
    assert infer(ctx, parse("get l")) == T(INT)
    check(ctx, parse("set l 1"), T(UNIT))
    with pytest.raises(TypeCheckError):
        check(ctx, parse("get l"), T(UNIT))


def test_unannotated_lambda_needs_expected_type():
    check({}, parse(r"\x. ret x"), Fn(INT, T(INT)))
    _, ty = elaborate(parse(r"(\x. ret x) 3"))
    assert ty == T(INT)


@given(st.integers(0, 10_000))
def test_generator_is_well_typed(seed):
    g = Gen(random.Random(seed))
    t = g.program(rec=seed % 3 == 0)
    assert isinstance(infer({}, t), T)
