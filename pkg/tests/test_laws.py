import pytest

from refstore.equiv import Distinguished, strict_equiv
from refstore.laws import MAKERS, check_case, format_table, make_case, run_law, run_laws
from refstore.rewrite import rule_set
from refstore.syntax import parse, show
from refstore.typecheck import infer


def test_every_rule_has_a_generator():
    assert set(MAKERS) == {r.name for r in rule_set()}


@pytest.mark.parametrize("rule", sorted(MAKERS))
def test_cases_are_reproducible_and_well_typed(rule):
    a, b = make_case(rule, 7), make_case(rule, 7)
    assert show(a.term) == show(b.term) and a.path == b.path
    infer({}, a.term)


@pytest.mark.parametrize("rule", sorted(MAKERS))
def test_each_rule_holds_on_a_few_cases(rule):
    r = run_law(rule, cases=10, seed=3)
    assert r.ok and r.passed == 10, r.first_failure


def test_a_bogus_law_is_caught():
    # dropping the step from set-get is not sound: the suite must notice
    case = make_case("set-get", 0)
    rhs, _ = check_case(case)
    broken = show(rhs).replace("step; ", "", 1)
    assert isinstance(strict_equiv(case.term, parse(broken)), Distinguished)


def test_table():
    text = format_table(run_laws(cases=3, rules=["set-get", "ring"]))
    lines = text.splitlines()
    assert lines[0].startswith("rule") and len(lines) == 4
    assert all(line.endswith("PASS") for line in lines[2:])
