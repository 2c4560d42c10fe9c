import pytest

from conftest import CORPUS
from refstore.equiv import Distinguished, Equivalent, probe_equiv, strict_equiv
from refstore.rewrite import (
    IsoWitness, NoMatch, ObligationFailed, RuleError, TraceSyntaxError, TypeRegression,
    apply_rule, check_iso, check_trace, format_trace, get_rule, matching_paths, parse_trace, rule_set,
)
from refstore.syntax import INT, NEG, Ref, alpha_eq, parse

SHIFT = IsoWitness(parse(r"\(x : Int). x + 1"), parse(r"\(x : Int). x - 1"))


def rw(src, rule, path=(), **kw):
    return apply_rule(parse(src), rule, path, **kw)


@pytest.mark.parametrize("src, rule, path, out", [
    ("l <- alloc 0; set l 5; get l", "set-get", (1,), "l <- alloc 0; step; set l 5; ret 5"),
    ("x <- alloc 3; set x 3; ret x", "alloc-set", (), "alloc 3"),
    ("l <- alloc 0; set l 1; set l 2", "set-set", (1,), "l <- alloc 0; set l 2"),
    ("l <- alloc 0; x <- get l; set l x; ret x", "get-set", (1,), "l <- alloc 0; get l"),
    ("l <- alloc 0; get l; ret 1", "get-discard", (1,), "l <- alloc 0; step; ret 1"),
    ("(rec f (n : Int) : T Int. ret n) 2", "rec-unfold", (), "step; ret 2"),
    ("x <- ret 3; ret (x + 1)", "bind-left-unit", (), "ret (3 + 1)"),
    ("l <- alloc 0; x <- get l; ret x", "bind-right-unit", (1,), "l <- alloc 0; get l"),
    ("step; ret 1", "step-central", (), "x <- ret 1; step; ret x"),
    ("map neg (ret 1)", "map-def", (), "x <- ret 1; ret (neg x)"),
    ("ret (fst (1, 2))", "beta-fst", (0,), "ret 1"),
    ("l <- alloc 1; k <- alloc (); ret (l, k)", "alloc-permute", (), "k <- alloc (); l <- alloc 1; ret (l, k)"),
])
def test_rules_left_to_right(src, rule, path, out):
    assert alpha_eq(rw(src, rule, path), parse(out))


def test_open_terms_use_a_context():
    out = rw("x <- get l; ret x", "bind-right-unit", ctx={"l": Ref(INT)})
    assert out == parse("get l")


def test_right_to_left_with_bindings():
    out = rw("l <- alloc 0; set l 2", "set-set", (1,), direction="rtl", bindings={"a": parse("7")})
    assert alpha_eq(out, parse("l <- alloc 0; set l 7; set l 2"))
    with pytest.raises(NoMatch, match="binding"):
        rw("ret 1", "beta-fst", (0,), direction="rtl")


def test_rule_errors():
    with pytest.raises(RuleError):
        rw("ret 1", "no-such-rule")
    with pytest.raises(NoMatch):
        rw("ret 1", "beta-fst", (5,))
    with pytest.raises(NoMatch):
        rw("ret 1", "get-discard")
    with pytest.raises(TypeRegression):
        rw("l <- alloc 0; set l 2", "set-set", (1,), direction="rtl", bindings={"a": parse("()")})


def test_rep_indep_obligations():
    cell = r"l <- alloc 0; ret (get l, \(v : Int). set l v)"
    out = rw(cell, "rep-indep", witness=SHIFT)
    # the stored representation changes, so only the Cell interface agrees
    assert isinstance(strict_equiv(parse(cell), out), Distinguished)
    assert isinstance(probe_equiv(parse(cell), out, 3), Equivalent)
    with pytest.raises(ObligationFailed):
        rw(cell, "rep-indep", witness=IsoWitness(SHIFT.fplus, SHIFT.fplus))
    with pytest.raises(NoMatch):
        rw("l <- alloc 0; ret (get l, l)", "rep-indep", witness=IsoWitness(NEG, NEG))
    with pytest.raises(RuleError):
        rw(cell, "rep-indep")


def test_check_iso():
    assert check_iso(IsoWitness(NEG, NEG), INT).sigma == INT
    with pytest.raises(ObligationFailed):
        check_iso(IsoWitness(NEG, SHIFT.fplus), INT)


def test_catalogue():
    names = [r.name for r in rule_set()]
    assert len(names) == len(set(names)) == 23
    for n in ["set-get", "alloc-set", "set-set", "get-get-commute", "get-set", "get-discard",
              "rec-unfold", "alloc-permute", "rep-indep", "step-central"]:
        assert get_rule(n).citation


def test_matching_paths():
    assert matching_paths(parse("l <- alloc 0; set l 1; set l 2"), "set-set") == [(1,)]
    # right-nested sequencing needs bind-assoc first
    assert matching_paths(parse("l <- alloc 0; set l 1; set l 2; get l"), "set-set") == []


def test_counter_trace(counters):
    tr = parse_trace((CORPUS / "counter.trace").read_text())
    rep = check_trace(tr)
    assert rep.valid and [s.rule for s in rep.steps] == ["rep-indep", "simplify", "ring"]
    assert alpha_eq(rep.final, counters["negCounter"])
    again = parse_trace(format_trace(tr))
    assert check_trace(again).valid


def test_broken_trace_reports_the_step():
    text = (CORPUS / "counter.trace").read_text().replace("iso neg neg", r"iso neg (\(x : Int). x + 1)")
    rep = check_trace(parse_trace(text))
    assert not rep.valid and rep.steps[0].ok is False and "step 1" in rep.message


def test_wrong_end_is_invalid():
    rep = check_trace(parse_trace("start ret (fst (1, 2))\nrule beta-fst at [0]\nend ret 2"))
    assert not rep.valid and "alpha-equal" in rep.message


def test_trace_syntax_errors():
    with pytest.raises(TraceSyntaxError):
        parse_trace("rule beta-fst at [0]")
    with pytest.raises(TraceSyntaxError):
        parse_trace("start ret 1\nrule beta-fst at [0] sideways")
    with pytest.raises(TraceSyntaxError):
        parse_trace("start ret 1\nfrobnicate")
