import json

import pytest

from conftest import CORPUS
from refstore.cli import main, parse_script

E = str(CORPUS)


def run(capsys, *argv):
    code = main(["--deterministic", *argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def summary(out: str) -> dict:
    line = out.strip().splitlines()[-1]
    assert line.startswith("summary: ")
    return json.loads(line[len("summary: "):])


def test_derive_counter(capsys):
    code, out, _ = run(capsys, "derive", f"{E}/counter.trace")
    assert code == 0 and summary(out)["valid"] is True


def test_run_getalloc(capsys):
    code, out, _ = run(capsys, "run", f"{E}/getalloc.ref", "--fuel", "10")
    assert code == 0 and "steps=1" in out and "value=0" in out


def test_run_landin_converges_and_times_out(capsys):
    assert run(capsys, "run", f"{E}/landin.ref#knot", "--fuel", "10")[0] == 0
    code, out, _ = run(capsys, "run", f"{E}/landin.ref#diverge", "--fuel", "100")
    assert code == 2 and summary(out)["verdict"] == "timeout"


def test_check(capsys):
    code, out, _ = run(capsys, "check", f"{E}/counter.ref")
    assert code == 0 and "posCounter : T {incr : T Unit, read : T Int}" in out


def test_probe(capsys):
    code, out, _ = run(capsys, "probe", f"{E}/counter.ref#negCounter", "--script", "incr,incr,read")
    assert code == 0 and summary(out)["results"][-1] == 2


@pytest.mark.parametrize("args, code, verdict", [
    (["poscounter.ref", "negcounter.ref", "--mode", "probe"], 0, "equivalent"),
    (["poscounter.ref", "zerocounter.ref", "--mode", "probe"], 1, "distinguished"),
    (["allocret.ref", "ret10.ref"], 1, "distinguished"),
    (["landin.ref#diverge", "landin.ref#diverge"], 2, "inconclusive"),
])
def test_equiv_exit_codes(capsys, args, code, verdict):
    files = [f"{E}/{a}" if ".ref" in a else a for a in args]
    got, out, _ = run(capsys, "equiv", *files)
    assert got == code and summary(out)["verdict"] == verdict


def test_normalize(capsys):
    code, out, _ = run(capsys, "normalize", f"{E}/counter.ref#negCounter")
    assert code == 0 and "set l (i - 1)" in out
    assert run(capsys, "normalize", f"{E}/laws.ref#rec_unfold_lhs")[0] == 1


def test_laws_subset(capsys):
    code, out, _ = run(capsys, "laws", "--cases", "5", "--rule", "set-get", "--rule", "alloc-permute")
    assert code == 0 and summary(out)["passed"] == 2


def test_deterministic_output_is_byte_identical(capsys):
    args = ("equiv", f"{E}/counter.ref#posCounter", f"{E}/counter.ref#negCounter", "--mode", "probe")
    assert run(capsys, *args) == run(capsys, *args)
    main(list(args))
    assert "seconds" in summary(capsys.readouterr().out)


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["run"],
    ["run", f"{E}/getalloc.ref", "--fuel", "-1"],
    ["equiv", f"{E}/poscounter.ref", f"{E}/negcounter.ref", "--fuel-ladder", "4,x"],
    ["probe", f"{E}/poscounter.ref", "--script", "reset"],
    ["laws", "--rule", "nope"],
])
def test_usage_errors_exit_64(capsys, argv):
    assert main(argv) == 64


def test_bad_input_exits_65(capsys, tmp_path):
    bad = tmp_path / "bad.ref"
    bad.write_text("x <- ;")
    assert main(["run", str(bad)]) == 65
    assert main(["run", str(tmp_path / "missing.ref")]) == 65
    assert main(["run", f"{E}/counter.ref#nothere"]) == 65


def test_ill_typed_input_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.ref"
    bad.write_text("get 3")
    assert main(["check", str(bad)]) == 1
    assert main(["run", str(bad)]) == 1


def test_parse_script():
    calls = parse_script("get, set(3), set((1, 2))")
    assert [str(c) for c in calls] == ["get", "set(3)", "set((1, 2))"]
