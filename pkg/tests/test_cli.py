import json

import pytest

from painleve4d.cli import run


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def invoke_json(capsys, *argv):
    code, out, _ = invoke(capsys, *argv)
    return code, json.loads(out)


def test_list(capsys):
    code, doc = invoke_json(capsys, "list")
    assert code == 0
    assert "d4" in doc["families"]
    assert doc["generators"]["d4"] == ["s0", "s1", "s2", "s3", "s4",
                                       "pi1", "pi2", "pi3", "pi4"]
    assert doc["chart_sets"]["d52"] == ["r0", "r1", "r2", "r3", "r4"]


def test_show(capsys):
    code, doc = invoke_json(capsys, "show", "d4")
    assert code == 0
    assert doc["pairs"] == [["x", "y"], ["z", "w"]]
    assert doc["constraint"]["coeffs"]["a2"] == "2"


def test_apply_involution_roundtrip(capsys):
    point = "1/2,1/3,1/5,1/7,2"
    params = "1/8,1/8,1/8,1/4,1/4"
    code, doc = invoke_json(capsys, "apply", "d4", "s2", "s2",
                            "--point", point, "--params", params)
    assert code == 0
    assert doc["output"] == doc["input"]


def test_apply_symbolic(capsys):
    code, doc = invoke_json(capsys, "apply", "d4", "s1", "pi2")
    assert code == 0
    assert len(doc["letters"]) == 2


def test_apply_dimension_mismatch(capsys):
    code, _, err = invoke(capsys, "apply", "d4", "s1", "--point", "1/2,1/3")
    assert code == 2
    assert "expected" in err


def test_verify_small_suite(capsys):
    code, doc = invoke_json(capsys, "verify", "--suite", "fields,integrals",
                            "--format", "json")
    assert code == 0
    names = [c["check"] for c in doc["checks"]]
    assert names == sorted(names)
    assert "fields/d4" in names and "integrals/toy/deg1" in names
    assert all(c["status"] == "pass" for c in doc["checks"])


def test_verify_family_filter(capsys):
    code, doc = invoke_json(capsys, "verify", "--suite", "symmetry",
                            "--family", "d51", "--format", "json")
    assert code == 0
    assert len(doc["checks"]) == 6
    assert all(c["check"].startswith("symmetry/d51/") for c in doc["checks"])


def test_verify_deterministic(capsys):
    argv = ("verify", "--suite", "coxeter", "--family", "d4",
            "--mode", "random", "--seed", "7", "--samples", "4",
            "--format", "json")
    _, first = invoke_json(capsys, *argv)
    _, second = invoke_json(capsys, *argv)
    for doc in (first, second):
        for check in doc["checks"]:
            check.pop("elapsed_ms", None)
    assert first == second


def test_verify_parallel_same_order(capsys):
    argv = ("verify", "--suite", "fields,confluence", "--format", "json")
    _, serial = invoke_json(capsys, *argv)
    _, parallel = invoke_json(capsys, *argv, "--jobs", "4")
    assert ([c["check"] for c in serial["checks"]]
            == [c["check"] for c in parallel["checks"]])


def test_verify_alt_reflections_do_not_fail_run(capsys):
    code, doc = invoke_json(capsys, "verify", "--suite", "symmetry",
                            "--family", "d4alt", "--format", "json")
    assert code == 0
    statuses = {c["check"]: c["status"] for c in doc["checks"]}
    assert statuses["symmetry/d4alt/w2"] == "inconclusive"
    assert statuses["symmetry/d4alt/w0"] == "pass"


def test_verify_unknown_suite(capsys):
    code, _, err = invoke(capsys, "verify", "--suite", "nosuch")
    assert code == 2
    assert "unknown suite" in err


def test_unknown_subcommand(capsys):
    assert invoke(capsys, "bogus")[0] == 2


def test_unknown_family(capsys):
    assert invoke(capsys, "show", "nope")[0] == 2


def test_degenerate(capsys):
    code, doc = invoke_json(capsys, "degenerate", "--format", "json",
                            "--dump-field")
    assert code == 0
    assert len(doc["checks"]) == 6
    assert doc["epsilon_field"]["time"] == "T"


def test_integrate_default(capsys, tmp_path):
    out = tmp_path / "traj.jsonl"
    code, doc = invoke_json(capsys, "integrate", "--output", str(out))
    assert code == 0
    assert doc["defect"] < 1e-8
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2001
    first = json.loads(lines[0])
    assert first["t_re"] == pytest.approx(1.0)


def test_integrate_threshold_failure(capsys, tmp_path):
    bench = tmp_path / "bench.json"
    bench.write_text(json.dumps({"defect_threshold": 1e-15}))
    code, doc = invoke_json(capsys, "integrate", str(bench))
    assert code == 1
    assert doc["defect"] > 1e-15


def test_search_integrals(capsys):
    code, doc = invoke_json(capsys, "search-integrals", "toy",
                            "--deg", "1", "--twin=-1,1")
    assert code == 0
    assert doc["count"] == 3


def test_probe_is_observational(capsys):
    code, doc = invoke_json(capsys, "probe-assumption-a", "d4",
                            "--format", "json")
    assert code == 0
    statuses = {c["check"]: c["status"] for c in doc["checks"]}
    assert statuses["holomorphy/open-probe/r2/d4"] == "inconclusive"
    assert statuses["holomorphy/open-probe/r1/d4"] == "pass"


def test_help_exits_zero(capsys):
    assert invoke(capsys, "--help")[0] == 0
