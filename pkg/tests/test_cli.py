import json
import subprocess
import sys
from pathlib import Path

import pytest

from amalgamkit.cli import main

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_reduce(capsys):
    assert run(capsys, "reduce", "--group", "gamma", "g0 g0") == (0, "e\n", "")
    code, out, _ = run(capsys, "reduce", "g0 h:1 g0 h:1 g0 h:1")
    assert out == "e\n"
    code, out, _ = run(capsys, "reduce", "h:10 g0")
    assert out == "g0 h:0\n"


def test_reduce_finite(capsys):
    code, out, _ = run(capsys, "reduce", "--group", "s3", "0:(0,1) 0:(0,1)")
    assert (code, out) == (0, "e\n")


def test_mul(capsys):
    code, out, _ = run(capsys, "mul", "g0 h:1", "g0 h:1", "g0 h:1")
    assert (code, out) == (0, "e\n")


def test_theta(capsys):
    assert run(capsys, "theta", "--word", "h:0")[1] == "(-1,1)\n"
    code, out, _ = run(capsys, "theta", "--word", "h:0 g1", "--json")
    assert json.loads(out) == {"in_gamma_prime": True, "theta": [1, 1], "word": "h:0 g1"}


def test_kernel_spec(capsys):
    code, out, _ = run(capsys, "kernel", "--spec", str(SPECS / "sl2.json"))
    assert code == 0 and "ker = Z2" in out
    code, out, _ = run(capsys, "kernel", "--spec", str(SPECS / "sl2.json"), "--json")
    d = json.loads(out)
    assert d["ker_type"] == "Z2" and d["ker_order"] == 2


def test_kernel_spec_bare_name(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(capsys, "kernel", "--spec", "sl2.json")
    assert code == 0 and "ker = Z2" in out


def test_kernel_gamma(capsys):
    code, out, _ = run(capsys, "kernel", "--depth", "2", "--with-ker", "--json")
    d = json.loads(out)
    assert code == 0 and d["members"] == 8 and d["undecided"] == [] and d["ker"] == ["e"]


def test_classify_text_and_json_agree(capsys):
    code, text, _ = run(capsys, "classify", "--group", "s3")
    code2, js, _ = run(capsys, "classify", "--group", "s3", "--json")
    d = json.loads(js)
    assert code == code2 == 0
    for key in ("ker_trivial", "k0_trivial", "all_equivalent", "fc_equals_ker"):
        assert f"{key}: {'yes' if d[key] else 'no'}" in text


def test_classify_needs_finite(capsys):
    code, out, err = run(capsys, "classify")
    assert code == 2 and "usage:" in err


def test_c_chain(capsys):
    code, out, _ = run(capsys, "c-chain", "--depth", "2", "-k", "2", "--json")
    d = json.loads(out)
    assert d["total"] == 64 and [r["count"] for r in d["chain"]] == [32, 8]
    code, out, _ = run(capsys, "c-chain", "--group", "s3")
    assert "k=1: |A|=1 |B|=1 |C|=1" in out


def test_conjugate_out(capsys):
    code, out, _ = run(capsys, "conjugate-out", "--group", "s3")
    assert code == 0 and "verified: yes" in out
    code, out, _ = run(capsys, "conjugate-out", "--element", "h:0", "--max-len", "4", "--json")
    d = json.loads(out)
    assert code == 1 and d["success"] is False and d["stuck"] == "h:0"


def test_failure_report_embeds_witness(capsys):
    # ker of sl2 is all of H, so nothing can be conjugated out
    code, out, _ = run(capsys, "conjugate-out", "--spec", str(SPECS / "sl2.json"), "--json")
    d = json.loads(out)
    assert code == 1 and d["stuck"] == "h:(0,1)" and d["words_tried"] > 0


def test_conjugate_out_rejects_non_H(capsys):
    assert run(capsys, "conjugate-out", "--element", "g0")[0] == 2


def test_tree(capsys):
    code, out, _ = run(capsys, "tree", "--radius", "1")
    assert out.count(" -- ") == 5
    code, out, _ = run(capsys, "tree", "--radius", "2", "--format", "json")
    d = json.loads(out)
    assert len(d["vertices"]) == 14 and len(d["edges"]) == 13
    code, out, _ = run(capsys, "tree", "--radius", "3", "--format", "summary")
    assert "interior_degrees: 3" in out and "is_tree: yes" in out


def test_verify_presentation(capsys):
    code, out, _ = run(capsys, "verify-presentation", "--max-len", "3", "--identity-depth", "1")
    assert code == 0 and out.rstrip().endswith("PASS")


@pytest.mark.parametrize(
    "argv",
    [
        ["reduce", "g0 h:2"],
        ["reduce", "--group", "nope", "g0"],
        ["theta", "--group", "s3", "--word", "g0"],
        ["kernel", "--spec", "missing.json"],
        ["tree", "--radius", "12"],
        ["selftest", "--only", "42"],
    ],
)
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and "usage:" in err and out == ""


def test_usage_error_reports_position(capsys):
    _, _, err = run(capsys, "reduce", "g0 g1 x")
    assert "position 2" in err


def test_argparse_errors():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    assert main([]) == 2


def test_invalid_spec(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"G0": [[0, 0]]}')
    assert run(capsys, "kernel", "--spec", str(bad))[0] == 2


def test_selftest_subset(capsys):
    code, out, _ = run(capsys, "selftest", "--only", "6", "--only", "7")
    assert code == 0 and out.count("[PASS]") == 2 and "ALL PASS" in out


def test_byte_identical_output():
    cmd = [sys.executable, "-m", "amalgamkit.cli", "classify", "--group", "sl2", "--json"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["ker_type"] == "Z2"
