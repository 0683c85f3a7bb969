import json
import subprocess
import sys

import pytest

from helpers import VERIFY_CASES
from loopsum import corpus
from loopsum.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

FIG3 = str(corpus.path("fig3"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_summarize_success(capsys):
    code, out, _ = run(capsys, "summarize", FIG3)
    report = json.loads(out)
    assert code == EXIT_OK and report["status"] == "SUCCESS"
    assert report["loops"][0]["variables"] == ["x", "i"]


def test_summarize_failure_exit_code(capsys):
    code, out, _ = run(capsys, "summarize", str(corpus.path("expanding")))
    assert code == EXIT_FAIL and json.loads(out)["status"] != "SUCCESS"


def test_json_out_is_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "summarize", str(corpus.path("fig1c")), "--json-out", str(a))
    run(capsys, "summarize", str(corpus.path("fig1c")), "--json-out", str(b))
    assert a.read_bytes() == b.read_bytes() and a.read_bytes()


def test_verify_reports_and_exit_code(capsys):
    code, out, err = run(capsys, "verify", str(VERIFY_CASES / "fig3_after.wl"))
    assert code == EXIT_FAIL
    assert err.splitlines() == ["16:1 assert(i >= 100) HOLDS", "17:1 assert(i <= 101) VIOLATED"]
    assert json.loads(out)["assertions"][1]["witness"] == {"inputs": {"x": -7, "i": 1}}


def test_verify_all_hold(tmp_path, capsys):
    f = tmp_path / "ok.wl"
    f.write_text("// input x in [0, 9]\nwhile (x < 10) { x = x + 1; }\nassert(x == 10);\n")
    code, _, err = run(capsys, "verify", str(f))
    assert code == EXIT_OK and err.strip().endswith("HOLDS")


def test_oracle_diff(capsys):
    code, out, _ = run(capsys, "oracle-diff", FIG3, "--inputs", "40", "--seed", "3")
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["compared"] == report["matched"] == 40 and report["match_rate"] == 1.0


@pytest.mark.parametrize("cmd,marker", [("dump-cfg", "digraph"), ("dump-csg", "digraph"),
                                        ("dump-spaths", "B [invalid]")])
def test_dumps(capsys, cmd, marker):
    code, out, _ = run(capsys, cmd, FIG3)
    assert code == EXIT_OK and marker in out
    assert run(capsys, cmd, FIG3)[1] == out


def test_empty_program(tmp_path, capsys):
    f = tmp_path / "empty.wl"
    f.write_text("")
    code, out, _ = run(capsys, "summarize", str(f))
    assert code == EXIT_OK and json.loads(out)["loops"] == []


def test_parse_error_is_usage(tmp_path, capsys):
    f = tmp_path / "bad.wl"
    f.write_text("int x = ;\n")
    code, _, err = run(capsys, "summarize", str(f))
    assert code == EXIT_USAGE and err.startswith(f"{f}:1:")


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["summarize", "/nonexistent.wl"]) == EXIT_USAGE
    assert main(["summarize", FIG3, "--max-cases", "0"]) == EXIT_USAGE
    capsys.readouterr()


def test_smt_log(tmp_path, capsys):
    log = tmp_path / "smt.log"
    run(capsys, "summarize", FIG3, "--backend", "smt", "--log-smt", str(log))
    assert "(check-sat)" in log.read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "loopsum", "dump-spaths", FIG3],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "A" in proc.stdout
