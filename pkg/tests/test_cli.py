import csv
import json
import subprocess
import sys

import pytest

from solvrank.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("schema,rank", [("()", "1"), ("0", "0"), ("(~())", "2"), ("(~*())", "w + 1")])
def test_rank_tree(capsys, schema, rank):
    assert run(capsys, "rank-tree", schema)[:2] == (0, rank + "\n")


def test_rank_tree_parse_error(capsys):
    code, _, err = run(capsys, "rank-tree", "(()")
    assert code == 2 and "error" in err


def test_rank_solvable(capsys, tmp_path):
    assert run(capsys, "rank-solvable", "zero")[:2] == (0, "1\n")
    assert run(capsys, "rank-solvable", '{"type": "SinSqExample"}')[:2] == (0, "2\n")
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"type": "TreeSumCantor", "tree": "(~())"}), encoding="utf-8")
    stages = tmp_path / "stages.json"
    assert run(capsys, "rank-solvable", str(f), "--stages", str(stages))[:2] == (0, "3\n")
    js = json.loads(stages.read_text(encoding="utf-8"))
    assert js["format_version"] == 1 and js["stages"][-1]["empty"]


def test_exit_codes(capsys, monkeypatch):
    assert run(capsys, "rank-solvable", "westrick:(~*())")[0] == 3
    assert run(capsys, "rank-solvable", '{"type": "Nope"}')[0] == 3
    assert run(capsys, "rank-solvable", "not-a-file.json")[0] == 2
    monkeypatch.setenv("SOLVRANK_ORDINAL_CAP", "2")
    assert run(capsys, "rank-solvable", "cantor:(~())")[0] == 4
    monkeypatch.setenv("SOLVRANK_ORDINAL_CAP", "bogus")
    assert run(capsys, "rank-solvable", "cantor:(~())")[0] == 2


def test_verify(capsys):
    code, out, _ = run(capsys, "verify-correspondence", "--max-rank", "3")
    assert code == 0 and out.startswith("all ")
    code, out, _ = run(capsys, "verify-correspondence", "--max-rank", "0")
    assert code == 0 and "all 1 entries" in out
    assert run(capsys, "verify-correspondence", "--inject-mismatch")[0] == 1
    code, out, _ = run(capsys, "verify-correspondence", "--family", "free", "--seed", "0")
    assert code == 1 and out.startswith("MISMATCH")


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "zero", "--x", "1/3")
    assert code == 0 and out.splitlines()[0] == "[0, 0]"
    code, out, _ = run(capsys, "eval", "cantor:()", "--x", "0", "--deriv")
    assert code == 0 and out.splitlines()[0] == "[0, 0]"
    code, out, _ = run(capsys, "eval", "sinsq", "--x", "1/2", "--eps", "1/1048576")
    lo, hi = (float(v) for v in out.splitlines()[1].strip("[]").split(","))
    import math
    assert lo <= 0.25 * math.sin(2) <= hi
    assert run(capsys, "eval", "sinsq", "--x", "3/2")[0] == 2
    assert run(capsys, "eval", "sinsq", "--x", "abc")[0] == 2


def test_mu(capsys):
    assert run(capsys, "mu", "--n", "3")[:2] == (0, "7/8\n0.875\n")
    assert run(capsys, "mu", "--n", "-1")[0] == 2


def test_solve_ivp_zero_span(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, text, _ = run(capsys, "solve-ivp", "example1", "--t0", "1", "--t1", "1", "--out", str(out))
    rows = list(csv.reader(out.open(encoding="utf-8")))
    assert code == 0 and len(rows) == 2 and rows[0][:2] == ["format_version", "t"]
    assert "contained: yes" in text


def test_solve_ivp_coarse(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, text, _ = run(capsys, "solve-ivp", "example1", "--h", "1/64", "--out", str(out))
    assert code == 0 and "contained: yes" in text and "validation: pass" in text
    assert "width bound 0.05: exceeded" in text


def test_solve_ivp_bad_input(capsys):
    assert run(capsys, "solve-ivp", "example1", "--h", "0")[0] == 2
    assert run(capsys, "solve-ivp", "example2")[0] == 2


def test_kw_estimate(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid_step": "1/32", "max_stage": 3}), encoding="utf-8")
    out = tmp_path / "kw.csv"
    code, text, _ = run(capsys, "kw-estimate", "sinsq", "--config", str(cfg), "--out", str(out))
    assert code == 0 and text == "2\n"
    assert out.read_text(encoding="utf-8").startswith("format_version,")
    assert run(capsys, "kw-estimate", '{"type": "Nope"}')[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"epsilons": ["1/4", "1/2"]}', encoding="utf-8")
    assert run(capsys, "kw-estimate", "sinsq", "--config", str(bad))[0] == 2


def test_catalog_command(capsys):
    code, out, _ = run(capsys, "catalog")
    js = json.loads(out)
    assert code == 0 and js["format_version"] == 1 and len(js["entries"]) >= 12


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_byte_identical_runs():
    cmd = [sys.executable, "-m", "solvrank.cli", "verify-correspondence", "--max-rank", "w+2", "--seed", "5"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
