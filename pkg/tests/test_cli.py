import json
import subprocess
import sys

import pytest

from ietnue.cli import EXIT_CHECK, EXIT_INPUT, EXIT_OK, main


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("IETNUE_CACHE", str(tmp_path / "cache"))


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_rauzy_class_4321(capsys):
    code, doc = run_json(capsys, "rauzy", "class", "4321")
    assert code == EXIT_OK
    assert len(doc["graph"]["nodes"]) == 7 and len(doc["graph"]["edges"]) == 14
    assert len(doc["config_hash"]) == 64


def test_rauzy_class_21(capsys):
    _, doc = run_json(capsys, "rauzy", "class", "21")
    assert len(doc["graph"]["nodes"]) == 1


def test_rauzy_class_writes_dot(capsys, tmp_path):
    run(capsys, "rauzy", "class", "4321", "--out", str(tmp_path))
    dot = (tmp_path / "rauzy.dot").read_text()
    assert dot.count("->") == 14 and "config_hash=" in dot
    assert json.loads((tmp_path / "rauzy-class.json").read_text())["ok"]


def test_rauzy_step_from_text(capsys):
    code, doc = run_json(capsys, "rauzy", "step", '{"lengths": ["4/10", "3/10", "2/10", "1/10"], "perm": [4, 3, 2, 1]}')
    assert code == EXIT_OK and doc["move"] == "A" and doc["iet"]["perm"] == [4, 1, 3, 2]


def test_rauzy_step_from_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO('{"lengths": ["1/10", "2/10", "3/10", "4/10"], "perm": [4, 3, 2, 1]}'))
    code, doc = run_json(capsys, "rauzy", "step")
    assert code == EXIT_OK and doc["move"] == "B"


def test_rauzy_step_undefined_exit_code(capsys):
    code, doc = run_json(capsys, "rauzy", "step", '{"lengths": ["1/2", "1/2"], "perm": [2, 1]}')
    assert code == EXIT_INPUT and doc["error"] == "RauzyUndefined"


def test_bad_input_exit_code(capsys):
    code, doc = run_json(capsys, "rauzy", "class", "2134")
    assert code == EXIT_INPUT and doc["exit_code"] == EXIT_INPUT
    assert main(["verify", "no-such-check"]) == EXIT_INPUT
    code, _ = run(capsys, "verify", "line-seg", "--k", "0")
    assert code == EXIT_INPUT


def test_dimension_bound_prints_fraction(capsys):
    code, out = run(capsys, "dimension", "bound", "--a", "12", "--b", "8/3")
    assert code == EXIT_OK and out == "5/2\n"


def test_count(capsys):
    code, doc = run_json(capsys, "count", "--R", "128", "--D", "2")
    assert code == EXIT_OK
    assert [r for r, _ in doc["series"]] == [16, 32, 64, 128]
    assert doc["count"] == doc["series"][-1][1]
    assert 1.5 < doc["growth_exponent"] < 2.5


def test_count_csv_format(capsys):
    _, out = run(capsys, "count", "--R", "32", "--format", "csv")
    lines = out.splitlines()
    assert lines[0].startswith("# config_hash=") and lines[1] == "R,count"


def test_line_seg_reports_certified_bound(capsys):
    code, doc = run_json(capsys, "verify", "line-seg", "--k", "2")
    rep = doc["reports"][0]
    assert rep["certified_lower_bound"] == "1/50"
    assert code == (EXIT_OK if doc["ok"] else EXIT_CHECK)


def test_column_size_runs_all_samples(capsys):
    code, doc = run_json(capsys, "verify", "column-size", "--k", "1", "--samples", "20")
    assert doc["total"] == 20
    assert code == (EXIT_OK if doc["passed"] == 20 else EXIT_CHECK)


def test_conditions_report_has_fitted_coefficients(capsys):
    _, doc = run_json(capsys, "verify", "conditions", "--profile", "micro", "--k", "2")
    assert {"a", "b", "c", "dimension_bound", "overlapping_pairs"} <= set(doc)


def test_witness_emits_iet_and_certificate(capsys):
    code, doc = run_json(capsys, "witness", "--k", "2", "--mix", "1/2")
    assert doc["certificate"]["replay"]["matched"]
    assert doc["certificate"]["replay"]["in_cylinder"]
    assert doc["iet"]["perm"] == [4, 3, 2, 1]
    assert code == (EXIT_OK if doc["ok"] else EXIT_CHECK)


def test_witness_rejects_endpoint_mix(capsys):
    code, doc = run_json(capsys, "witness", "--k", "1", "--mix", "0")
    assert code == EXIT_INPUT and doc["error"] == "DomainError"


def test_cube_regression(capsys):
    code, doc = run_json(capsys, "dimension", "regress", "--family", "cube", "--samples", "8")
    assert code == EXIT_OK and abs(doc["fit"]["slope"] - 3) < 0.2


def test_reruns_are_byte_identical(capsys, tmp_path):
    argv = ["verify", "angle-decay", "--profile", "micro", "--k", "3"]
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, *argv, "--out", str(a))
    run(capsys, *argv, "--out", str(b))
    names = sorted(p.name for p in a.iterdir())
    assert names == ["verify-angle-decay.csv", "verify-angle-decay.json", "verify-angle-decay.svg"]
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    doc = json.loads((a / "verify-angle-decay.json").read_text())
    assert doc["config_hash"] in (a / "verify-angle-decay.csv").read_text()
    assert doc["config_hash"] in (a / "verify-angle-decay.svg").read_text()


def test_config_hash_tracks_the_seed(capsys):
    _, one = run_json(capsys, "count", "--R", "16", "--seed", "1")
    _, two = run_json(capsys, "count", "--R", "16", "--seed", "2")
    assert one["config_hash"] != two["config_hash"]


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "ietnue.cli", "dimension", "bound", "--a", "3", "--b", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.strip() == "2"
