import json
from pathlib import Path

import pytest

from heightlab import __version__
from heightlab.cli import RunConfig, main, resolve_config
from heightlab.report import format_float, to_json

ROOT = Path(__file__).resolve().parent.parent
X3M2 = str(ROOT / "curves" / "x3m2.cfg")
X3P1 = str(ROOT / "curves" / "x3p1.cfg")


def run_json(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_classify_agree(capsys):
    code, rep = run_json(capsys, "classify", "--model", "p1xp1", "--divisor", "1,1", "--ample", "1,1", "--bound", "40")
    assert code == 0
    assert rep["version"] == __version__
    assert rep["config"]["model"] == "p1xp1"
    r = rep["result"]
    assert r["exact"]["label"] == "ample" and r["empirical"]["label"] == "ample" and r["agree"]


def test_classify_zero_class(capsys):
    code, rep = run_json(capsys, "classify", "--model", "p1xp1", "--divisor", "0,0", "--ample", "1,1", "--bound", "30")
    r = rep["result"]
    assert code == 0 and r["exact"]["nef"] and not r["exact"]["ample"]
    assert r["empirical"]["per_window_min"] == [0.0] * 8


def test_classify_blowup_exceptional(capsys):
    code, rep = run_json(capsys, "classify", "--model", "blowup_p2", "--divisor", "0,1", "--ample", "3,-1",
                         "--exclude", "E", "--bound", "60")
    r = rep["result"]
    assert code == 0 and r["exact"]["effective"] and not r["exact"]["nef"]
    assert r["empirical"]["estimate"] >= 0 and r["criterion"] == "pseudo_effective"


def test_wrong_vector_length_is_config_error(capsys):
    code = main(["classify", "--model", "p1xp1", "--divisor", "1", "--ample", "1,1"])
    assert code == 1
    assert "coordinates" in capsys.readouterr().err


def test_canonical(capsys):
    code, rep = run_json(capsys, "canonical", "--curve", X3M2, "--point", "3,5", "--tol", "1e-8")
    assert code == 0
    r = rep["result"]
    assert r["error_radius"] <= 1e-8 and r["value"] == pytest.approx(0.67478841784, abs=2e-8)


def test_canonical_convergence_exit(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"curve": X3M2, "point": "3,5", "tol": 1e-300}))
    assert main(["canonical", "--config", str(cfg)]) == 4


def test_enumerate_count(capsys):
    code, rep = run_json(capsys, "enumerate", "--model", "p1", "--bound", "5", "--count-only")
    assert code == 0 and rep["result"]["count"] == 40
    code, rep = run_json(capsys, "enumerate", "--model", "p1", "--bound", "1")
    assert rep["result"]["points"] == ["1:0", "0:1", "1:1", "1:-1"]


def test_probe_torsion(capsys):
    code, rep = run_json(capsys, "probe", "--curve", X3P1, "--divisor", "0", "--point", "2,3", "--ample", "1,O")
    assert code == 0 and rep["result"]["label"] == "bounded" and rep["result"]["range"] == 0


def test_equiv_and_mu(capsys):
    code, rep = run_json(capsys, "equiv", "--model", "p1xp1", "--divisor", "1,0", "--other", "0,1",
                         "--ample", "1,1", "--bound", "30")
    assert code == 0 and rep["result"]["verdict"] == "not equivalent"
    code, rep = run_json(capsys, "mu", "--model", "p1xp1", "--map", "segre", "--ample", "1,1",
                         "--divisor", "1", "--bound", "30")
    assert rep["result"]["value"] == 1.0 and rep["result"]["exact_upper_bound"] == "1"


def test_csv_and_plot_output(capsys, tmp_path):
    plot = tmp_path / "plot.csv"
    code = main(["flim", "--model", "p1xp1", "--divisor", "1,0", "--ample", "1,1", "--bound", "10",
                 "--format", "csv", "--emit-plot-data", str(plot)])
    out = capsys.readouterr().out.splitlines()
    assert code == 0 and out[0] == "window,threshold,min_ratio,max_ratio,samples" and len(out) == 9
    assert plot.read_text().splitlines()[0] == "h_D,ratio,weight"


def test_config_file_and_flags_win(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "p1xp1", "divisor": "1,0", "bound": 5, "tol": 0.2}))
    rc = resolve_config(["flim", "--config", str(cfg), "--bound", "7"])
    assert rc.bound == 7 and rc.tol == 0.2 and rc.divisor == "1,0"


def test_config_roundtrip():
    rc = resolve_config(["probe", "--curve", X3P1, "--divisor", "0", "--point", "2,3", "--exclude", "b", "--exclude", "a"])
    again = RunConfig.from_dict(json.loads(rc.canonical()))
    assert again.canonical() == rc.canonical()
    assert rc.exclude == ["a", "b"] and rc.model == "elliptic"


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"modle": "p1"}))
    assert main(["flim", "--config", str(bad)]) == 1
    assert main(["flim", "--model", "p1xp1", "--divisor", "1,0", "--exclude", "nowhere"]) == 1
    assert main(["canonical", "--curve", "missing.cfg", "--point", "1,1"]) == 1
    assert main(["flim", "--model", "p1xp1", "--divisor", "1,0", "--no-seedless"]) == 1


def test_unsupported_exit_code(capsys):
    code = main(["flim", "--model", "p1xp1", "--divisor", "1,0", "--ample", "1,1", "--bound", "4",
                 "--height-bound", "40"])
    assert code == 2


def test_curve_fallback_to_shipped_copy(capsys):
    code, rep = run_json(capsys, "canonical", "--curve", "x3m2.cfg", "--point", "3,5")
    assert code == 0


def test_shipped_curves_identical():
    for name in ("x3p1.cfg", "x3m2.cfg"):
        assert (ROOT / "curves" / name).read_bytes() == (ROOT / "src" / "heightlab" / "curves" / name).read_bytes()


def test_report_formatting():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1.0"
    assert to_json({"a": [1, 2.5, None], "b": float("nan")}) == '{\n  "a": [1, 2.5, null],\n  "b": null\n}\n'


def test_output_to_file_is_deterministic(tmp_path):
    out = tmp_path / "r.json"
    argv = ["classify", "--model", "blowup_p2", "--divisor", "2,1", "--ample", "3,-1",
            "--exclude", "L", "--bound", "40", "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
