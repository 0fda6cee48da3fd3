import io
import json

import numpy as np
import pytest

from starcorr.cli import Report, run
from starcorr.schemas import dump_bell_strategy, dump_matrix
from starcorr.bell import chsh_matrix, elegant_matrix
from starcorr.qnet import elegant_bell_strategy


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def elegant_files(tmp_path):
    code, out, _ = call("preset", "elegant_swap_bsm", "--out", tmp_path)
    assert code == 0
    files = json.loads(out)["results"]["files"]
    return files["scenario"], files["quantum"]


def test_preset_then_eval_quantum(elegant_files):
    code, out, _ = call("eval-quantum", *elegant_files)
    assert code == 0
    res = json.loads(out)["results"]
    assert abs(res["s_net"] - 6.92820323) < 1e-6 and res["bound"] == pytest.approx(6.0)
    assert res["violated"] is True


def test_bound_on_elegant(tmp_path):
    code, out, _ = call("bound", write(tmp_path / "m.json", dump_matrix(elegant_matrix())))
    assert code == 0 and json.loads(out)["results"]["bound"] == 6.0


def test_zero_matrix_is_invalid(tmp_path):
    code, out, err = call("bound", write(tmp_path / "z.json", {"rows": 2, "cols": 2, "entries": [[0, 0], [0, 0]]}))
    assert code == 2 and out == "" and "error" in err


def test_usage_errors(tmp_path):
    assert call("frobnicate")[0] == 1
    assert call()[0] == 1
    m = write(tmp_path / "m.json", dump_matrix(chsh_matrix()))
    assert call("saturate", m)[0] == 1
    assert call("bound", m, "--tol", "-1")[0] == 1


def test_invalid_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call("bound", bad)[0] == 2
    assert call("bound", tmp_path / "absent.json")[0] == 2


def test_visibility(elegant_files):
    code, out, _ = call("visibility", *elegant_files)
    assert code == 0
    assert json.loads(out)["results"]["critical_visibility"] == pytest.approx(np.sqrt(3) / 2, abs=1e-7)


def test_reports_are_byte_identical(elegant_files):
    first = call("visibility", *elegant_files, "--seed", 7)
    assert first == call("visibility", *elegant_files, "--seed", 7)
    assert json.loads(first[1])["results"]["seed"] == 7


def test_report_roundtrip(elegant_files):
    _, out, _ = call("eval-quantum", *elegant_files)
    assert Report.from_json(out).to_json() == out


def test_csv_columns(elegant_files):
    code, out, _ = call("eval-quantum", *elegant_files, "--format", "csv")
    header, row = out.strip().splitlines()
    cols = header.split(",")
    assert code == 0 and {"I_1", "I_2", "I_3", "s_net", "bound"} <= set(cols)
    assert float(row.split(",")[cols.index("I_2")]) == pytest.approx(16 / 3)


def test_global_flags_before_command(elegant_files):
    code, out, _ = call("--format", "csv", "eval-quantum", *elegant_files)
    assert code == 0 and "I_1" in out.splitlines()[0].split(",")


def test_classical_commands(tmp_path, elegant_files):
    scenario = elegant_files[0]
    code, out, _ = call("max-classical", scenario)
    res = json.loads(out)["results"]
    assert code == 0 and res["value"] == 6.0
    assert res["witness_evaluation"]["s_net"] == pytest.approx(6.0, abs=1e-9)
    strategy = write(tmp_path / "st.json", res["strategy"])
    code, out, _ = call("eval-classical", scenario, strategy)
    assert code == 0 and json.loads(out)["results"]["violated"] is False
    code, out, _ = call("reduce", scenario, strategy)
    res = json.loads(out)["results"]
    assert code == 0 and np.allclose(res["I"], res["I_reduced"], atol=1e-9)
    code, out, _ = call("star-bound", scenario)
    assert json.loads(out)["results"]["bound"] == pytest.approx(6.0)


def test_saturate(tmp_path):
    m = write(tmp_path / "m.json", dump_matrix(chsh_matrix()))
    code, out, _ = call("saturate", m, "--sources", 2)
    fams = json.loads(out)["results"]["families"]
    assert code == 0 and len(fams) == 4 and fams[0]["sign_pattern"] == [1, 1]


def test_tensorize(tmp_path):
    m = write(tmp_path / "m.json", dump_matrix(elegant_matrix()))
    bs = write(tmp_path / "bs.json", dump_bell_strategy(*elegant_bell_strategy()))
    code, out, _ = call("tensorize", m, bs, "--sources", 3, "--out", tmp_path / "net")
    res = json.loads(out)["results"]
    assert code == 0 and res["s_net"] == pytest.approx(4 * np.sqrt(3), abs=1e-9)
    code, out, _ = call("eval-quantum", res["files"]["scenario"], res["files"]["quantum"])
    assert json.loads(out)["results"]["s_net"] == pytest.approx(4 * np.sqrt(3), abs=1e-9)


def test_threads_env(monkeypatch, elegant_files):
    monkeypatch.setenv("STARCORR_THREADS", "2")
    assert json.loads(call("eval-quantum", *elegant_files)[1])["results"]["threads"] == 2
    monkeypatch.setenv("STARCORR_THREADS", "zero")
    assert call("eval-quantum", *elegant_files)[0] == 2


def test_timing_flag(elegant_files):
    assert json.loads(call("eval-quantum", *elegant_files)[1])["timing_ms"] == 0.0
    assert json.loads(call("eval-quantum", *elegant_files, "--timing")[1])["timing_ms"] > 0.0
