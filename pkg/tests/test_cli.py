import csv
import io
import json
import math
import subprocess
import sys

import pytest

from dualnopa import SystemConfig
from dualnopa.analysis import AxisSpec
from dualnopa.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_UNSTABLE, EXIT_USAGE, RunManifest, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_stability_stable(capsys):
    code, out, _ = run(capsys, "stability", "--x", "0.4", "--y", "1", "--alpha", "1", "--kappa-scale", "0")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["stable"] and doc["closed_form_holds"]
    assert doc["margin"] == pytest.approx(math.sqrt(2) - 1 - 0.4, abs=1e-12)


def test_stability_unstable(capsys):
    code, out, _ = run(capsys, "stability", "--x", "1.0", "--y", "1", "--alpha", "1", "--kappa-scale", "0")
    assert code == EXIT_UNSTABLE
    assert json.loads(out)["stable"] is False


@pytest.mark.parametrize("argv", [
    ["stability", "--x", "2"],
    ["stability", "--alpha", "0"],
    ["stability", "--x", "abc"],
    ["stability", "--kappa", "-1"],
    ["frobnicate"],
    ["sweep", "--axis", "m:1:0:3"],
    ["sweep", "--axis", "m:0:1:1"],
    ["spectra", "--omega", "fast"],
    ["validate", "--samples", "0"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == EXIT_USAGE


def test_tables_transmission(capsys):
    code, out, _ = run(capsys, "tables", "--which", "transmission")
    assert code == EXIT_OK
    lines = [ln for ln in out.splitlines() if ln.strip().startswith("alpha=")]
    assert len(lines) == 3
    assert all(ln.endswith("PASS") for ln in lines)
    assert "1.52303" in lines[1] and "1.61856" in lines[1]


def test_tables_json_both(capsys):
    code, out, _ = run(capsys, "tables", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert len(doc["transmission"]) == 3 and len(doc["amplification"]) == 4
    assert all(row["pass"] for rows in doc.values() for row in rows)


def test_tables_fail_off_reference(capsys):
    # a different pump strength moves the roots away from the tabulated ones
    code, out, _ = run(capsys, "tables", "--which", "transmission", "--kappa-scale", "1e7")
    assert code == EXIT_FAIL
    assert "FAIL" in out


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--samples", "1000", "--seed", "7")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["pass"] and doc["seed"] == 7
    assert doc["lossless_max_dev"] < 1e-9 and doc["lossy_max_dev"] < 1e-9
    assert doc["stability_disagreements"] == 0


def test_optimize(capsys):
    code, out, _ = run(capsys, "optimize", "--theta1", "0.6", "--theta2", "0.2")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["phi0"] == pytest.approx(-0.4, abs=1e-12)
    assert doc["branch"] == "inner"
    assert doc["v_im"] <= doc["v_ps"]


def test_boundary(capsys):
    code, out, _ = run(capsys, "boundary", "--alpha", "0.95")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["m1"] == pytest.approx(1.50311, abs=1e-4)
    assert len(doc["region"]) == 3


def test_boundary_vacuum(capsys):
    code, out, _ = run(capsys, "boundary", "--x", "1e-300", "--alpha", "0.9")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["boundary"] is None and doc["region"] == []


def test_boundary_unstable(capsys):
    code, _, err = run(capsys, "boundary", "--x", "1", "--kappa-scale", "0")
    assert code == EXIT_UNSTABLE
    assert "Hurwitz" in err or "stable" in err


def test_spectra_csv(capsys):
    code, out, _ = run(capsys, "spectra", "--kappa-scale", "0", "--omega", "0,1e6", "--omega", "1e7")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["omega"]) for r in rows] == [0.0, 1e6, 1e7]
    assert rows[0]["v_plus"] == f"{2 / 1681:.9g}"
    assert rows[0]["entangled"] == "true"


def test_spectra_engine_both(capsys):
    code, out, _ = run(capsys, "spectra", "--alpha", "0.95", "--theta1", "0.5", "--format", "json",
                       "--engine", "both")
    assert code == EXIT_OK
    (row,) = json.loads(out)
    assert row["v_plus"] == pytest.approx(row["v_closed_form"], rel=1e-9)


def test_spectra_unstable(capsys):
    code, _, _ = run(capsys, "spectra", "--x", "1", "--kappa-scale", "0")
    assert code == EXIT_UNSTABLE


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "m:0:3:4", "--axis", "n:0:1:2", "--quantity", "v_im-v_ps",
                       "--db", "--alpha", "0.95")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["m", "n", "v_im-v_ps_db"]
    assert len(rows) == 9
    assert max(float(r[2]) for r in rows[1:]) <= 1e-12


def test_sweep_engine_both(capsys):
    code, _, err = run(capsys, "sweep", "--axis", "m:-2:2:3", "--axis", "phi:-1:1:3", "--quantity", "v",
                       "--alpha", "0.97", "--engine", "both")
    assert code == EXIT_OK
    assert "max deviation" in err


def test_sweep_unstable_sentinel(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "x:0.2:1:3", "--format", "json")
    assert code == EXIT_OK
    values = [r["value"] for r in json.loads(out)["rows"]]
    assert values[-1] == "unstable" and isinstance(values[0], float)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"x": 0.3, "alpha": 0.9, "theta1": 0.6, "theta2": 0.2}))
    _, from_file, _ = run(capsys, "optimize", "--config", str(path))
    _, flagged, _ = run(capsys, "optimize", "--config", str(path), "--theta1", "1.0")
    _, plain, _ = run(capsys, "optimize", "--x", "0.3", "--alpha", "0.9", "--theta1", "0.6", "--theta2", "0.2")
    assert from_file == plain
    assert json.loads(flagged)["n"] == pytest.approx(0.6)
    assert json.loads(from_file)["n"] == pytest.approx(0.4)


def test_config_file_rejects_unknown_key(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"x": 0.3, "temperature": 4}))
    code, _, err = run(capsys, "stability", "--config", str(path))
    assert code == EXIT_USAGE
    assert "temperature" in err


def test_config_file_bad_json(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("{x: 0.3")
    code, _, _ = run(capsys, "stability", "--config", str(path))
    assert code == EXIT_USAGE


def test_missing_config_file(tmp_path, capsys):
    code, _, _ = run(capsys, "stability", "--config", str(tmp_path / "absent.json"))
    assert code == EXIT_IO


def test_unwritable_output(tmp_path, capsys):
    code, _, err = run(capsys, "stability", "--out", str(tmp_path / "no" / "such" / "dir.json"))
    assert code == EXIT_IO
    assert "I/O" in err


def test_output_file(tmp_path, capsys):
    out = tmp_path / "tables.txt"
    code, stdout, _ = run(capsys, "tables", "--which", "amplification", "--out", str(out))
    assert code == EXIT_OK and stdout == ""
    assert out.read_text().count("PASS") == 4


def test_manifest_round_trip():
    mf = RunManifest("sweep", SystemConfig(alpha=0.97, kappa_override=1e6, theta1=0.3),
                     [AxisSpec("m", -1.0, 1.0, 5)], "grid.csv", "csv", "both")
    back = RunManifest.from_json(mf.to_json())
    assert back == mf
    assert back.to_json() == mf.to_json()


def test_manifest_written_and_replayable(tmp_path, capsys):
    manifest = tmp_path / "run.json"
    argv = ["sweep", "--axis", "m:0:1:3", "--alpha", "0.95", "--theta2", "0.25", "--manifest", str(manifest)]
    _, first, _ = run(capsys, *argv)
    mf = RunManifest.from_json(manifest.read_text())
    assert mf.subcommand == "sweep" and mf.axes == [AxisSpec("m", 0.0, 1.0, 3)]
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(mf.config.to_dict()))
    _, replay, _ = run(capsys, "sweep", "--axis", "m:0:1:3", "--config", str(cfg_path))
    assert replay == first


def test_deterministic_output(capsys):
    argv = ["validate", "--samples", "40", "--seed", "11"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_module_entry_point_byte_identical():
    cmd = [sys.executable, "-m", "dualnopa", "sweep", "--axis", "m:-3:3:7", "--axis", "alpha:0.9:1:3",
           "--quantity", "v_im", "--db"]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout.startswith(b"m,alpha,v_im_db")
