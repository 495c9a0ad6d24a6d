import csv
import json

import numpy as np
import pytest

from fkpp.cli import RunManifest, apply_overrides, load_config, main, read_csv
from fkpp.model import ParameterError


def manifest(out):
    return RunManifest.from_json((out / "manifest.json").read_text())


def test_overrides_parse_json_values():
    cfg = apply_overrides({"model": {"m": 1}}, ["model.m=2.5", "ic.kind=bump", "run.snapshot_times=[0.1,0.2]"])
    assert cfg["model"]["m"] == 2.5 and cfg["ic"]["kind"] == "bump"
    assert cfg["run"]["snapshot_times"] == [0.1, 0.2]
    with pytest.raises(ParameterError):
        apply_overrides({}, ["novalue"])


def test_config_file_and_flags(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"q": 0.5}, "grid": {"n": 101}}))
    cfg = load_config(str(path), ["model.m=1.5"])
    assert cfg["model"] == {"m": 1.5, "p": 2.0, "q": 0.5}
    assert cfg["grid"]["n"] == 101 and cfg["grid"]["half_length"] == 15.0


def test_stationary_table(tmp_path, capsys):
    assert main(["stationary", "--out", str(tmp_path)]) == 0
    data = read_csv(tmp_path / "stationary.csv")
    assert data.shape == (401, 3)
    assert data[:, 2].max() == pytest.approx(1.3396, abs=1e-4)
    assert "k2=0.5" in capsys.readouterr().out
    man = manifest(tmp_path)
    assert man.extra["f_max"] == pytest.approx(1.33957011, rel=1e-8)
    assert (tmp_path / man.files[0]).exists()
    header = (tmp_path / "stationary.csv").read_text().splitlines()[0]
    assert header == "x,g,E"


def test_stationary_full_line_and_bad_params(tmp_path):
    assert main(["stationary", "--out", str(tmp_path), "--set", "model.m=1", "--set", "model.p=3", "--set", "model.q=1"]) == 0
    assert manifest(tmp_path).extra["support_width"] == float("inf")
    assert main(["stationary", "--out", str(tmp_path / "b"), "--set", "model.p=0.9"]) == 2
    assert main(["stationary", "--out", str(tmp_path / "c"), "--set", "model.p=0.9", "--set", "model.q=0.9"]) == 2


def test_simulate_zero_and_roundtrip(tmp_path):
    args = ["simulate", "--out", str(tmp_path), "--set", "ic.kind=zero", "--set", "grid.n=101", "--set", "run.t_max=1",
            "--set", "run.snapshot_times=[0, 0.5]"]
    assert main(args) == 0
    man = manifest(tmp_path)
    assert man.outcome["kind"] == "undecided"
    assert all(n == 0.0 for _, n in man.norm_history)
    assert RunManifest.from_json(man.to_json()) == man
    for f in man.files:
        assert read_csv(tmp_path / f).shape[0] >= 1


def test_simulate_extinction_and_determinism(tmp_path):
    base = ["simulate", "--set", "ic.c=0.5", "--set", "grid.n=201", "--set", "grid.half_length=10",
            "--set", "run.snapshot_times=[0.5, 1.0]"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--out", str(tmp_path / "b")]) == 0
    man = manifest(tmp_path / "a")
    assert man.outcome["kind"] == "extinction" and man.event_time > 1.0
    for f in man.files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    snap = read_csv(tmp_path / "a" / "snapshot_0000.csv")
    assert snap.shape == (201, 2)
    # 17 significant digits round-trip exactly
    text = (tmp_path / "a" / "snapshot_0000.csv").read_text().splitlines()[1:]
    vals = np.array([[float(v) for v in line.split(",")] for line in text])
    np.testing.assert_array_equal(vals, snap)


def test_simulate_from_file_and_solver_error(tmp_path):
    src = tmp_path / "ic.csv"
    x = np.linspace(-2, 2, 41)
    np.savetxt(src, np.column_stack([x, 0.5 * np.clip(1 - x**2, 0, None)]), delimiter=",", header="x,u", comments="")
    args = ["simulate", "--out", str(tmp_path / "f"), "--set", "ic.kind=file", "--set", f"ic.path={json.dumps(str(src))}",
            "--set", "grid.n=101", "--set", "grid.half_length=5", "--set", "run.t_max=0.2"]
    assert main(args) == 0
    assert main(["simulate", "--out", str(tmp_path / "g"), "--set", "grid.n=2"]) == 3
    assert main(["simulate", "--out", str(tmp_path / "h"), "--set", "grid.boundary=periodic"]) == 3


def test_exact_command(tmp_path):
    args = ["exact", "--out", str(tmp_path), "--set", "ic.family=SV", "--set", "model.m=0.5", "--set", "ic.constant=0.5",
            "--set", "run.snapshot_times=[0, 1]"]
    assert main(args) == 0
    man = manifest(tmp_path)
    assert abs(man.extra["event_time_bisection"] - np.log(4)) <= 1e-10
    assert len(man.files) == 2
    assert main(["exact", "--out", str(tmp_path / "x"), "--set", "ic.family=SV", "--set", "model.m=2"]) == 2


def test_verify_commands(tmp_path):
    assert main(["verify", "--out", str(tmp_path / "s")]) == 0
    cert = json.loads((tmp_path / "s" / "certificate.json").read_text())
    assert cert["certified"] and cert["sub"]["A"] == 128.0 and "T" in cert["sub"] and "b" in cert["sub"]
    # u0 = E is not strictly above or below E
    assert main(["verify", "--out", str(tmp_path / "e"), "--set", "verify.construction=scaled"]) == 4
    assert main(["verify", "--out", str(tmp_path / "g"), "--set", "verify.construction=scaled", "--set", "ic.c=2",
                 "--set", "grid.n=301"]) == 0
    args = ["verify", "--out", str(tmp_path / "p"), "--set", "verify.construction=porous", "--set", "ic.kind=bump",
            "--set", "ic.height=0.8", "--set", "grid.n=201", "--set", "grid.half_length=6", "--set", "run.t_max=1"]
    assert main(args) == 0
    assert json.loads((tmp_path / "p" / "certificate.json").read_text())["max_excess"] <= 1e-10
    assert main(["verify", "--out", str(tmp_path / "x"), "--set", "verify.construction=selfsimilar",
                 "--set", "verify.A_max=8"]) == 4


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_sweep_trichotomy(tmp_path):
    args = ["sweep", "--out", str(tmp_path), "--set", "ic.multipliers=[0.5, 1, 2]", "--workers", "3"]
    assert main(args) == 0
    rows = read_rows(tmp_path / "summary.csv")
    assert [r["outcome"] for r in rows] == ["extinction", "undecided", "blowup"]


def test_sweep_edge_cases(tmp_path):
    assert main(["sweep", "--out", str(tmp_path / "a"), "--set", "ic.multipliers=[]"]) == 0
    assert read_rows(tmp_path / "a" / "summary.csv") == []
    args = ["sweep", "--out", str(tmp_path / "b"), "--set", "ic.multipliers=[0, -1]", "--set", "grid.n=101"]
    assert main(args) == 0
    rows = read_rows(tmp_path / "b" / "summary.csv")
    assert rows[0]["outcome"] in ("undecided", "extinction") and float(rows[0]["final_norm"] or 0) == 0.0
    assert rows[1]["error"]  # negative data recorded, sweep continued
