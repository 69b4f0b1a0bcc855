import csv
import json
import re

import numpy as np
import pytest

from rmstmatch.cli import config_hash, main, result_table
from rmstmatch.ingest import Dataset, write_csv
from rmstmatch.simulate import make_rng, simulate_dataset, table_scenario

HASH = re.compile(r"^# rmstmatch \S+ (\w+) config_hash=([0-9a-f]{16})$")


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    sim = simulate_dataset(table_scenario("PH", -0.8, 0.2, n=2500), make_rng(21))
    path = d / "sim.csv"
    write_csv(Dataset.from_simulation(sim), path)
    return path


def header_hash(path):
    m = HASH.match(path.read_text().splitlines()[0])
    assert m, path
    return m.group(2)


def read_rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_config_hash_is_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_result_table_layout():
    text = result_table([("Matched RMST", -22.266, 1.38, -24.972, -19.561)])
    assert "95% CI Lower Bound" in text.splitlines()[0]
    assert text.splitlines()[1].split() == ["Matched", "RMST", "-22.266", "1.380", "-24.972", "-19.561"]


def test_scenario_and_simulate(tmp_path):
    scen = tmp_path / "s.ini"
    assert main(["scenario", "--regime", "NP", "--beta-a", "-0.8", "--censoring", "0.2",
                 "--n", "500", "--out", str(scen)]) == 0
    out = tmp_path / "run"
    argv = ["simulate", "--scenario", str(scen), "--reps", "3", "--seed", "4", "--out", str(out),
            "--export-dataset", str(out / "data.csv")]
    assert main(argv) == 0
    rows = read_rows(out / "summary.csv")
    assert [r["method"] for r in rows] == ["matched_rmst", "iptw_km_rmst"]
    assert rows[0]["n_reps"] == "3"
    assert len(read_rows(out / "replicates.csv")) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    h = manifest["config_hash"]
    assert manifest["config"]["scenario"]["seed"] == 4
    for name in ("summary.csv", "replicates.csv", "data.csv"):
        assert header_hash(out / name) == h
    assert {o["path"].rsplit("/", 1)[-1] for o in manifest["outputs"]} == {
        "summary.csv", "replicates.csv", "data.csv"}

    first = {p.name: p.read_bytes() for p in out.iterdir() if p.name != "manifest.json"}
    assert main(argv) == 0
    assert first == {p.name: p.read_bytes() for p in out.iterdir() if p.name != "manifest.json"}


def test_simulate_numeric_failure_exit(tmp_path):
    scen = tmp_path / "s.ini"
    scen.write_text("n = 200\ntau = 1e9\n")
    assert main(["simulate", "--scenario", str(scen), "--reps", "2", "--out", str(tmp_path)]) == 3


def test_simulate_bad_scenario_exit(tmp_path):
    scen = tmp_path / "s.ini"
    scen.write_text("n = lots\n")
    assert main(["simulate", "--scenario", str(scen), "--reps", "2", "--out", str(tmp_path)]) == 2


def test_analyze_outputs(tmp_path, data_file, capsys):
    out = tmp_path / "a"
    argv = ["analyze", "--data", str(data_file), "--tau", "100",
            "--emit-pairs", str(out / "pairs.csv"), "--emit-balance", str(out / "bal.csv"),
            "--emit-curves", str(out / "curves.csv"), "--emit-g", str(out / "g.csv"),
            "--emit-table", str(out / "table.txt"), "--out", str(out / "result.json")]
    assert main(argv) == 0
    assert "Matched RMST" in capsys.readouterr().out
    res = json.loads((out / "result.json").read_text())
    for key in ("estimate", "se", "ci", "n_pairs", "tau", "method", "balance_max_smd",
                "rmst0", "rmst1", "var0", "var1", "cov", "config_hash"):
        assert res[key] is not None, key
    assert res["ci"][0] < res["estimate"] < res["ci"][1]
    pairs = read_rows(out / "pairs.csv")
    assert len(pairs) == res["n_pairs"] == res["n_treated"]
    assert len({p["control_id"] for p in pairs}) == len(pairs)
    assert list(pairs[0]) == ["treated_id", "control_id", "distance"]
    assert list(read_rows(out / "bal.csv")[0]) == ["covariate", "smd_before", "smd_after"]
    assert list(read_rows(out / "g.csv")[0]) == ["u", "v", "g"]
    for name in ("pairs.csv", "bal.csv", "curves.csv", "g.csv", "table.txt"):
        assert header_hash(out / name) == res["config_hash"]

    snapshot = {p.name: p.read_bytes() for p in out.iterdir() if "manifest" not in p.name}
    assert main(argv) == 0
    assert snapshot == {p.name: p.read_bytes() for p in out.iterdir() if "manifest" not in p.name}
    manifest = json.loads((out / "result.json.manifest.json").read_text())
    assert manifest["config"]["tau"] == 100.0 and len(manifest["outputs"]) == 6


def test_analyze_hosmer_changes_hash(tmp_path, data_file):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", "--data", str(data_file), "--tau", "100", "--out", str(a)]) == 0
    assert main(["analyze", "--data", str(data_file), "--tau", "100", "--variance", "hosmer",
                 "--out", str(b)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["config_hash"] != rb["config_hash"]
    assert ra["estimate"] == rb["estimate"] and ra["cov"] == rb["cov"]


def test_analyze_refuses_poor_balance(tmp_path, data_file):
    out = tmp_path / "r.json"
    argv = ["analyze", "--data", str(data_file), "--tau", "100", "--smd-threshold", "0.001",
            "--out", str(out)]
    assert main(argv) == 2
    assert not out.exists()
    assert main(argv + ["--force"]) == 0
    assert json.loads(out.read_text())["balance_forced"] is True


def test_analyze_validation_exits(tmp_path, data_file):
    out = str(tmp_path / "x.json")
    assert main(["analyze", "--data", str(data_file), "--tau", "1000", "--out", out]) == 2
    assert main(["analyze", "--data", str(data_file), "--schema", "treat=SMOKER", "--tau", "50",
                 "--out", out]) == 2
    assert main(["analyze", "--data", str(tmp_path / "missing.csv"), "--tau", "50", "--out", out]) == 2
    with pytest.raises(SystemExit) as err:
        main(["analyze", "--data", str(data_file), "--out", out])
    assert err.value.code == 2


def test_balance_command(tmp_path, data_file):
    out = tmp_path / "bal.csv"
    assert main(["balance", "--data", str(data_file), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [r["covariate"] for r in rows] == [f"x{j}" for j in range(1, 11)]
    assert (tmp_path / "bal.csv.manifest.json").exists()


def test_sensitivity_from_result(tmp_path, data_file):
    res = tmp_path / "r.json"
    assert main(["analyze", "--data", str(data_file), "--tau", "100", "--out", str(res)]) == 0
    out = tmp_path / "sens"
    argv = ["sensitivity", "--result", str(res), "--rr-max", "3", "--mr-max", "3",
            "--steps", "21", "--out", str(out)]
    assert main(argv) == 0
    r = json.loads(res.read_text())
    grid = np.loadtxt(out / "grid.csv", delimiter=",", skiprows=2)
    assert grid.shape == (21 * 21, 3)
    corner = grid[(grid[:, 0] == 1.0)]
    assert np.allclose(corner[:, 2], r["rmst1"] - r["rmst0"], atol=1e-12)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["direction"].startswith("positive")
    first = (out / "grid.csv").read_bytes()
    assert main(argv) == 0 and (out / "grid.csv").read_bytes() == first


def test_sensitivity_needs_means(tmp_path):
    bad = tmp_path / "r.json"
    bad.write_text("{}")
    assert main(["sensitivity", "--result", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["sensitivity", "--m1", "10", "--m0", "-1", "--out", str(tmp_path)]) == 2
    assert main(["sensitivity", "--m1", "10", "--m0", "12", "--out", str(tmp_path / "s")]) == 0
