"""End-to-end command-line checks, run in-process through main()."""

import json
import os

import pytest

from lpmhd.cli import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from lpmhd.io import (
    read_manifest,
    sha256_file,
    snapshot_filename,
    write_manifest,
    write_snapshot,
)
from lpmhd.solver import SolverState, initial_data
from lpmhd.spectral import Grid3

BASE_INI = """
[solver]
n = 8
nu = 0.05
mu = 0.05
dt = 0.01
t_end = 0.05
snapshot_interval = 0.01
ic_kind = orszag-tang

[criteria]
r = 4.0
l = 2.0
s = 0.6
c_r = 0.01
"""


@pytest.fixture()
def sim_dir(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(BASE_INI)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    return out


def test_simulate_outputs(sim_dir):
    manifest = read_manifest(str(sim_dir))
    assert manifest["format"] == "LPMHD1"
    assert manifest["version"] == 1
    assert manifest["complete"] is True
    assert manifest["abort_reason"] is None
    assert len(manifest["snapshots"]) == 6
    assert manifest["config"]["solver.n"] == 8
    assert manifest["config"]["criteria.c_r"] == 0.01
    for entry in manifest["snapshots"]:
        path = sim_dir / entry["file"]
        assert path.exists()
        assert sha256_file(str(path)) == entry["sha256"]
    assert (sim_dir / "ledger.csv").exists()
    assert manifest["ledger_sha256"] == sha256_file(str(sim_dir / "ledger.csv"))


def test_simulate_deterministic(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(BASE_INI)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == EXIT_OK
    assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == EXIT_OK
    m1, m2 = read_manifest(str(out1)), read_manifest(str(out2))
    assert [e["sha256"] for e in m1["snapshots"]] == [
        e["sha256"] for e in m2["snapshots"]
    ]
    assert m1["ledger_sha256"] == m2["ledger_sha256"]


def test_simulate_zero_duration(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(BASE_INI.replace("t_end = 0.05", "t_end = 0.0"))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    manifest = read_manifest(str(out))
    assert len(manifest["snapshots"]) == 1
    assert manifest["snapshots"][0]["t"] == 0.0


def test_analyze_round(sim_dir, tmp_path):
    out_csv = tmp_path / "diag.csv"
    assert main(["analyze", "--in", str(sim_dir), "--out", str(out_csv)]) == EXIT_OK
    lines = [l for l in out_csv.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 1 + 6  # header + one row per snapshot
    digest = sha256_file(str(out_csv))
    assert main(["analyze", "--in", str(sim_dir), "--out", str(out_csv)]) == EXIT_OK
    assert sha256_file(str(out_csv)) == digest  # byte-reproducible


def test_criteria_report(sim_dir, tmp_path):
    out = tmp_path / "report.txt"
    assert main(["criteria", "--in", str(sim_dir), "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    for cid in range(1, 9):
        assert f"condition {cid} " in text
    assert "chain_max_ratio" in text
    companions = [
        tmp_path / f"report_{stem}.csv"
        for stem in ("criterion_q", "tq", "conditions", "chain", "gronwall")
    ]
    for p in companions:
        assert p.exists()
    digests = [sha256_file(str(p)) for p in (out, *companions)]
    assert main(["criteria", "--in", str(sim_dir), "--out", str(out)]) == EXIT_OK
    assert [sha256_file(str(p)) for p in (out, *companions)] == digests


def test_criteria_override_file(sim_dir, tmp_path):
    crit = tmp_path / "crit.ini"
    crit.write_text("[criteria]\nr = 4.0\nl = 2.0\ns = 0.55\nc_r = 0.003\n")
    out = tmp_path / "report.txt"
    code = main(
        ["criteria", "--in", str(sim_dir), "--criteria", str(crit), "--out", str(out)]
    )
    assert code == EXIT_OK
    text = out.read_text()
    assert "# criteria.c_r = 0.0030000000000000001" in text


def test_criteria_incomplete_manifest_disables_condition8(sim_dir, tmp_path):
    manifest = read_manifest(str(sim_dir))
    manifest["complete"] = False
    manifest["abort_reason"] = "stopped for the test"
    write_manifest(str(sim_dir), manifest)
    out = tmp_path / "report.txt"
    assert main(["criteria", "--in", str(sim_dir), "--out", str(out)]) == EXIT_OK
    assert "condition 8 unavailable" in out.read_text()


def test_simulate_cfl_abort(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        """
[solver]
n = 8
nu = 0.01
mu = 0.01
dt = 0.1
t_end = 0.5
ic_kind = random-spectrum
ic_seed = 1
ic_energy = 1e8
ic_peak_shell = 1
"""
    )
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_NUMERICAL
    manifest = read_manifest(str(out))
    assert manifest["complete"] is False
    assert manifest["abort_reason"]
    assert len(manifest["snapshots"]) >= 1


def test_criteria_too_few_snapshots(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(BASE_INI.replace("t_end = 0.05", "t_end = 0.01"))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    report = tmp_path / "report.txt"
    code = main(["criteria", "--in", str(out), "--out", str(report)])
    assert code == EXIT_NUMERICAL


def test_usage_errors(tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["simulate"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["verify", "--suite", "bogus"]) == EXIT_USAGE
    missing = tmp_path / "nope.ini"
    assert (
        main(["simulate", "--config", str(missing), "--out", str(tmp_path / "o")])
        == EXIT_USAGE
    )
    capsys.readouterr()


def test_io_errors(tmp_path):
    assert (
        main(["analyze", "--in", str(tmp_path / "missing"), "--out", str(tmp_path / "d.csv")])
        == EXIT_IO
    )
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "manifest.json").write_text("{not json")
    assert (
        main(["analyze", "--in", str(broken), "--out", str(tmp_path / "d.csv")])
        == EXIT_IO
    )


def test_analyze_rejects_mixed_grids(tmp_path):
    out = tmp_path / "mixed"
    out.mkdir()
    entries = []
    for i, n in enumerate((8, 16)):
        grid = Grid3(n)
        u0, b0 = initial_data("taylor-green", None, grid)
        name = snapshot_filename(i)
        path = out / name
        write_snapshot(str(path), SolverState(u0, b0, float(i)), 0.1, 0.1)
        entries.append({"file": name, "t": float(i), "sha256": sha256_file(str(path))})
    write_manifest(
        str(out),
        {"format": "LPMHD1", "version": 1, "complete": True, "config": {},
         "snapshots": entries},
    )
    assert (
        main(["analyze", "--in", str(out), "--out", str(tmp_path / "d.csv")]) == EXIT_IO
    )


def test_verify_cli(capsys):
    assert main(["verify", "--suite", "partition"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "checks passed" in out
    assert "FAIL" not in out
