"""End-to-end CLI runs: artifacts, provenance, exit codes, round trips."""

import csv
import json

import numpy as np
import pytest

from soichain import __version__
from soichain.cli import main

FLOW_ARGS = [
    "flow", "--t-s", "2", "--delta", "0.05", "--u", "2",
    "--temperature", "0.3", "--k-points", "128",
]


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_digest: ")
    digest = lines[0].split(": ", 1)[1]
    rows = list(csv.reader(lines[1:]))
    return digest, rows[0], rows[1:]


def test_flow_artifacts(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(FLOW_ARGS) == 0
    digest, header, rows = read_csv(tmp_path / "flow.csv")
    assert header == ["l", "lambda", "ssss", "xxxx", "ssxx", "sxsx",
                      "xssx", "xxyy", "xyxy", "yxxy"]
    assert len(rows) > 10
    assert float(rows[0][0]) == 0.0
    assert float(rows[0][1]) == pytest.approx(805.0)

    summary = json.loads((tmp_path / "flow.json").read_text())
    assert set(summary) == {"config", "config_digest", "version", "started",
                            "elapsed_s", "status", "artifacts", "result"}
    assert summary["version"] == __version__
    assert summary["config_digest"] == digest
    assert summary["status"] == "diverged"
    assert summary["result"]["diverging_component"] == "ssss"
    assert summary["result"]["l_div"] == pytest.approx(8.944412655551806, rel=1e-8)
    assert summary["config"]["subcommand"] == "flow"
    assert summary["config"]["unit"] == "tp"
    assert summary["artifacts"] == ["flow.csv", "flow.json"]


def test_flow_reruns_are_byte_identical(tmp_path, monkeypatch):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir(), b.mkdir()
    monkeypatch.chdir(a)
    assert main(FLOW_ARGS) == 0
    monkeypatch.chdir(b)
    assert main(FLOW_ARGS) == 0
    assert (a / "flow.csv").read_bytes() == (b / "flow.csv").read_bytes()


def test_summary_json_reruns_the_same_flow(tmp_path, monkeypatch):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir(), b.mkdir()
    monkeypatch.chdir(a)
    assert main(FLOW_ARGS) == 0
    monkeypatch.chdir(b)
    assert main(["flow", "--config", str(a / "flow.json")]) == 0
    assert (a / "flow.csv").read_bytes() == (b / "flow.csv").read_bytes()
    assert json.loads((a / "flow.json").read_text())["config"] == \
        json.loads((b / "flow.json").read_text())["config"]


def test_flat_config_with_inline_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "run.cfg").write_text(
        "# probe point\n"
        "t_s = 2\n"
        "delta = 0.05\n"
        "u = 1.0   # overridden inline below\n"
        "temperature = 0.3\n"
        "k_points = 128\n"
    )
    assert main(["flow", "--config", "run.cfg", "--u", "2",
                 "--out-csv", "merged.csv", "--out-json", "merged.json"]) == 0
    assert main(FLOW_ARGS + ["--out-csv", "inline.csv",
                             "--out-json", "inline.json"]) == 0
    _, _, merged = read_csv(tmp_path / "merged.csv")
    _, _, inline = read_csv(tmp_path / "inline.csv")
    assert merged == inline


def test_unknown_config_key_fails(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "bad.cfg").write_text("bogus = 3\n")
    assert main(["flow", "--config", "bad.cfg"]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_config_subcommand_mismatch_fails(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["order", "--delta", "1", "--u", "4"]) == 0
    assert main(["rpa", "--config", "order.json"]) == 1
    assert "written by subcommand" in capsys.readouterr().err


def test_unit_conflict_fails(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["flow", "--unit", "ts", "--t-s", "2"]) == 1
    assert "conflicting units" in capsys.readouterr().err
    # t_s = 1 is consistent with declaring energies in t_s units
    assert main(["order", "--unit", "ts", "--delta", "1", "--u", "4",
                 "--out-json", "ok.json"]) == 0


def test_order_json(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["order", "--t-s", "2", "--delta", "1", "--u", "4",
                 "--delta-zeeman", "-0.3"]) == 0
    summary = json.loads((tmp_path / "order.json").read_text())
    result = summary["result"]
    assert result["ordered"] is True
    assert result["amplitude"] > 0.0
    assert result["degenerate"] is False
    # negative splitting puts all weight on the last spin projection
    phi = result["phi"]
    assert phi[0] == [0.0, 0.0] and phi[1] == [0.0, 0.0]
    assert phi[2][0] == pytest.approx(result["amplitude"])
    assert result["r"] > 0.0 and result["c0"] > 0.0 and result["c2"] == 0.0


def test_order_rejects_closed_gap(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["order", "--delta", "0", "--u", "4"]) == 1
    assert "delta" in capsys.readouterr().err


def test_soi_csv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["soi", "--t-s", "2", "--delta", "1", "--u", "4",
                 "--k-points", "8"]) == 0
    digest, header, rows = read_csv(tmp_path / "soi.csv")
    assert header == ["k", "lambda_so", "e1", "e2", "e3", "e4", "e5", "e6"]
    assert len(rows) == 8
    assert float(rows[0][0]) == pytest.approx(-np.pi)
    assert all(float(r[1]) <= 0.0 for r in rows)
    summary = json.loads((tmp_path / "soi.json").read_text())
    assert summary["result"]["phi_source"] == "computed"
    assert "phi" in summary["config"]

    assert main(["soi", "--t-s", "2", "--delta", "1", "--u", "4",
                 "--k-points", "8", "--phi", "0.1",
                 "--out-csv", "s2.csv", "--out-json", "s2.json"]) == 0
    assert json.loads((tmp_path / "s2.json").read_text())["result"]["phi_source"] \
        == "supplied"
    assert main(["soi", "--k-points", "1"]) == 1


def test_rpa_matches_closed_forms(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    # u = j leaves the bare bubble; T = 1e-3 against a unit gap is cold
    assert main(["rpa", "--t-s", "2", "--deltas", "1", "--u", "0.7", "--j", "0.7",
                 "--t-min", "0.001", "--t-max", "0.001", "--t-points", "1"]) == 0
    _, header, rows = read_csv(tmp_path / "rpa.csv")
    assert header == ["temperature", "delta", "channel", "chi", "diverged", "l_div"]
    assert len(rows) == 1
    assert rows[0][2] == "rpa"
    assert float(rows[0][3]) == pytest.approx(1.0 / np.sqrt(13.0), rel=1e-6)
    assert rows[0][4] == "false" and rows[0][5] == ""

    assert main(["rpa", "--t-s", "2", "--deltas", "3", "--t-points", "1",
                 "--continuum", "--out-csv", "c.csv", "--out-json", "c.json"]) == 0
    _, _, rows = read_csv(tmp_path / "c.csv")
    assert float(rows[0][3]) == pytest.approx(np.sqrt(1.0), rel=1e-12)

    # past the pole the row is flagged, chi left empty
    assert main(["rpa", "--t-s", "2", "--deltas", "1", "--u", "3.7",
                 "--t-points", "1", "--out-csv", "d.csv", "--out-json", "d.json"]) == 0
    _, _, rows = read_csv(tmp_path / "d.csv")
    assert rows[0][3] == "" and rows[0][4] == "true"
    assert json.loads((tmp_path / "d.json").read_text())["result"]["n_diverged"] == 1


def test_sweep_chi_csv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["sweep-chi", "--t-s", "2", "--delta", "1", "--u", "0.5",
                 "--t-min", "0.5", "--t-max", "0.5", "--t-points", "1",
                 "--k-points", "64"]) == 0
    digest, header, rows = read_csv(tmp_path / "sweep-chi.csv")
    assert header == ["temperature", "delta", "channel", "chi", "diverged", "l_div"]
    assert [r[2] for r in rows] == ["singlet_odd", "triplet_even", "triplet_odd"]
    for row in rows:
        assert float(row[3]) > 0.0
        assert row[4] == "false" and row[5] == ""
    summary = json.loads((tmp_path / "sweep-chi.json").read_text())
    assert summary["status"] == "ok"
    assert summary["result"]["n_rows"] == 3
    assert summary["config"]["channels"] == "triplet_even,triplet_odd,singlet_odd"


def test_sweep_chi_rejects_unknown_channel(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["sweep-chi", "--channels", "nematic"]) == 1
    assert "unknown channel" in capsys.readouterr().err


def test_coulomb_requires_seed(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["coulomb", "--n-samples", "100000"]) == 1
    assert "--seed" in capsys.readouterr().err


def test_coulomb_geometry_flags_are_exclusive(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["coulomb", "--e0", "2", "--e2", "1", "--seed", "1"]) == 1
    assert "not both" in capsys.readouterr().err
    assert main(["coulomb", "--e2", "1", "--a-perp", "1", "--seed", "1"]) == 1
    assert "all of" in capsys.readouterr().err


def test_coulomb_csv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["coulomb", "--zetas", "1", "--n-samples", "100000",
                 "--seed", "7"]) == 0
    digest, header, rows = read_csv(tmp_path / "coulomb.csv")
    assert header == ["zeta", "u", "u_err", "j", "j_err", "jp", "jp_err"]
    assert len(rows) == 1
    assert float(rows[0][0]) == 1.0
    assert 0.2 < float(rows[0][1]) < 0.8
    assert float(rows[0][3]) < 0.0
    summary = json.loads((tmp_path / "coulomb.json").read_text())
    assert summary["result"]["couplings_in_units_of_e0"] is True
    assert summary["result"]["failures"] == []
    assert summary["config"]["seed"] == "7"


def test_coulomb_geometry_sets_scale_and_zeta(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["coulomb", "--e2", "1", "--a-perp", "0.5", "--a-par", "2.0",
                 "--n-samples", "100000", "--seed", "3"]) == 0
    summary = json.loads((tmp_path / "coulomb.json").read_text())
    assert summary["result"]["e0"] == pytest.approx(1.0)
    _, _, rows = read_csv(tmp_path / "coulomb.csv")
    assert float(rows[0][0]) == pytest.approx(4.0)


def test_channels_table_records(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["channels-table", "--records", "table.txt"]) == 0
    out = capsys.readouterr().out
    assert "B(1,m_s,2;-1)" in out
    assert "singlet" in out and "triplet" in out
    lines = (tmp_path / "table.txt").read_text().splitlines()
    assert lines[0].startswith("# config_digest: ")
    assert len(lines) == 13
    assert lines[1] == ("js=0 ms=0 ml=0 su2=singlet parity=even trs=even "
                        "combo=B(0,0,0;0)")
    assert all(" su2=" in line and " trs=" in line for line in lines[1:])


def test_version_flag():
    assert main(["--version"]) == 0


def test_unknown_option_fails(capsys):
    assert main(["flow", "--bogus"]) == 1
    assert "bogus" in capsys.readouterr().err
