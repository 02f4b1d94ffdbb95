import json
import subprocess
import sys

import pytest

from bdris.cli import main


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(path)


def test_validate_pass(tmp_path, capsys):
    cfg = write(tmp_path, "v.json", {"antennas": [[4, 4]], "groups": [[4, 16]], "k": [256], "algorithms": ["BTKF"]})
    assert main(["validate", cfg]) == 0
    assert "BTKF: pass" in capsys.readouterr().out


def test_validate_btals_pass(tmp_path, capsys):
    cfg = write(tmp_path, "v.json", {"antennas": [[4, 4]], "groups": [[4, 16]], "k": [32], "algorithms": ["BTALS"]})
    assert main(["validate", cfg]) == 0


def test_validate_fail_names_rule(tmp_path, capsys):
    cfg = write(tmp_path, "v.json", {"antennas": [[4, 4]], "groups": [[4, 16]], "k": [32], "algorithms": ["BTKF"]})
    assert main(["validate", cfg]) != 0
    assert "K >= Nbar^2*Q" in capsys.readouterr().out


@pytest.mark.parametrize(
    "content,needle",
    [
        ('{"antenas": [[2, 2]]}', "unknown config keys"),
        ("{not json", "not valid JSON"),
        ('[1, 2]', "JSON object"),
        ('{"algorithms": ["MMSE"]}', "unknown algorithms"),
    ],
)
def test_bad_configs(tmp_path, capsys, content, needle):
    cfg = write(tmp_path, "bad.json", content)
    for cmd in ("sweep", "validate"):
        assert main([cmd, cfg]) != 0
        assert needle in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["sweep", str(tmp_path / "nope.json")]) != 0
    assert "cannot read" in capsys.readouterr().err


def test_sweep_single_row(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {"antennas": [[2, 2]], "groups": [[2, 2]], "k": ["min"],
                                     "snr_db": ["inf"], "algorithms": ["BTKF"], "trials": 1})
    assert main(["sweep", cfg]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(row["nmse"]) <= 1e-10


def test_sweep_overrides_and_output(tmp_path):
    cfg = write(tmp_path, "s.json", {"groups": [[1, 4]], "snr_db": [10], "trials": 50})
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", cfg, "--trials", "2", "--seed", "3", "-o", str(out1)]) == 0
    assert main(["sweep", cfg, "--trials", "2", "--seed", "3", "-o", str(out2), "--threads", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header, first = out1.read_text().splitlines()[:2]
    assert dict(zip(header.split(","), first.split(",")))["trials"] == "2"
    assert main(["sweep", cfg, "--seed", "-1"]) != 0


def test_sweep_timing_column(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {"groups": [[1, 4]], "snr_db": [10], "trials": 1})
    assert main(["sweep", cfg, "--timing"]) == 0
    assert capsys.readouterr().out.splitlines()[0].endswith("wall_time")


def test_design_export(tmp_path, capsys):
    cfg = write(tmp_path, "d.json", {"Nbar": 2, "Q": 4, "K": 16, "rotated": True, "seed": 3})
    out = tmp_path / "out.json"
    assert main(["design", cfg, "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["K1"] == 4 and data["K2"] == 4 and data["rotated"] is True
    assert "S3-orthogonal=False" in capsys.readouterr().err
    bad = write(tmp_path, "e.json", {"Nbar": 2, "Q": 4, "K": 16, "K1": 3})
    assert main(["design", bad]) != 0


def test_figure_complexity(capsys):
    assert main(["figure", "fig9"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "algorithm,mt,mr,nbar,q,k,iterations,flops"
    assert len(lines) == 1 + 3 * 7


def test_figure_fig4_columns(capsys):
    assert main(["figure", "fig4", "--trials", "1"]) == 0
    header = capsys.readouterr().out.splitlines()[0].split(",")
    for col in ("snr_db", "nbar", "q", "algorithm", "nmse_db", "trials"):
        assert col in header


def test_figure_unknown(capsys):
    assert main(["figure", "fig3"]) != 0
    assert "unknown figure" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "v.json", {"antennas": [[4, 4]], "groups": [[4, 16]], "k": [32], "algorithms": ["BTKF"]})
    proc = subprocess.run([sys.executable, "-m", "bdris", "validate", cfg], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "K >= Nbar^2*Q" in proc.stdout
