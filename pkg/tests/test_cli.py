import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from soblab.cli import ConfigError, config_from_dict, main, parse_config
from soblab.lab import CaseTag
from soblab.lab.report import read_csv_rows

ROOT = Path(__file__).resolve().parents[1]
DEMO_SUITE = ROOT / "demos" / "configs" / "demo_suite.json"
DEMO_RUN = ROOT / "demos" / "configs" / "mz_gradient.json"
GOLDEN = ROOT / "tests" / "golden" / "demo_suite.csv"


def write_config(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


# parsing -------------------------------------------------------------------------

def test_minimal_config():
    cfg = config_from_dict({"cases": ["MZ_GRADIENT"]})
    assert cfg.dimension == 2 and cfg.cases[0].tag is CaseTag.MZ_GRADIENT
    assert cfg.cases[0].params.alpha == 1.0


def test_demo_configs_parse():
    assert len(parse_config(DEMO_SUITE).cases) == 5
    assert parse_config(DEMO_RUN).measure == "delta"


@pytest.mark.parametrize("raw,needle", [
    ({"cases": [{"tag": "BUMP_PP", "params": {"p": 1, "q": 1}}]}, "cases[0].params.p"),
    ({"cases": ["STRONG_MALM"], "params": {"alpha": 2}}, "alpha"),
    ({"cases": ["MZ_GRADIENT"], "bogus": 1}, "bogus: unknown key"),
    ({"cases": ["MZ_GRADIENT"], "grid": {"h": -1}}, "grid.h"),
    ({"cases": [{"tag": "ALVINO", "params": {"r": 2}}]}, "cases[0].params.r"),
    ({"cases": ["MZ_GRADIENT"], "dimension": 3}, "dimension"),
    ({"cases": ["NOT_A_CASE"]}, "NOT_A_CASE"),
    ({"cases": ["MZ_GRADIENT"], "seed": -2}, "seed"),
    ({"cases": ["MZ_GRADIENT"], "sharpness": {"x": [2]}}, "sharpness.x"),
    ({"cases": ["MZ_GRADIENT"], "growth": {"R": [0.5, 2]}}, "growth.R"),
])
def test_schema_violations_name_the_field(raw, needle):
    with pytest.raises(ConfigError) as exc:
        config_from_dict(raw)
    assert needle in str(exc.value)


def test_parse_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_atom_measure_descriptor():
    cfg = config_from_dict({"cases": ["MZ_GRADIENT"],
                            "measure": {"kind": "atoms", "atoms": [[0, 0, 1.0], [0.5, 0, 2.0]]}})
    assert cfg.measure.total_mass == pytest.approx(3.0)


# exit codes -----------------------------------------------------------------------

def test_run_exit_zero(tmp_path, capsys):
    code = main(["run", "--config", str(DEMO_RUN), "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv_rows((tmp_path / "mz_gradient.csv").read_text())
    assert len(rows) == 3 and rows[1][0] == "MZ_GRADIENT"
    assert (tmp_path / "mz_gradient.json").is_file()


def test_config_errors_exit_three(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 3
    assert main(["run"]) == 3
    assert main(["frobnicate"]) == 3
    cfg = write_config(tmp_path, {"cases": [{"tag": "BUMP_PP", "params": {"p": 1, "q": 1}}]})
    assert main(["run", "--config", cfg]) == 3
    assert "params.p" in capsys.readouterr().err
    cfg = write_config(tmp_path, {"cases": ["GNS_CLASSICAL"], "functions": ["bump0"]})
    assert main(["run", "--config", cfg, "--out", "/proc/forbidden"]) == 3
    assert main(["run", "--config", cfg, "--threads", "0"]) == 3


def test_growth_and_sharpness_commands(tmp_path, capsys):
    assert main(["growth", "--out", str(tmp_path)]) == 0
    table = json.loads((tmp_path / "report_growth.json").read_text())
    assert [r["R"] for r in table["rows"]] == [4.0, 8.0, 16.0, 32.0]
    assert main(["sharpness", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "report_sharpness.json").read_text())["spread"] <= 4


def test_sharpness_invariant_failure_exits_two(tmp_path, capsys):
    # epsilon = 1 is the convergent regime: the normalized quotient decays past factor 4
    cfg = write_config(tmp_path, {"sharpness": {"epsilon": 1.0, "epsilon_cmp": 2.0}})
    assert main(["sharpness", "--config", cfg, "--out", str(tmp_path)]) == 2


# determinism and golden regression ---------------------------------------------------------

def test_golden_diff_is_empty(tmp_path, capsys):
    cfg = json.loads(DEMO_SUITE.read_text())
    cfg["golden"] = str(GOLDEN)
    path = write_config(tmp_path, cfg)
    assert main(["suite", "--config", path, "--out", str(tmp_path / "a"), "--threads", "2"]) == 0
    assert read_csv_rows((tmp_path / "a" / "demo_suite.csv").read_text()) == \
        read_csv_rows(GOLDEN.read_text())


def test_corrupted_golden_exits_two(tmp_path, capsys):
    lines = GOLDEN.read_text().splitlines(keepends=True)
    parts = lines[1].split(",")
    # params_json spans several comma-separated fields; corrupt the ratio counted from the end
    parts[-5] = "0.123"
    lines[1] = ",".join(parts)
    bad = tmp_path / "golden.csv"
    bad.write_text("".join(lines))
    cfg = json.loads(DEMO_SUITE.read_text())
    cfg["golden"] = str(bad)
    path = write_config(tmp_path, cfg)
    assert main(["suite", "--config", path, "--out", str(tmp_path / "b")]) == 2


def test_byte_identical_reruns(tmp_path, capsys):
    for d, threads in (("x", "1"), ("y", "3")):
        assert main(["run", "--config", str(DEMO_RUN), "--out", str(tmp_path / d),
                     "--threads", threads, "--format", "json"]) == 0
    a = read_csv_rows((tmp_path / "x" / "mz_gradient.csv").read_text())
    b = read_csv_rows((tmp_path / "y" / "mz_gradient.csv").read_text())
    assert a == b


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("soblab")
    cmd = [exe] if exe else [sys.executable, "-m", "soblab.cli"]
    out = subprocess.run(cmd + ["run", "--config", str(DEMO_RUN), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "reports" in out.stdout
