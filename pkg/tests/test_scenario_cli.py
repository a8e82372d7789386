import copy
import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from lpai import cli
from lpai.scenario import ConfigError, load_scenario, parse_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

BASE = {
    "name": "base",
    "mass": 1.443160648e-25,
    "gravity": {"mode": "uniform", "g": [0.0, 0.0, -9.81]},
    "pulses": {"geometry": "mach_zehnder", "T": 0.05, "k": [0.0, 0.0, -1.61e7]},
    "state": {"x0": [0.0, 0.0, 0.0], "v0": [0.0, 0.0, 0.0],
              "thermal": {"sigma_x": 1e-4, "sigma_v": 3e-3}},
    "scan": {"variable": "laser_phase_last", "start": 0.0, "stop": 6.0, "steps": 7},
}


def doc(**changes):
    d = copy.deepcopy(BASE)
    for dotted, value in changes.items():
        keys = dotted.split("__")
        node = d
        for k in keys[:-1]:
            node = node[k]
        if value is _DELETE:
            del node[keys[-1]]
        else:
            node[keys[-1]] = value
    return d


_DELETE = object()


def write(tmp_path, d, name="s.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(d))
    return str(path)


@pytest.mark.parametrize("changes, path", [
    ({"mass": _DELETE}, "mass"),
    ({"colour": "blue"}, "colour"),
    ({"gravity__g": [0.0, -9.81]}, "gravity.g"),
    ({"gravity__mode": "flat"}, "gravity.mode"),
    ({"pulses__T": -1.0}, "pulses.T"),
    ({"pulses__phases": [0.0, 1.0]}, "pulses.phases"),
    ({"state__thermal__sigma_x": "wide"}, "state.thermal.sigma_x"),
    ({"method": "leapfrog"}, "method"),
    ({"scan__variable": "detuning"}, "scan.variable"),
])
def test_invalid_fields_report_their_path(changes, path):
    with pytest.raises(ConfigError) as info:
        parse_scenario(doc(**changes))
    assert info.value.path == path


def test_missing_file_reports_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_scenario(tmp_path / "absent.yaml")
    assert info.value.path == "<file>"


def test_scientific_notation_without_dot_is_a_number(tmp_path):
    text = Path(write(tmp_path, BASE)).read_text().replace("1.443160648e-25", "1443160648e-34")
    p = tmp_path / "sci.yaml"
    p.write_text(text)
    assert load_scenario(p).mass == pytest.approx(1.443160648e-25, rel=1e-15)


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.yaml")))
def test_shipped_scenarios_parse(name):
    s = load_scenario(SCENARIOS / name)
    assert s.mass > 0 and len(s.pulses) >= 3


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_exit_code_config_error(tmp_path, capsys):
    code, _, err = run(["run", "--scenario", write(tmp_path, doc(mass=-1.0))], capsys)
    assert code == cli.EXIT_CONFIG
    assert "config error at mass" in err


def test_scan_requested_without_scan_section(tmp_path, capsys):
    code, _, err = run(["run", "--scan", "--scenario", write(tmp_path, doc(scan=_DELETE))], capsys)
    assert code == cli.EXIT_CONFIG and "scan" in err


def test_bad_method_override(tmp_path, capsys):
    code, _, err = run(["run", "--method", "perturbative:x", "--scenario", write(tmp_path, BASE)], capsys)
    assert code == cli.EXIT_CONFIG and "config error at method" in err


def test_compare_series_rejects_multi_loop(tmp_path, capsys):
    d = doc(pulses={"geometry": "multi_loop", "times": [0.0, 0.05, 0.1], "k": [0.0, 0.0, -1.61e7]})
    code, _, err = run(["run", "--compare-series", "--scenario", write(tmp_path, d)], capsys)
    assert code == cli.EXIT_CONFIG and "compare_series" in err


def test_exit_code_numerical_failure(tmp_path, capsys):
    d = doc(gravity={"mode": "uniform", "g": [0.0, 0.0, -9.81],
                     "gamma": [[1e6, 0, 0], [0, 1e6, 0], [0, 0, -2e6]]},
            pulses__T=100.0)
    code, _, err = run(["run", "--scenario", write(tmp_path, d)], capsys)
    assert code == cli.EXIT_NUMERIC
    assert err.startswith("numerical error in stage ")


def test_json_report_keys(tmp_path, capsys):
    code, out, _ = run(["run", "--scenario", write(tmp_path, BASE)], capsys)
    assert code == 0
    rep = json.loads(out)
    for key in ("scenario", "method", "path", "pulse_count", "result", "decomposition",
                "coefficients", "chi_I"):
        assert key in rep
    assert set(rep["result"]) == {"probability", "visibility", "total_phase_rad", "sign"}
    assert rep["coefficients"] == [1, -2, 1]
    assert rep["decomposition"]["sum_rad"] == pytest.approx(rep["result"]["total_phase_rad"], rel=1e-12)


def test_csv_scan_shape_and_determinism(tmp_path, capsys):
    src = write(tmp_path, BASE)
    outs = []
    for jobs in ("1", "3", "1"):
        dst = tmp_path / f"out{len(outs)}.csv"
        code, _, err = run(["run", "--scan", "--format", "csv", "--jobs", jobs,
                            "--scenario", src, "--out", str(dst)], capsys)
        assert code == 0 and "probability" in err
        outs.append(dst.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    lines = outs[0].decode().splitlines()
    assert lines[0] == ",".join(cli.CSV_COLUMNS)
    assert len(lines) == 1 + 7
    assert all(len(line.split(",")) == 4 for line in lines)


def test_csv_without_scan_has_one_row(tmp_path, capsys):
    code, out, _ = run(["run", "--format", "csv", "--scenario", write(tmp_path, BASE)], capsys)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2 and lines[1].startswith(",")


def test_T_scan_phase_grows_quadratically(tmp_path, capsys):
    d = doc(gravity={"mode": "uniform", "g": [0.0, 0.0, -9.81],
                     "gamma": [[-1.5e-6, 0, 0], [0, -1.5e-6, 0], [0, 0, 3e-6]]},
            scan={"variable": "T", "values": [0.02, 0.04]})
    code, out, _ = run(["run", "--scan", "--scenario", write(tmp_path, d)], capsys)
    rows = json.loads(out)["scan"]["rows"]
    assert code == 0 and [r["scan_value"] for r in rows] == [0.02, 0.04]
    ratio = rows[1]["total_phase_rad"] / rows[0]["total_phase_rad"]
    assert ratio == pytest.approx(4.0, rel=1e-3)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lpai", "run", "--scenario",
                          str(SCENARIOS / "fountain.yaml")], capture_output=True, text=True, timeout=60)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["scenario"] == "fountain"
