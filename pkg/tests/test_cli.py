import json
import math
import subprocess
import sys

import pytest

from anderson_bernoulli import __version__
from anderson_bernoulli.cli import SIMULATE_HEADER, main, parse_eps


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_eps():
    assert parse_eps("0.3,0.1,0.2") == [0.1, 0.2, 0.3]
    grid = parse_eps("0.05:0.3:6")
    assert len(grid) == 6 and grid[0] == pytest.approx(0.05) and grid[-1] == pytest.approx(0.3)
    with pytest.raises(ValueError):
        parse_eps("a,b")


def test_bounds_command(capsys):
    code, out, err = run(["bounds", "--p", "0.5", "--b", "1", "--eps", "0.1,0.2,0.3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "epsilon,lower_bound,upper_bound,p,b,C"
    assert len(lines) == 4
    manifest = json.loads(err.strip().splitlines()[-1])
    assert manifest["version"] == __version__ and manifest["command"] == "bounds"


def test_spectrum_free_three_sites(capsys):
    code, out, _ = run(["spectrum", "--L", "3", "--p", "1", "--seed", "7", "-k", "3"], capsys)
    assert code == 0
    vals = [float(line.split(",")[1]) for line in out.strip().splitlines()[1:]]
    r2 = math.sqrt(2)
    assert vals == pytest.approx([2 - r2, 2, 2 + r2], abs=1e-10)


def test_simulate_schema(capsys):
    code, out, _ = run(["simulate", "--L", "20000", "--realizations", "3", "--eps", "0.1,0.3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert tuple(lines[0].split(",")) == SIMULATE_HEADER
    assert len(lines) == 3


def test_simulate_json(capsys):
    code, out, _ = run(["simulate", "--L", "20000", "--realizations", "2", "--eps", "0.1,0.3",
                        "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert [r["epsilon"] for r in doc["rows"]] == [0.1, 0.3]


def test_workers_do_not_change_output(tmp_path, capsys):
    bodies = []
    for w in ("1", "4"):
        d = tmp_path / w
        assert main(["simulate", "--L", "50000", "--realizations", "6", "--seed", "3",
                     "--workers", w, "--out", str(d)]) == 0
        bodies.append((d / "simulate.csv").read_bytes())
    assert bodies[0] == bodies[1]


def test_manifest_reproduces_run(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--L", "30000", "--realizations", "4", "--seed", "9",
                 "--p", "0.6", "--b", "2", "--out", str(first)]) == 0
    manifest = json.loads((first / "manifest.json").read_text())
    assert manifest["outputs"] == [str(first / "simulate.csv")]
    assert manifest["config"]["p"] == 0.6 and manifest["master_seed"] == 9
    assert main(["simulate", "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
    assert (first / "simulate.csv").read_bytes() == (second / "simulate.csv").read_bytes()


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"L": 1000, "p": 0.5, "b": 1.0, "eps": [0.1, 0.2]}))
    code, out, _ = run(["bounds", "--config", str(cfg), "--eps", "0.3"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 2


@pytest.mark.parametrize("argv", [
    ["simulate", "--L", "0"],
    ["simulate", "--p", "0"],
    ["simulate", "--eps", "0.2,9"],
    ["bogus"],
    ["bounds", "--eps", "x"],
])
def test_invalid_config_exit_1(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1 and "error" in err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"Lx": 3}))
    assert run(["bounds", "--config", str(cfg)], capsys)[0] == 1


def test_failed_check_exit_2(capsys):
    # free lattice breaks the Bernoulli assumption, so the sandwich check fails
    code, out, _ = run(["verify-bounds", "--L", "100000", "--p", "1", "--realizations", "30"], capsys)
    assert code == 2


def test_io_failure_exit_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["bounds", "--out", str(blocker / "sub")], capsys)[0] == 3
    assert run(["bounds", "--config", str(tmp_path / "missing.json")], capsys)[0] == 3


def test_audit_and_intervals(capsys):
    code, out, _ = run(["audit-theorem21", "--L", "200", "--realizations", "10", "--seed", "42"], capsys)
    assert code == 0 and out.count("false") == 10
    code, out, _ = run(["intervals", "--n", "1000", "--realizations", "100"], capsys)
    assert code == 0 and out.startswith("y,threshold,empirical,limit,exact_finite_n")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "anderson_bernoulli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
