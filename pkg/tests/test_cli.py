import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest
import yaml

from rucalc.cli import main
from rucalc.experiments import ConfigError, parse_weights, run_experiment
from rucalc.permkit import Permutation, all_permutations
from rucalc.render import render_outputs


def _write(tmp_path, cfg, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


FIXED = {"experiment": "fixed-k-sim", "n": 40, "k": 2, "weights": "uniform", "m": 1.0,
         "trials": 10, "seed": 5}


def test_fixed_k_sim_reference_run(tmp_path):
    cfg = dict(FIXED, n=200, trials=100)
    code = main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o"),
                 "--formats", "csv,json,svg"])
    assert code == 0
    rows = _read_csv(tmp_path / "o" / "spectrum.csv")
    assert list(rows[0]) == ["eig_rank", "empirical_mean", "predicted", "abs_dev"]
    assert [float(r["predicted"]) for r in rows] == pytest.approx([0.5, 0.25, 0.25, 0.0], abs=1e-15)
    svg = (tmp_path / "o" / "spectrum.svg").read_text()
    assert svg.startswith("<svg") and svg.count("stroke-dasharray") == 4
    rec = json.loads((tmp_path / "o" / "record.json").read_text())
    assert rec["passed"] and len(rec["trials"]) == 100 and "total" in rec["timings"]


def test_rerun_is_byte_identical(tmp_path):
    path = _write(tmp_path, FIXED)
    for out in ("a", "b"):
        assert main(["run", "--config", path, "--out", str(tmp_path / out), "--formats", "csv"]) == 0
    assert (tmp_path / "a" / "spectrum.csv").read_bytes() == (tmp_path / "b" / "spectrum.csv").read_bytes()
    assert main(["run", "--config", path, "--out", str(tmp_path / "c"), "--formats", "csv", "--jobs", "2"]) == 0
    assert (tmp_path / "a" / "spectrum.csv").read_bytes() == (tmp_path / "c" / "spectrum.csv").read_bytes()
    assert main(["run", "--config", path, "--out", str(tmp_path / "d"), "--formats", "csv", "--seed", "6"]) == 0
    assert (tmp_path / "a" / "spectrum.csv").read_bytes() != (tmp_path / "d" / "spectrum.csv").read_bytes()


def test_usage_errors_exit_2(tmp_path, capsys):
    cases = [
        {"experiment": "bogus"},
        {k: v for k, v in FIXED.items() if k != "trials"},
        dict(FIXED, weights=[0.5, 0.6]),
        dict(FIXED, weights="triangle"),
        dict(FIXED, m=1.5),
        {k: v for k, v in FIXED.items() if k != "seed"},
        {"experiment": "wg-table", "n": 3, "p": 9},
    ]
    messages = []
    for i, cfg in enumerate(cases):
        code = main(["run", "--config", _write(tmp_path, cfg, f"c{i}.yaml"), "--out", str(tmp_path / "o")])
        assert code == 2, cfg
        messages.append(capsys.readouterr().err)
    assert len(set(messages)) == len(messages)
    assert "cap exceeded" in messages[-1]
    assert main(["run", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", _write(tmp_path, FIXED), "--formats", "pdf"])
    assert exc.value.code == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--config", _write(tmp_path, FIXED), "--out", str(blocker / "sub")]) == 2


def test_gate_failure_exits_1(tmp_path):
    cfg = dict(FIXED, n=4, tolerance=1e-9)
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1


def test_empty_formats_write_nothing(tmp_path):
    record = run_experiment(dict(FIXED, trials=3))
    assert render_outputs(record, [], tmp_path / "none") == []
    assert not (tmp_path / "none").exists()
    assert main(["run", "--config", _write(tmp_path, FIXED), "--formats", ""]) == 0


def test_wg_table_round_trip(tmp_path):
    cfg = {"experiment": "wg-table", "n": 6, "p": [1, 2, 3, 4]}
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 0
    rows = _read_csv(tmp_path / "o" / "wg_table.csv")
    table = {}
    for r in rows:
        ct = tuple(int(x) for x in r["cycle_type"].split())
        table[ct] = Fraction(int(r["exact_num"]), int(r["exact_den"]))
    n = 6
    for p in range(1, 5):
        perms = list(all_permutations(p))
        for sigma in perms:
            total = sum(n ** (sigma * t.inverse()).cycle_count() * table[t.cycle_type()] for t in perms)
            assert total == (1 if sigma == Permutation.identity(p) else 0)


def test_wg_table_subcommand(capsys):
    assert main(["wg-table", "--n", "2", "--p", "2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "cycle_type,exact_num,exact_den,asymptotic,ratio"
    assert out[1].startswith("1 1,1,3,") and out[2].startswith("2,-1,6,")


def test_other_experiments(tmp_path):
    cases = {
        "identity": {"experiment": "identity-check", "instances": 20, "p_max": 6, "k_max": 4, "seed": 1},
        "rc": {"experiment": "compare-rc-ruc", "k": [1, 2, 3], "m": [0.0, 1.0]},
        "moments": {"experiment": "moments-check", "n": 2, "k": 2, "weights": [0.6, 0.4], "m": 0.5,
                    "p_max": 2, "trials": 2000, "seed": 3},
    }
    for name, cfg in cases.items():
        assert main(["run", "--config", _write(tmp_path, cfg, f"{name}.yaml"),
                     "--out", str(tmp_path / name)]) == 0, name
    rc = _read_csv(tmp_path / "rc" / "rc_ruc.csv")
    top = [r for r in rc if r["k"] == "2" and r["m"] == "1.0"]
    assert [float(r["rc"]) for r in top] == [0.625, 0.125, 0.125, 0.125]
    assert [float(r["ruc"]) for r in top] == [0.5, 0.25, 0.25, 0.0]
    moments = _read_csv(tmp_path / "moments" / "moments.csv")
    assert list(moments[0]) == ["p", "estimate", "stderr", "prediction", "z_score"]
    rec = json.loads((tmp_path / "moments" / "record.json").read_text())
    assert rec["predictions"]["source"] == "exact"


def test_linear_record_svg(tmp_path):
    cfg = {"experiment": "linear-k-sim", "n": 8, "c": 1.0, "weights": "uniform", "m": 1.0,
           "trials": 3, "seed": 2, "p_max": 3}
    code = main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o"),
                 "--formats", "csv,svg", "--bits"])
    assert code in (0, 1)  # n = 8 is far from the limit; only plumbing is checked here
    svg = (tmp_path / "o" / "spectrum.svg").read_text()
    assert "predicted m1 = 1" in svg and "predicted m2 = 2" in svg
    names = [r["quantity"] for r in _read_csv(tmp_path / "o" / "linear.csv")]
    assert names == ["top_eigenvalue", "moment_2", "moment_3", "compressed_moment_1",
                     "compressed_moment_2", "entropy"]


def test_parse_weights():
    assert parse_weights("ramp", 3).w == pytest.approx((1 / 6, 2 / 6, 3 / 6))
    assert parse_weights([0.25, 0.75], None).k == 2
    with pytest.raises(ConfigError):
        parse_weights([0.25, 0.75], 3)
    with pytest.raises(ConfigError):
        parse_weights("uniform", None)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rucalc", "wg-table", "--n", "3", "--p", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.splitlines()[1] == "1,1,3,0.3333333333333333,1.0"
