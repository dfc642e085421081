import json
import subprocess
import sys

import numpy as np
import pytest

from dropout_mdp.cli import main
from dropout_mdp.mdp_core import FactoredMdp
from dropout_mdp.simulator import Dataset


@pytest.fixture
def system(tmp_path):
    path = tmp_path / "sys.json"
    assert main(["gen", "--agents", "2", "--beta", "0.7", "--seed", "3", "--out", str(path)]) == 0
    return path


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [l.split(",") for l in lines[1:]]


def test_gen_writes_loadable_system(system):
    mdp = FactoredMdp.load(system)
    assert mdp.n_agents == 2 and mdp.survival_probs == (0.7, 0.7)


def test_solve_and_robust(system, tmp_path):
    out = tmp_path / "solve.csv"
    assert main(["solve", "--system", str(system), "--mask", "10", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:3] == ["state", "substates", "fictitious_value"] and len(rows) == 4
    out = tmp_path / "robust.json"
    assert main(["robust", "--system", str(system), "--format", "json", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["meta"]["survival_probs"] == [0.7, 0.7] and len(d["rows"]) == 4


def test_simulate_evaluate_round_trip(system, tmp_path):
    data = tmp_path / "data.txt"
    assert main(["simulate", "--system", str(system), "--n-per-start", "20", "--horizon", "10",
                 "--seed", "5", "--out", str(data)]) == 0
    loaded = Dataset.load(data)
    assert loaded.states.shape == (4, 20, 10) and loaded.policy_id == "soft-optimal"
    out = tmp_path / "eval.csv"
    assert main(["evaluate", "--system", str(system), "--data", str(data), "--exact-mu", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["state", "substates", "estimate", "exact_horizon_value"] and len(rows) == 4
    out = tmp_path / "eval_mask.csv"
    assert main(["evaluate", "--system", str(system), "--data", str(data), "--mask", "01", "--variant",
                 "per-decision", "--H-mu", "500", "--out", str(out)]) == 0
    assert len(read_csv(out)[1]) == 2


def test_bounds_command(tmp_path):
    out = tmp_path / "b.csv"
    args = ["bounds", "--delta", "1", "--H", "10", "--H-mu", "1000", "--n-per-start", "100", "--t-mix", "2",
            "--j-max", "5", "--r-max", "1", "--gamma", "0.9", "--substate-size", "2", "--n-active", "1",
            "--sum-J", "3", "--out", str(out)]
    assert main(args) == 0
    header, rows = read_csv(out)
    rec = dict(zip(header, rows[0]))
    assert float(rec["hoeffding"]) == pytest.approx(2 * np.exp(-1))
    assert main(args + ["--n-states", "4"]) == 1


def test_figure_command_and_assert_exit(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    assert main(["fig2", "--agents", "2", "--assert", "--out", str(out)]) == 0
    assert "# check gap_le_bound: pass" in out.read_text()
    # two agents tie on every realization, so the strict improvement check fails
    code = main(["fig3", "--agents", "2", "--systems", "1", "--seed", "0", "--assert",
                 "--out", str(tmp_path / "fig3.csv")])
    assert code == 2
    assert "failed checks" in capsys.readouterr().err
    assert main(["fig3", "--agents", "2", "--systems", "1", "--seed", "0",
                 "--out", str(tmp_path / "fig3.csv")]) == 0


def test_paper_scale_flag_is_echoed(tmp_path):
    out = tmp_path / "fig1.json"
    assert main(["fig1", "--paper-scale", "--seeds", "2", "--format", "json", "--out", str(out)]) == 0
    meta = json.loads(out.read_text())["meta"]
    assert meta["paper_scale"] is True and meta["config"]["t_total"] == 1000


def test_input_errors_exit_1(tmp_path, system):
    assert main(["solve", "--system", str(tmp_path / "missing.json")]) == 1
    assert main(["solve", "--system", str(system), "--mask", "1"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--system", str(bad)]) == 1
    assert main(["fig3", "--workers", "0"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--beta", "a,b"])
    assert exc.value.code == 1


def test_robust_without_survival_probs_is_input_error(tmp_path):
    path = tmp_path / "plain.json"
    assert main(["gen", "--agents", "2", "--out", str(path)]) == 0
    assert main(["robust", "--system", str(path)]) == 1
    assert main(["robust", "--system", str(path), "--beta", "0.2,0.9", "--out", str(tmp_path / "r.csv")]) == 0


def test_default_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DROPOUT_MDP_OUT_DIR", str(tmp_path / "outdir"))
    assert main(["gen", "--agents", "1"]) == 0
    assert (tmp_path / "outdir" / "system.json").exists()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dropout_mdp.cli", "gen", "--agents", "1", "--out",
                           str(tmp_path / "s.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "s.json").exists()
