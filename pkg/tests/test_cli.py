import json
import subprocess
import sys

from tensor_sandwich.cli import main
from tensor_sandwich.experiments import parse_csv
from tensor_sandwich.tensorio import load_tensor


def test_generate_then_complete(tmp_path, capsys):
    path = tmp_path / "t.npz"
    assert main(["generate", "--n", "20", "--rank", "2", "--seed", "3", "--out", str(path)]) == 0
    capsys.readouterr()
    est = tmp_path / "est.npz"
    assert main(["complete", str(path), "--rank", "2", "--d", "6", "--out", str(est)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "success"
    assert report["rel_error"] < 1e-10
    assert report["total_count"] < 20 ** 3
    t, model, _ = load_tensor(est)
    assert model.rank == 2 and t.shape == (20, 20, 20)


def test_complete_with_config(tmp_path, capsys):
    path = tmp_path / "t.npz"
    main(["generate", "--n", "15", "--rank", "2", "--snr", "30", "--out", str(path)])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"rank": 2, "per_column_samples": 8, "on_rank_cap": "project",
                               "als_iters": 5}))
    capsys.readouterr()
    assert main(["complete", str(path), "--config", str(cfg)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "success"
    assert 0 < report["rel_error"] < 0.5
    assert "als" in report["phase_timings"]


def test_sweep_writes_csv(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"n": 10, "ranks": [2], "trials": 1, "snr_list": [20, "inf"]}))
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(cfg), "--kind", "noise_sweep", "--out", str(out)]) == 0
    rows = parse_csv(out.read_text())
    assert [r["snr_db"] for r in rows] == [20.0, float("inf")]
    assert (tmp_path / "sweep.summary.csv").exists()


def test_sweep_to_stdout(capsys, tmp_path):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"n": 10, "ranks": [2], "trials": 1, "budget_factors": [0.7]}))
    assert main(["sweep", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("rank,slice_budget,trial")


def test_bad_input_exit_code(tmp_path, capsys):
    assert main(["complete", str(tmp_path / "missing.npz"), "--rank", "2"]) == 2
    path = tmp_path / "t.npz"
    main(["generate", "--n", "5", "--rank", "2", "--out", str(path)])
    assert main(["complete", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tensor_sandwich", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "generate" in out.stdout
