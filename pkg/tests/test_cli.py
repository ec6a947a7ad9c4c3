import json

import numpy as np
import pytest

from bosehub import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_basis_command(tmp_path, capsys):
    out = tmp_path / "basis.csv"
    code, stdout, _ = run(capsys, "basis", "--kind", "reduced",
                          "--out", str(out))
    assert code == 0
    assert "classes=26" in stdout and "states=252" in stdout
    assert len(out.read_text().strip().splitlines()) == 27


def test_exact_table1(capsys):
    code, stdout, _ = run(capsys, "exact", "--t", "1", "--U", "2")
    assert code == 0
    assert stdout.splitlines()[0] == "-7.54752"


def test_exact_t_zero(capsys):
    code, stdout, _ = run(capsys, "exact", "--t", "0", "--U", "5")
    assert code == 0
    assert stdout.splitlines()[0] == "0.00000"


def test_exact_translation_basis(capsys):
    code, stdout, _ = run(capsys, "exact", "--U", "5", "--basis",
                          "translation")
    assert code == 0
    assert stdout.splitlines()[0] == "-5.46241"


def test_exact_deformed(capsys):
    code, stdout, _ = run(capsys, "exact", "--t", "1", "--U", "5",
                          "--phi", "1.5707963267948966", "--basis", "reduced")
    assert code == 0
    assert stdout.splitlines()[0] == "-4.65903"


def test_exact_writes_artifacts(tmp_path, capsys):
    prefix = tmp_path / "run"
    code, _, _ = run(capsys, "exact", "--U", "5", "--basis", "reduced",
                     "--out-prefix", str(prefix), "--dump-matrix")
    assert code == 0
    assert (tmp_path / "run_ground.csv").exists()
    assert (tmp_path / "run_matrix.txt").exists()


def test_train_writes_artifacts_and_is_deterministic(tmp_path, capsys):
    out = tmp_path / "artifacts"
    argv = ["train", "--ansatz", "quat", "--layers", "2", "--U", "5",
            "--steps", "40", "--seed", "1", "--out-dir", str(out)]
    code, stdout, _ = run(capsys, *argv)
    assert code == 0
    ckpt = out / "quat_U5_checkpoint.json"
    trace = out / "quat_U5_trace.csv"
    summary = out / "quat_U5_summary.json"
    assert ckpt.exists() and trace.exists() and summary.exists()

    doc = json.loads(summary.read_text())
    assert doc["command"] == "train"
    assert doc["config"]["steps"] == 40
    assert doc["results"]["exact_energy"] == pytest.approx(-5.46241, abs=1e-5)
    assert f"{doc['results']['final_energy']:.5f}" == stdout.splitlines()[0]

    first = (ckpt.read_bytes(), trace.read_bytes(), summary.read_bytes())
    code, _, _ = run(capsys, *argv)
    assert code == 0
    assert (ckpt.read_bytes(), trace.read_bytes(),
            summary.read_bytes()) == first


def test_train_nn(tmp_path, capsys):
    code, stdout, _ = run(capsys, "train", "--ansatz", "nn", "--U", "2",
                          "--steps", "200", "--out-dir", str(tmp_path))
    assert code == 0
    assert (tmp_path / "nn_U2_checkpoint.json").exists()
    assert float(stdout.splitlines()[0]) < -7.3


def test_study_layers(tmp_path, capsys):
    out = tmp_path / "layers.csv"
    code, stdout, _ = run(capsys, "study", "layers", "--ansatz", "quat",
                          "--U", "5", "--layer-grid", "0,1", "--steps", "30",
                          "--out", str(out))
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "layers,energy"
    assert len(lines) == 3


def test_study_shots_needs_checkpoint(tmp_path, capsys):
    code, _, err = run(capsys, "study", "shots", "--checkpoint",
                       str(tmp_path / "missing.json"), "--U", "5")
    assert code == 1
    assert "error" in err.lower() or err


def test_study_shots(tmp_path, capsys):
    run(capsys, "train", "--ansatz", "compressed", "--layers", "2", "--U", "5",
        "--steps", "60", "--out-dir", str(tmp_path))
    ckpt = tmp_path / "compressed_U5_checkpoint.json"
    out = tmp_path / "shots.csv"
    code, stdout, _ = run(capsys, "study", "shots", "--checkpoint", str(ckpt),
                          "--U", "5", "--grid", "100,1000", "--trials", "10",
                          "--out", str(out))
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "shots,median_frac_dev,std"
    assert len(lines) == 3


def test_study_noise_and_noise_run(tmp_path, capsys):
    run(capsys, "train", "--ansatz", "compressed", "--layers", "2", "--U", "5",
        "--steps", "60", "--out-dir", str(tmp_path))
    ckpt = tmp_path / "compressed_U5_checkpoint.json"
    out = tmp_path / "noise.csv"
    cal = tmp_path / "cal.csv"
    code, stdout, _ = run(capsys, "study", "noise", "--checkpoint", str(ckpt),
                          "--U", "5", "--shots", "500", "--trials", "2",
                          "--modes", "uncorrected,corrected",
                          "--out", str(out), "--calibration-out", str(cal))
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "run,mode,U,energy,ideal_energy"
    assert len(lines) == 5  # 2 trials x 2 modes
    cal_lines = cal.read_text().strip().splitlines()
    assert len(cal_lines) == 126
    # one postselected qubit per coefficient group
    assert sum(int(line.split(",")[-1]) for line in cal_lines[1:]) == 25

    code, stdout, _ = run(capsys, "noise-run", "--checkpoint", str(ckpt),
                          "--U", "5", "--mode", "corrected", "--shots", "500")
    assert code == 0
    float(stdout.splitlines()[0])  # a bare 5-decimal energy


def test_study_noise_checkpoint_count_mismatch(tmp_path, capsys):
    run(capsys, "train", "--ansatz", "compressed", "--layers", "2", "--U", "5",
        "--steps", "30", "--out-dir", str(tmp_path))
    ckpt = tmp_path / "compressed_U5_checkpoint.json"
    code, _, err = run(capsys, "study", "noise", "--checkpoint", str(ckpt),
                       "--U", "2,5")
    assert code == 1


def test_threads_flag_reduces_deterministically(tmp_path, capsys):
    run(capsys, "train", "--ansatz", "quat", "--layers", "2", "--U", "5",
        "--steps", "30", "--out-dir", str(tmp_path))
    ckpt = tmp_path / "quat_U5_checkpoint.json"
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"noise_{threads}.csv"
        code, _, _ = run(capsys, "study", "noise", "--checkpoint", str(ckpt),
                         "--U", "5", "--shots", "300", "--trials", "3",
                         "--threads", threads, "--out", str(out))
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_check_flag(capsys):
    code, stdout, _ = run(capsys, "--check")
    assert code == 0
    assert "[PASS] full vs reduced ground energy (U=2)" in stdout
    assert "FAIL" not in stdout


def test_seed_env_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BOSEHUB_SEED", "17")
    out = tmp_path / "s"
    code, _, _ = run(capsys, "train", "--ansatz", "quat", "--layers", "1",
                     "--U", "5", "--steps", "5", "--out-dir", str(out))
    assert code == 0
    doc = json.loads((out / "quat_U5_summary.json").read_text())
    assert doc["config"]["seed"] == 17


def test_no_command_prints_help(capsys):
    code, stdout, _ = run(capsys)
    assert code == 2
    assert "usage" in stdout.lower()


def test_config_file_defaults_overridable_by_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"U": 5.0, "steps": 8, "ansatz": "quat",
                               "layers": 1}))
    out = tmp_path / "from_config"
    code, _, _ = run(capsys, "--config", str(cfg), "train",
                     "--out-dir", str(out))
    assert code == 0
    doc = json.loads((out / "quat_U5_summary.json").read_text())
    assert doc["config"]["steps"] == 8
    assert doc["config"]["U"] == 5.0

    # explicit flag beats the config value
    code, _, _ = run(capsys, "--config", str(cfg), "train", "--steps", "4",
                     "--out-dir", str(out))
    assert code == 0
    doc = json.loads((out / "quat_U5_summary.json").read_text())
    assert doc["config"]["steps"] == 4


def test_missing_required_option_errors(capsys):
    code, _, err = run(capsys, "exact")
    assert code == 1
    assert "--U" in err
