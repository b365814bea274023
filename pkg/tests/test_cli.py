import csv
import json
import shutil

import pytest

from app.core.media.audio_io import load_wav
from app.utils.file_utils import compute_directory_hash
from main import main


def _summary_row(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))[-1]


@pytest.fixture
def tiny_data(tmp_path):
    out = tmp_path / "data"
    assert main(["synth-data", "--out", str(out), "--count", "4", "--preset", "tiny"]) == 0
    return out


def test_help_and_usage_errors(capsys):
    assert main(["--help"]) == 0
    assert main(["gibt-es-nicht"]) == 2
    assert main([]) == 2
    assert main(["evaluate"]) == 2


def test_missing_input_exits_with_one(tmp_path, capsys):
    assert main(["plot", "--history", str(tmp_path / "fehlt.csv"), "--out", str(tmp_path / "h.png")]) == 1
    assert main(["enhance", "--checkpoint", str(tmp_path / "fehlt.ckpt"), "--scene", "x",
                 "--data", str(tmp_path), "--out", str(tmp_path / "x.wav")]) == 1
    assert capsys.readouterr().err


def test_synth_data_is_reproducible(tmp_path, tiny_data, capsys):
    again = tmp_path / "again"
    assert main(["synth-data", "--out", str(again), "--count", "4", "--preset", "tiny"]) == 0
    assert compute_directory_hash(str(tiny_data)) == compute_directory_hash(str(again))
    manifest = (tiny_data / "manifest.tsv").read_text(encoding="utf-8")
    assert "scene_00003" in manifest and "dev" in manifest
    assert "3 train, 1 dev" in capsys.readouterr().out


def test_synth_data_other_seed_differs(tmp_path, tiny_data):
    other = tmp_path / "other"
    assert main(["synth-data", "--out", str(other), "--count", "4", "--preset", "tiny", "--seed", "1"]) == 0
    assert compute_directory_hash(str(tiny_data)) != compute_directory_hash(str(other))


def test_train_enhance_plot(tmp_path, tiny_data):
    run = tmp_path / "run"
    assert main(["train", "--data", str(tiny_data), "--out", str(run), "--preset", "tiny",
                 "--epochs", "2", "--batch-size", "2", "--lr", "0.001"]) == 0
    assert (run / "last.ckpt").exists()
    assert (run / "history.csv").exists()

    enhanced = tmp_path / "enhanced" / "scene_00003.wav"
    assert main(["enhance", "--checkpoint", str(run / "last.ckpt"), "--scene", "scene_00003",
                 "--data", str(tiny_data), "--out", str(enhanced)]) == 0
    clip = load_wav(str(enhanced))
    assert len(clip) == len(load_wav(str(tiny_data / "scene_00003_mixed.wav")))

    chart = tmp_path / "chart.png"
    assert main(["plot", "--history", str(run / "history.csv"), "--out", str(chart)]) == 0
    assert chart.exists()


def test_enhance_unknown_scene(tmp_path, tiny_data):
    run = tmp_path / "run"
    assert main(["train", "--data", str(tiny_data), "--out", str(run), "--preset", "tiny", "--epochs", "1"]) == 0
    assert main(["enhance", "--checkpoint", str(run / "last.ckpt"), "--scene", "scene_99999",
                 "--data", str(tiny_data), "--out", str(tmp_path / "x.wav")]) == 1


def test_evaluate_identical_clips(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["synth-data", "--out", str(data), "--count", "2", "--preset", "toy"]) == 0
    est = tmp_path / "est"
    est.mkdir()
    for scene_id in ("scene_00000", "scene_00001"):
        shutil.copy(data / f"{scene_id}_target.wav", est / f"{scene_id}.wav")

    report = tmp_path / "report.csv"
    assert main(["evaluate", "--ref-dir", str(data), "--est-dir", str(est), "--out", str(report),
                 "--ref-pattern", "{id}_target.wav", "--noisy-baseline"]) == 0
    summary = _summary_row(report)
    assert float(summary["stoi"]) == pytest.approx(1.0, abs=1e-5)
    assert float(summary["si_sdr"]) == pytest.approx(60.0)
    assert summary["pesq"] == ""

    noisy = _summary_row(tmp_path / "report_noisy.csv")
    assert float(noisy["si_sdr"]) < 60.0
    assert float(noisy["stoi"]) < 1.0
    assert "noisy:" in capsys.readouterr().out


def test_evaluate_empty_directory(tmp_path):
    (tmp_path / "est").mkdir()
    assert main(["evaluate", "--ref-dir", str(tmp_path), "--est-dir", str(tmp_path / "est"),
                 "--out", str(tmp_path / "r.csv")]) == 1


def test_grad_check_command(capsys):
    assert main(["grad-check", "--num-params", "50"]) == 0
    assert "BESTANDEN" in capsys.readouterr().out
    assert main(["grad-check", "--num-params", "10", "--tolerance", "1e-14"]) == 1


@pytest.mark.parametrize("command", ["synth-data", "train", "enhance", "evaluate", "grad-check", "plot"])
def test_every_command_has_help(command, capsys):
    assert main([command, "--help"]) == 0
    assert "usage:" in capsys.readouterr().out


def test_noisy_baseline_finds_targets_by_default(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["synth-data", "--out", str(data), "--count", "2", "--preset", "toy"]) == 0
    est = tmp_path / "est"
    est.mkdir()
    for scene_id in ("scene_00000", "scene_00001"):
        shutil.copy(data / f"{scene_id}_target.wav", est / f"{scene_id}.wav")

    report = tmp_path / "report.csv"
    assert main(["evaluate", "--ref-dir", str(data), "--est-dir", str(est), "--out", str(report),
                 "--noisy-baseline"]) == 0
    assert "(2 Clips, 0 Fehler)" in capsys.readouterr().out
    assert float(_summary_row(report)["si_sdr"]) == pytest.approx(60.0)
    assert (tmp_path / "report_noisy.csv").exists()


PATTERN_FLAGS = [
    "--pattern", "mixture=mix/{id}.wav",
    "--pattern", "target=clean/{id}.wav",
    "--pattern", "interferer=noise/{id}_{index}.wav",
    "--pattern", "frames_tensor=video/{id}.avft",
    "--pattern", "meta=meta/{id}.json",
]


def test_custom_patterns_through_synth_train_enhance(tmp_path):
    data = tmp_path / "data"
    assert main(["synth-data", "--out", str(data), "--count", "4", "--preset", "tiny"] + PATTERN_FLAGS) == 0
    assert (data / "mix" / "scene_00000.wav").exists()
    assert (data / "video" / "scene_00003.avft").exists()
    assert not (data / "scene_00000_mixed.wav").exists()

    run = tmp_path / "run"
    assert main(["train", "--data", str(data), "--out", str(run), "--preset", "tiny",
                 "--epochs", "1"] + PATTERN_FLAGS) == 0
    assert main(["train", "--data", str(data), "--out", str(tmp_path / "run2"), "--preset", "tiny",
                 "--epochs", "1"]) == 1

    enhanced = tmp_path / "scene_00003.wav"
    assert main(["enhance", "--checkpoint", str(run / "last.ckpt"), "--scene", "scene_00003",
                 "--data", str(data), "--out", str(enhanced)] + PATTERN_FLAGS) == 0
    assert len(load_wav(str(enhanced))) == len(load_wav(str(data / "mix" / "scene_00003.wav")))


def test_patterns_from_config_file(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"patterns": {"mixture_pattern": "mix/{id}.wav"}}), encoding="utf-8")
    data = tmp_path / "data"
    assert main(["synth-data", "--out", str(data), "--count", "2", "--preset", "tiny",
                 "--config", str(config)]) == 0
    assert (data / "mix" / "scene_00001.wav").exists()
    assert (data / "scene_00001_target.wav").exists()


@pytest.mark.parametrize("flag", ["mixture", "unbekannt=x/{id}.wav", "mixture=ohne_platzhalter.wav",
                                  "interferer={id}_noise.wav"])
def test_bad_pattern_flag_exits_with_one(tmp_path, flag, capsys):
    assert main(["synth-data", "--out", str(tmp_path / "data"), "--count", "1", "--preset", "tiny",
                 "--pattern", flag]) == 1
    assert capsys.readouterr().err
