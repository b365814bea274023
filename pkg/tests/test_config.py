import json

import pytest

from app.config import MIXTURE_PATTERN, TARGET_PATTERN
from app.models.schemas import FilePatterns, RunConfig, load_run_config
from app.utils.error_handling import ConfigurationError


def _write_config(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_defaults_without_file():
    run_cfg = load_run_config()
    assert run_cfg.preset == "toy"
    assert run_cfg.patterns == FilePatterns()
    assert run_cfg.patterns.mixture_pattern == MIXTURE_PATTERN
    assert run_cfg.patterns.target_pattern == TARGET_PATTERN


def test_overrides_merge_into_file_sections(tmp_path):
    path = _write_config(tmp_path, {"preset": "tiny", "train": {"epochs": 5, "batch_size": 2}})
    run_cfg = load_run_config(path, {"train": {"epochs": 1}, "seed": 9})
    assert run_cfg.train.epochs == 1
    assert run_cfg.train.batch_size == 2
    assert run_cfg.seed == 9
    assert run_cfg.resolve_model_config().seed == 9


@pytest.mark.parametrize("overrides", [
    {"audio": {"bogus": 1}},
    {"video": {"window": "breit"}},
    {"fusion": {"heads": 3}},
    {"decoder": {"hidden_dims": [8]}},
])
def test_bad_model_sections_fail_at_load_time(overrides):
    with pytest.raises(ConfigurationError):
        load_run_config(None, overrides)


def test_unknown_video_key_in_file(tmp_path):
    path = _write_config(tmp_path, {"preset": "tiny", "video": {"patch_groesse": 4}})
    with pytest.raises(ConfigurationError) as excinfo:
        load_run_config(path)
    assert "patch_groesse" in str(excinfo.value)


def test_valid_model_section_overrides_preset():
    run_cfg = load_run_config(None, {"preset": "tiny", "fusion": {"iterations": 3}})
    assert run_cfg.resolve_model_config().fusion.iterations == 3


def test_unreadable_and_non_object_files(tmp_path):
    with pytest.raises(ConfigurationError):
        load_run_config(str(tmp_path / "fehlt.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_run_config(str(broken))
    with pytest.raises(ConfigurationError):
        load_run_config(_write_config(tmp_path, [1, 2]))


def test_patterns_section_from_file(tmp_path):
    path = _write_config(tmp_path, {"patterns": {"mixture_pattern": "mix/{id}.wav"}})
    patterns = load_run_config(path).patterns
    assert patterns.mixture_pattern == "mix/{id}.wav"
    assert patterns.target_pattern == TARGET_PATTERN


@pytest.mark.parametrize("patterns", [
    {"mixture_pattern": "mixture.wav"},
    {"interferer_pattern": "{id}_noise.wav"},
    {"target_pattern": MIXTURE_PATTERN},
    {"meta_pattern": "{id}.json", "bogus_pattern": "{id}.txt"},
])
def test_invalid_patterns_are_rejected(patterns):
    with pytest.raises(ConfigurationError):
        load_run_config(None, {"patterns": patterns})


def test_run_config_keeps_patterns_model():
    run_cfg = RunConfig.model_validate({"patterns": {"meta_pattern": "meta/{id}.json"}})
    assert isinstance(run_cfg.patterns, FilePatterns)
    assert run_cfg.patterns.meta_pattern == "meta/{id}.json"
