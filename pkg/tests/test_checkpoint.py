import json
import struct

import numpy as np
import pytest
import torch

from app.config import CHECKPOINT_MAGIC
from app.core.model.aurexa import build_model
from app.core.training.checkpoint import CheckpointState, config_digest, load_checkpoint, save_checkpoint
from app.services.training_service import TrainingService
from app.utils.error_handling import CheckpointError
from app.utils.random_utils import capture_rng_state, restore_rng_state, seed_everything


@pytest.fixture
def tiny_model(tiny_cfg):
    return build_model(tiny_cfg)


def test_round_trip_restores_parameters_and_state(tmp_path, tiny_model, tiny_scenes):
    optimizer = torch.optim.Adam(tiny_model.parameters(), lr=1e-3)
    state = CheckpointState(epoch=3, optimizer_state=optimizer.state_dict(), rng_state={"seed": 7},
                            extra={"step": 12, "val_si_sdr": 1.5})
    path = tmp_path / "run" / "last.ckpt"
    save_checkpoint(tiny_model, str(path), state)

    loaded, loaded_state = load_checkpoint(str(path))
    assert loaded_state.epoch == 3
    assert loaded_state.extra == {"step": 12, "val_si_sdr": 1.5}
    assert loaded_state.rng_state == {"seed": 7}
    assert loaded_state.config == tiny_model.cfg
    assert "param_groups" in loaded_state.optimizer_state
    for (name, original), (_, restored) in zip(tiny_model.state_dict().items(), loaded.state_dict().items()):
        assert torch.equal(original, restored), name

    service = TrainingService()
    first = service.enhance(tiny_model, tiny_scenes[0]).samples
    second = service.enhance(loaded, tiny_scenes[0]).samples
    assert np.array_equal(first, second)


def test_loaded_model_is_in_inference_mode(tmp_path, tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model.train(), str(path))
    loaded, state = load_checkpoint(str(path))
    assert not loaded.training
    assert state.epoch == 0


def test_truncated_file_is_corrupt(tmp_path, tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path))
    data = path.read_bytes()
    path.write_bytes(data[:len(data) // 2])
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(path))
    assert excinfo.value.reason == "corrupt"


def test_wrong_magic_is_corrupt(tmp_path, tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path))
    data = path.read_bytes()
    path.write_bytes(b"NOTACKPT" + data[len(CHECKPOINT_MAGIC):])
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(path))
    assert excinfo.value.reason == "corrupt"


def test_unknown_version_is_rejected(tmp_path, tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path))
    data = bytearray(path.read_bytes())
    data[8:12] = struct.pack("<I", 99)
    path.write_bytes(bytes(data))
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(path))
    assert excinfo.value.reason == "version"


def test_expected_config_mismatch(tmp_path, tiny_model, tiny_cfg):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path))
    other = tiny_cfg.model_copy(update={"seed": tiny_cfg.seed + 1})
    assert config_digest(other) != config_digest(tiny_cfg)
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(path), expected_config=other)
    assert excinfo.value.reason == "config"
    load_checkpoint(str(path), expected_config=tiny_cfg)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(tmp_path / "fehlt.ckpt"))
    assert excinfo.value.reason == "io"
    assert excinfo.value.to_dict()["reason"] == "io"


def test_config_digest_is_stable(tiny_cfg):
    assert config_digest(tiny_cfg) == config_digest(tiny_cfg.model_copy())
    assert len(config_digest(tiny_cfg)) == 32


def test_rng_state_survives_checkpoint(tmp_path, tiny_model):
    seed_everything(11)
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path), CheckpointState(rng_state=capture_rng_state()))
    expected = (torch.rand(3), np.random.rand(3))

    torch.rand(10)
    _, state = load_checkpoint(str(path))
    restore_rng_state(state.rng_state)
    assert torch.equal(torch.rand(3), expected[0])
    assert np.array_equal(np.random.rand(3), expected[1])


def _split_checkpoint(path):
    data = path.read_bytes()
    header = struct.Struct("<8sI32sQ")
    magic, version, digest, meta_len = header.unpack(data[:header.size])
    meta = json.loads(data[header.size:header.size + meta_len].decode("utf-8"))
    return (magic, version, digest), meta, data[header.size + meta_len:]


def _write_checkpoint(path, head, meta, payload):
    meta_bytes = json.dumps(meta).encode("utf-8")
    path.write_bytes(struct.pack("<8sI32sQ", *head, len(meta_bytes)) + meta_bytes + payload)


def test_garbled_training_state_is_corrupt(tmp_path, tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path), CheckpointState(rng_state={"seed": 1}))
    head, meta, payload = _split_checkpoint(path)
    garbled = payload[:meta["tensor_bytes"]] + b"\x5a" * meta["state_bytes"]
    _write_checkpoint(path, head, meta, garbled)
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(path))
    assert excinfo.value.reason == "corrupt"


@pytest.mark.parametrize("key", ["tensor_bytes", "state_bytes", "config", "tensors", "epoch"])
def test_missing_metadata_key_is_corrupt(tmp_path, tiny_model, key):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path))
    head, meta, payload = _split_checkpoint(path)
    del meta[key]
    _write_checkpoint(path, head, meta, payload)
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(path))
    assert excinfo.value.reason == "corrupt"


def test_rewritten_metadata_without_changes_still_loads(tmp_path, tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(tiny_model, str(path))
    head, meta, payload = _split_checkpoint(path)
    _write_checkpoint(path, head, meta, payload)
    loaded, _ = load_checkpoint(str(path))
    assert loaded.cfg == tiny_model.cfg
