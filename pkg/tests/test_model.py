import pytest
import torch

from app.core.data.dataset import batch_tensors
from app.core.data.synthesizer import synth_scene
from app.core.metrics.evaluation import mse_loss
from app.core.model.aurexa import MODULE_NAMES, build_model, count_parameters, parameter_summary
from app.models.schemas import FusionConfig, model_preset
from app.utils.error_handling import ConfigurationError, ShapeError


def test_toy_pipeline_on_default_scene():
    model = build_model(model_preset("toy")).eval()
    mixture, video, _ = batch_tensors([synth_scene(0)])
    with torch.no_grad():
        estimate = model(mixture, video)
    assert estimate.shape == (1, 48000)
    assert torch.isfinite(estimate).all()
    assert estimate.abs().max() <= 1.0


def test_toy_parameter_count():
    model = build_model(model_preset("toy"))
    summary = parameter_summary(model)
    assert set(summary) == set(MODULE_NAMES) | {"total"}
    assert sum(summary[name] for name in MODULE_NAMES) == summary["total"] == count_parameters(model)
    assert summary["total"] < 3_000_000


def test_build_is_deterministic(tiny_cfg):
    first = build_model(tiny_cfg).state_dict()
    second = build_model(tiny_cfg).state_dict()
    assert all(torch.equal(first[name], second[name]) for name in first)
    other = build_model(tiny_cfg.model_copy(update={"seed": 1})).state_dict()
    assert not all(torch.equal(first[name], other[name]) for name in first)


def test_incompatible_dimensions_rejected(tiny_cfg):
    cfg = tiny_cfg.model_copy(update={"fusion": FusionConfig(d_model=16, heads=2, iterations=1)})
    with pytest.raises(ConfigurationError):
        build_model(cfg)


def test_batch_mismatch_raises(tiny_cfg):
    model = build_model(tiny_cfg)
    with pytest.raises(ShapeError):
        model(torch.zeros(2, 64), torch.zeros(1, 4, 16, 16, 3))


def test_tiny_scene_shapes(tiny_cfg, tiny_scenes):
    model = build_model(tiny_cfg).eval()
    mixture, video, target = batch_tensors(tiny_scenes)
    with torch.no_grad():
        assert model(mixture, video).shape == target.shape


def test_gradient_reaches_first_encoder_conv(tiny_cfg, tiny_scenes):
    model = build_model(tiny_cfg).train()
    mixture, video, target = batch_tensors(tiny_scenes[:2])
    mse_loss(model(mixture, video), target).backward()
    grad = model.audio_encoder.blocks[0].conv.weight.grad
    assert grad is not None
    assert grad.abs().sum() > 0


def test_video_influences_output(tiny_cfg, tiny_scenes):
    model = build_model(tiny_cfg).eval()
    mixture, video, _ = batch_tensors(tiny_scenes[:1])
    with torch.no_grad():
        with_video = model(mixture, video)
        without_video = model(mixture, torch.zeros_like(video))
    assert not torch.equal(with_video, without_video)
