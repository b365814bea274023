import numpy as np
import pytest
import torch

from app.core.model.audio_encoder import AudioEncoder, encoded_length
from app.models.schemas import AudioEncoderConfig
from app.utils.error_handling import ShapeError


def test_encoded_length_examples():
    cfg = AudioEncoderConfig()
    assert encoded_length(48000, cfg) == 3000
    assert encoded_length(16, cfg) == 1


def test_encoded_length_non_divisible_uses_conv_formula():
    cfg = AudioEncoderConfig()
    length = 50
    for _ in range(cfg.num_blocks):
        length = (length + 2 - 4) // 2 + 1
    assert encoded_length(50, cfg) == length


def test_default_encoder_48000_to_3000():
    encoder = AudioEncoder(AudioEncoderConfig()).eval()
    with torch.no_grad():
        features, skips = encoder(torch.randn(1, 48000) * 0.1)
    assert features.shape == (1, 3000, 128)
    assert [skip.shape[-1] for skip in skips] == [24000, 12000, 6000, 3000]
    assert [skip.shape[1] for skip in skips] == [16, 32, 64, 128]
    assert torch.isfinite(features).all()
    assert all((skip >= 0).all() for skip in skips)


def test_sixteen_samples_to_one_frame():
    encoder = AudioEncoder(AudioEncoderConfig()).eval()
    with torch.no_grad():
        features, _ = encoder(torch.randn(1, 16))
    assert features.shape[1] == 1


def test_encoded_length_agrees_with_encoder(rng):
    cfg = AudioEncoderConfig(stage_channels=[4, 4, 4, 4], latent_dim=8)
    encoder = AudioEncoder(cfg).eval()
    with torch.no_grad():
        for length in rng.integers(1, 300, size=100) * 16:
            features, _ = encoder(torch.zeros(1, int(length)))
            assert features.shape[1] == encoded_length(int(length), cfg)


def test_identical_rows_in_inference_mode():
    encoder = AudioEncoder(AudioEncoderConfig(stage_channels=[4, 4, 4, 4], latent_dim=8)).eval()
    waveform = torch.randn(1, 256)
    with torch.no_grad():
        features, _ = encoder(waveform.repeat(2, 1))
    assert torch.equal(features[0], features[1])


def test_rejects_indivisible_length():
    encoder = AudioEncoder(AudioEncoderConfig())
    with pytest.raises(ShapeError):
        encoder(torch.zeros(1, 100))
    with pytest.raises(ShapeError):
        encoder(torch.zeros(1, 1, 64))


def test_gradients_match_finite_differences(module_grad_check):
    torch.manual_seed(0)
    encoder = AudioEncoder(AudioEncoderConfig(stage_channels=[4, 4, 4, 4], latent_dim=8)).train()
    waveform = torch.rand(2, 64, dtype=torch.float64) - 0.5

    def forward():
        features, skips = encoder(waveform)
        return torch.cat([features.reshape(-1)] + [skip.reshape(-1) for skip in skips])

    assert module_grad_check(encoder, forward) >= 0.95
