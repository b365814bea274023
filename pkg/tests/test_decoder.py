import pytest
import torch

from app.core.model.audio_encoder import AudioEncoder
from app.core.model.decoder import Decoder, align_skip
from app.models.schemas import AudioEncoderConfig, DecoderConfig, model_preset
from app.utils.error_handling import ShapeError


def test_align_skip_rules():
    x = torch.randn(1, 10, 3)
    assert align_skip(x, 10) is x

    longer = align_skip(x, 20)
    assert longer.shape == (1, 20, 3)
    assert torch.allclose(longer[:, 0], x[:, 0], atol=1e-6)
    assert torch.allclose(longer[:, -1], x[:, -1], atol=1e-5)

    eleven = torch.randn(1, 11, 3)
    assert torch.equal(align_skip(eleven, 10), eleven[:, :10])

    padded = align_skip(torch.randn(1, 9, 3), 10)
    assert padded.shape == (1, 10, 3)
    assert not padded[:, -1].any()


def test_default_decoder_3000_to_48000():
    encoder_cfg = AudioEncoderConfig()
    encoder = AudioEncoder(encoder_cfg).eval()
    decoder = Decoder(DecoderConfig(), encoder_cfg).eval()
    with torch.no_grad():
        features, skips = encoder(torch.randn(1, 48000) * 0.3)
        waveform = decoder(features, skips)
    assert waveform.shape == (1, 48000)
    assert waveform.abs().max() <= 1.0
    assert torch.isfinite(waveform).all()


def test_mismatched_skip_stack_raises():
    encoder_cfg = AudioEncoderConfig(stage_channels=[4, 4, 4, 4], latent_dim=8)
    decoder = Decoder(DecoderConfig(hidden_dims=[8, 8, 4, 4]), encoder_cfg)
    features = torch.randn(1, 4, 8)
    skips = [torch.randn(1, 4, 32), torch.randn(1, 4, 16), torch.randn(1, 4, 8), torch.randn(1, 4, 4)]
    assert decoder(features, skips).shape == (1, 64)
    with pytest.raises(ShapeError):
        decoder(features, skips[:3])
    with pytest.raises(ShapeError):
        decoder(features, [torch.randn(1, 5, 32)] + skips[1:])


def test_encoder_decoder_stage_count_must_match():
    with pytest.raises(ShapeError):
        Decoder(DecoderConfig(num_blocks=3, hidden_dims=[8, 8, 8]), AudioEncoderConfig())


def test_gradients_match_finite_differences(module_grad_check):
    torch.manual_seed(0)
    cfg = model_preset("tiny")
    decoder = Decoder(cfg.decoder, cfg.audio).train()
    generator = torch.Generator().manual_seed(1)
    features = torch.randn(2, 4, 8, generator=generator, dtype=torch.float64)
    skips = [torch.rand(2, 4, 64 // 2 ** (i + 1), generator=generator, dtype=torch.float64) for i in range(4)]
    assert module_grad_check(decoder, lambda: decoder(features, skips)) >= 0.95


@pytest.mark.parametrize("num_blocks", [1, 2, 4])
def test_decode_of_encode_keeps_length(num_blocks):
    torch.manual_seed(num_blocks)
    encoder_cfg = AudioEncoderConfig(num_blocks=num_blocks, stage_channels=[4] * num_blocks, latent_dim=8)
    encoder = AudioEncoder(encoder_cfg).eval()
    decoder = Decoder(DecoderConfig(num_blocks=num_blocks, hidden_dims=[8] * num_blocks), encoder_cfg).eval()
    stride = 2 ** num_blocks
    for multiple in (1, 2, 3, 7, 16, 125):
        length = stride * multiple
        with torch.no_grad():
            features, skips = encoder(torch.randn(2, length) * 0.3)
            waveform = decoder(features, skips)
        assert features.shape[1] == length // stride
        assert waveform.shape == (2, length)
        assert waveform.abs().max() <= 1.0


def test_encoder_rejects_length_not_divisible_by_total_stride():
    encoder = AudioEncoder(AudioEncoderConfig(num_blocks=2, stage_channels=[4, 4], latent_dim=8))
    with pytest.raises(ShapeError):
        encoder(torch.randn(1, 30))
