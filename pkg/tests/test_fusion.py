import pytest
import torch
import torch.nn.functional as F

from app.core.model.fusion import CrossAttentionStep, Fusion, align_temporal
from app.models.schemas import FusionConfig
from app.utils.error_handling import ShapeError


def test_align_temporal_identity():
    x = torch.randn(2, 75, 4)
    assert align_temporal(x, 75) is x


def test_align_temporal_midpoint():
    x = torch.tensor([[[0.0, 2.0], [4.0, 6.0]]])
    out = align_temporal(x, 3)
    assert torch.allclose(out[0, 1], torch.tensor([2.0, 4.0]))


def test_align_temporal_endpoints_exact():
    x = torch.randn(1, 75, 8)
    out = align_temporal(x, 3000)
    assert out.shape == (1, 3000, 8)
    assert torch.allclose(out[:, 0], x[:, 0], atol=1e-6)
    assert torch.allclose(out[:, -1], x[:, -1], atol=1e-5)


def test_cross_attention_step_shapes():
    step = CrossAttentionStep(8, 2)
    audio, video = torch.randn(2, 10, 8), torch.randn(2, 10, 8)
    a, v = step(audio, video)
    assert a.shape == audio.shape
    assert v.shape == video.shape
    with pytest.raises(ShapeError):
        step(audio, torch.randn(2, 9, 8))


def test_zeroed_output_projection_passes_residual():
    step = CrossAttentionStep(8, 2)
    with torch.no_grad():
        step.audio_attn.out_proj.weight.zero_()
        step.audio_attn.out_proj.bias.zero_()
    audio, video = torch.randn(1, 6, 8), torch.randn(1, 6, 8)
    a, _ = step(audio, video)
    assert torch.allclose(a, step.audio_norm(audio), atol=1e-6)


def test_single_position_attention_is_value_projection():
    torch.manual_seed(0)
    step = CrossAttentionStep(8, 2)
    audio, video = torch.randn(1, 1, 8), torch.randn(1, 1, 8)
    attn = step.audio_attn
    value = F.linear(video, attn.in_proj_weight[16:], attn.in_proj_bias[16:])
    expected = step.audio_norm(audio + attn.out_proj(value))
    a, _ = step(audio, video)
    assert torch.allclose(a, expected, atol=1e-6)


def test_fusion_shape_and_clamp():
    fusion = Fusion(FusionConfig(), video_dim=128)
    with torch.no_grad():
        out = fusion(torch.randn(2, 300, 128), torch.randn(2, 75, 128))
    assert out.shape == (2, 300, 128)
    assert out.abs().max() <= 10.0


def test_fusion_projects_other_video_dims():
    fusion = Fusion(FusionConfig(d_model=8, heads=2), video_dim=12)
    assert fusion(torch.randn(1, 16, 8), torch.randn(1, 4, 12)).shape == (1, 16, 8)


def test_zero_inputs_give_layernorm_shift():
    fusion = Fusion(FusionConfig(d_model=8, heads=2, iterations=1))
    step = fusion.steps[0]
    with torch.no_grad():
        for attn in (step.audio_attn, step.video_attn):
            attn.in_proj_bias.zero_()
            attn.out_proj.bias.zero_()
        step.audio_norm.bias.copy_(torch.linspace(-1, 1, 8))
        step.video_norm.bias.copy_(torch.linspace(0, 2, 8))
        out = fusion(torch.zeros(1, 4, 8), torch.zeros(1, 2, 8))
    expected = (step.audio_norm.bias + step.video_norm.bias) / 2
    assert torch.allclose(out, expected.expand(1, 4, 8), atol=1e-6)


def test_fusion_gradients_match_finite_differences(module_grad_check):
    torch.manual_seed(0)
    fusion = Fusion(FusionConfig(d_model=8, heads=2, iterations=2), video_dim=6).train()
    audio = torch.randn(2, 12, 8, dtype=torch.float64)
    video = torch.randn(2, 4, 6, dtype=torch.float64)
    assert module_grad_check(fusion, lambda: fusion(audio, video)) >= 0.95


def test_fusion_batch_items_are_independent():
    torch.manual_seed(3)
    fusion = Fusion(FusionConfig(d_model=8, heads=2, iterations=2), video_dim=6).double().eval()
    audio = torch.randn(4, 20, 8, dtype=torch.float64)
    video = torch.randn(4, 5, 6, dtype=torch.float64)
    with torch.no_grad():
        batched = fusion(audio, video)
        for i in range(4):
            single = fusion(audio[i:i + 1], video[i:i + 1])
            assert torch.allclose(batched[i:i + 1], single, atol=1e-10)


def test_fusion_batch_item_unaffected_by_other_items():
    torch.manual_seed(4)
    fusion = Fusion(FusionConfig(d_model=8, heads=2), video_dim=8).double().eval()
    audio = torch.randn(2, 12, 8, dtype=torch.float64)
    video = torch.randn(2, 3, 8, dtype=torch.float64)
    changed_audio, changed_video = audio.clone(), video.clone()
    changed_audio[1] = 100.0 * torch.randn(12, 8, dtype=torch.float64)
    changed_video[1] = -changed_video[1]
    with torch.no_grad():
        assert torch.allclose(fusion(audio, video)[0], fusion(changed_audio, changed_video)[0], atol=1e-10)


@pytest.mark.parametrize("audio_len,video_len", [
    (1, 1), (16, 1), (16, 4), (16, 16), (16, 40), (300, 75), (7, 3), (3, 7),
])
def test_fusion_output_follows_audio_length(audio_len, video_len):
    torch.manual_seed(audio_len * 100 + video_len)
    fusion = Fusion(FusionConfig(d_model=8, heads=2), video_dim=6).eval()
    with torch.no_grad():
        out = fusion(torch.randn(2, audio_len, 8), torch.randn(2, video_len, 6))
    assert out.shape == (2, audio_len, 8)
    assert torch.isfinite(out).all()
    assert align_temporal(torch.randn(2, video_len, 6), audio_len).shape == (2, audio_len, 6)


def test_single_video_frame_is_broadcast_over_audio():
    frame = torch.randn(1, 1, 5)
    out = align_temporal(frame, 9)
    assert out.shape == (1, 9, 5)
    assert torch.equal(out, frame.expand(1, 9, 5))


def test_longer_video_is_downsampled_with_endpoints():
    video = torch.arange(40, dtype=torch.float64).view(1, 40, 1)
    out = align_temporal(video, 14)
    assert out.shape == (1, 14, 1)
    assert out[0, 0, 0].item() == pytest.approx(0.0)
    assert out[0, -1, 0].item() == pytest.approx(39.0)
    assert torch.allclose(out[0, :, 0], torch.linspace(0, 39, 14, dtype=torch.float64))


def test_align_temporal_rejects_empty_lengths():
    with pytest.raises(ShapeError):
        align_temporal(torch.randn(1, 0, 4), 5)
    with pytest.raises(ShapeError):
        align_temporal(torch.randn(1, 4, 4), 0)
