"""
Decoder für AUREXA-SE
---------------------
U-Net-artiger Wellenform-Decoder: verdoppelt die Zeitauflösung je Stufe,
verknüpft die Skip-Merkmale des Audio-Encoders und erzeugt per Tanh die Samples.
"""

import logging
from typing import List

import torch
import torch.nn as nn
import torch.nn.functional as F

from app.core.model.fusion import align_temporal
from app.models.schemas import AudioEncoderConfig, DecoderConfig
from app.utils.error_handling import ShapeError

# Logger konfigurieren
logger = logging.getLogger("aurexa.model.decoder")

def align_skip(skip: torch.Tensor, target_len: int) -> torch.Tensor:
    """
    Bringt eine Skip-Folge [B, L, C] auf target_len Zeitschritte.

    Abweichung > 1: lineare Interpolation; genau 1: Nullauffüllung bzw. Abschneiden
    am Ende; sonst unverändert.
    """
    length = skip.shape[1]
    if length == target_len:
        return skip
    if abs(length - target_len) > 1:
        return align_temporal(skip, target_len)
    if length > target_len:
        return skip[:, :target_len]
    return F.pad(skip, (0, 0, 0, target_len - length))

class UpsamplingBlock(nn.Module):
    """Frame-Wiederholung x2 -> Linear, Skip anhängen, Linear -> LayerNorm -> ReLU."""

    def __init__(self, in_dim: int, skip_dim: int, out_dim: int):
        super().__init__()
        self.upsample = nn.Linear(in_dim, in_dim)
        self.merge = nn.Linear(in_dim + skip_dim, out_dim)
        self.norm = nn.LayerNorm(out_dim)
        self.act = nn.ReLU()

    def forward(self, x: torch.Tensor, skip: torch.Tensor) -> torch.Tensor:
        x = self.upsample(torch.repeat_interleave(x, 2, dim=1))
        skip = align_skip(skip, x.shape[1])
        x = torch.cat([x, skip], dim=-1)
        return self.act(self.norm(self.merge(x)))

class Decoder(nn.Module):
    """
    Wellenform-Decoder.

    Attributes:
        cfg (DecoderConfig): Konfiguration
        skip_channels (List[int]): Kanalzahlen der Encoder-Stufen
        input_proj (nn.Linear): Projektion auf die Kanalzahl der tiefsten Skip-Stufe
        blocks (nn.ModuleList): Aufwärtsstufen
        output (nn.Linear): Abbildung auf einen Kanal
    """

    def __init__(self, cfg: DecoderConfig, encoder_cfg: AudioEncoderConfig):
        super().__init__()
        if cfg.num_blocks != encoder_cfg.num_blocks:
            raise ShapeError(
                f"Decoder-Stufen ({cfg.num_blocks}) müssen den Encoder-Stufen ({encoder_cfg.num_blocks}) entsprechen"
            )
        self.cfg = cfg
        self.skip_channels = list(encoder_cfg.stage_channels)
        self.input_proj = nn.Linear(encoder_cfg.latent_dim, self.skip_channels[-1])

        blocks = []
        in_dim = self.skip_channels[-1]
        for i, out_dim in enumerate(cfg.hidden_dims):
            blocks.append(UpsamplingBlock(in_dim, self.skip_channels[cfg.num_blocks - 1 - i], out_dim))
            in_dim = out_dim
        self.blocks = nn.ModuleList(blocks)
        self.output = nn.Linear(in_dim, 1)

    def forward(self, features: torch.Tensor, skips: List[torch.Tensor]) -> torch.Tensor:
        """
        Args:
            features: [B, T', D]
            skips: Skip-Stapel des Encoders, Stufe i als [B, C_i, L_i]

        Returns:
            Wellenform [B, T' * 2^num_blocks] in [-1, 1]
        """
        if len(skips) != self.cfg.num_blocks:
            raise ShapeError(f"Skip-Stapel mit {len(skips)} Stufen, erwartet {self.cfg.num_blocks}")
        for stage, (skip, channels) in enumerate(zip(skips, self.skip_channels)):
            if skip.shape[1] != channels:
                raise ShapeError(f"Skip-Stufe {stage} hat {skip.shape[1]} Kanäle, erwartet {channels}")

        x = self.input_proj(features)
        for i, block in enumerate(self.blocks):
            x = block(x, skips[self.cfg.num_blocks - 1 - i].transpose(1, 2))
        waveform = torch.tanh(self.output(x)).squeeze(-1)
        return torch.clamp(waveform, -self.cfg.output_clamp, self.cfg.output_clamp)
