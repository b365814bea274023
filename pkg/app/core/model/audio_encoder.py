"""
Audio-Encoder für AUREXA-SE
---------------------------
U-Net-artiger 1D-Faltungs-Encoder: Wellenform [B, T] -> Merkmalsfolge [B, T', D]
plus Skip-Stapel mit einer Merkmalskarte je Stufe.
"""

import logging
from typing import List, Tuple

import torch
import torch.nn as nn

from app.models.schemas import AudioEncoderConfig
from app.utils.error_handling import ShapeError

# Logger konfigurieren
logger = logging.getLogger("aurexa.model.audio")

def encoded_length(length: int, cfg: AudioEncoderConfig) -> int:
    """
    Länge der Merkmalsfolge nach num_blocks Faltungsstufen.

    Für durch stride^num_blocks teilbare Längen ergibt sich length / stride^num_blocks,
    sonst gilt je Stufe floor((L + 2 * pad - kernel) / stride) + 1.
    """
    for _ in range(cfg.num_blocks):
        length = (length + 2 * cfg.padding - cfg.kernel) // cfg.stride + 1
    return length

class DownsamplingBlock(nn.Module):
    """Conv1d (kernel 4, stride 2, padding 1) -> BatchNorm -> ReLU."""

    def __init__(self, in_channels: int, out_channels: int, cfg: AudioEncoderConfig):
        super().__init__()
        self.conv = nn.Conv1d(in_channels, out_channels, cfg.kernel, stride=cfg.stride, padding=cfg.padding)
        self.norm = nn.BatchNorm1d(out_channels, eps=cfg.bn_epsilon)
        self.act = nn.ReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.act(self.norm(self.conv(x)))

class AudioEncoder(nn.Module):
    """
    Audio-Encoder.

    Attributes:
        cfg (AudioEncoderConfig): Konfiguration
        blocks (nn.ModuleList): Abwärtsstufen
        projection (nn.Conv1d): 1x1-Faltung auf latent_dim
    """

    def __init__(self, cfg: AudioEncoderConfig):
        super().__init__()
        self.cfg = cfg
        channels = [1] + list(cfg.stage_channels)
        self.blocks = nn.ModuleList(
            DownsamplingBlock(channels[i], channels[i + 1], cfg) for i in range(cfg.num_blocks)
        )
        self.projection = nn.Conv1d(channels[-1], cfg.latent_dim, kernel_size=1)

    @property
    def total_stride(self) -> int:
        return self.cfg.stride ** self.cfg.num_blocks

    def forward(self, waveform: torch.Tensor) -> Tuple[torch.Tensor, List[torch.Tensor]]:
        """
        Args:
            waveform: [B, T] mit T durch stride^num_blocks teilbar

        Returns:
            (Merkmalsfolge [B, T', D], Skip-Stapel [B, C_i, T / 2^(i+1)] je Stufe)
        """
        if waveform.dim() != 2:
            raise ShapeError(f"Wellenform muss die Form [B, T] haben, erhalten: {tuple(waveform.shape)}")
        length = waveform.shape[-1]
        if length % self.total_stride != 0:
            raise ShapeError(
                f"Länge {length} ist nicht durch {self.total_stride} teilbar; "
                f"Eingabe bitte auf ein Vielfaches von {self.total_stride} auffüllen"
            )

        x = waveform.unsqueeze(1)
        skips = []
        for block in self.blocks:
            x = block(x)
            skips.append(x)
        features = self.projection(x).transpose(1, 2)
        return features, skips
