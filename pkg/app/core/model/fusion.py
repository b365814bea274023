"""
Audio-visuelle Fusion für AUREXA-SE
-----------------------------------
Bidirektionale Kreuzaufmerksamkeit zwischen Audio- und Videofolge in mehreren
Iterationen; das Ergebnis liegt in der zeitlichen Auflösung des Audios vor.
"""

import logging
from typing import Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from app.models.schemas import FusionConfig
from app.utils.error_handling import ShapeError

# Logger konfigurieren
logger = logging.getLogger("aurexa.model.fusion")

def align_temporal(sequence: torch.Tensor, target_len: int) -> torch.Tensor:
    """
    Lineare Interpolation einer Folge [B, T, D] auf target_len Zeitschritte.

    Die Endpunkte bleiben ausgerichtet: Position i entspricht i * (T - 1) / (target_len - 1).
    Bei gleicher Länge wird die Eingabe unverändert zurückgegeben.
    """
    if target_len < 1 or sequence.shape[1] < 1:
        raise ShapeError(f"Ungültige Längen für die Interpolation: {sequence.shape[1]} -> {target_len}")
    if sequence.shape[1] == target_len:
        return sequence
    if sequence.shape[1] == 1:
        return sequence.expand(-1, target_len, -1)
    aligned = F.interpolate(sequence.transpose(1, 2), size=target_len, mode="linear", align_corners=True)
    return aligned.transpose(1, 2)

class CrossAttentionStep(nn.Module):
    """
    Eine Fusionsiteration mit gleichzeitiger Aktualisierung beider Ströme.

    audio' = LN(audio + MHA(Q=audio, K=V=video))
    video' = LN(video + MHA(Q=video, K=V=audio))
    """

    def __init__(self, d_model: int, heads: int):
        super().__init__()
        self.audio_attn = nn.MultiheadAttention(d_model, heads, batch_first=True)
        self.video_attn = nn.MultiheadAttention(d_model, heads, batch_first=True)
        self.audio_norm = nn.LayerNorm(d_model)
        self.video_norm = nn.LayerNorm(d_model)

    def forward(self, audio: torch.Tensor, video: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        if audio.shape != video.shape:
            raise ShapeError(
                f"Audio {tuple(audio.shape)} und Video {tuple(video.shape)} müssen nach der Ausrichtung gleich geformt sein"
            )
        audio_ctx, _ = self.audio_attn(audio, video, video, need_weights=False)
        video_ctx, _ = self.video_attn(video, audio, audio, need_weights=False)
        return self.audio_norm(audio + audio_ctx), self.video_norm(video + video_ctx)

class Fusion(nn.Module):
    """
    Fusionsmodul.

    Attributes:
        cfg (FusionConfig): Konfiguration
        video_proj (Optional[nn.Linear]): Projektion der Video-Merkmale auf d_model
        steps (nn.ModuleList): Eine Iteration je Eintrag, ohne geteilte Parameter
    """

    def __init__(self, cfg: FusionConfig, video_dim: Optional[int] = None):
        super().__init__()
        self.cfg = cfg
        video_dim = video_dim or cfg.d_model
        self.video_proj = nn.Linear(video_dim, cfg.d_model) if video_dim != cfg.d_model else None
        self.steps = nn.ModuleList(CrossAttentionStep(cfg.d_model, cfg.heads) for _ in range(cfg.iterations))

    def forward(self, audio: torch.Tensor, video: torch.Tensor) -> torch.Tensor:
        """
        Args:
            audio: [B, Ta, d_model]
            video: [B, Tv, video_dim]

        Returns:
            Fusionierte Folge [B, Ta, d_model], begrenzt auf ±clamp_bound
        """
        if audio.shape[-1] != self.cfg.d_model:
            raise ShapeError(f"Audio-Merkmalsdimension {audio.shape[-1]} != d_model {self.cfg.d_model}")
        if self.video_proj is not None:
            video = self.video_proj(video)
        video = align_temporal(video, audio.shape[1])

        for step in self.steps:
            audio, video = step(audio, video)

        fused = (audio + video) / 2.0
        return torch.clamp(fused, -self.cfg.clamp_bound, self.cfg.clamp_bound)
