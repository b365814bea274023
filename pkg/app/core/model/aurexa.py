"""
AUREXA-SE-Gesamtmodell
----------------------
Setzt Audio-Encoder, Video-Encoder, Fusion, zeitliche Modellierung und Decoder
zusammen: (Mischung [B, T], Video [B, T_v, H, W, 3]) -> verbesserte Wellenform [B, T].
"""

import logging
from typing import Dict

import torch
import torch.nn as nn

from app.config import REFERENCE_MODEL_SIZE_MB, REFERENCE_PARAM_COUNT_M
from app.core.model.audio_encoder import AudioEncoder
from app.core.model.decoder import Decoder
from app.core.model.fusion import Fusion
from app.core.model.temporal import TemporalModel
from app.core.model.video_encoder import VideoEncoder
from app.models.schemas import ModelConfig
from app.utils.error_handling import ConfigurationError, ShapeError
from app.utils.format_utils import format_model_size, format_param_count

# Logger konfigurieren
logger = logging.getLogger("aurexa.model")

MODULE_NAMES = ("audio_encoder", "video_encoder", "fusion", "temporal", "decoder")

class AurexaSE(nn.Module):
    """
    Audio-visuelles Sprachverbesserungsmodell.

    Attributes:
        cfg (ModelConfig): Vollständige Modellkonfiguration
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.audio_encoder = AudioEncoder(cfg.audio)
        self.video_encoder = VideoEncoder(cfg.video)
        self.fusion = Fusion(cfg.fusion, video_dim=cfg.video.out_dim)
        self.temporal = TemporalModel(cfg.temporal)
        self.decoder = Decoder(cfg.decoder, cfg.audio)

    def forward(self, mixture: torch.Tensor, video: torch.Tensor) -> torch.Tensor:
        """
        Args:
            mixture: Gemischte Wellenform [B, T]
            video: Frames [B, T_v, H, W, 3]

        Returns:
            Geschätzte Zielwellenform [B, T] in [-1, 1]
        """
        if mixture.shape[0] != video.shape[0]:
            raise ShapeError(f"Batchgrößen von Audio ({mixture.shape[0]}) und Video ({video.shape[0]}) weichen ab")
        audio_features, skips = self.audio_encoder(mixture)
        video_features = self.video_encoder(video)
        fused = self.fusion(audio_features, video_features)
        modeled = self.temporal(fused)
        return self.decoder(modeled, skips)

def validate_model_config(cfg: ModelConfig) -> None:
    """
    Prüft die Verträglichkeit der Abschnitte untereinander.

    Raises:
        ConfigurationError: Bei unverträglichen Dimensionen
    """
    if cfg.audio.latent_dim != cfg.fusion.d_model:
        raise ConfigurationError(
            f"audio.latent_dim ({cfg.audio.latent_dim}) muss fusion.d_model ({cfg.fusion.d_model}) entsprechen"
        )
    if cfg.temporal.d_model != cfg.fusion.d_model:
        raise ConfigurationError(
            f"temporal.d_model ({cfg.temporal.d_model}) muss fusion.d_model ({cfg.fusion.d_model}) entsprechen"
        )
    if cfg.decoder.num_blocks != cfg.audio.num_blocks:
        raise ConfigurationError(
            f"decoder.num_blocks ({cfg.decoder.num_blocks}) muss audio.num_blocks ({cfg.audio.num_blocks}) entsprechen"
        )

def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())

def parameter_summary(model: AurexaSE) -> Dict[str, int]:
    """Parameteranzahl je Modul und gesamt."""
    summary = {name: count_parameters(getattr(model, name)) for name in MODULE_NAMES}
    summary["total"] = count_parameters(model)
    return summary

def build_model(cfg: ModelConfig) -> AurexaSE:
    """
    Baut das Modell deterministisch aus cfg.seed.

    Args:
        cfg: Modellkonfiguration

    Returns:
        AurexaSE

    Raises:
        ConfigurationError: Bei unverträglichen Dimensionen
    """
    validate_model_config(cfg)
    torch.manual_seed(cfg.seed)
    model = AurexaSE(cfg)

    total = count_parameters(model)
    logger.info(
        f"Modell erstellt: {format_param_count(total)} Parameter, {format_model_size(total)} "
        f"(Referenz: {REFERENCE_PARAM_COUNT_M} M / {REFERENCE_MODEL_SIZE_MB} MB)"
    )
    return model
