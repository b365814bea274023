"""
Modell-Paket für AUREXA-SE
--------------------------
Encoder, Fusion, zeitliche Modellierung, Decoder und das Gesamtmodell.
"""

from app.core.model.audio_encoder import AudioEncoder, encoded_length
from app.core.model.video_encoder import (
    VideoEncoder, window_partition, window_reverse, scaled_cosine_attention,
    log_cpb, log_spaced_coords, merge_patches, PatchMerging
)
from app.core.model.fusion import Fusion, CrossAttentionStep, align_temporal
from app.core.model.temporal import TemporalModel, SqueezeformerBlock, Squeeze, unsqueeze, window_mean
from app.core.model.decoder import Decoder, align_skip
from app.core.model.aurexa import AurexaSE, build_model, count_parameters, parameter_summary, MODULE_NAMES

__all__ = [
    'AudioEncoder',
    'encoded_length',
    'VideoEncoder',
    'window_partition',
    'window_reverse',
    'scaled_cosine_attention',
    'log_cpb',
    'log_spaced_coords',
    'merge_patches',
    'PatchMerging',
    'Fusion',
    'CrossAttentionStep',
    'align_temporal',
    'TemporalModel',
    'SqueezeformerBlock',
    'Squeeze',
    'unsqueeze',
    'window_mean',
    'Decoder',
    'align_skip',
    'AurexaSE',
    'build_model',
    'count_parameters',
    'parameter_summary',
    'MODULE_NAMES'
]
