"""
Zeitliche Modellierung für AUREXA-SE
------------------------------------
Gestapelte Squeezeformer-Blöcke über der fusionierten Folge.

Jeder Block staucht die Folge zeitlich (squeeze), wendet Selbstaufmerksamkeit,
Feed-Forward, tiefenweise separierbare Faltung und ein zweites Feed-Forward an
(jeweils LN(x + F(x))) und bringt das Ergebnis mit dem Skip vor dem Stauchen
wieder auf die Eingangslänge.
"""

import logging
import math
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from app.core.model.fusion import align_temporal
from app.models.schemas import SqueezeformerConfig
from app.utils.error_handling import ShapeError

# Logger konfigurieren
logger = logging.getLogger("aurexa.model.temporal")

def window_mean(x: torch.Tensor, factor: int) -> torch.Tensor:
    """
    Mittelwert über nicht überlappende Fenster aus factor Zeitschritten: [B, T, D] -> [B, ceil(T/factor), D].

    Das letzte, unvollständige Fenster wird über seine tatsächliche Länge gemittelt.
    """
    batch, length, dim = x.shape
    windows = math.ceil(length / factor)
    padded = F.pad(x, (0, 0, 0, windows * factor - length))
    sums = padded.reshape(batch, windows, factor, dim).sum(dim=2)
    counts = torch.full((windows,), float(factor), dtype=x.dtype, device=x.device)
    counts[-1] = length - (windows - 1) * factor
    return sums / counts.view(1, windows, 1)

class Squeeze(nn.Module):
    """Zeitliche Stauchung um squeeze_factor, gefolgt von einer linearen Abbildung D -> D."""

    def __init__(self, cfg: SqueezeformerConfig):
        super().__init__()
        self.factor = cfg.squeeze_factor
        self.mode = cfg.squeeze_mode
        if self.mode == "conv":
            self.pool = nn.Conv1d(cfg.d_model, cfg.d_model, kernel_size=self.factor,
                                  stride=self.factor, groups=cfg.d_model)
        self.linear = nn.Linear(cfg.d_model, cfg.d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.mode == "conv":
            length = x.shape[1]
            missing = math.ceil(length / self.factor) * self.factor - length
            pooled = self.pool(F.pad(x.transpose(1, 2), (0, missing))).transpose(1, 2)
        else:
            pooled = window_mean(x, self.factor)
        return self.linear(pooled)

def unsqueeze(x_squeezed: torch.Tensor, target_len: int, skip: torch.Tensor) -> torch.Tensor:
    """
    Interpoliert die gestauchte Folge linear auf target_len und addiert den Skip.

    Raises:
        ShapeError: Skip-Länge != target_len
    """
    if skip.shape[1] != target_len:
        raise ShapeError(f"Skip-Länge {skip.shape[1]} passt nicht zur Ziellänge {target_len}")
    return align_temporal(x_squeezed, target_len) + skip

class CountingSelfAttention(nn.Module):
    """
    Multi-Head-Selbstaufmerksamkeit mit Skalarprodukt-Logits und Zähler der Logit-Auswertungen.

    Attributes:
        logit_count (int): Summe über B * heads * L² aller bisherigen Aufrufe
        last_weights (Optional[torch.Tensor]): Gewichte des letzten Aufrufs, falls keep_weights gesetzt
    """

    def __init__(self, d_model: int, heads: int):
        super().__init__()
        self.heads = heads
        self.head_dim = d_model // heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.out_proj = nn.Linear(d_model, d_model)
        self.logit_count = 0
        self.keep_weights = False
        self.last_weights: Optional[torch.Tensor] = None

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, dim = x.shape
        qkv = self.qkv(x).reshape(batch, length, 3, self.heads, self.head_dim)
        q, k, v = qkv.permute(2, 0, 3, 1, 4)
        logits = torch.matmul(q, k.transpose(-2, -1)) / math.sqrt(self.head_dim)
        self.logit_count += batch * self.heads * length * length
        weights = torch.softmax(logits, dim=-1)
        if self.keep_weights:
            self.last_weights = weights.detach()
        out = torch.matmul(weights, v).transpose(1, 2).reshape(batch, length, dim)
        return self.out_proj(out)

class FeedForward(nn.Module):
    def __init__(self, d_model: int, expansion: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(d_model, d_model * expansion),
            nn.SiLU(),
            nn.Linear(d_model * expansion, d_model),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)

class DepthwiseSeparableConv(nn.Module):
    """Tiefenweise Faltung ('same'-Padding), punktweise Faltung, Swish."""

    def __init__(self, d_model: int, kernel: int):
        super().__init__()
        self.depthwise = nn.Conv1d(d_model, d_model, kernel, padding=kernel // 2, groups=d_model)
        self.pointwise = nn.Conv1d(d_model, d_model, kernel_size=1)
        self.act = nn.SiLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.pointwise(self.depthwise(x.transpose(1, 2)))
        return self.act(y).transpose(1, 2)

class SqueezeformerBlock(nn.Module):
    """squeeze -> [MHSA, FFN, Conv, FFN] mit Post-Norm-Residuen -> unsqueeze mit Skip."""

    def __init__(self, cfg: SqueezeformerConfig):
        super().__init__()
        self.squeeze = Squeeze(cfg)
        self.mhsa = CountingSelfAttention(cfg.d_model, cfg.heads)
        self.ff1 = FeedForward(cfg.d_model, cfg.ff_expansion)
        self.conv = DepthwiseSeparableConv(cfg.d_model, cfg.conv_kernel)
        self.ff2 = FeedForward(cfg.d_model, cfg.ff_expansion)
        self.norm_mhsa = nn.LayerNorm(cfg.d_model)
        self.norm_ff1 = nn.LayerNorm(cfg.d_model)
        self.norm_conv = nn.LayerNorm(cfg.d_model)
        self.norm_ff2 = nn.LayerNorm(cfg.d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        length = x.shape[1]
        h = self.squeeze(x)
        h = self.norm_mhsa(h + self.mhsa(h))
        h = self.norm_ff1(h + self.ff1(h))
        h = self.norm_conv(h + self.conv(h))
        h = self.norm_ff2(h + self.ff2(h))
        return unsqueeze(h, length, x)

class TemporalModel(nn.Module):
    """Folge von num_blocks Squeezeformer-Blöcken; bei num_blocks = 0 die Identität."""

    def __init__(self, cfg: SqueezeformerConfig):
        super().__init__()
        self.cfg = cfg
        self.blocks = nn.ModuleList(SqueezeformerBlock(cfg) for _ in range(cfg.num_blocks))

    @property
    def logit_count(self) -> int:
        return sum(block.mhsa.logit_count for block in self.blocks)

    def reset_counters(self) -> None:
        for block in self.blocks:
            block.mhsa.logit_count = 0

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 3 or x.shape[-1] != self.cfg.d_model:
            raise ShapeError(f"Erwartet [B, T, {self.cfg.d_model}], erhalten: {tuple(x.shape)}")
        for block in self.blocks:
            x = block(x)
        return x
