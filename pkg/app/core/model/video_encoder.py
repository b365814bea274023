"""
Video-Encoder für AUREXA-SE
---------------------------
Hierarchischer Vision-Transformer im Stil von Swin V2, der jeden Frame einzeln
auf einen Merkmalsvektor abbildet.

Bausteine:
    - Patch-Embedding (Faltung mit Kernel = Stride = patch_size) und LayerNorm
    - Fenster-Selbstaufmerksamkeit, abwechselnd unverschoben und um window/2 verschoben
    - Skalierte Kosinus-Aufmerksamkeit mit lernbarer Temperatur je Kopf
    - Kontinuierlicher Positions-Bias aus log-skalierten Relativkoordinaten
    - Residuen mit Post-Normalisierung: x + LN(F(x))
    - Patch-Merging zwischen den Stufen, Mittelwert-Pooling am Ende
    - Projektion auf out_dim mit LayerNorm und Begrenzung auf [-clamp_bound, clamp_bound]
"""

import logging
import math
from typing import Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from app.models.schemas import SwinConfig
from app.utils.error_handling import ShapeError

# Logger konfigurieren
logger = logging.getLogger("aurexa.model.video")

NORM_EPSILON = 1e-6

def _shift_mask(height: int, width: int, window: int, shift: int) -> torch.Tensor:
    """Maske [nW, w², w²]: 0 für Paare derselben Region, -inf für Paare über Regionsgrenzen."""
    labels = torch.zeros(height, width, dtype=torch.long)
    if shift > 0:
        region = 0
        bounds = (slice(0, -window), slice(-window, -shift), slice(-shift, None))
        for h_slice in bounds:
            for w_slice in bounds:
                labels[h_slice, w_slice] = region
                region += 1
    windows = labels.view(height // window, window, width // window, window)
    windows = windows.permute(0, 2, 1, 3).reshape(-1, window * window)
    crossing = windows.unsqueeze(1) != windows.unsqueeze(2)
    mask = torch.zeros(crossing.shape)
    return mask.masked_fill(crossing, float("-inf"))

def window_partition(x: torch.Tensor, window: int, shift: int = 0) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Zerlegt ein Token-Gitter in nicht überlappende Fenster.

    Vor der Zerlegung wird zyklisch um (-shift, -shift) verschoben.

    Args:
        x: Token-Gitter [N, H, W, C]
        window: Fensterkantenlänge
        shift: 0 oder window // 2

    Returns:
        (Fenster [N * nW, window², C], Maske [nW, window², window²])

    Raises:
        ShapeError: H oder W nicht durch window teilbar
    """
    n, height, width, channels = x.shape
    if height % window != 0 or width % window != 0:
        raise ShapeError(f"Gitter {height}x{width} ist nicht durch Fenstergröße {window} teilbar")
    if shift > 0:
        x = torch.roll(x, shifts=(-shift, -shift), dims=(1, 2))
    windows = x.view(n, height // window, window, width // window, window, channels)
    windows = windows.permute(0, 1, 3, 2, 4, 5).reshape(-1, window * window, channels)
    mask = _shift_mask(height, width, window, shift).to(dtype=x.dtype, device=x.device)
    return windows, mask

def window_reverse(windows: torch.Tensor, window: int, height: int, width: int, shift: int = 0) -> torch.Tensor:
    """Setzt Fenster wieder zum Gitter [N, H, W, C] zusammen und macht die Verschiebung rückgängig."""
    channels = windows.shape[-1]
    n = windows.shape[0] // ((height // window) * (width // window))
    x = windows.view(n, height // window, width // window, window, window, channels)
    x = x.permute(0, 1, 3, 2, 4, 5).reshape(n, height, width, channels)
    if shift > 0:
        x = torch.roll(x, shifts=(shift, shift), dims=(1, 2))
    return x

def scaled_cosine_attention(q: torch.Tensor, k: torch.Tensor, v: torch.Tensor, log_tau: torch.Tensor,
                            bias: Optional[torch.Tensor] = None, mask: Optional[torch.Tensor] = None,
                            tau_max_log: float = math.log(100.0),
                            return_weights: bool = False):
    """
    Kosinus-Aufmerksamkeit: softmax(cos(q, k) * exp(min(log_tau, tau_max_log)) + bias + mask) @ v.

    Args:
        q, k, v: [..., heads, L, d]
        log_tau: Logarithmische Temperatur je Kopf, broadcastbar auf [..., heads, L, L]
        bias: Optionaler Positions-Bias [heads, L, L]
        mask: Optionale additive Maske (0 / -inf), broadcastbar auf die Logits

    Returns:
        Ausgabe [..., heads, L, d], optional zusätzlich die Gewichte
    """
    q = F.normalize(q, dim=-1, eps=NORM_EPSILON)
    k = F.normalize(k, dim=-1, eps=NORM_EPSILON)
    scale = torch.exp(torch.clamp(log_tau, max=tau_max_log))
    logits = torch.matmul(q, k.transpose(-2, -1)) * scale
    if bias is not None:
        logits = logits + bias
    if mask is not None:
        logits = logits + mask
    weights = torch.softmax(logits, dim=-1)
    output = torch.matmul(weights, v)
    if return_weights:
        return output, weights
    return output

def log_spaced_coords(window: int) -> torch.Tensor:
    """Relativkoordinaten Δ ∈ [-(w-1), w-1]² als sign(Δ) * log(1 + |Δ|) / log(8), Form [(2w-1)², 2]."""
    span = torch.arange(-(window - 1), window, dtype=torch.float32)
    grid = torch.stack(torch.meshgrid(span, span, indexing="ij"), dim=-1).reshape(-1, 2)
    return torch.sign(grid) * torch.log1p(grid.abs()) / math.log(8.0)

def relative_position_index(window: int) -> torch.Tensor:
    """Index [w², w²] jedes Token-Paares in die Tabelle der Relativkoordinaten."""
    coords = torch.stack(torch.meshgrid(torch.arange(window), torch.arange(window), indexing="ij")).flatten(1)
    relative = coords[:, :, None] - coords[:, None, :]
    relative = relative.permute(1, 2, 0) + (window - 1)
    return relative[..., 0] * (2 * window - 1) + relative[..., 1]

def log_cpb(window: int, mlp: nn.Module) -> torch.Tensor:
    """
    Positions-Bias-Tabelle [heads, w², w²] aus einem MLP über log-skalierten Relativkoordinaten.

    Args:
        window: Fensterkantenlänge
        mlp: Abbildung [*, 2] -> [*, heads]
    """
    param = next(mlp.parameters())
    coords = log_spaced_coords(window).to(dtype=param.dtype, device=param.device)
    table = mlp(coords)
    index = relative_position_index(window).to(param.device)
    bias = table[index.reshape(-1)].reshape(window * window, window * window, -1)
    return bias.permute(2, 0, 1).contiguous()

class WindowAttention(nn.Module):
    """Multi-Head-Kosinus-Aufmerksamkeit innerhalb eines Fensters."""

    def __init__(self, dim: int, heads: int, window: int, cfg: SwinConfig):
        super().__init__()
        self.heads = heads
        self.window = window
        self.tau_max_log = cfg.tau_max_log
        self.qkv = nn.Linear(dim, 3 * dim)
        self.proj = nn.Linear(dim, dim)
        self.log_tau = nn.Parameter(torch.full((heads, 1, 1), math.log(cfg.tau_init)))
        self.cpb_mlp = nn.Sequential(
            nn.Linear(2, cfg.cpb_hidden),
            nn.ReLU(),
            nn.Linear(cfg.cpb_hidden, heads, bias=False),
        )

    def forward(self, x: torch.Tensor, mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        """
        Args:
            x: Fenster [B_, L, C]
            mask: Maske [B_, L, L] oder None
        """
        batch, length, channels = x.shape
        qkv = self.qkv(x).reshape(batch, length, 3, self.heads, channels // self.heads)
        q, k, v = qkv.permute(2, 0, 3, 1, 4)
        bias = log_cpb(self.window, self.cpb_mlp)
        if mask is not None:
            mask = mask.unsqueeze(1)
        out = scaled_cosine_attention(q, k, v, self.log_tau, bias, mask, self.tau_max_log)
        out = out.transpose(1, 2).reshape(batch, length, channels)
        return self.proj(out)

class SwinBlock(nn.Module):
    """Fenster-Aufmerksamkeit und MLP, jeweils als x + LN(F(x))."""

    def __init__(self, dim: int, heads: int, window: int, shift: int, cfg: SwinConfig):
        super().__init__()
        self.window = window
        self.shift = shift
        self.attn = WindowAttention(dim, heads, window, cfg)
        self.norm1 = nn.LayerNorm(dim)
        hidden = int(dim * cfg.mlp_ratio)
        self.mlp = nn.Sequential(nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim))
        self.norm2 = nn.LayerNorm(dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """x: Token-Gitter [N, H, W, C]."""
        n, height, width, channels = x.shape
        # Kein Verschieben, wenn ein Fenster das ganze Gitter abdeckt
        shift = self.shift if height > self.window else 0
        windows, mask = window_partition(x, self.window, shift)
        mask = mask.repeat(n, 1, 1) if shift > 0 else None
        attended = window_reverse(self.attn(windows, mask), self.window, height, width, shift)
        x = x + self.norm1(attended)
        return x + self.norm2(self.mlp(x))

def merge_patches(x: torch.Tensor) -> torch.Tensor:
    """
    Fasst 2x2-Nachbarschaften zusammen: [N, H, W, C] -> [N, H/2, W/2, 4C].

    Raises:
        ShapeError: H oder W ungerade
    """
    _, height, width, _ = x.shape
    if height % 2 != 0 or width % 2 != 0:
        raise ShapeError(f"Patch-Merging braucht ein gerades Gitter, erhalten: {height}x{width}")
    x0 = x[:, 0::2, 0::2, :]
    x1 = x[:, 1::2, 0::2, :]
    x2 = x[:, 0::2, 1::2, :]
    x3 = x[:, 1::2, 1::2, :]
    return torch.cat([x0, x1, x2, x3], dim=-1)

class PatchMerging(nn.Module):
    """2x2-Zusammenfassung, lineare Reduktion 4C -> 2C und LayerNorm."""

    def __init__(self, dim: int):
        super().__init__()
        self.reduction = nn.Linear(4 * dim, 2 * dim, bias=False)
        self.norm = nn.LayerNorm(2 * dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.norm(self.reduction(merge_patches(x)))

class PatchEmbed(nn.Module):
    """Zerlegt einen Frame in patch_size x patch_size-Patches und bettet sie ein."""

    def __init__(self, cfg: SwinConfig):
        super().__init__()
        self.proj = nn.Conv2d(3, cfg.embed_dim, kernel_size=cfg.patch_size, stride=cfg.patch_size)
        self.norm = nn.LayerNorm(cfg.embed_dim)

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        """frames: [N, 3, H, W] -> Token-Gitter [N, H/p, W/p, C]."""
        return self.norm(self.proj(frames).permute(0, 2, 3, 1))

class VideoEncoder(nn.Module):
    """
    Frame-weiser Swin-Encoder.

    Attributes:
        cfg (SwinConfig): Konfiguration
        stages (nn.ModuleList): Blöcke je Stufe
        merges (nn.ModuleList): Patch-Merging nach allen Stufen außer der letzten
        head (nn.Linear): Projektion auf out_dim
        head_norm (nn.LayerNorm): Normalisierung der projizierten Merkmale vor der Begrenzung
    """

    def __init__(self, cfg: SwinConfig):
        super().__init__()
        self.cfg = cfg
        self.patch_embed = PatchEmbed(cfg)
        self.stages = nn.ModuleList()
        self.merges = nn.ModuleList()

        dim = cfg.embed_dim
        for stage, (depth, heads) in enumerate(zip(cfg.depths, cfg.heads)):
            blocks = nn.ModuleList(
                SwinBlock(dim, heads, cfg.window, 0 if i % 2 == 0 else cfg.window // 2, cfg)
                for i in range(depth)
            )
            self.stages.append(blocks)
            if stage < len(cfg.depths) - 1:
                self.merges.append(PatchMerging(dim))
                dim *= 2

        self.final_dim = dim
        self.head = nn.Linear(dim, cfg.out_dim)
        self.head_norm = nn.LayerNorm(cfg.out_dim)

    def embed_frames(self, frames: torch.Tensor) -> torch.Tensor:
        """frames: [N, H, W, 3] -> Einbettungen [N, out_dim]."""
        x = self.patch_embed(frames.permute(0, 3, 1, 2))
        for stage, blocks in enumerate(self.stages):
            for block in blocks:
                x = block(x)
            if stage < len(self.merges):
                x = self.merges[stage](x)
        pooled = x.mean(dim=(1, 2))
        features = self.head_norm(self.head(pooled))
        return torch.clamp(features, -self.cfg.clamp_bound, self.cfg.clamp_bound)

    def forward(self, video: torch.Tensor) -> torch.Tensor:
        """
        Args:
            video: [B, T, H, W, 3] mit H == W == image_size, Werte in [0, 1]

        Returns:
            Merkmalsfolge [B, T, out_dim]
        """
        if video.dim() != 5 or video.shape[-1] != 3:
            raise ShapeError(f"Video muss die Form [B, T, H, W, 3] haben, erhalten: {tuple(video.shape)}")
        batch, frames, height, width, _ = video.shape
        size = self.cfg.image_size
        if height != size or width != size:
            raise ShapeError(f"Frames müssen {size}x{size} groß sein, erhalten: {height}x{width}")

        embeddings = self.embed_frames(video.reshape(batch * frames, height, width, 3))
        return embeddings.reshape(batch, frames, -1)
