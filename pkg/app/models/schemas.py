"""
Datenmodelle für AUREXA-SE
--------------------------
Pydantic-Modelle für Modell-, Trainings-, Synthese- und Laufkonfigurationen sowie Berichte.
Jedes Feld hat einen Standardwert, unbekannte Schlüssel werden abgelehnt.
"""

import json
import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.config import (
    CLIP_FRAMES, CLIP_SAMPLES, FRAME_SIZE, FRAMES_DIR_PATTERN, FRAMES_TENSOR_PATTERN, INTERFERER_PATTERN,
    META_PATTERN, MIXTURE_PATTERN, PEAK_TARGET, SAMPLE_RATE_HZ, TARGET_PATTERN, VIDEO_FPS
)
from app.utils.error_handling import ConfigurationError


class StrictModel(BaseModel):
    """Basis aller Konfigurationsmodelle: unbekannte Schlüssel sind ein Fehler."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class AudioEncoderConfig(StrictModel):
    num_blocks: int = 4
    kernel: int = 4
    stride: int = 2
    stage_channels: List[int] = Field(default_factory=lambda: [16, 32, 64, 128])
    latent_dim: int = 128
    bn_epsilon: float = 1e-5

    @property
    def padding(self) -> int:
        # kernel 4 / stride 2 / padding 1 halbiert die Länge exakt
        return (self.kernel - self.stride) // 2

    @model_validator(mode="after")
    def _check(self) -> "AudioEncoderConfig":
        if self.num_blocks != len(self.stage_channels):
            raise ValueError(
                f"num_blocks ({self.num_blocks}) muss der Anzahl der stage_channels ({len(self.stage_channels)}) entsprechen"
            )
        if self.kernel < self.stride:
            raise ValueError(f"kernel ({self.kernel}) muss >= stride ({self.stride}) sein")
        return self


class SwinConfig(StrictModel):
    image_size: int = FRAME_SIZE
    patch_size: int = 4
    embed_dim: int = 32
    depths: List[int] = Field(default_factory=lambda: [2, 2])
    heads: List[int] = Field(default_factory=lambda: [2, 4])
    window: int = 7
    out_dim: int = 128
    tau_max_log: float = math.log(100.0)
    tau_init: float = 10.0
    cpb_hidden: int = 64
    mlp_ratio: float = 4.0
    clamp_bound: float = 10.0

    @property
    def grid_size(self) -> int:
        return self.image_size // self.patch_size

    def stage_grid(self, stage: int) -> int:
        return self.grid_size // (2 ** stage)

    @model_validator(mode="after")
    def _check(self) -> "SwinConfig":
        if len(self.depths) != len(self.heads):
            raise ValueError(f"depths ({len(self.depths)}) und heads ({len(self.heads)}) müssen gleich lang sein")
        if self.image_size % self.patch_size != 0:
            raise ValueError(f"image_size {self.image_size} ist nicht durch patch_size {self.patch_size} teilbar")
        for stage in range(len(self.depths)):
            grid = self.stage_grid(stage)
            if grid < 1 or grid % self.window != 0:
                raise ValueError(
                    f"Gitter {grid}x{grid} in Stufe {stage} ist nicht durch window {self.window} teilbar"
                )
            if stage < len(self.depths) - 1 and grid % 2 != 0:
                raise ValueError(f"Gitter {grid}x{grid} in Stufe {stage} ist für Patch-Merging ungerade")
            if (self.embed_dim * 2 ** stage) % self.heads[stage] != 0:
                raise ValueError(f"Kanalzahl in Stufe {stage} ist nicht durch heads {self.heads[stage]} teilbar")
        return self


class FusionConfig(StrictModel):
    d_model: int = 128
    heads: int = 4
    iterations: int = 2
    clamp_bound: float = 10.0

    @model_validator(mode="after")
    def _check(self) -> "FusionConfig":
        if self.d_model % self.heads != 0:
            raise ValueError(f"d_model {self.d_model} ist nicht durch heads {self.heads} teilbar")
        if self.iterations < 1:
            raise ValueError("iterations muss >= 1 sein")
        return self


class SqueezeformerConfig(StrictModel):
    num_blocks: int = 2
    d_model: int = 128
    heads: int = 4
    conv_kernel: int = 7
    ff_expansion: int = 4
    squeeze_factor: int = 2
    squeeze_mode: Literal["mean", "conv"] = "mean"

    @model_validator(mode="after")
    def _check(self) -> "SqueezeformerConfig":
        if self.conv_kernel % 2 != 1:
            raise ValueError(f"conv_kernel {self.conv_kernel} muss ungerade sein")
        if self.squeeze_factor < 1:
            raise ValueError("squeeze_factor muss >= 1 sein")
        if self.d_model % self.heads != 0:
            raise ValueError(f"d_model {self.d_model} ist nicht durch heads {self.heads} teilbar")
        return self


class DecoderConfig(StrictModel):
    num_blocks: int = 4
    hidden_dims: List[int] = Field(default_factory=lambda: [128, 64, 32, 16])
    output_clamp: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "DecoderConfig":
        if len(self.hidden_dims) != self.num_blocks:
            raise ValueError(
                f"hidden_dims ({len(self.hidden_dims)}) muss num_blocks ({self.num_blocks}) Einträge haben"
            )
        return self


class ModelConfig(StrictModel):
    """Vollständiger Hyperparameter-Satz des Modells."""

    audio: AudioEncoderConfig = Field(default_factory=AudioEncoderConfig)
    video: SwinConfig = Field(default_factory=SwinConfig)
    fusion: FusionConfig = Field(default_factory=FusionConfig)
    temporal: SqueezeformerConfig = Field(default_factory=SqueezeformerConfig)
    decoder: DecoderConfig = Field(default_factory=DecoderConfig)
    seed: int = 0


class TrainConfig(StrictModel):
    epochs: int = 20
    batch_size: int = 2
    learning_rate: float = 1e-3
    optimizer: Literal["sgd-momentum", "adaptive-moment"] = "adaptive-moment"
    momentum: float = 0.9
    grad_clip_norm: float = 5.0
    checkpoint_dir: Optional[str] = None
    validate_every: int = 1
    seed: int = 0
    num_workers: int = 0
    single_threaded: bool = True
    max_steps: Optional[int] = None

    @field_validator("epochs", "batch_size", "validate_every")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("Wert muss >= 1 sein")
        return value

    @field_validator("learning_rate")
    @classmethod
    def _positive_lr(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("learning_rate muss > 0 sein")
        return value


class SynthConfig(StrictModel):
    sample_rate_hz: int = SAMPLE_RATE_HZ
    fps: int = VIDEO_FPS
    num_samples: int = CLIP_SAMPLES
    num_frames: int = CLIP_FRAMES
    image_size: int = FRAME_SIZE
    f0_range_hz: Tuple[float, float] = (90.0, 250.0)
    num_harmonics: int = 4
    min_interferers: int = 1
    max_interferers: int = 3
    interferer_kinds: List[Literal["white", "pink", "harmonic"]] = Field(
        default_factory=lambda: ["white", "pink", "harmonic"]
    )
    snr_range_db: Tuple[float, float] = (-10.0, 10.0)
    envelope_floor: float = 0.15
    envelope_smoothing: float = 2.0
    blob_sigma: float = 0.08
    blob_row_range: Tuple[float, float] = (0.3, 0.7)
    background: float = 0.05
    peak: float = PEAK_TARGET
    speech_band_snr: bool = False

    @property
    def samples_per_frame(self) -> int:
        return self.num_samples // self.num_frames

    @model_validator(mode="after")
    def _check(self) -> "SynthConfig":
        if self.num_samples * self.fps != self.num_frames * self.sample_rate_hz:
            raise ValueError(
                f"{self.num_samples} Samples @ {self.sample_rate_hz} Hz passen nicht zu "
                f"{self.num_frames} Frames @ {self.fps} FPS"
            )
        if not 0 <= self.min_interferers <= self.max_interferers <= 3:
            raise ValueError("Es sind 0 bis 3 Störquellen erlaubt")
        if self.snr_range_db[0] > self.snr_range_db[1]:
            raise ValueError("snr_range_db muss aufsteigend sein")
        return self


class FilePatterns(StrictModel):
    """Dateinamensmuster der Szenendateien; {id} wird durch die Szenen-ID ersetzt."""

    mixture_pattern: str = MIXTURE_PATTERN
    target_pattern: str = TARGET_PATTERN
    interferer_pattern: str = INTERFERER_PATTERN
    frames_dir_pattern: str = FRAMES_DIR_PATTERN
    frames_tensor_pattern: str = FRAMES_TENSOR_PATTERN
    meta_pattern: str = META_PATTERN

    @model_validator(mode="after")
    def _check(self) -> "FilePatterns":
        values = self.model_dump()
        for name, pattern in values.items():
            if "{id}" not in pattern:
                raise ValueError(f"{name} muss den Platzhalter {{id}} enthalten: {pattern!r}")
        if "{index}" not in self.interferer_pattern:
            raise ValueError(f"interferer_pattern muss {{index}} enthalten: {self.interferer_pattern!r}")
        if len(set(values.values())) != len(values):
            raise ValueError("Dateinamensmuster müssen verschieden sein")
        return self


class RunConfig(StrictModel):
    """Zusammengeführte Sicht auf alle Konfigurationsabschnitte (Konfigurationsdatei + Flags)."""

    preset: Literal["tiny", "toy", "full"] = "toy"
    seed: int = 0
    audio: dict = Field(default_factory=dict)
    video: dict = Field(default_factory=dict)
    fusion: dict = Field(default_factory=dict)
    temporal: dict = Field(default_factory=dict)
    decoder: dict = Field(default_factory=dict)
    train: TrainConfig = Field(default_factory=TrainConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    patterns: FilePatterns = Field(default_factory=FilePatterns)

    @model_validator(mode="before")
    @classmethod
    def _synth_from_preset(cls, data):
        # Synthese-Abschnitt ergänzt das zum Preset passende SynthConfig
        if isinstance(data, dict) and not isinstance(data.get("synth"), SynthConfig):
            base = synth_preset(data.get("preset", "toy")).model_dump()
            base.update(data.get("synth") or {})
            data = {**data, "synth": base}
        return data

    def resolve_model_config(self) -> ModelConfig:
        """Wendet die Abschnitts-Überschreibungen auf das gewählte Preset an."""
        base = model_preset(self.preset).model_dump()
        for section in ("audio", "video", "fusion", "temporal", "decoder"):
            base[section].update(getattr(self, section))
        base["seed"] = self.seed
        return ModelConfig.model_validate(base)


class ClipMetrics(StrictModel):
    id: str
    pesq: Optional[float] = None
    stoi: Optional[float] = None
    si_sdr: Optional[float] = None
    mse: Optional[float] = None
    error: Optional[str] = None


class MetricsReport(StrictModel):
    pesq: Optional[float] = None
    stoi: Optional[float] = None
    si_sdr_db: Optional[float] = None
    mse: Optional[float] = None
    failures: int = 0
    clips: List[ClipMetrics] = Field(default_factory=list)

    @field_validator("pesq")
    @classmethod
    def _pesq_range(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not -0.5 <= value <= 4.5:
            raise ValueError(f"PESQ {value} liegt außerhalb von [-0.5, 4.5]")
        return value


class EpochRecord(StrictModel):
    epoch: int
    train_mse: float
    val_mse: Optional[float] = None
    val_stoi: Optional[float] = None
    val_si_sdr: Optional[float] = None
    val_pesq: Optional[float] = None
    wall_seconds: float = 0.0
    steps: int = 0


class TrainHistory(StrictModel):
    records: List[EpochRecord] = Field(default_factory=list)
    step_losses: List[float] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


class GradCheckReport(StrictModel):
    checked: int = 0
    passed_count: int = 0
    tolerance: float = 1e-3
    required_fraction: float = 0.95
    per_module: dict = Field(default_factory=dict)
    failures: List[dict] = Field(default_factory=list)
    max_output_grad: float = 0.0

    @property
    def pass_fraction(self) -> float:
        return self.passed_count / self.checked if self.checked else 0.0

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.pass_fraction >= self.required_fraction


def model_preset(name: str) -> ModelConfig:
    """
    Liefert eine vordefinierte Modellkonfiguration.

    Args:
        name: 'tiny' (Gradiententest, 64 Samples / 16x16 Frames), 'toy' (Standard, 3 s Clips),
              'full' (volle Modellgröße)

    Returns:
        ModelConfig
    """
    if name == "toy":
        return ModelConfig()
    if name == "tiny":
        return ModelConfig(
            audio=AudioEncoderConfig(stage_channels=[4, 4, 4, 4], latent_dim=8),
            video=SwinConfig(image_size=16, patch_size=4, embed_dim=8, depths=[1], heads=[2],
                             window=2, out_dim=8, cpb_hidden=16),
            fusion=FusionConfig(d_model=8, heads=2, iterations=1),
            temporal=SqueezeformerConfig(num_blocks=1, d_model=8, heads=2, conv_kernel=3, ff_expansion=2),
            decoder=DecoderConfig(hidden_dims=[8, 8, 4, 4]),
        )
    if name == "full":
        return ModelConfig(
            audio=AudioEncoderConfig(stage_channels=[64, 128, 256, 512], latent_dim=512),
            video=SwinConfig(embed_dim=96, depths=[2, 2, 6], heads=[3, 6, 12], out_dim=512, cpb_hidden=512),
            fusion=FusionConfig(d_model=512, heads=8, iterations=2),
            temporal=SqueezeformerConfig(num_blocks=4, d_model=512, heads=8, conv_kernel=15),
            decoder=DecoderConfig(hidden_dims=[512, 256, 128, 64]),
        )
    raise ValueError(f"Unbekanntes Preset: {name}")


def synth_preset(name: str) -> SynthConfig:
    """Synthese-Konfiguration passend zum Modell-Preset ('tiny' nutzt kurze Clips mit 16x16 Frames)."""
    if name == "tiny":
        return SynthConfig(num_samples=5120, num_frames=8, image_size=16, blob_sigma=0.12)
    return SynthConfig()


def load_run_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """
    Liest eine Laufkonfiguration aus einer JSON-Datei und wendet Überschreibungen an.

    Die Datei enthält ein Objekt mit flachen Abschnitten (audio, video, fusion, temporal,
    decoder, train, synth, patterns) sowie optional preset und seed.

    Args:
        path: Pfad zur JSON-Datei oder None für Standardwerte
        overrides: Werte aus Kommandozeilen-Flags, z.B. {"train": {"epochs": 2}, "seed": 3}

    Returns:
        RunConfig

    Raises:
        ConfigurationError: Unlesbare Datei, unbekannte Schlüssel oder ungültige Werte
    """
    data: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Konfigurationsdatei {path} nicht lesbar: {str(e)}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Konfigurationsdatei {path} muss ein JSON-Objekt enthalten")

    for key, value in (overrides or {}).items():
        if isinstance(value, dict):
            section = dict(data.get(key, {}))
            section.update(value)
            data[key] = section
        else:
            data[key] = value

    try:
        run_cfg = RunConfig.model_validate(data)
        # Modellabschnitte gegen das Preset validieren
        run_cfg.resolve_model_config()
    except ValidationError as e:
        raise ConfigurationError(f"Ungültige Konfiguration: {str(e)}")
    return run_cfg
