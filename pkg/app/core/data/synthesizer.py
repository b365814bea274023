"""
Synthetische Szenen für AUREXA-SE
---------------------------------
Prozeduraler Ersatz für den AVSE-4-Korpus im Schreibtischmaßstab.

Das Ziel ist ein harmonischer Stapel mit driftender Grundfrequenz, dessen Hüllkurve
einen hellen Gauß-Fleck im Video vertikal verschiebt. Dadurch trägt das Video echte
Information über das Ziel.
"""

import logging
from typing import List, Optional

import numpy as np
from scipy.ndimage import gaussian_filter1d

from app.core.data.mixing import snr_gain
from app.core.data.scene import Scene
from app.core.media.audio_io import AudioClip, peak_normalize
from app.core.media.video_io import VideoClip
from app.models.schemas import SynthConfig

# Logger konfigurieren
logger = logging.getLogger("aurexa.data.synthesizer")

def _smoothed_walk(rng: np.random.Generator, length: int, smoothing: float) -> np.ndarray:
    """Geglätteter Random Walk, auf [0, 1] skaliert."""
    walk = np.cumsum(rng.standard_normal(length))
    if smoothing > 0:
        walk = gaussian_filter1d(walk, smoothing, mode="nearest")
    span = walk.max() - walk.min()
    if span == 0.0:
        return np.full(length, 0.5)
    return (walk - walk.min()) / span

def _to_sample_rate(frame_values: np.ndarray, samples_per_frame: int) -> np.ndarray:
    """Lineare Interpolation von Frame-Mitten auf Sample-Auflösung."""
    num_frames = frame_values.shape[0]
    centers = (np.arange(num_frames) + 0.5) * samples_per_frame
    return np.interp(np.arange(num_frames * samples_per_frame), centers, frame_values)

def amplitude_envelope(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    """Hüllkurve in Sample-Auflösung mit Werten in [envelope_floor, 1]."""
    walk = _smoothed_walk(rng, cfg.num_frames, cfg.envelope_smoothing)
    frame_envelope = cfg.envelope_floor + (1.0 - cfg.envelope_floor) * walk
    return _to_sample_rate(frame_envelope, cfg.samples_per_frame)

def frame_envelope(envelope: np.ndarray, cfg: SynthConfig) -> np.ndarray:
    """Mittelwert der Hüllkurve je Video-Frame."""
    return envelope.reshape(cfg.num_frames, cfg.samples_per_frame).mean(axis=1)

def f0_track(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    """Driftende Grundfrequenz innerhalb von f0_range_hz, in Sample-Auflösung."""
    f_min, f_max = cfg.f0_range_hz
    low = rng.uniform(f_min, f_min + 0.5 * (f_max - f_min))
    high = min(f_max, low + rng.uniform(0.25, 0.5) * (f_max - f_min))
    walk = _smoothed_walk(rng, cfg.num_frames, cfg.envelope_smoothing)
    return _to_sample_rate(low + (high - low) * walk, cfg.samples_per_frame)

def harmonic_stack(rng: np.random.Generator, f0: np.ndarray, num_harmonics: int, sample_rate_hz: int) -> np.ndarray:
    """Summe der ersten num_harmonics Harmonischen mit Amplituden 1/k."""
    phase = 2.0 * np.pi * np.cumsum(f0) / sample_rate_hz
    offsets = rng.uniform(0.0, 2.0 * np.pi, size=num_harmonics)
    stack = np.zeros_like(f0)
    for k in range(1, num_harmonics + 1):
        stack += np.sin(k * phase + offsets[k - 1]) / k
    return stack

def _pink_noise(rng: np.random.Generator, length: int) -> np.ndarray:
    spectrum = np.fft.rfft(rng.standard_normal(length))
    freqs = np.fft.rfftfreq(length)
    freqs[0] = freqs[1]
    return np.fft.irfft(spectrum / np.sqrt(freqs), n=length)

def _interferer(rng: np.random.Generator, kind: str, target_f0: np.ndarray, cfg: SynthConfig) -> np.ndarray:
    if kind == "white":
        samples = rng.standard_normal(cfg.num_samples)
    elif kind == "pink":
        samples = _pink_noise(rng, cfg.num_samples)
    elif kind == "harmonic":
        detuned = target_f0 * rng.uniform(1.15, 1.6)
        samples = amplitude_envelope(rng, cfg) * harmonic_stack(rng, detuned, cfg.num_harmonics, cfg.sample_rate_hz)
    else:
        raise ValueError(f"Unbekannte Störquellen-Art: {kind}")
    return peak_normalize(AudioClip(samples, cfg.sample_rate_hz), cfg.peak).samples

def sample_snr_db(rng: np.random.Generator, cfg: SynthConfig) -> float:
    """Gleichverteiltes SNR im konfigurierten Bereich (Training: -10 bis +10 dB)."""
    low, high = cfg.snr_range_db
    return float(rng.uniform(low, high))

def blob_rows(frame_env: np.ndarray, cfg: SynthConfig) -> np.ndarray:
    """Affine Abbildung der Frame-Hüllkurve auf die Zeile des Fleckmittelpunkts (Pixelkoordinaten)."""
    row_low, row_high = cfg.blob_row_range
    relative = (frame_env - cfg.envelope_floor) / (1.0 - cfg.envelope_floor)
    return (cfg.image_size - 1) * (row_low + (row_high - row_low) * relative)

def render_blob_video(rows: np.ndarray, cfg: SynthConfig) -> VideoClip:
    """Heller Gauß-Fleck auf dunklem Hintergrund, horizontal zentriert."""
    size = cfg.image_size
    sigma = cfg.blob_sigma * size
    coords = np.arange(size, dtype=np.float64)
    col = (size - 1) / 2.0
    col_profile = np.exp(-np.square(coords - col) / (2.0 * sigma ** 2))
    row_profiles = np.exp(-np.square(coords[None, :] - rows[:, None]) / (2.0 * sigma ** 2))
    blob = row_profiles[:, :, None] * col_profile[None, None, :]
    frames = cfg.background + (1.0 - cfg.background) * blob
    frames = np.repeat(np.clip(frames, 0.0, 1.0)[..., None], 3, axis=-1)
    return VideoClip(frames.astype(np.float32), cfg.fps)

def synth_scene(seed: int, cfg: Optional[SynthConfig] = None, scene_id: Optional[str] = None) -> Scene:
    """
    Erzeugt eine deterministische synthetische Szene.

    Args:
        seed: Seed; gleiche (seed, cfg) ergeben bitidentische Szenen
        cfg: Synthese-Konfiguration (Standard: 3 s / 75 Frames / 112x112)
        scene_id: Optionale ID, sonst 'synth_<seed>'

    Returns:
        Scene
    """
    cfg = cfg or SynthConfig()
    rng = np.random.default_rng(seed)

    envelope = amplitude_envelope(rng, cfg)
    f0 = f0_track(rng, cfg)
    target_raw = envelope * harmonic_stack(rng, f0, cfg.num_harmonics, cfg.sample_rate_hz)
    target = peak_normalize(AudioClip(target_raw, cfg.sample_rate_hz), cfg.peak)

    count = int(rng.integers(cfg.min_interferers, cfg.max_interferers + 1))
    kinds: List[str] = [str(rng.choice(cfg.interferer_kinds)) for _ in range(count)]
    raw_interferers = [AudioClip(_interferer(rng, kind, f0, cfg), cfg.sample_rate_hz) for kind in kinds]
    snr_db = sample_snr_db(rng, cfg)

    gain, _ = snr_gain(target, raw_interferers, snr_db, speech_band=cfg.speech_band_snr)
    interferers = [clip.samples * gain for clip in raw_interferers]
    mixture = target.samples + (np.sum(interferers, axis=0) if interferers else 0.0)

    # Gemeinsame Skalierung, damit die Mischung nicht übersteuert (SNR bleibt erhalten)
    peak = float(np.max(np.abs(mixture)))
    scale = cfg.peak / peak if peak > cfg.peak else 1.0
    target_samples = target.samples * scale
    interferers = [samples * scale for samples in interferers]
    mixture = mixture * scale

    video = render_blob_video(blob_rows(frame_envelope(envelope, cfg), cfg), cfg)

    scene = Scene(
        id=scene_id or f"synth_{seed}",
        target=AudioClip(target_samples, cfg.sample_rate_hz),
        interferers=[AudioClip(samples, cfg.sample_rate_hz) for samples in interferers],
        mixture=AudioClip(mixture, cfg.sample_rate_hz),
        video=video,
        snr_db=snr_db,
        interferer_kinds=kinds,
        seed=seed,
    )
    logger.debug(f"Synthetische Szene {scene.id}: {count} Störquellen {kinds}, SNR {snr_db:.2f} dB")
    return scene
