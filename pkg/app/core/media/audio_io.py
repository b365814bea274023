"""
Audio-Ein-/Ausgabe für AUREXA-SE
--------------------------------
Lesen und Schreiben von PCM-WAV-Dateien sowie die festen Eingabekonventionen
(16 kHz, Mono, 48000 Samples pro Clip, Spitzenwert-Normalisierung).
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import soundfile as sf

from app.config import CLIP_SAMPLES, PCM_SCALE, PEAK_TARGET, SAMPLE_RATE_HZ
from app.utils.error_handling import MediaFormatError, MediaIOError
from app.utils.file_utils import ensure_dir_exists

# Logger konfigurieren
logger = logging.getLogger("aurexa.media.audio")

@dataclass
class AudioClip:
    """
    Mono-Wellenform mit Abtastrate.

    Attributes:
        samples (np.ndarray): Amplituden als float64, nominell in [-1, 1]
        sample_rate_hz (int): Abtastrate, in der Pipeline immer 16000
    """

    samples: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioClip enthält nicht-endliche Samples")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_seconds(self) -> float:
        return len(self) / self.sample_rate_hz

def load_wav(path: str) -> AudioClip:
    """
    Lädt eine 16-Bit-PCM-WAV-Datei mit 16 kHz als Mono-Clip.

    Mehrkanalige Dateien werden sampleweise gemittelt, Integer-Werte mit 1/32768 skaliert.

    Args:
        path: Pfad zur WAV-Datei

    Returns:
        AudioClip

    Raises:
        MediaFormatError: Kein WAV, falsche Bittiefe oder Abtastrate != 16000
        FileNotFoundError: Wenn die Datei nicht existiert
    """
    path = str(path)
    if not Path(path).exists():
        raise FileNotFoundError(f"Datei nicht gefunden: {path}")

    try:
        info = sf.info(path)
    except (RuntimeError, sf.LibsndfileError) as e:
        raise MediaFormatError(f"Keine lesbare WAV-Datei: {path} ({str(e)})", path=path, offending_property="container")

    if info.format != "WAV":
        raise MediaFormatError(f"Container {info.format} statt WAV: {path}", path=path, offending_property="container")
    if info.subtype != "PCM_16":
        raise MediaFormatError(f"Bittiefe {info.subtype} statt PCM_16: {path}", path=path, offending_property="bit_depth")
    if info.samplerate != SAMPLE_RATE_HZ:
        raise MediaFormatError(
            f"Abtastrate {info.samplerate} Hz statt {SAMPLE_RATE_HZ} Hz: {path}",
            path=path, offending_property="sample_rate"
        )

    data, _ = sf.read(path, dtype="int16", always_2d=True)
    # Kanäle mitteln, dann auf [-1, 1) skalieren
    samples = data.astype(np.float64).mean(axis=1) / PCM_SCALE
    logger.debug(f"WAV geladen: {path} ({info.channels} Kanäle, {len(samples)} Samples)")
    return AudioClip(samples, SAMPLE_RATE_HZ)

def save_wav(clip: AudioClip, path: str) -> None:
    """
    Schreibt einen Clip als 16-Bit-PCM-Mono-WAV mit 16 kHz.

    Werte werden auf [-1, 1] begrenzt, gerundet und beim maximalen Code (32767) gesättigt.

    Args:
        clip: Zu schreibender Clip
        path: Zielpfad

    Raises:
        MediaIOError: Wenn der Pfad nicht beschreibbar ist
    """
    path = str(path)
    codes = np.clip(np.round(np.clip(clip.samples, -1.0, 1.0) * PCM_SCALE), -PCM_SCALE, PCM_SCALE - 1)
    parent = Path(path).parent
    if not parent.exists() and not ensure_dir_exists(str(parent)):
        raise MediaIOError(f"Zielverzeichnis nicht beschreibbar: {parent}", path=path)
    try:
        sf.write(path, codes.astype(np.int16), SAMPLE_RATE_HZ, subtype="PCM_16", format="WAV")
    except (OSError, RuntimeError, sf.LibsndfileError) as e:
        logger.error(f"Fehler beim Schreiben von {path}: {str(e)}")
        raise MediaIOError(f"WAV-Datei konnte nicht geschrieben werden: {path} ({str(e)})", path=path)
    logger.debug(f"WAV geschrieben: {path} ({len(codes)} Samples)")

def clip_or_pad_audio(clip: AudioClip, target_len: int = CLIP_SAMPLES) -> AudioClip:
    """
    Schneidet einen Clip am Ende ab oder füllt ihn mit Nullen auf target_len auf.

    Args:
        clip: Eingabe-Clip
        target_len: Gewünschte Länge in Samples (Standard 48000)

    Returns:
        Clip mit exakt target_len Samples
    """
    if target_len <= 0:
        raise ValueError(f"target_len muss > 0 sein, erhalten: {target_len}")
    samples = clip.samples[:target_len]
    if samples.shape[0] < target_len:
        samples = np.pad(samples, (0, target_len - samples.shape[0]))
    return AudioClip(samples, clip.sample_rate_hz)

def peak_normalize(clip: AudioClip, peak: float = PEAK_TARGET) -> AudioClip:
    """
    Skaliert einen Clip so, dass sein Betragsmaximum peak (0.95) beträgt.

    Ein stiller Clip wird unverändert zurückgegeben.
    """
    current = float(np.max(np.abs(clip.samples))) if len(clip) else 0.0
    if current == 0.0:
        return AudioClip(clip.samples.copy(), clip.sample_rate_hz)
    return AudioClip(clip.samples * (peak / current), clip.sample_rate_hz)
