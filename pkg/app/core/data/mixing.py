"""
SNR-gesteuertes Mischen für AUREXA-SE
-------------------------------------
Mischt ein Zielsignal mit bis zu drei Störquellen auf ein vorgegebenes Breitband-SNR.
Optional wird die Leistung nur im Sprachband (300-5000 Hz) gemessen.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy import signal

from app.config import SAMPLE_RATE_HZ
from app.core.media.audio_io import AudioClip
from app.utils.error_handling import DegenerateSignalError

# Logger konfigurieren
logger = logging.getLogger("aurexa.data.mixing")

SPEECH_BAND_HZ = (300.0, 5000.0)

def _speech_band(samples: np.ndarray, sample_rate_hz: int) -> np.ndarray:
    sos = signal.butter(4, SPEECH_BAND_HZ, btype="bandpass", fs=sample_rate_hz, output="sos")
    return signal.sosfiltfilt(sos, samples)

def signal_power(samples: np.ndarray, speech_band: bool = False, sample_rate_hz: int = SAMPLE_RATE_HZ) -> float:
    """Mittlere quadrierte Amplitude, optional nach Sprachband-Filterung."""
    if speech_band:
        samples = _speech_band(samples, sample_rate_hz)
    return float(np.mean(np.square(samples)))

def measure_snr_db(target: np.ndarray, noise: np.ndarray, speech_band: bool = False,
                   sample_rate_hz: int = SAMPLE_RATE_HZ) -> float:
    """SNR in dB zwischen Ziel und (bereits skalierter) Störung."""
    return 10.0 * np.log10(signal_power(target, speech_band, sample_rate_hz) /
                           signal_power(noise, speech_band, sample_rate_hz))

def snr_gain(target: AudioClip, interferers: List[AudioClip], snr_db: float,
             speech_band: bool = False) -> Tuple[float, Optional[np.ndarray]]:
    """
    Berechnet den gemeinsamen Verstärkungsfaktor für die Summe der Störquellen.

    g = sqrt(P_t / (P_n * 10^(snr_db / 10)))

    Returns:
        Tuple aus (g, Summe der Störquellen oder None bei leerer Liste)

    Raises:
        ValueError: Bei ungleichen Längen
        DegenerateSignalError: Stilles Ziel oder stille Störsumme bei nicht-leerer Liste
    """
    if not interferers:
        return 0.0, None

    lengths = {len(target)} | {len(clip) for clip in interferers}
    if len(lengths) != 1:
        raise ValueError(f"Alle Clips müssen gleich lang sein, erhalten: {sorted(lengths)}")

    noise = np.sum([clip.samples for clip in interferers], axis=0)
    p_target = signal_power(target.samples, speech_band, target.sample_rate_hz)
    p_noise = signal_power(noise, speech_band, target.sample_rate_hz)

    if p_target == 0.0:
        raise DegenerateSignalError("Zielsignal ohne Energie: SNR ist nicht definiert")
    if p_noise == 0.0:
        raise DegenerateSignalError("Störquellen ohne Energie: SNR ist nicht definiert")

    gain = float(np.sqrt(p_target / (p_noise * 10.0 ** (snr_db / 10.0))))
    return gain, noise

def mix_scene(target: AudioClip, interferers: List[AudioClip], snr_db: float,
              speech_band: bool = False) -> AudioClip:
    """
    Mischt Ziel und Störquellen auf das gewünschte SNR.

    Die Störquellen werden summiert und mit einem gemeinsamen Faktor skaliert;
    mixture = target + g * sum(interferers).

    Args:
        target: Zielsprache
        interferers: 0 bis 3 Störquellen gleicher Länge
        snr_db: Gewünschtes SNR in dB
        speech_band: SNR nur im Band 300-5000 Hz messen

    Returns:
        Gemischter Clip
    """
    gain, noise = snr_gain(target, interferers, snr_db, speech_band)
    if noise is None:
        return AudioClip(target.samples.copy(), target.sample_rate_hz)

    logger.debug(f"Mische {len(interferers)} Störquellen bei {snr_db:.2f} dB (g={gain:.5f})")
    return AudioClip(target.samples + gain * noise, target.sample_rate_hz)
