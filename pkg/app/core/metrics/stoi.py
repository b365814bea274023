"""
STOI für AUREXA-SE
------------------
Kurzzeit-Verständlichkeitsmaß über Terzband-Hüllkurven.

Ablauf:
    1. Resampling beider Signale auf 10 kHz
    2. Entfernen von Frames, deren Referenzenergie mehr als 40 dB unter dem Maximum liegt
    3. STFT mit 256-Sample-Hann-Fenstern, Hop 128, 512-Punkt-FFT
    4. 15 Terzbänder ab 150 Hz
    5. Segmente aus 30 Frames (384 ms): Normalisieren, Begrenzen bei -15 dB SDR, Korrelation
    6. Mittelwert über Bänder und Segmente
"""

import logging
from fractions import Fraction
from typing import Tuple

import numpy as np
from scipy.signal import resample_poly

from app.config import SAMPLE_RATE_HZ
from app.utils.error_handling import InsufficientSignalError, ShapeError

# Logger konfigurieren
logger = logging.getLogger("aurexa.metrics.stoi")

STOI_SAMPLE_RATE_HZ = 10000
FRAME_LEN = 256
FFT_SIZE = 512
NUM_BANDS = 15
MIN_FREQ_HZ = 150
SEGMENT_FRAMES = 30
BETA_DB = -15.0
DYNAMIC_RANGE_DB = 40.0
EPS = np.finfo(np.float64).eps

def third_octave_bands(sample_rate_hz: int = STOI_SAMPLE_RATE_HZ, fft_size: int = FFT_SIZE,
                       num_bands: int = NUM_BANDS, min_freq_hz: float = MIN_FREQ_HZ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Terzband-Matrix [num_bands, fft_size / 2 + 1] und Mittenfrequenzen.

    Bandgrenzen werden auf den nächstgelegenen FFT-Bin gerundet.
    """
    freqs = np.linspace(0, sample_rate_hz, fft_size + 1)[: fft_size // 2 + 1]
    k = np.arange(num_bands, dtype=np.float64)
    centers = min_freq_hz * np.power(2.0 ** (1.0 / 3.0), k)
    low = min_freq_hz * np.power(2.0, (2 * k - 1) / 6)
    high = min_freq_hz * np.power(2.0, (2 * k + 1) / 6)

    matrix = np.zeros((num_bands, freqs.shape[0]))
    for band in range(num_bands):
        low_bin = int(np.argmin(np.square(freqs - low[band])))
        high_bin = int(np.argmin(np.square(freqs - high[band])))
        matrix[band, low_bin:high_bin] = 1.0
    return matrix, centers

_BAND_MATRIX, _ = third_octave_bands()

def _window() -> np.ndarray:
    return np.hanning(FRAME_LEN + 2)[1:-1]

def _frames(x: np.ndarray, hop: int) -> np.ndarray:
    window = _window()
    starts = range(0, len(x) - FRAME_LEN, hop)
    return np.array([window * x[i:i + FRAME_LEN] for i in starts]).reshape(-1, FRAME_LEN)

def _overlap_add(frames: np.ndarray, hop: int) -> np.ndarray:
    if frames.shape[0] == 0:
        return np.zeros(0)
    out = np.zeros((frames.shape[0] - 1) * hop + FRAME_LEN)
    for index, frame in enumerate(frames):
        out[index * hop:index * hop + FRAME_LEN] += frame
    return out

def remove_silent_frames(ref: np.ndarray, est: np.ndarray, dynamic_range_db: float = DYNAMIC_RANGE_DB,
                         hop: int = FRAME_LEN // 2) -> Tuple[np.ndarray, np.ndarray]:
    """Entfernt Frames, deren Referenzenergie mehr als dynamic_range_db unter dem lautesten Frame liegt."""
    ref_frames = _frames(ref, hop)
    est_frames = _frames(est, hop)
    if ref_frames.shape[0] == 0:
        return np.zeros(0), np.zeros(0)
    energies = 20.0 * np.log10(np.linalg.norm(ref_frames, axis=1) + EPS)
    keep = (np.max(energies) - dynamic_range_db - energies) < 0
    return _overlap_add(ref_frames[keep], hop), _overlap_add(est_frames[keep], hop)

def _stft(x: np.ndarray) -> np.ndarray:
    window = _window()
    hop = FRAME_LEN // 2
    frames = [np.fft.rfft(window * x[i:i + FRAME_LEN], n=FFT_SIZE) for i in range(0, len(x) - FRAME_LEN, hop)]
    return np.array(frames).reshape(-1, FFT_SIZE // 2 + 1)

def _resample(x: np.ndarray, sample_rate_hz: int) -> np.ndarray:
    if sample_rate_hz == STOI_SAMPLE_RATE_HZ:
        return x
    ratio = Fraction(STOI_SAMPLE_RATE_HZ, sample_rate_hz)
    return resample_poly(x, ratio.numerator, ratio.denominator)

def stoi(est: np.ndarray, ref: np.ndarray, sample_rate_hz: int = SAMPLE_RATE_HZ) -> float:
    """
    Berechnet STOI zwischen Schätzung und sauberer Referenz.

    Args:
        est: Verarbeitetes bzw. gestörtes Signal
        ref: Saubere Referenz gleicher Länge
        sample_rate_hz: Abtastrate beider Signale

    Returns:
        STOI (typisch in [0, 1])

    Raises:
        ShapeError: Unterschiedliche Längen
        InsufficientSignalError: Weniger als 30 Frames nach der Stilleentfernung
    """
    est = np.asarray(est, dtype=np.float64).reshape(-1)
    ref = np.asarray(ref, dtype=np.float64).reshape(-1)
    if est.shape != ref.shape:
        raise ShapeError(f"STOI braucht gleich lange Signale, erhalten: {est.shape[0]} und {ref.shape[0]}")

    ref = _resample(ref, sample_rate_hz)
    est = _resample(est, sample_rate_hz)
    ref, est = remove_silent_frames(ref, est)

    ref_spec = _stft(ref).T
    est_spec = _stft(est).T
    if ref_spec.shape[-1] < SEGMENT_FRAMES:
        raise InsufficientSignalError(
            f"Nur {ref_spec.shape[-1]} Frames nach der Stilleentfernung, mindestens {SEGMENT_FRAMES} nötig (384 ms)"
        )

    ref_bands = np.sqrt(_BAND_MATRIX @ np.square(np.abs(ref_spec)))
    est_bands = np.sqrt(_BAND_MATRIX @ np.square(np.abs(est_spec)))

    num_frames = ref_bands.shape[1]
    ref_segments = np.array([ref_bands[:, m - SEGMENT_FRAMES:m] for m in range(SEGMENT_FRAMES, num_frames + 1)])
    est_segments = np.array([est_bands[:, m - SEGMENT_FRAMES:m] for m in range(SEGMENT_FRAMES, num_frames + 1)])

    # Gestörte Hüllkurve auf die Referenzenergie normalisieren und bei -15 dB SDR begrenzen
    scale = np.linalg.norm(ref_segments, axis=2, keepdims=True) / (
        np.linalg.norm(est_segments, axis=2, keepdims=True) + EPS)
    clip_factor = 1.0 + 10.0 ** (-BETA_DB / 20.0)
    est_clipped = np.minimum(est_segments * scale, ref_segments * clip_factor)

    est_clipped = est_clipped - est_clipped.mean(axis=2, keepdims=True)
    ref_centered = ref_segments - ref_segments.mean(axis=2, keepdims=True)
    est_clipped /= np.linalg.norm(est_clipped, axis=2, keepdims=True) + EPS
    ref_centered /= np.linalg.norm(ref_centered, axis=2, keepdims=True) + EPS

    num_segments, num_bands = ref_centered.shape[0], ref_centered.shape[1]
    return float(np.sum(est_clipped * ref_centered) / (num_segments * num_bands))
