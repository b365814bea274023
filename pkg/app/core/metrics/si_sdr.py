"""
SI-SDR für AUREXA-SE
--------------------
Skalierungsinvariantes Signal-zu-Verzerrungs-Verhältnis mit Mittelwertbefreiung,
begrenzt auf [-60, +60] dB.
"""

import numpy as np

from app.utils.error_handling import DegenerateSignalError, ShapeError

SI_SDR_EPS = 1e-12
SI_SDR_CAP_DB = 60.0

def si_sdr(est: np.ndarray, ref: np.ndarray) -> float:
    """
    Berechnet SI-SDR in dB.

    α = <est, ref> / <ref, ref>, s = α * ref, e = est - s,
    Ergebnis = 10 * log10((|s|² + ε) / (|e|² + ε)), begrenzt auf ±60 dB.

    Args:
        est: Geschätzte Wellenform
        ref: Referenzwellenform gleicher Länge (>= 2 Samples)

    Returns:
        SI-SDR in dB

    Raises:
        ShapeError: Unterschiedliche Längen oder weniger als 2 Samples
        DegenerateSignalError: Konstante Referenz
    """
    est = np.asarray(est, dtype=np.float64).reshape(-1)
    ref = np.asarray(ref, dtype=np.float64).reshape(-1)
    if est.shape != ref.shape:
        raise ShapeError(f"SI-SDR braucht gleich lange Signale, erhalten: {est.shape[0]} und {ref.shape[0]}")
    if ref.shape[0] < 2:
        raise ShapeError("SI-SDR braucht mindestens 2 Samples")
    if np.ptp(ref) == 0.0:
        raise DegenerateSignalError("Konstante Referenz: SI-SDR ist nicht definiert")
    # Konstante Schätzung hat nach Mittelwertbefreiung keinen Zielanteil
    if np.ptp(est) == 0.0:
        return -SI_SDR_CAP_DB

    est = est - est.mean()
    ref = ref - ref.mean()
    alpha = np.dot(est, ref) / np.dot(ref, ref)
    projection = alpha * ref
    residual = est - projection
    value = 10.0 * np.log10((np.dot(projection, projection) + SI_SDR_EPS) / (np.dot(residual, residual) + SI_SDR_EPS))
    return float(np.clip(value, -SI_SDR_CAP_DB, SI_SDR_CAP_DB))
