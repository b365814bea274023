"""
Metrik-Paket für AUREXA-SE
--------------------------
Trainingsverlust und objektive Bewertungsmaße.
"""

from app.core.metrics.si_sdr import si_sdr
from app.core.metrics.stoi import stoi, third_octave_bands, remove_silent_frames
from app.core.metrics.evaluation import (
    mse_loss, mse, evaluate_clip, evaluate_batch, summarize, write_report_csv
)

__all__ = [
    'si_sdr',
    'stoi',
    'third_octave_bands',
    'remove_silent_frames',
    'mse_loss',
    'mse',
    'evaluate_clip',
    'evaluate_batch',
    'summarize',
    'write_report_csv'
]
