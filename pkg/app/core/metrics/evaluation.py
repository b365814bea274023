"""
Verlust und Auswertung für AUREXA-SE
------------------------------------
MSE als Trainingsverlust sowie die Batch-Auswertung mit PESQ (extern), STOI,
SI-SDR und MSE samt CSV-Bericht (eine Zeile je Clip und eine Zusammenfassung).
"""

import csv
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from app.api.PesqToolClient import PesqToolClient
from app.config import SAMPLE_RATE_HZ
from app.core.media.audio_io import AudioClip
from app.core.metrics.si_sdr import si_sdr
from app.core.metrics.stoi import stoi
from app.models.schemas import ClipMetrics, MetricsReport
from app.utils.error_handling import AurexaError, ShapeError
from app.utils.file_utils import ensure_dir_exists
from app.utils.format_utils import format_optional

# Logger konfigurieren
logger = logging.getLogger("aurexa.metrics.evaluation")

REPORT_COLUMNS = ["id", "pesq", "stoi", "si_sdr", "mse"]
SUMMARY_ID = "summary"

def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """
    Mittlerer quadratischer Fehler über Batch und Zeit.

    Raises:
        ShapeError: Bei unterschiedlichen Formen
    """
    if pred.shape != target.shape:
        raise ShapeError(f"MSE braucht gleiche Formen, erhalten: {tuple(pred.shape)} und {tuple(target.shape)}")
    return F.mse_loss(pred, target, reduction="mean")

def mse(est: np.ndarray, ref: np.ndarray) -> float:
    est = np.asarray(est, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if est.shape != ref.shape:
        raise ShapeError(f"MSE braucht gleiche Formen, erhalten: {est.shape} und {ref.shape}")
    return float(np.mean(np.square(est - ref)))

def evaluate_clip(clip_id: str, est: np.ndarray, ref: np.ndarray, sample_rate_hz: int = SAMPLE_RATE_HZ,
                  pesq_client: Optional[PesqToolClient] = None) -> ClipMetrics:
    """
    Bewertet ein Clip-Paar. Fehler einzelner Metriken werden im Ergebnis vermerkt.
    """
    metrics = ClipMetrics(id=clip_id)
    errors = []
    for name, func in (("si_sdr", si_sdr), ("mse", mse)):
        try:
            setattr(metrics, name, func(est, ref))
        except AurexaError as e:
            errors.append(f"{name}: {e.message}")
    try:
        metrics.stoi = stoi(est, ref, sample_rate_hz)
    except AurexaError as e:
        errors.append(f"stoi: {e.message}")

    if pesq_client is not None and pesq_client.is_configured:
        metrics.pesq = pesq_client.score_clips(AudioClip(ref, sample_rate_hz), AudioClip(est, sample_rate_hz))

    if errors:
        metrics.error = "; ".join(errors)
        logger.warning(f"Clip {clip_id}: {metrics.error}")
    return metrics

def _mean(values: List[Optional[float]]) -> Optional[float]:
    present = [value for value in values if value is not None]
    return float(np.mean(present)) if present else None

def summarize(clips: List[ClipMetrics]) -> MetricsReport:
    """
    Arithmetische Mittel je Metrik über alle Clips, für die diese Metrik vorliegt.

    Clips mit mindestens einem Metrikfehler zählen als Fehlschlag.
    """
    return MetricsReport(
        pesq=_mean([clip.pesq for clip in clips]),
        stoi=_mean([clip.stoi for clip in clips]),
        si_sdr_db=_mean([clip.si_sdr for clip in clips]),
        mse=_mean([clip.mse for clip in clips]),
        failures=sum(1 for clip in clips if clip.error is not None),
        clips=clips,
    )

def evaluate_batch(estimates: Sequence[np.ndarray], references: Sequence[np.ndarray],
                   ids: Optional[Sequence[str]] = None, sample_rate_hz: int = SAMPLE_RATE_HZ,
                   pesq_client: Optional[PesqToolClient] = None) -> MetricsReport:
    """
    Bewertet ausgerichtete Clip-Paare und mittelt die Metriken.

    Args:
        estimates: Geschätzte Wellenformen (Liste oder [B, T]-Array/Tensor)
        references: Referenzwellenformen in gleicher Reihenfolge
        ids: Optionale Clip-IDs, sonst 'clip_<index>'
        sample_rate_hz: Abtastrate
        pesq_client: Optionaler PESQ-Client; ohne konfigurierten Befehl bleibt PESQ leer

    Returns:
        MetricsReport mit Mittelwerten, Fehlerzahl und Einzelwerten
    """
    if len(estimates) != len(references):
        raise ShapeError(f"{len(estimates)} Schätzungen für {len(references)} Referenzen")
    ids = list(ids) if ids is not None else [f"clip_{index}" for index in range(len(estimates))]

    clips = []
    for clip_id, est, ref in zip(ids, estimates, references):
        if isinstance(est, torch.Tensor):
            est = est.detach().cpu().numpy()
        if isinstance(ref, torch.Tensor):
            ref = ref.detach().cpu().numpy()
        clips.append(evaluate_clip(clip_id, est, ref, sample_rate_hz, pesq_client))

    report = summarize(clips)
    logger.info(
        f"Auswertung von {len(clips)} Clips: STOI {format_optional(report.stoi)}, "
        f"SI-SDR {format_optional(report.si_sdr_db, 2)} dB, Fehler {report.failures}"
    )
    return report

def write_report_csv(report: MetricsReport, path: str) -> None:
    """Schreibt eine Zeile je Clip (id,pesq,stoi,si_sdr,mse) und eine Zusammenfassungszeile."""
    ensure_dir_exists(str(Path(path).parent))
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_COLUMNS)
        for clip in report.clips:
            writer.writerow([clip.id, format_optional(clip.pesq, 4), format_optional(clip.stoi, 6),
                             format_optional(clip.si_sdr, 4), format_optional(clip.mse, 8)])
        writer.writerow([SUMMARY_ID, format_optional(report.pesq, 4), format_optional(report.stoi, 6),
                         format_optional(report.si_sdr_db, 4), format_optional(report.mse, 8)])
    logger.info(f"Bericht geschrieben: {path}")
