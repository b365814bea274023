"""
Evaluations-Service für AUREXA-SE
---------------------------------
Bewertet Verzeichnisse mit verbesserten Clips gegen Referenzclips und schreibt
den CSV-Bericht. Optional wird zusätzlich die unverarbeitete Mischung bewertet.
"""

import logging
from pathlib import Path
from typing import Optional

from app.api.PesqToolClient import PesqToolClient
from app.core.media.audio_io import clip_or_pad_audio, load_wav
from app.core.metrics.evaluation import evaluate_clip, summarize, write_report_csv
from app.models.schemas import ClipMetrics, MetricsReport
from app.utils.error_handling import AurexaError
from app.utils.file_utils import list_files_by_type

# Logger konfigurieren
logger = logging.getLogger("aurexa.services.evaluation")

class EvaluationService:
    """
    Service für die Auswertung von Verzeichnissen.

    Attributes:
        pesq_client (PesqToolClient): Client für das externe PESQ-Werkzeug
    """

    def __init__(self, pesq_client: Optional[PesqToolClient] = None):
        self.pesq_client = pesq_client or PesqToolClient()
        logger.debug("EvaluationService initialisiert")

    def _score_pair(self, clip_id: str, est_path: Path, ref_path: Path) -> ClipMetrics:
        if not ref_path.exists():
            return ClipMetrics(id=clip_id, error=f"Referenz fehlt: {ref_path}")
        try:
            ref = load_wav(str(ref_path))
            est = clip_or_pad_audio(load_wav(str(est_path)), len(ref))
        except (AurexaError, OSError) as e:
            return ClipMetrics(id=clip_id, error=str(e))
        return evaluate_clip(clip_id, est.samples, ref.samples, ref.sample_rate_hz, self.pesq_client)

    def evaluate_dirs(self, ref_dir: str, est_dir: str, out_csv: str, ref_pattern: str = "{id}.wav",
                      est_pattern: str = "{id}.wav") -> MetricsReport:
        """
        Bewertet alle WAV-Dateien in est_dir gegen ihre Referenzen in ref_dir.

        Die Clip-ID ist der Dateiname ohne den Teil, den est_pattern um {id} ergänzt.

        Args:
            ref_dir: Verzeichnis mit Referenzclips
            est_dir: Verzeichnis mit verbesserten Clips
            out_csv: Pfad des CSV-Berichts
            ref_pattern: Dateiname der Referenz zu einer ID
            est_pattern: Dateiname der Schätzung zu einer ID

        Returns:
            MetricsReport
        """
        prefix, suffix = est_pattern.split("{id}")
        clips = []
        for path in list_files_by_type(est_dir, extensions=[".wav"]):
            name = Path(path).name
            if not (name.startswith(prefix) and name.endswith(suffix)) or len(name) <= len(prefix) + len(suffix):
                continue
            clip_id = name[len(prefix):len(name) - len(suffix)]
            clips.append(self._score_pair(clip_id, Path(path), Path(ref_dir) / ref_pattern.format(id=clip_id)))

        if not clips:
            raise FileNotFoundError(f"Keine passenden WAV-Dateien in {est_dir}")

        report = summarize(clips)
        write_report_csv(report, out_csv)
        logger.info(f"{len(clips)} Clips bewertet, {report.failures} Fehlschläge")
        return report

    def evaluate_noisy_baseline(self, ref_dir: str, out_csv: str, ref_pattern: str = "{id}_target.wav",
                                mix_pattern: str = "{id}_mixed.wav") -> MetricsReport:
        """Bewertet die unverarbeiteten Mischungen gegen die Referenzen (Vergleichszeile 'noisy')."""
        return self.evaluate_dirs(ref_dir, ref_dir, out_csv, ref_pattern=ref_pattern, est_pattern=mix_pattern)

# Singleton-Instanz
_evaluation_service_instance = None

def get_evaluation_service() -> EvaluationService:
    """
    Gibt eine Singleton-Instanz des EvaluationService zurück.

    Returns:
        EvaluationService-Instanz
    """
    global _evaluation_service_instance
    if _evaluation_service_instance is None:
        _evaluation_service_instance = EvaluationService()
    return _evaluation_service_instance
