"""
PESQ-Werkzeug-Client für AUREXA-SE
----------------------------------
Ruft ein externes PESQ-Programm (ITU-T P.862) je Clip-Paar auf.

Die Befehlsvorlage enthält die Platzhalter {ref} und {est} für die beiden WAV-Pfade,
z.B. "pesq +16000 {ref} {est}". Das Programm muss eine einzelne Zahl ausgeben;
bei Fehlern fehlt der PESQ-Wert für den Clip.
"""

import logging
import shlex
import subprocess
import tempfile
from pathlib import Path
from typing import Optional

from app.config import AUREXA_PESQ_CMD, PESQ_RANGE, PESQ_TIMEOUT_SECONDS
from app.core.media.audio_io import AudioClip, save_wav

# Logger konfigurieren
logger = logging.getLogger("aurexa.api.pesq")

class PesqToolClient:
    """
    Client für ein externes PESQ-Kommandozeilenwerkzeug.

    Attributes:
        command (str): Befehlsvorlage mit {ref} und {est}
        timeout (int): Zeitlimit je Aufruf in Sekunden
    """

    def __init__(self, command: Optional[str] = None, timeout: int = PESQ_TIMEOUT_SECONDS):
        """
        Initialisiert den Client.

        Args:
            command: Befehlsvorlage; ohne Angabe wird AUREXA_PESQ_CMD verwendet
            timeout: Zeitlimit je Aufruf in Sekunden
        """
        self.command = command if command is not None else AUREXA_PESQ_CMD
        self.timeout = timeout
        logger.debug(f"PESQ-Client initialisiert (konfiguriert: {self.is_configured})")

    @property
    def is_configured(self) -> bool:
        return bool(self.command and self.command.strip())

    def _build_args(self, ref_path: str, est_path: str):
        return [token.format(ref=ref_path, est=est_path) for token in shlex.split(self.command)]

    @staticmethod
    def _parse_score(output: str) -> Optional[float]:
        lines = [line.strip() for line in output.splitlines() if line.strip()]
        if not lines:
            return None
        try:
            return float(lines[-1].split()[-1])
        except ValueError:
            return None

    def score_files(self, ref_path: str, est_path: str) -> Optional[float]:
        """
        Bewertet ein Paar von WAV-Dateien.

        Returns:
            PESQ-Wert in [-0.5, 4.5] oder None bei fehlendem Befehl, Fehlern oder ungültiger Ausgabe
        """
        if not self.is_configured:
            return None

        args = self._build_args(str(ref_path), str(est_path))
        try:
            result = subprocess.run(args, capture_output=True, text=True, timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as e:
            logger.warning(f"PESQ-Aufruf fehlgeschlagen: {str(e)}")
            return None

        if result.returncode != 0:
            logger.warning(f"PESQ-Werkzeug beendet mit Code {result.returncode}: {result.stderr.strip()}")
            return None

        score = self._parse_score(result.stdout)
        if score is None:
            logger.warning(f"PESQ-Ausgabe nicht lesbar: {result.stdout.strip()!r}")
            return None

        low, high = PESQ_RANGE
        if not low <= score <= high:
            logger.warning(f"PESQ-Wert {score} außerhalb von [{low}, {high}] verworfen")
            return None
        return score

    def score_clips(self, ref: AudioClip, est: AudioClip) -> Optional[float]:
        """Schreibt beide Clips als temporäre WAV-Dateien und bewertet sie."""
        if not self.is_configured:
            return None
        with tempfile.TemporaryDirectory(prefix="aurexa_pesq_") as tmp:
            ref_path = Path(tmp) / "ref.wav"
            est_path = Path(tmp) / "est.wav"
            save_wav(ref, str(ref_path))
            save_wav(est, str(est_path))
            return self.score_files(str(ref_path), str(est_path))
