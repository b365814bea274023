"""
Fehlerbehandlung für AUREXA-SE
------------------------------
Definiert benutzerdefinierte Ausnahmen und Hilfsfunktionen für die Fehlerbehandlung.
"""

import logging
import traceback
import sys
from typing import Optional, Dict, Any, Type

# Logger konfigurieren
logger = logging.getLogger("aurexa.utils.errors")

class AurexaError(Exception):
    """
    Basisklasse für alle AUREXA-spezifischen Ausnahmen.

    Attributes:
        message (str): Die Fehlermeldung
        error_code (str): Ein optionaler Fehlercode
    """

    def __init__(self, message: str, error_code: Optional[str] = None):
        """
        Initialisiert eine AUREXA-Ausnahme.

        Args:
            message: Die Fehlermeldung
            error_code: Ein optionaler Fehlercode
        """
        self.message = message
        self.error_code = error_code
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        """
        Konvertiert die Ausnahme in ein Dictionary für Berichte.

        Returns:
            Dictionary mit Fehlerdaten
        """
        error_dict = {
            "error": True,
            "message": self.message
        }

        if self.error_code:
            error_dict["error_code"] = self.error_code

        return error_dict

class MediaFormatError(AurexaError):
    """
    Fehler im Format einer Mediendatei (kein WAV, falsche Bittiefe, falsche Abtastrate).

    Attributes:
        path (str): Pfad der betroffenen Datei
        offending_property (str): Eigenschaft, die nicht den Erwartungen entspricht
    """

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        offending_property: Optional[str] = None,
        error_code: Optional[str] = None
    ):
        self.path = path
        self.offending_property = offending_property
        super().__init__(message, error_code or "MEDIA_FORMAT_ERROR")

    def to_dict(self) -> Dict[str, Any]:
        error_dict = super().to_dict()

        if self.path:
            error_dict["path"] = self.path

        if self.offending_property:
            error_dict["property"] = self.offending_property

        return error_dict

class MediaIOError(AurexaError):
    """Fehler beim Schreiben oder Lesen einer Mediendatei."""

    def __init__(self, message: str, path: Optional[str] = None, error_code: Optional[str] = None):
        self.path = path
        super().__init__(message, error_code or "MEDIA_IO_ERROR")

class ShapeError(AurexaError, ValueError):
    """Verletzung eines Form- oder Längenvertrags zwischen Tensoren."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message, error_code or "SHAPE_ERROR")

class DegenerateSignalError(AurexaError):
    """Signal ohne verwertbare Energie (z.B. stilles Ziel beim Mischen, konstante Referenz)."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message, error_code or "DEGENERATE_SIGNAL")

class InsufficientSignalError(DegenerateSignalError):
    """Nach der Stilleentfernung bleibt zu wenig Signal für die Metrik übrig."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message, error_code or "INSUFFICIENT_SIGNAL")

class SceneNotFoundError(AurexaError, FileNotFoundError):
    """
    Szene oder zugehörige Datei nicht gefunden.

    Attributes:
        path (str): Fehlender Pfad oder fehlende Szenen-ID
    """

    def __init__(self, message: str, path: Optional[str] = None, error_code: Optional[str] = None):
        self.path = path
        super().__init__(message, error_code or "SCENE_NOT_FOUND")

    def to_dict(self) -> Dict[str, Any]:
        error_dict = super().to_dict()
        if self.path:
            error_dict["path"] = self.path
        return error_dict

class CheckpointError(AurexaError):
    """
    Fehler beim Speichern oder Laden eines Checkpoints.

    Attributes:
        path (str): Pfad des Checkpoints
        reason (str): Kurzbezeichnung des Problems ('version', 'corrupt', 'config', 'io')
    """

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        reason: Optional[str] = None,
        error_code: Optional[str] = None
    ):
        self.path = path
        self.reason = reason
        super().__init__(message, error_code or "CHECKPOINT_ERROR")

    def to_dict(self) -> Dict[str, Any]:
        error_dict = super().to_dict()
        if self.path:
            error_dict["path"] = self.path
        if self.reason:
            error_dict["reason"] = self.reason
        return error_dict

class TrainingError(AurexaError):
    """
    Abbruch des Trainings (nicht-endlicher Verlust, Schreibfehler).

    Attributes:
        step (int): Optimierungsschritt, in dem der Fehler aufgetreten ist
    """

    def __init__(self, message: str, step: Optional[int] = None, error_code: Optional[str] = None):
        self.step = step
        super().__init__(message, error_code or "TRAINING_ERROR")

    def to_dict(self) -> Dict[str, Any]:
        error_dict = super().to_dict()
        if self.step is not None:
            error_dict["step"] = self.step
        return error_dict

class ConfigurationError(AurexaError):
    """Fehler in der Konfiguration oder beim Zusammenbau des Modells."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        """
        Initialisiert einen Konfigurationsfehler.

        Args:
            message: Die Fehlermeldung
            error_code: Ein optionaler Fehlercode
        """
        super().__init__(message, error_code or "CONFIGURATION_ERROR")

def handle_exception(
    exception: Exception,
    log_level: int = logging.ERROR,
    reraise: bool = False,
    default_error_class: Type[AurexaError] = AurexaError
) -> Optional[Dict[str, Any]]:
    """
    Behandelt eine Ausnahme einheitlich.

    Diese Funktion protokolliert die Ausnahme, konvertiert sie optional in ein
    Dictionary für Berichte und wirft sie bei Bedarf weiter.

    Args:
        exception: Die zu behandelnde Ausnahme
        log_level: Log-Level für die Protokollierung
        reraise: Ob die Ausnahme weitergeworfen werden soll
        default_error_class: Standardklasse für nicht-AUREXA-Ausnahmen

    Returns:
        Dictionary mit Fehlerdaten oder None, wenn reraise=True

    Raises:
        Die übergebene Ausnahme, wenn reraise=True
    """
    exc_info = sys.exc_info()
    logger.log(log_level, f"Ausnahme gefangen: {str(exception)}", exc_info=exc_info if log_level >= logging.ERROR else None)

    # Umwandlung in AUREXA-spezifische Ausnahme, falls nötig
    if not isinstance(exception, AurexaError):
        error = default_error_class(str(exception))
    else:
        error = exception

    if reraise:
        raise error

    return error.to_dict()

def format_exception(exception: Exception, include_traceback: bool = False) -> str:
    """
    Formatiert eine Ausnahme für die Anzeige.

    Args:
        exception: Die zu formatierende Ausnahme
        include_traceback: Ob der Stacktrace enthalten sein soll

    Returns:
        Formatierte Fehlermeldung als String
    """
    if include_traceback:
        return ''.join(traceback.format_exception(type(exception), exception, exception.__traceback__))
    else:
        return f"{exception.__class__.__name__}: {str(exception)}"
