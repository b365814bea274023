"""
Zentrale Konfigurationsdatei für AUREXA-SE
------------------------------------------
Enthält alle Konfigurationseinstellungen, Konstanten und Umgebungsvariablen.
"""

import os
import logging
from pathlib import Path
from dotenv import load_dotenv

# .env-Datei für Umgebungsvariablen laden
load_dotenv()

# Basisverzeichnisse
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = Path(os.getenv("AUREXA_DATA_DIR", str(BASE_DIR / "data")))
RUNS_DIR = BASE_DIR / "runs"

# Eingabekonventionen: 3 Sekunden Clips
SAMPLE_RATE_HZ = 16000
VIDEO_FPS = 25
CLIP_SECONDS = 3
CLIP_SAMPLES = SAMPLE_RATE_HZ * CLIP_SECONDS  # 48000
CLIP_FRAMES = VIDEO_FPS * CLIP_SECONDS  # 75
FRAME_SIZE = 112

# Audio-Normalisierung (Spitzenwert)
PEAK_TARGET = 0.95

# WAV-Format
PCM_SCALE = 32768.0

# Dateinamen-Muster für Szenen ({id} wird ersetzt)
MANIFEST_FILENAME = "manifest.tsv"
MIXTURE_PATTERN = "{id}_mixed.wav"
TARGET_PATTERN = "{id}_target.wav"
INTERFERER_PATTERN = "{id}_interferer{index}.wav"
FRAMES_DIR_PATTERN = "{id}_frames"
FRAMES_TENSOR_PATTERN = "{id}_frames.avft"
META_PATTERN = "{id}_meta.json"

# Binärformate
FRAME_TENSOR_MAGIC = b"AVFT"
CHECKPOINT_MAGIC = b"AURXCKPT"
CHECKPOINT_VERSION = 1

# PESQ als externes Werkzeug (ITU-T P.862 wird nicht selbst implementiert)
AUREXA_PESQ_CMD = os.getenv("AUREXA_PESQ_CMD", "")
PESQ_TIMEOUT_SECONDS = int(os.getenv("AUREXA_PESQ_TIMEOUT", 60))
PESQ_RANGE = (-0.5, 4.5)

# Vergleichswerte des Referenzsystems in voller Größe (nur zur Anzeige)
REFERENCE_PARAM_COUNT_M = 54.2
REFERENCE_MODEL_SIZE_MB = 217.859

# Logging-Konfiguration
LOG_LEVEL = getattr(logging, os.getenv("AUREXA_LOG_LEVEL", "INFO").upper(), logging.INFO)
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Fortschrittsanzeige (tqdm)
SHOW_PROGRESS = os.getenv("AUREXA_SHOW_PROGRESS", "True").lower() in ("true", "1", "t")

# Anwendung
APP_NAME = "AUREXA-SE"
APP_DESCRIPTION = "Audio-visuelle Sprachverbesserung mit Cross-Attention und Squeezeformer"
