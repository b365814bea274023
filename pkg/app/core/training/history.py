"""
Trainingsverlauf für AUREXA-SE
------------------------------
Export des Verlaufs als CSV (eine Zeile je Epoche) und als Liniendiagramm
von Verlust und Validierungsmetriken über die Epochen.
"""

import csv
import logging
from pathlib import Path
from typing import Optional

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from app.models.schemas import EpochRecord, TrainHistory
from app.utils.file_utils import ensure_dir_exists
from app.utils.format_utils import format_optional

# Logger konfigurieren
logger = logging.getLogger("aurexa.training.history")

HISTORY_COLUMNS = ["epoch", "train_mse", "val_mse", "val_stoi", "val_si_sdr", "val_pesq", "wall_seconds"]

def write_history_csv(history: TrainHistory, path: str) -> None:
    """Schreibt den Verlauf mit den Spalten epoch,train_mse,val_mse,val_stoi,val_si_sdr,val_pesq,wall_seconds."""
    ensure_dir_exists(str(Path(path).parent))
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(HISTORY_COLUMNS)
        for record in history.records:
            writer.writerow([
                record.epoch,
                format_optional(record.train_mse, 8),
                format_optional(record.val_mse, 8),
                format_optional(record.val_stoi, 6),
                format_optional(record.val_si_sdr, 4),
                format_optional(record.val_pesq, 4),
                format_optional(record.wall_seconds, 3),
            ])

def _optional_float(value: str) -> Optional[float]:
    return float(value) if value.strip() else None

def read_history_csv(path: str) -> TrainHistory:
    """Liest einen mit write_history_csv geschriebenen Verlauf."""
    records = []
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != HISTORY_COLUMNS:
            raise ValueError(f"Unerwartete Spalten in {path}: {reader.fieldnames}")
        for row in reader:
            records.append(EpochRecord(
                epoch=int(row["epoch"]),
                train_mse=float(row["train_mse"]),
                val_mse=_optional_float(row["val_mse"]),
                val_stoi=_optional_float(row["val_stoi"]),
                val_si_sdr=_optional_float(row["val_si_sdr"]),
                val_pesq=_optional_float(row["val_pesq"]),
                wall_seconds=_optional_float(row["wall_seconds"]) or 0.0,
            ))
    return TrainHistory(records=records)

def plot_history(history: TrainHistory, path: str) -> None:
    """
    Zeichnet Verlust (MSE) sowie SI-SDR, STOI und PESQ der Validierung über die Epochen.

    Raises:
        ValueError: Bei leerem Verlauf
    """
    if not history.records:
        raise ValueError("Leerer Trainingsverlauf kann nicht gezeichnet werden")

    epochs = [record.epoch for record in history.records]

    def series(attr):
        points = [(record.epoch, getattr(record, attr)) for record in history.records
                  if getattr(record, attr) is not None]
        return [p[0] for p in points], [p[1] for p in points]

    fig, axes = plt.subplots(1, 3, figsize=(15, 4))

    axes[0].plot(epochs, [record.train_mse for record in history.records], marker="o", label="train MSE")
    x, y = series("val_mse")
    if x:
        axes[0].plot(x, y, marker="o", label="val MSE")
    axes[0].set_title("Verlust")
    axes[0].set_xlabel("Epoche")
    axes[0].legend()

    x, y = series("val_si_sdr")
    axes[1].plot(x, y, marker="o", color="tab:green")
    axes[1].set_title("SI-SDR (dB)")
    axes[1].set_xlabel("Epoche")

    x, y = series("val_stoi")
    axes[2].plot(x, y, marker="o", color="tab:orange", label="STOI")
    x, y = series("val_pesq")
    if x:
        pesq_axis = axes[2].twinx()
        pesq_axis.plot(x, y, marker="s", color="tab:red", label="PESQ")
        pesq_axis.set_ylabel("PESQ")
    axes[2].set_title("STOI / PESQ")
    axes[2].set_xlabel("Epoche")

    fig.tight_layout()
    ensure_dir_exists(str(Path(path).parent))
    fig.savefig(path, dpi=100)
    plt.close(fig)

def export_history(history: TrainHistory, csv_path: str, chart_path: str) -> None:
    """
    Schreibt CSV und Diagramm.

    Raises:
        ValueError: Bei leerem Verlauf
    """
    if not history.records:
        raise ValueError("Leerer Trainingsverlauf kann nicht exportiert werden")
    write_history_csv(history, csv_path)
    plot_history(history, chart_path)
    logger.info(f"Verlauf exportiert: {csv_path}, {chart_path}")
