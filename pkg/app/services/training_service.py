"""
Trainings-Service für AUREXA-SE
-------------------------------
Optimierung mit MSE-Verlust, Validierung je validate_every Epochen, Checkpoints
(bester nach SI-SDR und letzter) sowie deterministische Inferenz.
"""

import logging
import math
import time
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from tqdm import tqdm

from app.api.PesqToolClient import PesqToolClient
from app.config import CLIP_FRAMES, CLIP_SAMPLES, FRAME_SIZE, SHOW_PROGRESS
from app.core.data.dataset import DatasetManifest, batch_tensors, iterate, load_manifest
from app.core.data.scene import Scene
from app.core.media.audio_io import AudioClip
from app.core.metrics.evaluation import evaluate_batch, mse_loss
from app.core.model.aurexa import AurexaSE, build_model
from app.core.training.checkpoint import CheckpointState, save_checkpoint
from app.core.training.history import export_history
from app.models.schemas import EpochRecord, MetricsReport, RunConfig, TrainConfig, TrainHistory
from app.utils.error_handling import ShapeError, TrainingError
from app.utils.format_utils import format_duration, format_optional
from app.utils.random_utils import capture_rng_state, derive_seed, seed_everything

# Logger konfigurieren
logger = logging.getLogger("aurexa.services.training")

SceneSource = Union[DatasetManifest, Sequence[Scene]]

BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"
HISTORY_CSV = "history.csv"
HISTORY_CHART = "history.png"

class TrainingService:
    """
    Service für Training, Validierung und Inferenz.

    Attributes:
        clip_samples (int): Audiolänge beim Laden von Szenen
        clip_frames (int): Frame-Anzahl beim Laden von Szenen
        frame_size (int): Frame-Kantenlänge beim Laden von Szenen
    """

    def __init__(self, clip_samples: int = CLIP_SAMPLES, clip_frames: int = CLIP_FRAMES, frame_size: int = FRAME_SIZE):
        self.clip_samples = clip_samples
        self.clip_frames = clip_frames
        self.frame_size = frame_size
        logger.debug("TrainingService initialisiert")

    def _batches(self, source: SceneSource, batch_size: int, seed: int, num_workers: int = 0) -> Iterator[List[Scene]]:
        """Eine Epoche in seed-deterministischer Reihenfolge, aus Manifest oder Szenenliste."""
        if isinstance(source, DatasetManifest):
            return iterate(source, batch_size, seed, num_workers,
                           self.clip_samples, self.clip_frames, self.frame_size)
        if len(source) == 0:
            raise ValueError("Leere Szenenliste")
        generator = torch.Generator().manual_seed(seed)
        order = torch.randperm(len(source), generator=generator).tolist()
        return iter([[source[i] for i in order[start:start + batch_size]]
                     for start in range(0, len(order), batch_size)])

    @staticmethod
    def create_optimizer(model: AurexaSE, cfg: TrainConfig) -> torch.optim.Optimizer:
        if cfg.optimizer == "sgd-momentum":
            return torch.optim.SGD(model.parameters(), lr=cfg.learning_rate, momentum=cfg.momentum)
        return torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)

    @staticmethod
    def _model_dtype(model: AurexaSE) -> torch.dtype:
        return next(model.parameters()).dtype

    def train_step(self, model: AurexaSE, optimizer: torch.optim.Optimizer, scenes: List[Scene],
                   cfg: TrainConfig, step: int) -> float:
        """
        Ein Optimierungsschritt: Vorwärtslauf, MSE, Rückwärtslauf, Gradienten-Clipping, Update.

        Raises:
            TrainingError: Bei nicht-endlichem Verlust
        """
        dtype = self._model_dtype(model)
        mixture, video, target = (tensor.to(dtype) for tensor in batch_tensors(scenes))
        optimizer.zero_grad()
        loss = mse_loss(model(mixture, video), target)
        if not torch.isfinite(loss):
            logger.error(f"Nicht-endlicher Verlust in Schritt {step}: {loss.item()}")
            raise TrainingError(f"Nicht-endlicher Verlust ({loss.item()}) in Schritt {step}", step=step)
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip_norm)
        optimizer.step()
        return float(loss.item())

    def enhance(self, model: AurexaSE, scene: Scene) -> AudioClip:
        """
        Deterministische Inferenz auf einer Szene.

        Raises:
            ShapeError: Wenn die Szene nicht zur Modellkonfiguration passt
        """
        stride = model.audio_encoder.total_stride
        if len(scene.mixture) % stride != 0:
            raise ShapeError(f"Mischungslänge {len(scene.mixture)} ist nicht durch {stride} teilbar")
        model.eval()
        dtype = self._model_dtype(model)
        with torch.no_grad():
            mixture = torch.from_numpy(scene.mixture.samples).to(dtype).unsqueeze(0)
            video = torch.from_numpy(scene.video.frames).to(dtype).unsqueeze(0)
            estimate = model(mixture, video)[0]
        return AudioClip(estimate.cpu().numpy().astype(np.float64), scene.mixture.sample_rate_hz)

    def validate(self, model: AurexaSE, source: SceneSource, batch_size: int = 1,
                 pesq_client: Optional[PesqToolClient] = None) -> MetricsReport:
        """Bewertet das Modell im Inferenzmodus auf allen Szenen der Quelle."""
        estimates, references, ids = [], [], []
        for scenes in self._batches(source, batch_size, seed=0):
            for scene in scenes:
                estimates.append(self.enhance(model, scene).samples)
                references.append(scene.target.samples)
                ids.append(scene.id)
        return evaluate_batch(estimates, references, ids, pesq_client=pesq_client)

    def train(self, model: AurexaSE, train_set: SceneSource, dev_set: SceneSource, cfg: TrainConfig,
              pesq_client: Optional[PesqToolClient] = None) -> TrainHistory:
        """
        Trainiert das Modell.

        Args:
            model: Zu trainierendes Modell
            train_set: Trainingsszenen (Manifest oder Liste)
            dev_set: Validierungsszenen (Manifest oder Liste)
            cfg: Trainingskonfiguration
            pesq_client: Optionaler PESQ-Client für die Validierung

        Returns:
            TrainHistory mit einem Eintrag je abgeschlossener Epoche

        Raises:
            ValueError: Leere Datensätze
            TrainingError: Nicht-endlicher Verlust
            CheckpointError: Checkpoint nicht schreibbar
        """
        if len(train_set) == 0 or len(dev_set) == 0:
            raise ValueError("Trainings- und Validierungsdaten dürfen nicht leer sein")
        if cfg.single_threaded:
            torch.set_num_threads(1)
        seed_everything(cfg.seed)

        optimizer = self.create_optimizer(model, cfg)
        history = TrainHistory()
        best_si_sdr = -math.inf
        step = 0
        checkpoint_dir = Path(cfg.checkpoint_dir) if cfg.checkpoint_dir else None

        logger.info(f"Starte Training: {cfg.epochs} Epochen, Batchgröße {cfg.batch_size}, Optimierer {cfg.optimizer}")
        for epoch in range(1, cfg.epochs + 1):
            model.train()
            started = time.perf_counter()
            losses = []
            batches = self._batches(train_set, cfg.batch_size, derive_seed(cfg.seed, "epoch", epoch), cfg.num_workers)
            for scenes in tqdm(batches, desc=f"Epoche {epoch}/{cfg.epochs}", disable=not SHOW_PROGRESS, leave=False):
                loss = self.train_step(model, optimizer, scenes, cfg, step)
                losses.append(loss)
                history.step_losses.append(loss)
                step += 1
                if cfg.max_steps is not None and step >= cfg.max_steps:
                    break

            record = EpochRecord(epoch=epoch, train_mse=float(np.mean(losses)), steps=len(losses))
            if epoch % cfg.validate_every == 0:
                report = self.validate(model, dev_set, pesq_client=pesq_client)
                record.val_mse = report.mse
                record.val_stoi = report.stoi
                record.val_si_sdr = report.si_sdr_db
                record.val_pesq = report.pesq
            record.wall_seconds = time.perf_counter() - started
            history.records.append(record)

            logger.info(
                f"Epoche {epoch}: train MSE {record.train_mse:.6f}, val SI-SDR "
                f"{format_optional(record.val_si_sdr, 2)} dB, val STOI {format_optional(record.val_stoi)} "
                f"({format_duration(record.wall_seconds)})"
            )

            if checkpoint_dir is not None:
                state = CheckpointState(
                    epoch=epoch,
                    optimizer_state=optimizer.state_dict(),
                    rng_state=capture_rng_state(),
                    extra={
                        "step": step,
                        "val_si_sdr": record.val_si_sdr,
                        "clip_samples": self.clip_samples,
                        "clip_frames": self.clip_frames,
                    },
                )
                save_checkpoint(model, str(checkpoint_dir / LAST_CHECKPOINT), state)
                if record.val_si_sdr is not None and record.val_si_sdr > best_si_sdr:
                    best_si_sdr = record.val_si_sdr
                    save_checkpoint(model, str(checkpoint_dir / BEST_CHECKPOINT), state)
                    logger.info(f"Neuer bester Checkpoint (SI-SDR {best_si_sdr:.2f} dB)")

            if cfg.max_steps is not None and step >= cfg.max_steps:
                logger.info(f"max_steps={cfg.max_steps} erreicht, Training beendet")
                break

        return history

    def run(self, run_cfg: RunConfig, data_dir: str, out_dir: str,
            pesq_client: Optional[PesqToolClient] = None) -> Tuple[AurexaSE, TrainHistory]:
        """
        Kompletter Trainingslauf aus einer Laufkonfiguration: Daten laden, Modell bauen,
        trainieren, Verlauf als CSV und Diagramm nach out_dir schreiben.
        """
        model_cfg = run_cfg.resolve_model_config()
        self.clip_samples = run_cfg.synth.num_samples
        self.clip_frames = run_cfg.synth.num_frames
        self.frame_size = model_cfg.video.image_size

        train_set = load_manifest(data_dir, split="train", patterns=run_cfg.patterns)
        dev_set = load_manifest(data_dir, split="dev", patterns=run_cfg.patterns)
        if len(dev_set) == 0:
            logger.warning(f"Kein dev-Split in {data_dir}, validiere auf den Trainingsszenen")
            dev_set = train_set

        train_cfg = run_cfg.train
        if train_cfg.checkpoint_dir is None:
            train_cfg = train_cfg.model_copy(update={"checkpoint_dir": str(out_dir)})

        model = build_model(model_cfg)
        history = self.train(model, train_set, dev_set, train_cfg, pesq_client)
        export_history(history, str(Path(out_dir) / HISTORY_CSV), str(Path(out_dir) / HISTORY_CHART))
        return model, history

# Singleton-Instanz
_training_service_instance = None

def get_training_service() -> TrainingService:
    """
    Gibt eine Singleton-Instanz des TrainingService zurück.

    Returns:
        TrainingService-Instanz
    """
    global _training_service_instance
    if _training_service_instance is None:
        _training_service_instance = TrainingService()
    return _training_service_instance
