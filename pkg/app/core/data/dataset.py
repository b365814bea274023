"""
Manifest-basierter Datensatz für AUREXA-SE
------------------------------------------
Schreiben und Laden von Szenen auf der Platte sowie der seed-deterministische
Batch-Iterator für Training und Evaluation.

Manifest: eine Zeile pro Szene, '<id>\\t<split>', UTF-8, lexikographisch nach ID sortiert.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from app.config import (
    CLIP_FRAMES, CLIP_SAMPLES, FRAME_SIZE, FRAMES_DIR_PATTERN, FRAMES_TENSOR_PATTERN,
    INTERFERER_PATTERN, MANIFEST_FILENAME, META_PATTERN, MIXTURE_PATTERN, TARGET_PATTERN
)
from app.core.data.mixing import measure_snr_db, signal_power
from app.core.data.scene import MAX_INTERFERERS, Scene
from app.core.media.audio_io import clip_or_pad_audio, load_wav, save_wav
from app.core.media.video_io import (
    clip_or_pad_video, load_video, resize_frames, save_frame_dir, write_frame_tensor
)
from app.models.schemas import FilePatterns
from app.utils.error_handling import SceneNotFoundError
from app.utils.file_utils import ensure_dir_exists

# Logger konfigurieren
logger = logging.getLogger("aurexa.data.dataset")

SPLITS = ("train", "dev", "test")

@dataclass
class DatasetManifest:
    """
    Verzeichnis mit Szenen und deren Split-Zuordnung.

    Attributes:
        root (str): Wurzelverzeichnis der Szenendateien
        entries (List[Tuple[str, str]]): (Szenen-ID, Split) sortiert nach ID
        split (Optional[str]): Split, auf den die Einträge gefiltert wurden
        mixture_pattern, target_pattern, ...: Dateinamensmuster mit Platzhalter {id}
    """

    root: str
    entries: List[Tuple[str, str]]
    split: Optional[str] = None
    mixture_pattern: str = MIXTURE_PATTERN
    target_pattern: str = TARGET_PATTERN
    interferer_pattern: str = INTERFERER_PATTERN
    frames_dir_pattern: str = FRAMES_DIR_PATTERN
    frames_tensor_pattern: str = FRAMES_TENSOR_PATTERN
    meta_pattern: str = META_PATTERN

    def __post_init__(self):
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"Unbekannter Split '{self.split}', erlaubt: {SPLITS}")
        ids = [scene_id for scene_id, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("Szenen-IDs im Manifest sind nicht eindeutig")
        self.entries = sorted(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> List[str]:
        return [scene_id for scene_id, _ in self.entries]

    @property
    def path(self) -> Path:
        return Path(self.root) / MANIFEST_FILENAME

    def file_path(self, pattern: str, scene_id: str, **kwargs) -> Path:
        return Path(self.root) / pattern.format(id=scene_id, **kwargs)

    @classmethod
    def with_patterns(cls, root: str, entries: List[Tuple[str, str]], split: Optional[str] = None,
                      patterns: Optional[FilePatterns] = None) -> "DatasetManifest":
        """Erzeugt ein Manifest mit den angegebenen Dateinamensmustern (Standard: config)."""
        return cls(str(root), entries, split, **(patterns or FilePatterns()).model_dump())

def write_manifest(root: str, entries: Sequence[Tuple[str, str]]) -> Path:
    """Schreibt das Manifest sortiert nach ID."""
    manifest = DatasetManifest(root, list(entries))
    ensure_dir_exists(root)
    with open(manifest.path, "w", encoding="utf-8") as f:
        for scene_id, split in manifest.entries:
            f.write(f"{scene_id}\t{split}\n")
    logger.info(f"Manifest mit {len(manifest)} Szenen geschrieben: {manifest.path}")
    return manifest.path

def load_manifest(root: str, split: Optional[str] = None, patterns: Optional[FilePatterns] = None) -> DatasetManifest:
    """
    Liest das Manifest unter root und filtert optional auf einen Split.

    Die Szenendateien werden über patterns gefunden (Standard: Muster aus config).

    Raises:
        SceneNotFoundError: Wenn keine Manifest-Datei existiert
        ValueError: Bei fehlerhaften Zeilen oder doppelten IDs
    """
    path = Path(root) / MANIFEST_FILENAME
    if not path.exists():
        raise SceneNotFoundError(f"Manifest nicht gefunden: {path}", path=str(path))

    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in SPLITS:
                raise ValueError(f"Ungültige Manifest-Zeile {line_no} in {path}: {line!r}")
            entries.append((parts[0], parts[1]))

    if split is not None:
        entries = [entry for entry in entries if entry[1] == split]
    return DatasetManifest.with_patterns(root, entries, split, patterns)

def write_scene(scene: Scene, root: str, frames_format: str = "tensor",
                patterns: Optional[FilePatterns] = None) -> None:
    """
    Schreibt eine Szene: Mischung, Ziel, Störquellen als WAV, Video als Frame-Tensor
    oder Bildverzeichnis sowie eine JSON-Datei mit SNR, Störquellen-Arten und Seed.
    """
    manifest = DatasetManifest.with_patterns(root, [], patterns=patterns)
    save_wav(scene.mixture, str(manifest.file_path(manifest.mixture_pattern, scene.id)))
    save_wav(scene.target, str(manifest.file_path(manifest.target_pattern, scene.id)))
    for index, clip in enumerate(scene.interferers):
        save_wav(clip, str(manifest.file_path(manifest.interferer_pattern, scene.id, index=index)))

    if frames_format == "tensor":
        write_frame_tensor(scene.video, str(manifest.file_path(manifest.frames_tensor_pattern, scene.id)))
    elif frames_format == "images":
        save_frame_dir(scene.video, str(manifest.file_path(manifest.frames_dir_pattern, scene.id)))
    else:
        raise ValueError(f"Unbekanntes Frame-Format: {frames_format}")

    meta = {
        "id": scene.id,
        "snr_db": scene.snr_db,
        "interferer_kinds": scene.interferer_kinds,
        "seed": scene.seed,
    }
    meta_path = manifest.file_path(manifest.meta_pattern, scene.id)
    ensure_dir_exists(str(meta_path.parent))
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2)

def _require(path: Path) -> str:
    if not path.exists():
        raise SceneNotFoundError(f"Szenendatei nicht gefunden: {path}", path=str(path))
    return str(path)

def load_scene(manifest: DatasetManifest, scene_id: str, num_samples: int = CLIP_SAMPLES,
               num_frames: int = CLIP_FRAMES, frame_size: int = FRAME_SIZE) -> Scene:
    """
    Lädt eine Szene und bringt sie auf die festen Eingabegrößen.

    Audio wird auf num_samples abgeschnitten oder mit Nullen aufgefüllt, Video auf
    num_frames gebracht (letzter Frame wiederholt) und auf frame_size skaliert.
    Beim Laden wird nicht normalisiert.

    Raises:
        SceneNotFoundError: ID fehlt im Manifest oder eine Pflichtdatei fehlt
        MediaFormatError: Beschädigte Mediendateien (weitergereicht)
    """
    if scene_id not in manifest.ids:
        raise SceneNotFoundError(f"Szene '{scene_id}' nicht im Manifest {manifest.path}", path=str(manifest.path))

    mixture = clip_or_pad_audio(load_wav(_require(manifest.file_path(manifest.mixture_pattern, scene_id))), num_samples)
    target = clip_or_pad_audio(load_wav(_require(manifest.file_path(manifest.target_pattern, scene_id))), num_samples)

    interferers = []
    for index in range(MAX_INTERFERERS):
        path = manifest.file_path(manifest.interferer_pattern, scene_id, index=index)
        if not path.exists():
            break
        interferers.append(clip_or_pad_audio(load_wav(str(path)), num_samples))

    frames_dir = manifest.file_path(manifest.frames_dir_pattern, scene_id)
    frames_tensor = manifest.file_path(manifest.frames_tensor_pattern, scene_id)
    if frames_dir.is_dir():
        video = load_video(str(frames_dir))
    else:
        video = load_video(_require(frames_tensor))
    video = resize_frames(clip_or_pad_video(video, num_frames), frame_size)

    meta = {}
    meta_path = manifest.file_path(manifest.meta_pattern, scene_id)
    if meta_path.exists():
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)

    snr_db = meta.get("snr_db")
    if snr_db is None:
        noise = mixture.samples - target.samples
        snr_db = measure_snr_db(target.samples, noise) if signal_power(noise) > 0.0 else float("inf")

    return Scene(
        id=scene_id,
        target=target,
        interferers=interferers,
        mixture=mixture,
        video=video,
        snr_db=float(snr_db),
        interferer_kinds=list(meta.get("interferer_kinds", [])),
        seed=meta.get("seed"),
    )

class SceneDataset(Dataset):
    """Torch-Datensatz über die Szenen eines Manifests."""

    def __init__(self, manifest: DatasetManifest, num_samples: int = CLIP_SAMPLES,
                 num_frames: int = CLIP_FRAMES, frame_size: int = FRAME_SIZE):
        self.manifest = manifest
        self.num_samples = num_samples
        self.num_frames = num_frames
        self.frame_size = frame_size

    def __len__(self) -> int:
        return len(self.manifest)

    def __getitem__(self, index: int) -> Scene:
        scene_id = self.manifest.ids[index]
        return load_scene(self.manifest, scene_id, self.num_samples, self.num_frames, self.frame_size)

def _collate_scenes(batch: List[Scene]) -> List[Scene]:
    return list(batch)

def iterate(manifest: DatasetManifest, batch_size: int, seed: int, num_workers: int = 0,
            num_samples: int = CLIP_SAMPLES, num_frames: int = CLIP_FRAMES,
            frame_size: int = FRAME_SIZE) -> Iterator[List[Scene]]:
    """
    Eine Epoche über alle Szenen in seed-deterministischer Permutation.

    Der letzte, unvollständige Batch wird mit ausgegeben.

    Raises:
        ValueError: Leeres Manifest oder batch_size < 1
    """
    if batch_size < 1:
        raise ValueError(f"batch_size muss >= 1 sein, erhalten: {batch_size}")
    if len(manifest) == 0:
        raise ValueError(f"Manifest {manifest.path} enthält keine Szenen")

    generator = torch.Generator()
    generator.manual_seed(seed)
    loader = DataLoader(
        SceneDataset(manifest, num_samples, num_frames, frame_size),
        batch_size=batch_size,
        shuffle=True,
        generator=generator,
        num_workers=num_workers,
        collate_fn=_collate_scenes,
        drop_last=False,
    )
    return iter(loader)

def batch_tensors(scenes: Sequence[Scene]) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Stapelt Mischung [B, T], Video [B, T_v, H, W, 3] und Ziel [B, T] als float32-Tensoren."""
    mixture = torch.from_numpy(np.stack([scene.mixture.samples for scene in scenes]).astype(np.float32))
    video = torch.from_numpy(np.stack([scene.video.frames for scene in scenes]).astype(np.float32))
    target = torch.from_numpy(np.stack([scene.target.samples for scene in scenes]).astype(np.float32))
    return mixture, video, target
