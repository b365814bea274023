"""
Video-Ein-/Ausgabe für AUREXA-SE
--------------------------------
Frame-Sequenzen als Bildverzeichnis oder als binäre Frame-Tensor-Datei,
Skalierung auf 112x112 und Auffüllen/Abschneiden auf 75 Frames.

Frame-Tensor-Datei (little-endian):
    4 Byte Magic b"AVFT", dann T, H, W, C als uint32, danach float32-Pixel frame-major.
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from app.config import CLIP_FRAMES, FRAME_SIZE, FRAME_TENSOR_MAGIC, VIDEO_FPS
from app.utils.error_handling import MediaFormatError, MediaIOError
from app.utils.file_utils import ensure_dir_exists, list_files_by_type

# Logger konfigurieren
logger = logging.getLogger("aurexa.media.video")

_HEADER = struct.Struct("<4sIIII")
_IMAGE_EXTENSIONS = [".png", ".jpg", ".jpeg", ".bmp"]

@dataclass
class VideoClip:
    """
    Frame-Sequenz T x H x W x 3 mit Werten in [0, 1].

    Attributes:
        frames (np.ndarray): float32-Array der Form (T, H, W, 3)
        fps (int): Bildrate, in der Pipeline 25
    """

    frames: np.ndarray
    fps: int = VIDEO_FPS

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise MediaFormatError(
                f"Frames müssen die Form (T, H, W, 3) haben, erhalten: {self.frames.shape}",
                offending_property="shape"
            )

    def __len__(self) -> int:
        return self.frames.shape[0]

def clip_or_pad_video(clip: VideoClip, target_frames: int = CLIP_FRAMES) -> VideoClip:
    """
    Schneidet überzählige Frames ab oder wiederholt den letzten Frame bis target_frames.

    Raises:
        ValueError: Leerer Clip bei target_frames > 0 (kein Frame zum Wiederholen)
    """
    if target_frames <= 0:
        raise ValueError(f"target_frames muss > 0 sein, erhalten: {target_frames}")
    if len(clip) == 0:
        raise ValueError("Leerer Video-Clip kann nicht aufgefüllt werden")

    frames = clip.frames[:target_frames]
    shortfall = target_frames - frames.shape[0]
    if shortfall > 0:
        # eingefrorenes Gesicht statt schwarzer Frames
        tail = np.repeat(frames[-1:], shortfall, axis=0)
        frames = np.concatenate([frames, tail], axis=0)
    return VideoClip(frames, clip.fps)

def resize_frames(clip: VideoClip, size: int = FRAME_SIZE) -> VideoClip:
    """
    Skaliert jeden Frame bilinear auf size x size und begrenzt die Werte auf [0, 1].

    Args:
        clip: Eingabe-Clip (nicht leer)
        size: Zielkantenlänge in Pixeln

    Returns:
        Skalierter Clip
    """
    if size <= 0:
        raise ValueError(f"size muss > 0 sein, erhalten: {size}")
    if len(clip) == 0:
        raise ValueError("Leerer Video-Clip kann nicht skaliert werden")

    _, height, width, _ = clip.frames.shape
    if height == size and width == size:
        return VideoClip(np.clip(clip.frames, 0.0, 1.0), clip.fps)

    tensor = torch.from_numpy(clip.frames).permute(0, 3, 1, 2)
    resized = F.interpolate(tensor, size=(size, size), mode="bilinear", align_corners=False)
    frames = resized.permute(0, 2, 3, 1).clamp(0.0, 1.0).numpy()
    return VideoClip(frames, clip.fps)

def write_frame_tensor(clip: VideoClip, path: str) -> None:
    """Schreibt einen Clip als Frame-Tensor-Datei."""
    frames = np.ascontiguousarray(clip.frames, dtype="<f4")
    t, h, w, c = frames.shape
    ensure_dir_exists(str(Path(path).parent))
    try:
        with open(path, "wb") as f:
            f.write(_HEADER.pack(FRAME_TENSOR_MAGIC, t, h, w, c))
            f.write(frames.tobytes())
    except OSError as e:
        raise MediaIOError(f"Frame-Tensor konnte nicht geschrieben werden: {path} ({str(e)})", path=path)

def read_frame_tensor(path: str, fps: int = VIDEO_FPS) -> VideoClip:
    """
    Liest eine Frame-Tensor-Datei.

    Raises:
        MediaFormatError: Falsches Magic oder unvollständige Pixeldaten
    """
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise MediaFormatError(f"Frame-Tensor-Header unvollständig: {path}", path=path, offending_property="header")
        magic, t, h, w, c = _HEADER.unpack(header)
        if magic != FRAME_TENSOR_MAGIC:
            raise MediaFormatError(f"Unbekanntes Magic {magic!r} in {path}", path=path, offending_property="magic")
        payload = f.read()

    expected = t * h * w * c * 4
    if len(payload) != expected:
        raise MediaFormatError(
            f"Frame-Tensor {path}: {len(payload)} Byte Pixeldaten, erwartet {expected}",
            path=path, offending_property="payload"
        )
    frames = np.frombuffer(payload, dtype="<f4").reshape(t, h, w, c).astype(np.float32)
    return VideoClip(frames, fps)

def load_frame_dir(directory: str, fps: int = VIDEO_FPS) -> VideoClip:
    """
    Lädt ein Verzeichnis mit Einzelbildern (8-Bit RGB, lexikographisch sortiert).

    Raises:
        MediaFormatError: Wenn das Verzeichnis keine Bilder enthält oder Bildgrößen abweichen
    """
    files = list_files_by_type(directory, extensions=_IMAGE_EXTENSIONS)
    if not files:
        raise MediaFormatError(f"Keine Bilddateien in {directory}", path=directory, offending_property="frames")

    frames = []
    for file in files:
        with Image.open(file) as image:
            frames.append(np.asarray(image.convert("RGB"), dtype=np.float32) / 255.0)

    shapes = {frame.shape for frame in frames}
    if len(shapes) > 1:
        raise MediaFormatError(f"Uneinheitliche Bildgrößen in {directory}: {sorted(shapes)}",
                               path=directory, offending_property="frame_size")
    logger.debug(f"{len(frames)} Frames aus {directory} geladen")
    return VideoClip(np.stack(frames), fps)

def save_frame_dir(clip: VideoClip, directory: str) -> None:
    """Schreibt jeden Frame als 8-Bit-PNG (frame_00000.png, ...)."""
    ensure_dir_exists(directory)
    codes = np.round(np.clip(clip.frames, 0.0, 1.0) * 255.0).astype(np.uint8)
    for index, frame in enumerate(codes):
        Image.fromarray(frame).save(Path(directory) / f"frame_{index:05d}.png")

def load_video(path: str, fps: int = VIDEO_FPS) -> VideoClip:
    """Lädt ein Bildverzeichnis oder eine Frame-Tensor-Datei, je nach Pfadtyp."""
    if Path(path).is_dir():
        return load_frame_dir(path, fps)
    return read_frame_tensor(path, fps)
