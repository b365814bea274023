"""
Checkpoints für AUREXA-SE
-------------------------
Versioniertes Binärformat (little-endian):

    Kopf:      Magic b"AURXCKPT" (8 Byte), Version (uint32), SHA-256 der Modellkonfiguration
               (32 Byte), Länge der Metadaten (uint64)
    Metadaten: JSON mit Modellkonfiguration, Epoche, Tensor-Tabelle und Zusatzdaten
    Tensoren:  benannte Parameter und Puffer als float32 ('<f4'), float64 ('<f8') oder int64 ('<i8')
    Zusatz:    Optimierer- und Zufallszustand (torch.save-Bytes)
"""

import hashlib
import io
import json
import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import torch

from app.config import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from app.core.model.aurexa import AurexaSE, build_model
from app.models.schemas import ModelConfig
from app.utils.error_handling import CheckpointError
from app.utils.file_utils import ensure_dir_exists

# Logger konfigurieren
logger = logging.getLogger("aurexa.training.checkpoint")

_HEADER = struct.Struct("<8sI32sQ")
_DTYPES = {
    torch.float32: "<f4",
    torch.float64: "<f8",
    torch.int64: "<i8",
}

@dataclass
class CheckpointState:
    """
    Trainingszustand neben den Modellparametern.

    Attributes:
        epoch (int): Zuletzt abgeschlossene Epoche
        optimizer_state (Optional[dict]): state_dict des Optimierers
        rng_state (Optional[dict]): Zustand der Zufallsgeneratoren
        config (Optional[ModelConfig]): Gespeicherte Modellkonfiguration
        extra (Dict[str, Any]): JSON-fähige Zusatzangaben (z.B. bestes val_si_sdr)
    """

    epoch: int = 0
    optimizer_state: Optional[dict] = None
    rng_state: Optional[dict] = None
    config: Optional[ModelConfig] = None
    extra: Dict[str, Any] = field(default_factory=dict)

def config_digest(cfg: ModelConfig) -> bytes:
    """SHA-256 über die kanonische JSON-Darstellung der Konfiguration."""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).digest()

def save_checkpoint(model: AurexaSE, path: str, state: Optional[CheckpointState] = None) -> None:
    """
    Speichert Modell und Trainingszustand.

    Raises:
        CheckpointError: Wenn die Datei nicht geschrieben werden kann (reason='io')
    """
    state = state or CheckpointState()
    tensors = []
    blobs = []
    offset = 0
    for name, tensor in model.state_dict().items():
        dtype = _DTYPES.get(tensor.dtype)
        if dtype is None:
            raise CheckpointError(f"Nicht unterstützter Datentyp {tensor.dtype} für {name}", path=path, reason="io")
        data = np.ascontiguousarray(tensor.detach().cpu().numpy(), dtype=dtype).tobytes()
        tensors.append({"name": name, "dtype": dtype, "shape": list(tensor.shape), "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)

    buffer = io.BytesIO()
    torch.save({"optimizer": state.optimizer_state, "rng": state.rng_state}, buffer)
    extra_bytes = buffer.getvalue()

    meta = {
        "config": model.cfg.model_dump(mode="json"),
        "epoch": state.epoch,
        "extra": state.extra,
        "tensors": tensors,
        "tensor_bytes": offset,
        "state_bytes": len(extra_bytes),
    }
    meta_bytes = json.dumps(meta).encode("utf-8")
    header = _HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, config_digest(model.cfg), len(meta_bytes))

    ensure_dir_exists(str(Path(path).parent))
    tmp_path = f"{path}.tmp"
    try:
        with open(tmp_path, "wb") as f:
            f.write(header)
            f.write(meta_bytes)
            for blob in blobs:
                f.write(blob)
            f.write(extra_bytes)
        os.replace(tmp_path, path)
    except OSError as e:
        logger.error(f"Checkpoint konnte nicht geschrieben werden: {path} ({str(e)})")
        raise CheckpointError(f"Checkpoint konnte nicht geschrieben werden: {path} ({str(e)})", path=path, reason="io")
    logger.debug(f"Checkpoint gespeichert: {path} (Epoche {state.epoch}, {len(tensors)} Tensoren)")

def _read_exact(f, size: int, path: str, what: str) -> bytes:
    data = f.read(size)
    if len(data) != size:
        raise CheckpointError(f"Checkpoint {path} ist abgeschnitten ({what})", path=path, reason="corrupt")
    return data

def load_checkpoint(path: str, expected_config: Optional[ModelConfig] = None) -> Tuple[AurexaSE, CheckpointState]:
    """
    Lädt einen Checkpoint und baut das Modell aus der gespeicherten Konfiguration.

    Args:
        path: Pfad zur Checkpoint-Datei
        expected_config: Optionale Konfiguration, die mit der gespeicherten übereinstimmen muss

    Returns:
        (Modell im Inferenzmodus, Trainingszustand)

    Raises:
        CheckpointError: Version ('version'), beschädigte Datei ('corrupt'),
                         abweichende Konfiguration ('config'), Lesefehler ('io')
    """
    path = str(path)
    try:
        with open(path, "rb") as f:
            magic, version, digest, meta_len = _HEADER.unpack(_read_exact(f, _HEADER.size, path, "Kopf"))
            if magic != CHECKPOINT_MAGIC:
                raise CheckpointError(f"{path} ist kein AUREXA-Checkpoint", path=path, reason="corrupt")
            if version != CHECKPOINT_VERSION:
                raise CheckpointError(
                    f"Checkpoint-Version {version} wird nicht unterstützt (erwartet {CHECKPOINT_VERSION})",
                    path=path, reason="version"
                )
            try:
                meta = json.loads(_read_exact(f, meta_len, path, "Metadaten").decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                raise CheckpointError(f"Metadaten in {path} sind beschädigt", path=path, reason="corrupt")
            try:
                tensor_bytes = _read_exact(f, meta["tensor_bytes"], path, "Tensoren")
                state_bytes = _read_exact(f, meta["state_bytes"], path, "Zustand")
            except (KeyError, TypeError, ValueError) as e:
                raise CheckpointError(f"Metadaten in {path} sind unvollständig: {str(e)}", path=path, reason="corrupt")
    except OSError as e:
        raise CheckpointError(f"Checkpoint {path} nicht lesbar: {str(e)}", path=path, reason="io")

    try:
        cfg = ModelConfig.model_validate(meta["config"])
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"Konfiguration in {path} ist beschädigt: {str(e)}", path=path, reason="corrupt")
    if config_digest(cfg) != digest:
        raise CheckpointError(f"Konfigurations-Prüfsumme in {path} stimmt nicht", path=path, reason="corrupt")
    if expected_config is not None and config_digest(expected_config) != digest:
        raise CheckpointError(
            f"Checkpoint {path} wurde mit einer anderen Modellkonfiguration erstellt", path=path, reason="config"
        )

    model = build_model(cfg)
    state_dict = {}
    try:
        for entry in meta["tensors"]:
            raw = tensor_bytes[entry["offset"]:entry["offset"] + entry["nbytes"]]
            array = np.frombuffer(raw, dtype=entry["dtype"]).reshape(entry["shape"]).copy()
            state_dict[entry["name"]] = torch.from_numpy(array)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"Tensortabelle in {path} ist beschädigt: {str(e)}", path=path, reason="corrupt")
    try:
        model.load_state_dict(state_dict, strict=True)
    except RuntimeError as e:
        raise CheckpointError(f"Parameter in {path} passen nicht zum Modell: {str(e)}", path=path, reason="config")
    model.eval()

    try:
        extras = torch.load(io.BytesIO(state_bytes), weights_only=False)
        state = CheckpointState(
            epoch=meta["epoch"],
            optimizer_state=extras.get("optimizer"),
            rng_state=extras.get("rng"),
            config=cfg,
            extra=meta.get("extra", {}),
        )
    except Exception as e:
        raise CheckpointError(f"Trainingszustand in {path} ist beschädigt: {str(e)}", path=path, reason="corrupt")
    logger.info(f"Checkpoint geladen: {path} (Epoche {state.epoch})")
    return model, state
