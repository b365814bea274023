"""
Zufalls-Hilfsfunktionen für AUREXA-SE
-------------------------------------
Alle Zufälligkeit stammt aus einem einzigen Seed; Teil-Seeds werden deterministisch abgeleitet.
"""

import hashlib
import random
import logging
from typing import Any, Dict

import numpy as np
import torch

# Logger konfigurieren
logger = logging.getLogger("aurexa.utils.random")

def derive_seed(base_seed: int, *names: Any) -> int:
    """
    Leitet einen Teil-Seed aus einem Basis-Seed und Namen ab.

    Args:
        base_seed: Globaler Seed
        *names: Bezeichner (z.B. Modulname, Szenenindex)

    Returns:
        Nicht-negativer 31-Bit-Seed
    """
    key = "/".join([str(base_seed)] + [str(name) for name in names])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little") & 0x7FFFFFFF

def seed_everything(seed: int) -> None:
    """Setzt die Seeds von random, numpy und torch."""
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)
    logger.debug(f"Seeds gesetzt: {seed}")

def capture_rng_state() -> Dict[str, Any]:
    """Erfasst den Zustand aller Zufallsgeneratoren (für Checkpoints)."""
    return {
        "python": random.getstate(),
        "numpy": np.random.get_state(),
        "torch": torch.get_rng_state(),
    }

def restore_rng_state(state: Dict[str, Any]) -> None:
    """Stellt einen mit capture_rng_state erfassten Zustand wieder her."""
    if "python" in state:
        random.setstate(state["python"])
    if "numpy" in state:
        np.random.set_state(state["numpy"])
    if "torch" in state:
        torch.set_rng_state(state["torch"])
