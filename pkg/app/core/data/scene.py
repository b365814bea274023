"""
Szenen-Datentyp für AUREXA-SE
-----------------------------
Eine Szene bündelt Zielsprache, Störquellen, Mischung, stummes Video und SNR.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.core.media.audio_io import AudioClip
from app.core.media.video_io import VideoClip

MAX_INTERFERERS = 3

@dataclass
class Scene:
    """
    Audio-visuelle Szene.

    Attributes:
        id (str): Szenen-ID
        target (AudioClip): Zielsprache
        interferers (List[AudioClip]): 0 bis 3 Störquellen, so skaliert wie in der Mischung enthalten
        mixture (AudioClip): Mischung aus Ziel und Störquellen
        video (VideoClip): Stummes Video des Sprechers
        snr_db (float): SNR der Mischung in dB
        interferer_kinds (List[str]): Art der Störquellen (nur synthetische Szenen)
        seed (Optional[int]): Seed der Synthese, falls synthetisch
    """

    id: str
    target: AudioClip
    interferers: List[AudioClip]
    mixture: AudioClip
    video: VideoClip
    snr_db: float
    interferer_kinds: List[str] = field(default_factory=list)
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.interferers) > MAX_INTERFERERS:
            raise ValueError(f"Höchstens {MAX_INTERFERERS} Störquellen erlaubt, erhalten: {len(self.interferers)}")
        if len(self.target) != len(self.mixture):
            raise ValueError(
                f"Ziel ({len(self.target)}) und Mischung ({len(self.mixture)}) müssen gleich lang sein"
            )

    def interferer_sum(self) -> np.ndarray:
        """Summe der (skalierten) Störquellen; Nullvektor ohne Störquellen."""
        if not self.interferers:
            return np.zeros(len(self.target))
        return np.sum([clip.samples for clip in self.interferers], axis=0)
