"""
Szenen-Paket für AUREXA-SE
--------------------------
SNR-gesteuertes Mischen, synthetische Szenen und der Manifest-Datensatz.
"""

from app.core.data.scene import Scene
from app.core.data.mixing import mix_scene, snr_gain, measure_snr_db, signal_power
from app.core.data.synthesizer import synth_scene, sample_snr_db
from app.core.data.dataset import (
    DatasetManifest, SceneDataset, load_manifest, write_manifest, write_scene,
    load_scene, iterate, batch_tensors
)

__all__ = [
    'Scene',
    'mix_scene',
    'snr_gain',
    'measure_snr_db',
    'signal_power',
    'synth_scene',
    'sample_snr_db',
    'DatasetManifest',
    'SceneDataset',
    'load_manifest',
    'write_manifest',
    'write_scene',
    'load_scene',
    'iterate',
    'batch_tensors'
]
