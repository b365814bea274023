"""
Gemeinsame Fixtures für die AUREXA-SE-Tests
"""

import numpy as np
import pytest
import torch

from app.core.data.dataset import write_manifest, write_scene
from app.core.data.synthesizer import synth_scene
from app.models.schemas import model_preset, synth_preset


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(1)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_cfg():
    return model_preset("tiny")


@pytest.fixture
def tiny_synth():
    return synth_preset("tiny")


@pytest.fixture
def tiny_scenes(tiny_synth):
    return [synth_scene(seed, tiny_synth, scene_id=f"scene_{seed:05d}") for seed in range(4)]


@pytest.fixture
def scene_dir(tmp_path, tiny_scenes):
    """Szenenverzeichnis mit drei train- und einer dev-Szene."""
    root = tmp_path / "scenes"
    for scene in tiny_scenes:
        write_scene(scene, str(root))
    splits = ["train", "train", "train", "dev"]
    write_manifest(str(root), [(scene.id, split) for scene, split in zip(tiny_scenes, splits)])
    return root


@pytest.fixture
def module_grad_check():
    """
    Liefert eine Funktion, die für ein Modul den Anteil der Parametereinträge mit
    relativem Fehler < tolerance (zentrale Differenzen, float64) bestimmt.
    """
    from app.core.training.grad_check import finite_difference_check, sample_entries

    def check(module, forward, num_params=200, tolerance=1e-3, seed=0):
        module.double()
        generator = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            shape = forward().shape
        weights = torch.randn(shape, generator=generator, dtype=torch.float64)

        def loss_fn():
            return (forward() * weights).sum()

        entries = sample_entries(module, "module", num_params, np.random.default_rng(seed))
        results = finite_difference_check(loss_fn, entries, step=1e-4, tolerance=tolerance)
        return sum(result["passed"] for result in results) / len(results)

    return check
