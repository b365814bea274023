import numpy as np
import pytest

from app.core.data.mixing import measure_snr_db
from app.core.data.synthesizer import sample_snr_db, synth_scene
from app.models.schemas import SynthConfig


def _assert_scenes_equal(a, b):
    assert a.id == b.id
    assert a.snr_db == b.snr_db
    assert a.interferer_kinds == b.interferer_kinds
    assert np.array_equal(a.target.samples, b.target.samples)
    assert np.array_equal(a.mixture.samples, b.mixture.samples)
    assert np.array_equal(a.video.frames, b.video.frames)
    assert len(a.interferers) == len(b.interferers)
    for x, y in zip(a.interferers, b.interferers):
        assert np.array_equal(x.samples, y.samples)


def test_same_seed_bit_identical(tiny_synth):
    _assert_scenes_equal(synth_scene(11, tiny_synth), synth_scene(11, tiny_synth))


def test_different_seed_differs(tiny_synth):
    assert not np.array_equal(synth_scene(1, tiny_synth).target.samples, synth_scene(2, tiny_synth).target.samples)


def test_default_shapes_and_ranges():
    scene = synth_scene(3)
    assert len(scene.mixture) == 48000
    assert scene.video.frames.shape == (75, 112, 112, 3)
    assert scene.video.frames.min() >= 0.0
    assert scene.video.frames.max() <= 1.0
    assert np.max(np.abs(scene.mixture.samples)) <= 0.95 + 1e-12
    assert 1 <= len(scene.interferers) <= 3
    assert scene.id == "synth_3"


def test_scene_snr_matches_metadata(tiny_synth):
    for seed in range(10):
        scene = synth_scene(seed, tiny_synth)
        assert scene.mixture.samples == pytest.approx(scene.target.samples + scene.interferer_sum())
        assert measure_snr_db(scene.target.samples, scene.interferer_sum()) == pytest.approx(scene.snr_db, abs=1e-6)


def test_blob_row_tracks_target_envelope():
    cfg = SynthConfig()
    scene = synth_scene(5, cfg)

    # Fleckmittelpunkt je Frame aus dem Video (Schwerpunkt über der Hintergrundhelligkeit)
    intensity = scene.video.frames[..., 0].astype(np.float64) - cfg.background
    rows = np.arange(cfg.image_size, dtype=np.float64)
    row_mass = intensity.sum(axis=2)
    centroid = (row_mass * rows[None, :]).sum(axis=1) / row_mass.sum(axis=1)

    # Hüllkurve unabhängig aus der Zielwellenform: RMS je Frame
    frames = scene.target.samples.reshape(cfg.num_frames, cfg.samples_per_frame)
    rms = np.sqrt(np.mean(np.square(frames), axis=1))

    assert np.corrcoef(centroid, rms)[0, 1] >= 0.99


def test_snr_sampler_bounds():
    cfg = SynthConfig()
    values = [sample_snr_db(np.random.default_rng(seed), cfg) for seed in range(1000)]
    assert min(values) >= -10.0
    assert max(values) <= 10.0


def test_evaluation_snr_range(tiny_synth):
    cfg = tiny_synth.model_copy(update={"snr_range_db": (-18.0, 6.55)})
    for seed in range(20):
        assert -18.0 <= synth_scene(seed, cfg).snr_db <= 6.55


def test_interferer_kinds_respected(tiny_synth):
    cfg = tiny_synth.model_copy(update={"interferer_kinds": ["pink"], "min_interferers": 2, "max_interferers": 2})
    scene = synth_scene(0, cfg)
    assert scene.interferer_kinds == ["pink", "pink"]
