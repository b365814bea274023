import numpy as np
import pytest

from app.core.data.mixing import measure_snr_db, mix_scene, signal_power, snr_gain
from app.core.media.audio_io import AudioClip
from app.utils.error_handling import DegenerateSignalError


def test_equal_power_zero_db_gain_one(rng):
    target = AudioClip(np.sign(rng.normal(size=1000)))
    noise = AudioClip(np.sign(rng.normal(size=1000)))
    gain, _ = snr_gain(target, [noise], 0.0)
    assert gain == pytest.approx(1.0)


def test_unit_power_ten_db(rng):
    target = AudioClip(np.ones(2000))
    noise = AudioClip(np.where(np.arange(2000) % 2 == 0, 1.0, -1.0))
    gain, _ = snr_gain(target, [noise], 10.0)
    assert gain == pytest.approx(np.sqrt(0.1), abs=1e-5)
    mixture = mix_scene(target, [noise], 10.0)
    assert measure_snr_db(target.samples, mixture.samples - target.samples) == pytest.approx(10.0, abs=1e-9)


def test_empty_interferers_identity(rng):
    target = AudioClip(rng.normal(size=500) * 0.1)
    assert np.array_equal(mix_scene(target, [], 5.0).samples, target.samples)


def test_requested_snr_exact_for_random_triples(rng):
    for _ in range(100):
        length = int(rng.integers(200, 2000))
        target = AudioClip(rng.normal(size=length) * rng.uniform(0.01, 1.0))
        interferers = [AudioClip(rng.normal(size=length) * rng.uniform(0.01, 1.0))
                       for _ in range(int(rng.integers(1, 4)))]
        snr_db = float(rng.uniform(-20.0, 20.0))
        mixture = mix_scene(target, interferers, snr_db)
        achieved = measure_snr_db(target.samples, mixture.samples - target.samples)
        assert abs(achieved - snr_db) < 1e-6


def test_speech_band_snr(rng):
    target = AudioClip(rng.normal(size=16000) * 0.3)
    noise = AudioClip(rng.normal(size=16000) * 0.3)
    mixture = mix_scene(target, [noise], 3.0, speech_band=True)
    achieved = measure_snr_db(target.samples, mixture.samples - target.samples, speech_band=True)
    assert achieved == pytest.approx(3.0, abs=1e-6)


def test_silent_target_raises(rng):
    with pytest.raises(DegenerateSignalError):
        mix_scene(AudioClip(np.zeros(100)), [AudioClip(rng.normal(size=100))], 0.0)


def test_silent_interferers_raise(rng):
    with pytest.raises(DegenerateSignalError):
        mix_scene(AudioClip(rng.normal(size=100)), [AudioClip(np.zeros(100))], 0.0)


def test_length_mismatch_raises(rng):
    with pytest.raises(ValueError):
        mix_scene(AudioClip(rng.normal(size=100)), [AudioClip(rng.normal(size=99))], 0.0)


def test_signal_power():
    assert signal_power(np.array([1.0, -1.0, 1.0, -1.0])) == 1.0


@pytest.mark.parametrize("speech_band", [False, True])
def test_mixture_scales_with_its_inputs(rng, speech_band):
    target = rng.normal(size=4000) * 0.2
    interferers = [rng.normal(size=4000) * scale for scale in (0.05, 0.3)]
    mixture = mix_scene(AudioClip(target), [AudioClip(n) for n in interferers], 4.0, speech_band=speech_band)
    for k in (0.01, 0.5, 3.0, 250.0):
        scaled = mix_scene(AudioClip(k * target), [AudioClip(k * n) for n in interferers], 4.0,
                           speech_band=speech_band)
        assert np.allclose(scaled.samples, k * mixture.samples, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("count", [2, 3])
def test_interferers_share_one_gain(rng, count):
    length = 3000
    target = AudioClip(rng.normal(size=length) * 0.4)
    # Stark unterschiedliche Pegel: ein gemeinsamer Faktor erhält ihre Verhältnisse
    interferers = [AudioClip(rng.normal(size=length) * scale) for scale in (0.01, 0.2, 2.0)[:count]]
    mixture = mix_scene(target, interferers, -3.0)
    gain, noise = snr_gain(target, interferers, -3.0)

    assert np.allclose(mixture.samples, target.samples + gain * noise, atol=1e-12)
    sources = np.stack([clip.samples for clip in interferers], axis=1)
    per_source, *_ = np.linalg.lstsq(sources, mixture.samples - target.samples, rcond=None)
    assert np.allclose(per_source, gain, rtol=1e-8)
