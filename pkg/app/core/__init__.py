"""
Core-Module für AUREXA-SE
"""
from .media.audio_io import AudioClip, load_wav, save_wav
from .media.video_io import VideoClip
from .data.scene import Scene
from .data.synthesizer import synth_scene
from .model.aurexa import AurexaSE, build_model
from .metrics.evaluation import evaluate_batch
