"""
Medien-Paket für AUREXA-SE
--------------------------
Audio- und Video-Ein-/Ausgabe mit den festen Eingabekonventionen der Pipeline.
"""

from app.core.media.audio_io import (
    AudioClip, load_wav, save_wav, clip_or_pad_audio, peak_normalize
)
from app.core.media.video_io import (
    VideoClip, clip_or_pad_video, resize_frames, load_video, load_frame_dir,
    save_frame_dir, read_frame_tensor, write_frame_tensor
)

__all__ = [
    'AudioClip',
    'VideoClip',
    'load_wav',
    'save_wav',
    'clip_or_pad_audio',
    'peak_normalize',
    'clip_or_pad_video',
    'resize_frames',
    'load_video',
    'load_frame_dir',
    'save_frame_dir',
    'read_frame_tensor',
    'write_frame_tensor'
]
