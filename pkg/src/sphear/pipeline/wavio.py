"""WAV reading and writing: PCM-16 and IEEE float32, mono or multichannel.

All pipeline audio is 16 kHz; readers can enforce the expected rate.
Floats are written verbatim (no clipping); PCM-16 data is scaled by 1/32768
on read so full scale maps to [-1, 1).
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .ioutil import atomic_write_bytes


def write_wav(
    path: Path | str,
    data: np.ndarray,
    sample_rate: int,
    encoding: str = "float32",
):
    """Write a (samples,) or (samples, channels) array as a WAV file.

    ``encoding`` is ``"float32"`` or ``"pcm16"``; writes are atomic.
    """
    data = np.asarray(data)
    if data.ndim not in (1, 2):
        raise ValueError("audio must be 1-D or (samples, channels)")
    if encoding == "float32":
        payload = data.astype(np.float32)
    elif encoding == "pcm16":
        scaled = np.clip(np.round(np.asarray(data, dtype=np.float64) * 32768.0), -32768, 32767)
        payload = scaled.astype(np.int16)
    else:
        raise ValueError(f"unsupported encoding {encoding!r}")
    buf = io.BytesIO()
    wavfile.write(buf, int(sample_rate), payload)
    atomic_write_bytes(path, buf.getvalue())


def read_wav(path: Path | str, expected_sample_rate: int | None = None) -> tuple[np.ndarray, int]:
    """Read a WAV file into float64 in [-1, 1] (for PCM) plus its rate."""
    rate, data = wavfile.read(path)
    if expected_sample_rate is not None and rate != expected_sample_rate:
        raise ValueError(
            f"{path}: sample rate {rate} Hz, expected {expected_sample_rate} Hz"
        )
    if data.dtype == np.int16:
        out = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        out = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported WAV sample format {data.dtype}")
    return out, int(rate)
