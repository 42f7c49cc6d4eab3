"""STFT analysis and synthesis with square-root Hann windowing.

Default framing: 512-sample frames (32 ms at 16 kHz), 256-sample hop,
512-point transform, 257 retained bins.  The periodic Hann window satisfies
the constant-overlap-add identity at 50% overlap, so applying its square
root on both analysis and synthesis reconstructs interior samples exactly;
no boundary padding is performed and the first/last frame of samples is
not covered by the guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .acoustics import MultichannelSignal


@dataclass(frozen=True)
class StftConfig:
    frame_len: int = 512
    hop: int = 256
    fft_size: int = 512
    sample_rate: int = 16000

    def __post_init__(self):
        if self.frame_len <= 0 or self.hop <= 0 or self.fft_size <= 0:
            raise ValueError("frame_len, hop and fft_size must be positive")
        if self.fft_size < self.frame_len:
            raise ValueError("fft_size must be >= frame_len")

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1

    def window(self) -> np.ndarray:
        """Square root of the periodic Hann window."""
        n = np.arange(self.frame_len)
        hann = 0.5 - 0.5 * np.cos(2.0 * math.pi * n / self.frame_len)
        return np.sqrt(hann)

    def num_frames(self, num_samples: int) -> int:
        if num_samples < self.frame_len:
            raise ValueError(
                f"signal of {num_samples} samples is shorter than one "
                f"{self.frame_len}-sample frame"
            )
        return 1 + (num_samples - self.frame_len) // self.hop

    def num_samples(self, num_frames: int) -> int:
        """Length of the synthesis output for a frame count."""
        return (num_frames - 1) * self.hop + self.frame_len


@dataclass
class Spectrogram:
    """Complex time-frequency tensor, shape (frames, bins, channels)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise ValueError("spectrogram data must have shape (T, F, C)")
        if not np.iscomplexobj(self.data):
            self.data = self.data.astype(np.complex128)

    @property
    def num_frames(self) -> int:
        return self.data.shape[0]

    @property
    def num_bins(self) -> int:
        return self.data.shape[1]

    @property
    def num_channels(self) -> int:
        return self.data.shape[2]


def stft(signal: MultichannelSignal | np.ndarray, config: StftConfig = StftConfig()) -> Spectrogram:
    """Short-time Fourier transform of each channel.

    Frames start at multiples of the hop with no padding, so
    ``T = 1 + floor((S - frame_len)/hop)``; only the non-negative
    frequency half is retained.
    """
    if isinstance(signal, MultichannelSignal):
        data = signal.data
    else:
        data = np.atleast_2d(np.asarray(signal, dtype=np.float64))
        if data.shape[0] == 1 and data.size > 1:
            data = data.T
    n_frames = config.num_frames(data.shape[0])
    window = config.window()
    idx = (
        np.arange(n_frames)[:, None] * config.hop + np.arange(config.frame_len)[None, :]
    )
    frames = data[idx, :] * window[None, :, None]  # (T, frame_len, C)
    spec = np.fft.rfft(frames, n=config.fft_size, axis=1)
    return Spectrogram(data=spec)


def istft(spec: Spectrogram, config: StftConfig = StftConfig()) -> MultichannelSignal:
    """Inverse STFT by windowed overlap-add.

    The synthesis window equals the analysis window; at 50% overlap their
    product sums to one across interior samples, so ``istft(stft(x))``
    matches ``x`` there to round-off.
    """
    if spec.num_bins != config.num_bins:
        raise ValueError(
            f"spectrogram has {spec.num_bins} bins but the configuration "
            f"implies {config.num_bins}"
        )
    frames = np.fft.irfft(spec.data, n=config.fft_size, axis=1)[:, : config.frame_len, :]
    frames = frames * config.window()[None, :, None]
    out_len = config.num_samples(spec.num_frames)
    out = np.zeros((out_len, spec.num_channels))
    for t in range(spec.num_frames):
        start = t * config.hop
        out[start : start + config.frame_len, :] += frames[t]
    return MultichannelSignal(data=out, sample_rate=config.sample_rate)
