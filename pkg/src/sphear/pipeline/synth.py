"""Synthetic desk-scale audio: speech-like bursts and background noise.

The real corpora are pluggable directories of WAV files and are not
redistributed; these generators produce tiny stand-ins.  "Speech" is
broadband noise shaped by a few slowly drifting resonators (formant-ish
spectral peaks) and modulated by a syllable-rate on/off envelope, which is
enough structure for the intelligibility metric to respond to degradation.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .wavio import write_wav


def _resonator(x: np.ndarray, freq: float, bandwidth: float, fs: int) -> np.ndarray:
    r = np.exp(-np.pi * bandwidth / fs)
    w = 2.0 * np.pi * freq / fs
    a = [1.0, -2.0 * r * np.cos(w), r * r]
    return lfilter([1.0 - r], a, x)


def speech_like(duration_s: float, sample_rate: int, rng: np.random.Generator) -> np.ndarray:
    """One speech-like utterance, scaled to 0.1 RMS."""
    n = int(round(duration_s * sample_rate))
    excitation = rng.normal(size=n)
    formants = rng.uniform([300.0, 900.0, 2200.0], [800.0, 2000.0, 3400.0])
    y = np.zeros(n)
    for f in formants:
        drift = f * (1.0 + 0.1 * np.sin(2 * np.pi * rng.uniform(0.2, 0.6) * np.arange(n) / sample_rate))
        # piecewise-constant drift keeps the filter time-invariant per chunk
        chunk = sample_rate // 8
        for start in range(0, n, chunk):
            seg = slice(start, min(n, start + chunk))
            y[seg] += _resonator(excitation[seg], float(drift[start]), 150.0, sample_rate)

    # syllable-rate gating with deep gaps, plus occasional word pauses
    t = np.arange(n) / sample_rate
    rate = rng.uniform(2.5, 5.0)
    env = 0.5 - 0.5 * np.cos(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi))
    env = env ** 2.5 + 0.01
    pause_period = rng.uniform(0.6, 1.2)
    pause_duty = rng.uniform(0.15, 0.3)
    phase = (t / pause_period + rng.uniform(0, 1)) % 1.0
    env = env * np.where(phase < pause_duty, 0.02, 1.0)
    y = y * env
    y[: sample_rate // 100] *= np.linspace(0, 1, sample_rate // 100)
    y[-sample_rate // 100 :] *= np.linspace(1, 0, sample_rate // 100)
    rms = np.sqrt(np.mean(y**2))
    return y / max(rms, 1e-12) * 0.1


def noise_burst(duration_s: float, sample_rate: int, rng: np.random.Generator) -> np.ndarray:
    """Colored (pink-ish) background noise, unit-scaled like speech_like."""
    n = int(round(duration_s * sample_rate))
    white = rng.normal(size=n)
    # -3 dB/octave shaping via a one-pole cascade approximation
    b = [0.049922035, -0.095993537, 0.050612699, -0.004408786]
    a = [1.0, -2.494956002, 2.017265875, -0.522189400]
    pink = lfilter(b, a, white)
    rms = np.sqrt(np.mean(pink**2))
    return pink / max(rms, 1e-12) * 0.1


def make_corpus(
    out_dir: Path | str,
    count: int,
    duration_s: float,
    sample_rate: int,
    seed: int,
    kind: str = "speech",
) -> list[Path]:
    """Write ``count`` synthetic WAV files and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    maker = {"speech": speech_like, "noise": noise_burst}[kind]
    paths = []
    for i in range(count):
        rng = np.random.default_rng(seed ^ i)
        data = maker(duration_s, sample_rate, rng)
        path = out_dir / f"{kind}_{i:05d}.wav"
        write_wav(path, data, sample_rate)
        paths.append(path)
    return paths
