"""Objective evaluation metrics: short-time intelligibility and SI-SDR.

The intelligibility metric follows the established short-time
correlation-based recipe: one-third-octave band energies (15 bands, lowest
center 150 Hz) are computed from an STFT, silent frames are discarded, and
the clean and degraded band envelopes are compared over sliding 384 ms
segments by normalized, clipped correlation.  Signals are analyzed at
16 kHz directly; resampling is out of scope.

SI-SDR projects the estimate onto the reference and reports the power
ratio of the projection to the residual in dB, clamped to +/-60 dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STOI_FRAME = 512
STOI_HOP = 256
STOI_FFT = 512
STOI_BANDS = 15
STOI_LOWEST_CENTER_HZ = 150.0
STOI_SEGMENT_FRAMES = 24  # 24 hops of 16 ms = 384 ms
STOI_CLIP_DB = -15.0
STOI_SILENCE_RANGE_DB = 40.0
SI_SDR_CAP_DB = 60.0

SAMPLE_RATE = 16000


def third_octave_bands(
    sample_rate: int = SAMPLE_RATE,
    fft_size: int = STOI_FFT,
    num_bands: int = STOI_BANDS,
    lowest_center: float = STOI_LOWEST_CENTER_HZ,
) -> np.ndarray:
    """Boolean band-membership matrix, shape (num_bands, fft_size//2 + 1).

    Band k covers ``[center/2^(1/6), center*2^(1/6))`` with
    ``center = lowest_center * 2^(k/3)``.
    """
    freqs = np.arange(fft_size // 2 + 1) * (sample_rate / fft_size)
    centers = lowest_center * 2.0 ** (np.arange(num_bands) / 3.0)
    lo = centers / 2 ** (1.0 / 6.0)
    hi = centers * 2 ** (1.0 / 6.0)
    if hi[-1] > sample_rate / 2:
        raise ValueError("highest band exceeds the Nyquist frequency")
    return (freqs[None, :] >= lo[:, None]) & (freqs[None, :] < hi[:, None])


def _frame(x: np.ndarray) -> np.ndarray:
    n = 1 + (x.size - STOI_FRAME) // STOI_HOP
    idx = np.arange(n)[:, None] * STOI_HOP + np.arange(STOI_FRAME)[None, :]
    return x[idx]


def _band_envelopes(frames: np.ndarray, bands: np.ndarray) -> np.ndarray:
    window = np.hanning(STOI_FRAME + 2)[1:-1]
    spec = np.fft.rfft(frames * window, n=STOI_FFT, axis=1)
    power = np.abs(spec) ** 2
    return np.sqrt(power @ bands.T)  # (frames, bands)


def stoi(clean: np.ndarray, degraded: np.ndarray, sample_rate: int = SAMPLE_RATE) -> float:
    """Short-time objective intelligibility of ``degraded`` given ``clean``.

    Parameters
    ----------
    clean, degraded : np.ndarray
        Time-aligned 16 kHz signals; the longer is truncated to the shorter.
    sample_rate : int
        Must be 16000; resampling is the caller's responsibility.

    Returns
    -------
    float
        Intelligibility score clipped into [0, 1]; invariant to positive
        rescaling of the degraded signal.

    Raises
    ------
    ValueError
        If the inputs are too short for one 384 ms analysis segment after
        silent-frame removal, or the clean signal is silent.
    """
    if sample_rate != SAMPLE_RATE:
        raise ValueError(f"only {SAMPLE_RATE} Hz input is supported, got {sample_rate}")
    clean = np.asarray(clean, dtype=np.float64).ravel()
    degraded = np.asarray(degraded, dtype=np.float64).ravel()
    n = min(clean.size, degraded.size)
    clean, degraded = clean[:n], degraded[:n]
    if n < STOI_FRAME + (STOI_SEGMENT_FRAMES - 1) * STOI_HOP:
        raise ValueError(
            f"signals too short for intelligibility analysis: {n} samples"
        )
    if not np.any(clean):
        raise ValueError("clean signal is silent")

    x_frames = _frame(clean)
    y_frames = _frame(degraded)

    # drop frames more than 40 dB below the loudest clean frame
    window = np.hanning(STOI_FRAME + 2)[1:-1]
    energies = np.sum((x_frames * window) ** 2, axis=1)
    threshold = energies.max() * 10.0 ** (-STOI_SILENCE_RANGE_DB / 10.0)
    keep = energies > threshold
    if np.count_nonzero(keep) < STOI_SEGMENT_FRAMES:
        raise ValueError("too few active frames after silence removal")
    x_frames, y_frames = x_frames[keep], y_frames[keep]

    bands = third_octave_bands(sample_rate)
    x_env = _band_envelopes(x_frames, bands)
    y_env = _band_envelopes(y_frames, bands)

    clip_gain = 1.0 + 10.0 ** (-STOI_CLIP_DB / 20.0)
    num_frames = x_env.shape[0]
    correlations = []
    for end in range(STOI_SEGMENT_FRAMES, num_frames + 1):
        x_seg = x_env[end - STOI_SEGMENT_FRAMES : end]
        y_seg = y_env[end - STOI_SEGMENT_FRAMES : end]
        x_norm = np.linalg.norm(x_seg, axis=0)
        y_norm = np.linalg.norm(y_seg, axis=0)
        scale = x_norm / np.maximum(y_norm, 1e-240)
        y_scaled = np.minimum(y_seg * scale[None, :], clip_gain * x_seg)
        xc = x_seg - x_seg.mean(axis=0, keepdims=True)
        yc = y_scaled - y_scaled.mean(axis=0, keepdims=True)
        denom = np.linalg.norm(xc, axis=0) * np.linalg.norm(yc, axis=0)
        valid = denom > 0
        if np.any(valid):
            correlations.append(
                np.sum(xc[:, valid] * yc[:, valid], axis=0) / denom[valid]
            )
    if not correlations:
        raise ValueError("no usable analysis segments")
    value = float(np.mean(np.concatenate(correlations)))
    return min(1.0, max(0.0, value))


def si_sdr(reference: np.ndarray, estimate: np.ndarray) -> float:
    """Scale-invariant signal-to-distortion ratio in dB.

    The estimate is projected onto the reference; the ratio of projection
    power to residual power is reported, clamped to [-60, +60] dB (a zero
    residual would otherwise be unbounded).
    """
    reference = np.asarray(reference, dtype=np.float64).ravel()
    estimate = np.asarray(estimate, dtype=np.float64).ravel()
    if reference.size != estimate.size:
        raise ValueError(
            f"length mismatch: reference {reference.size} vs estimate {estimate.size}"
        )
    ref_power = float(np.dot(reference, reference))
    if ref_power <= 0.0:
        raise ValueError("reference signal has zero power")
    alpha = float(np.dot(estimate, reference)) / ref_power
    target = alpha * reference
    residual = estimate - target
    p_target = float(np.dot(target, target))
    p_residual = float(np.dot(residual, residual))
    if p_residual == 0.0:
        return SI_SDR_CAP_DB
    if p_target == 0.0:
        return -SI_SDR_CAP_DB
    value = 10.0 * math.log10(p_target / p_residual)
    return min(SI_SDR_CAP_DB, max(-SI_SDR_CAP_DB, value))


@dataclass(frozen=True)
class UtteranceMetrics:
    stoi: float
    si_sdr: float


@dataclass
class MetricReport:
    """Per-utterance metrics plus their arithmetic means."""

    per_utterance: list[UtteranceMetrics] = field(default_factory=list)

    def add(self, clean: np.ndarray, degraded: np.ndarray, sample_rate: int = SAMPLE_RATE):
        self.per_utterance.append(
            UtteranceMetrics(
                stoi=stoi(clean, degraded, sample_rate),
                si_sdr=si_sdr(clean, degraded),
            )
        )

    @property
    def count(self) -> int:
        return len(self.per_utterance)

    @property
    def mean_stoi(self) -> float:
        if not self.per_utterance:
            raise ValueError("empty report")
        return float(np.mean([u.stoi for u in self.per_utterance]))

    @property
    def mean_si_sdr(self) -> float:
        if not self.per_utterance:
            raise ValueError("empty report")
        return float(np.mean([u.si_sdr for u in self.per_utterance]))
