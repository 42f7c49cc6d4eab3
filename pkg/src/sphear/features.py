"""Spherical-harmonic feature extraction in the STFT domain and input packing.

Each time-frequency bin of a multichannel spectrogram is treated as one
narrowband array snapshot and analyzed with the discrete spherical
harmonics transform, yielding a (T, F, (N+1)^2) coefficient tensor that is
time-aligned with the spectrogram.  High-frequency bins where the product
of wave number and array radius exceeds the truncation order are still
transformed (the representation degrades gracefully there); a diagnostic
warning reports the cutoff frequency once.

Model inputs split complex tensors into real/imaginary channel pairs
(channel 2c is the real part of complex channel c, channel 2c+1 its
imaginary part), which doubles channel counts: a 9-mic spectrogram becomes
18 channels, order-4 coefficients become 50, and the serial variant
concatenates both into 68.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .array import ArrayGeometry
from .spectral import Spectrogram
from .spherical import FOUR_PI, sh_basis_matrix

VARIANTS = ("serial", "parallel")


@dataclass
class ShtFeatures:
    """Per-bin spherical-harmonic coefficients, shape (T, F, (order+1)^2)."""

    order: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data)
        expected = (self.order + 1) ** 2
        if self.data.ndim != 3 or self.data.shape[2] != expected:
            raise ValueError(
                f"features for order {self.order} must have shape "
                f"(T, F, {expected}), got {self.data.shape}"
            )


@dataclass
class ModelInput:
    """Real-valued network input tensors for one utterance."""

    variant: str
    stft_tensor: np.ndarray
    sht_tensor: np.ndarray

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    @property
    def serial_tensor(self) -> np.ndarray:
        """Channel concatenation of the STFT and coefficient tensors."""
        return np.concatenate([self.stft_tensor, self.sht_tensor], axis=2)


def split_complex(x: np.ndarray) -> np.ndarray:
    """Split the last axis of a complex tensor into real/imag channel pairs."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    return x.view(np.float64).reshape(x.shape[:-1] + (2 * x.shape[-1],))


def merge_complex(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`split_complex`; exact round-trip."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[-1] % 2:
        raise ValueError("last axis must hold real/imag pairs (even length)")
    return x.view(np.complex128).reshape(x.shape[:-1] + (x.shape[-1] // 2,))


def sht_valid_max_frequency(geometry: ArrayGeometry, order: int, sound_speed: float = 343.0) -> float:
    """Frequency where ``k * r`` reaches the truncation order."""
    r = float(np.max(geometry.radii))
    if r == 0.0:
        return math.inf
    return order * sound_speed / (2.0 * math.pi * r)


def extract_sht_features(
    spec: Spectrogram,
    geometry: ArrayGeometry,
    order: int,
    sample_rate: int = 16000,
    sound_speed: float = 343.0,
) -> ShtFeatures:
    """Apply the discrete spherical-harmonic analysis to every (t, f) bin.

    Parameters
    ----------
    spec : Spectrogram
        Multichannel STFT with one channel per microphone.
    geometry : ArrayGeometry
        The capturing array; channel count must match.
    order : int
        Truncation order N.

    Returns
    -------
    ShtFeatures
        Complex coefficients, shape (T, F, (N+1)^2); the map is linear in
        the spectrogram.
    """
    if spec.num_channels != geometry.count:
        raise ValueError(
            f"spectrogram has {spec.num_channels} channels but the geometry "
            f"has {geometry.count} microphones"
        )
    cutoff = sht_valid_max_frequency(geometry, order, sound_speed)
    if sample_rate / 2.0 > cutoff:
        warnings.warn(
            f"spherical-harmonic analysis of order {order} on this array is "
            f"well-conditioned only below {cutoff:.0f} Hz; bins up to "
            f"{sample_rate / 2:.0f} Hz are transformed anyway",
            stacklevel=2,
        )
    basis = sh_basis_matrix(order, geometry.thetas, geometry.phis)  # (I, K)
    coeffs = (FOUR_PI / geometry.count) * (spec.data @ np.conj(basis))
    return ShtFeatures(order=order, data=coeffs)


def pack_model_input(spec: Spectrogram, feats: ShtFeatures, variant: str) -> ModelInput:
    """Bundle spectrogram and coefficients as real network input tensors."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if spec.num_frames == 0:
        raise ValueError("empty utterance: spectrogram has no frames")
    if spec.data.shape[:2] != feats.data.shape[:2]:
        raise ValueError(
            f"spectrogram frames/bins {spec.data.shape[:2]} do not match "
            f"features {feats.data.shape[:2]}"
        )
    return ModelInput(
        variant=variant,
        stft_tensor=split_complex(spec.data),
        sht_tensor=split_complex(feats.data),
    )
