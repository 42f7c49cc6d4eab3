"""Training loss, optimizer step, and learning-rate schedule.

The loss is the time-domain mean squared error between the inverse STFT of
the estimated spectrum and the target waveform, truncated to the shorter of
the two.  The inverse transform here is a torch re-implementation of
:mod:`sphear.spectral` (same framing, same window) so gradients flow
through the overlap-add back into the network.
"""

from __future__ import annotations

import math

import numpy as np
import torch

from ..spectral import Spectrogram, StftConfig, istft
from .model import Enhancer, model_input_tensors


def _torch_window(config: StftConfig, dtype, device) -> torch.Tensor:
    n = torch.arange(config.frame_len, dtype=dtype, device=device)
    hann = 0.5 - 0.5 * torch.cos(2.0 * math.pi * n / config.frame_len)
    return torch.sqrt(hann)


def istft_torch(est: torch.Tensor, config: StftConfig = StftConfig()) -> torch.Tensor:
    """Differentiable inverse STFT by windowed overlap-add.

    Parameters
    ----------
    est : torch.Tensor
        (B, 2, T, F) real/imag stack or (B, T, F) complex tensor.
    config : StftConfig

    Returns
    -------
    torch.Tensor
        Waveforms, shape (B, (T-1)*hop + frame_len).
    """
    if est.ndim == 4 and est.shape[1] == 2 and not est.is_complex():
        spec = torch.complex(est[:, 0], est[:, 1])
    elif est.ndim == 3 and est.is_complex():
        spec = est
    else:
        raise ValueError("expected (B, 2, T, F) real or (B, T, F) complex input")
    if spec.shape[-1] != config.num_bins:
        raise ValueError(
            f"{spec.shape[-1]} bins do not match the configured {config.num_bins}"
        )
    frames = torch.fft.irfft(spec, n=config.fft_size, dim=-1)[..., : config.frame_len]
    window = _torch_window(config, frames.dtype, frames.device)
    frames = frames * window
    b, t, _ = frames.shape
    out_len = config.num_samples(t)
    # fold() performs the overlap-add over frame starts
    cols = frames.permute(0, 2, 1)  # (B, frame_len, T)
    return torch.nn.functional.fold(
        cols,
        output_size=(1, out_len),
        kernel_size=(1, config.frame_len),
        stride=(1, config.hop),
    ).reshape(b, out_len)


def time_mse_loss(
    est: torch.Tensor, target: torch.Tensor, config: StftConfig = StftConfig()
) -> torch.Tensor:
    """MSE between the synthesized estimate and the target waveform."""
    wave = istft_torch(est, config)
    if target.ndim == 1:
        target = target.unsqueeze(0)
    n = min(wave.shape[-1], target.shape[-1])
    if n == 0:
        raise ValueError("estimate and target do not overlap in time")
    diff = wave[..., :n] - target[..., :n]
    return torch.mean(diff * diff)


def loss(est: Spectrogram, target: np.ndarray, config: StftConfig = StftConfig()) -> float:
    """Reference-path loss on numpy inputs (inverse transform + MSE)."""
    wave = istft(est, config).channel(0)
    target = np.asarray(target, dtype=np.float64).ravel()
    n = min(wave.size, target.size)
    if n == 0:
        raise ValueError("estimate and target do not overlap in time")
    diff = wave[:n] - target[:n]
    return float(np.mean(diff * diff))


def make_optimizer(model: Enhancer, lr: float = 1e-3) -> torch.optim.Adam:
    return torch.optim.Adam(model.parameters(), lr=lr, betas=(0.9, 0.999), eps=1e-8)


def train_step(
    model: Enhancer,
    batch,
    optimizer: torch.optim.Optimizer,
    config: StftConfig = StftConfig(),
) -> float:
    """One optimizer update on a batch of (ModelInput, target) pairs.

    The batch loss is the mean of per-utterance time-domain MSEs; a
    non-finite loss aborts before touching the parameters.
    """
    if len(batch) == 0:
        raise ValueError("empty batch")
    model.train()
    optimizer.zero_grad()
    total = None
    for model_input, target in batch:
        if model_input.variant != model.config.variant:
            raise ValueError("batch variant does not match the model variant")
        est = model(*model_input_tensors(model_input))
        t = torch.as_tensor(np.asarray(target), dtype=est.dtype).ravel()
        item = time_mse_loss(est, t, config)
        total = item if total is None else total + item
    total = total / len(batch)
    value = float(total.detach())
    if not math.isfinite(value):
        raise FloatingPointError(
            f"non-finite training loss ({value}); aborting before the update"
        )
    total.backward()
    optimizer.step()
    return value


def lr_schedule(val_losses, initial_lr: float) -> float:
    """Learning rate after a history of per-epoch validation losses.

    The rate is halved whenever two consecutive epochs fail to improve on
    the best validation loss seen so far; an improvement resets the count.
    """
    lr = initial_lr
    best = math.inf
    bad = 0
    for v in val_losses:
        if v < best:
            best = v
            bad = 0
        else:
            bad += 1
            if bad >= 2:
                lr *= 0.5
                bad = 0
    return lr


class LrSchedule:
    """Stateful wrapper around :func:`lr_schedule` for epoch loops."""

    def __init__(self, initial_lr: float):
        self.initial_lr = initial_lr
        self.history: list[float] = []

    def update(self, val_loss: float) -> float:
        self.history.append(float(val_loss))
        return self.current

    @property
    def current(self) -> float:
        return lr_schedule(self.history, self.initial_lr)
