"""Network architecture: inplace convolutions, gated blocks, per-bin recurrence.

Every block preserves the time and frequency dimensions; only channel
widths change.  Convolutions span 5 frequency bins and a single frame
(stride 1, symmetric zero padding), so no spectral information is moved
across time and no down/up-sampling occurs.

Tensor layout is ``(batch, channels, frames, bins)`` throughout.

Channel plan, parallel variant with the default widths:

    stft (18) -> encoder A (6 gated blocks, 32 wide) ->\
                                                        concat (64)
    sht  (50) -> encoder B (6 gated blocks, 32 wide) ->/
    concat -> per-bin LSTM (hidden 512) -> linear to 128
    decoder: 6 transposed gated blocks, each taking 128 channels and
    emitting 64; blocks after the first receive their other 64 channels
    as a skip concatenation from the mirrored encoder depth
    final 1x1 convolution: 64 -> 2 (real/imag of the enhanced spectrum)

The serial variant runs one 64-wide encoder on the 68-channel
concatenated input and shares the core and decoder shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
import torch
from torch import nn

from ..features import ModelInput
from ..spectral import Spectrogram

VARIANTS = ("serial", "parallel")
DIRECTIONS = ("unidirectional", "bidirectional")


@dataclass(frozen=True)
class EnhancerConfig:
    variant: str
    stft_channels: int = 18
    sht_channels: int = 50
    encoder_blocks: int = 6
    glu_channels: int = 32
    decoder_blocks: int = 6
    decoder_in_channels: int = 128
    kernel_freq: int = 5
    kernel_time: int = 1
    recurrent_hidden: int = 512
    bins: int = 257
    direction: str = "unidirectional"
    skip_connections: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.kernel_time != 1:
            raise ValueError("kernels span a single frame (kernel_time must be 1)")
        if self.kernel_freq % 2 != 1:
            raise ValueError("kernel_freq must be odd to preserve the bin count")
        if self.decoder_in_channels % 2 != 0:
            raise ValueError("decoder_in_channels must be even")
        if self.encoder_out_channels != self.decoder_stream_channels:
            raise ValueError(
                f"encoder output width {self.encoder_out_channels} must equal "
                f"half the decoder input width {self.decoder_in_channels} so "
                f"skip concatenations line up"
            )
        if self.skip_connections and self.encoder_blocks != self.decoder_blocks:
            raise ValueError("skip connections require equal encoder/decoder depth")
        for name in ("encoder_blocks", "decoder_blocks", "glu_channels",
                     "recurrent_hidden", "bins", "stft_channels", "sht_channels"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def encoder_out_channels(self) -> int:
        per_encoder = self.glu_channels
        return 2 * per_encoder if self.variant == "parallel" else per_encoder

    @property
    def decoder_stream_channels(self) -> int:
        return self.decoder_in_channels // 2

    @property
    def serial_channels(self) -> int:
        return self.stft_channels + self.sht_channels

    @classmethod
    def parallel(cls, **overrides) -> "EnhancerConfig":
        return cls(variant="parallel", **overrides)

    @classmethod
    def serial(cls, **overrides) -> "EnhancerConfig":
        overrides.setdefault("glu_channels", 64)
        return cls(variant="serial", **overrides)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EnhancerConfig":
        return cls(**d)


class InplaceConv(nn.Module):
    """Frequency-axis convolution that preserves (T, F)."""

    def __init__(self, cin: int, cout: int, kernel_freq: int = 5):
        super().__init__()
        self.conv = nn.Conv2d(cin, cout, (1, kernel_freq), padding=(0, kernel_freq // 2))

    def forward(self, x):
        return self.conv(x)


class InplaceConvTranspose(nn.Module):
    """Adjoint of :class:`InplaceConv`; same-size because stride is 1."""

    def __init__(self, cin: int, cout: int, kernel_freq: int = 5):
        super().__init__()
        self.conv = nn.ConvTranspose2d(cin, cout, (1, kernel_freq), padding=(0, kernel_freq // 2))

    def forward(self, x):
        return self.conv(x)


class _GatedBlock(nn.Module):
    """ELU(BN(conv(x) * sigmoid(conv(x)))) with a configurable conv type."""

    def __init__(self, conv_cls, cin: int, cout: int, kernel_freq: int):
        super().__init__()
        self.linear_path = conv_cls(cin, cout, kernel_freq)
        self.gate_path = conv_cls(cin, cout, kernel_freq)
        self.bn = nn.BatchNorm2d(cout, momentum=0.1)
        self.act = nn.ELU()

    def forward(self, x):
        y = self.linear_path(x) * torch.sigmoid(self.gate_path(x))
        return self.act(self.bn(y))


class GluBlock(_GatedBlock):
    def __init__(self, cin: int, cout: int, kernel_freq: int = 5):
        super().__init__(InplaceConv, cin, cout, kernel_freq)


class TransposeGluBlock(_GatedBlock):
    def __init__(self, cin: int, cout: int, kernel_freq: int = 5):
        super().__init__(InplaceConvTranspose, cin, cout, kernel_freq)


class ChannelLSTM(nn.Module):
    """Recurrence along time, run independently per frequency bin.

    Weights are shared across bins; the per-step input is the channel
    vector at one bin.  A linear layer maps the hidden state to the
    requested output width.
    """

    def __init__(self, cin: int, hidden: int, cout: int, bidirectional: bool = False):
        super().__init__()
        self.lstm = nn.LSTM(cin, hidden, batch_first=True, bidirectional=bidirectional)
        self.proj = nn.Linear(hidden * (2 if bidirectional else 1), cout)

    def forward(self, x):
        b, c, t, f = x.shape
        seq = x.permute(0, 3, 2, 1).reshape(b * f, t, c)
        out, _ = self.lstm(seq)
        out = self.proj(out)
        return out.reshape(b, f, t, -1).permute(0, 3, 2, 1)


class _Encoder(nn.Module):
    def __init__(self, cin: int, width: int, blocks: int, kernel_freq: int):
        super().__init__()
        chans = [cin] + [width] * blocks
        self.blocks = nn.ModuleList(
            GluBlock(chans[i], chans[i + 1], kernel_freq) for i in range(blocks)
        )

    def forward(self, x):
        outputs = []
        for block in self.blocks:
            x = block(x)
            outputs.append(x)
        return x, outputs


class Enhancer(nn.Module):
    """Full enhancement network; see the module docstring for the layout.

    ``forward`` takes the STFT tensor and, for the parallel variant, the
    coefficient tensor, each shaped (B, C, T, F), and returns (B, 2, T, F):
    real and imaginary parts of the enhanced reference-channel spectrum.
    """

    def __init__(self, config: EnhancerConfig):
        super().__init__()
        self.config = config
        kf = config.kernel_freq
        stream = config.decoder_stream_channels

        if config.variant == "parallel":
            self.encoder_stft = _Encoder(
                config.stft_channels, config.glu_channels, config.encoder_blocks, kf
            )
            self.encoder_sht = _Encoder(
                config.sht_channels, config.glu_channels, config.encoder_blocks, kf
            )
        else:
            self.encoder = _Encoder(
                config.serial_channels, config.glu_channels, config.encoder_blocks, kf
            )

        self.core = ChannelLSTM(
            config.encoder_out_channels,
            config.recurrent_hidden,
            config.decoder_in_channels,
            bidirectional=config.direction == "bidirectional",
        )
        blocks = []
        for j in range(config.decoder_blocks):
            cin = config.decoder_in_channels
            if j > 0 and not config.skip_connections:
                cin = stream
            blocks.append(TransposeGluBlock(cin, stream, kf))
        self.decoder = nn.ModuleList(blocks)
        self.out_conv = nn.Conv2d(stream, 2, 1)
        self.reset_parameters()

    def reset_parameters(self):
        """Kaiming-uniform convolutions, orthogonal recurrence, zero biases."""
        for module in self.modules():
            if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
                nn.init.kaiming_uniform_(module.weight, a=math.sqrt(5))
                if module.bias is not None:
                    nn.init.zeros_(module.bias)
            elif isinstance(module, nn.LSTM):
                for name, param in module.named_parameters():
                    if "weight" in name:
                        nn.init.orthogonal_(param)
                    else:
                        nn.init.zeros_(param)

    def forward(self, stft_tensor, sht_tensor=None):
        cfg = self.config
        if cfg.variant == "parallel":
            if sht_tensor is None:
                raise ValueError("parallel variant needs both input tensors")
            a, skips_a = self.encoder_stft(stft_tensor)
            b, skips_b = self.encoder_sht(sht_tensor)
            encoded = torch.cat([a, b], dim=1)
            skips = [torch.cat([sa, sb], dim=1) for sa, sb in zip(skips_a, skips_b)]
        else:
            if sht_tensor is not None:
                raise ValueError("serial variant takes a single concatenated tensor")
            encoded, skips = self.encoder(stft_tensor)

        x = self.core(encoded)
        depth = len(self.decoder)
        for j, block in enumerate(self.decoder):
            if j > 0 and self.config.skip_connections:
                x = torch.cat([x, skips[depth - 1 - j]], dim=1)
            x = block(x)
        return self.out_conv(x)


def model_input_tensors(model_input: ModelInput, dtype=torch.float32):
    """Torch tensors for one utterance, each shaped (1, C, T, F)."""

    def to_tensor(arr: np.ndarray):
        return torch.from_numpy(np.ascontiguousarray(arr)).to(dtype).permute(2, 0, 1).unsqueeze(0)

    if model_input.variant == "serial":
        return (to_tensor(model_input.serial_tensor),)
    return to_tensor(model_input.stft_tensor), to_tensor(model_input.sht_tensor)


def enhance(model: Enhancer, model_input: ModelInput) -> Spectrogram:
    """Run the network on one utterance and return the enhanced spectrum.

    The model is evaluated in inference mode (frozen normalization
    statistics); the result is a single-channel complex spectrogram.
    """
    if model_input.variant != model.config.variant:
        raise ValueError(
            f"input packed for {model_input.variant!r} fed to a "
            f"{model.config.variant!r} model"
        )
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            out = model(*model_input_tensors(model_input))
    finally:
        model.train(was_training)
    re_im = out[0].permute(1, 2, 0).numpy()  # (T, F, 2)
    data = (re_im[:, :, 0] + 1j * re_im[:, :, 1])[:, :, None]
    return Spectrogram(data=data.astype(np.complex128))
