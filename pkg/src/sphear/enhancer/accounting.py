"""Analytic parameter and FLOP counts for the enhancer configurations.

Counts are derived from the configuration alone (no model instantiation)
and are checked in tests against the instantiated network.

FLOP convention: one multiply-accumulate is two FLOPs; bias additions and
the cheap elementwise work of gates, normalization, and activations are
included.  Totals are reported per second of 16 kHz audio, i.e. per
``sample_rate / hop = 62.5`` frames with the default 16 ms hop.
"""

from __future__ import annotations

from .model import EnhancerConfig

# Reference figures reported for the full-size parallel configuration,
# printed alongside our counts by the `info` command.
REFERENCE_FIGURES = {"parallel": {"params": 1.82e6, "flops": 19.52e9}}


def _conv_params(cin: int, cout: int, kf: int) -> int:
    return cout * cin * kf + cout


def _conv_flops_per_frame(cin: int, cout: int, kf: int, bins: int) -> int:
    return (2 * cin * kf + 1) * cout * bins


def _glu_params(cin: int, cout: int, kf: int) -> int:
    return 2 * _conv_params(cin, cout, kf) + 2 * cout  # two convs + BN affine


def _glu_flops_per_frame(cin: int, cout: int, kf: int, bins: int) -> int:
    convs = 2 * _conv_flops_per_frame(cin, cout, kf, bins)
    elementwise = 5 * cout * bins  # sigmoid, product, BN scale/shift, ELU
    return convs + elementwise


def count_params_flops(
    config: EnhancerConfig, frames_per_second: float = 62.5
) -> tuple[int, float]:
    """Parameter count and FLOPs per second of audio for a configuration."""
    kf = config.kernel_freq
    bins = config.bins
    stream = config.decoder_stream_channels
    dirs = 2 if config.direction == "bidirectional" else 1

    params = 0
    per_frame = 0

    if config.variant == "parallel":
        encoder_inputs = [config.stft_channels, config.sht_channels]
    else:
        encoder_inputs = [config.serial_channels]
    for cin0 in encoder_inputs:
        chans = [cin0] + [config.glu_channels] * config.encoder_blocks
        for cin, cout in zip(chans[:-1], chans[1:]):
            params += _glu_params(cin, cout, kf)
            per_frame += _glu_flops_per_frame(cin, cout, kf, bins)

    h = config.recurrent_hidden
    cin = config.encoder_out_channels
    params += dirs * (4 * h * cin + 4 * h * h + 8 * h)
    gate_macs = 4 * (cin * h + h * h)
    per_frame += dirs * bins * (2 * gate_macs + 12 * h)  # matmuls + pointwise
    params += dirs * h * config.decoder_in_channels + config.decoder_in_channels
    per_frame += (2 * dirs * h + 1) * config.decoder_in_channels * bins

    for j in range(config.decoder_blocks):
        cin = config.decoder_in_channels
        if j > 0 and not config.skip_connections:
            cin = stream
        params += _glu_params(cin, stream, kf)
        per_frame += _glu_flops_per_frame(cin, stream, kf, bins)

    params += _conv_params(stream, 2, 1)
    per_frame += _conv_flops_per_frame(stream, 2, 1, bins)

    return params, per_frame * frames_per_second
