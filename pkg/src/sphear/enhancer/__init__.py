"""Dual-encoder gated convolutional recurrent speech enhancer."""

from .model import (
    ChannelLSTM,
    Enhancer,
    EnhancerConfig,
    GluBlock,
    InplaceConv,
    InplaceConvTranspose,
    TransposeGluBlock,
    enhance,
)
from .accounting import REFERENCE_FIGURES, count_params_flops
from .train import LrSchedule, istft_torch, loss, lr_schedule, make_optimizer, time_mse_loss, train_step

__all__ = [
    "ChannelLSTM",
    "Enhancer",
    "EnhancerConfig",
    "GluBlock",
    "InplaceConv",
    "InplaceConvTranspose",
    "TransposeGluBlock",
    "enhance",
    "REFERENCE_FIGURES",
    "count_params_flops",
    "LrSchedule",
    "istft_torch",
    "loss",
    "lr_schedule",
    "make_optimizer",
    "time_mse_loss",
    "train_step",
]
