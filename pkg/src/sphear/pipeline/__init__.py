"""Dataset generation, training and evaluation drivers, file formats, CLI."""

from .config import ExperimentConfig
from .tensorfile import read_tensor, write_tensor
from .wavio import read_wav, write_wav

__all__ = ["ExperimentConfig", "read_tensor", "write_tensor", "read_wav", "write_wav"]
