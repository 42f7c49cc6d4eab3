"""Experiment configuration: room, array, dataset ranges, and the eval grid.

Configurations serialize to a flat JSON document; the random seed together
with the configuration fully determines every generated scenario, mixture,
and feature file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from ..array import ArrayGeometry, uniform_circular_array
from .ioutil import atomic_write_bytes

TARGET_MODES = ("reverberant", "direct")
NOISE_MODES = ("point", "diffuse")


@dataclass
class ExperimentConfig:
    room_dims: tuple[float, float, float] = (6.0, 5.0, 4.0)
    wall_margin: float = 0.1
    source_distance: float = 1.0
    mic_count: int = 9
    array_radius: float = 0.035
    sample_rate: int = 16000
    sound_speed: float = 343.0
    sht_order: int = 4
    train_snr_range: tuple[float, float] = (-6.0, 6.0)
    train_rt60_range: tuple[float, float] = (0.2, 1.0)
    eval_snrs: tuple[float, ...] = (-5.0, 0.0, 5.0)
    eval_rt60s: tuple[float, ...] = (0.2, 0.3, 0.4, 0.5, 0.6)
    pairs_per_case: int = 10
    seed: int = 0
    target_mode: str = "reverberant"
    noise_mode: str = "point"

    def __post_init__(self):
        self.room_dims = tuple(float(v) for v in self.room_dims)
        self.train_snr_range = tuple(float(v) for v in self.train_snr_range)
        self.train_rt60_range = tuple(float(v) for v in self.train_rt60_range)
        self.eval_snrs = tuple(float(v) for v in self.eval_snrs)
        self.eval_rt60s = tuple(float(v) for v in self.eval_rt60s)
        if len(self.room_dims) != 3 or any(v <= 0 for v in self.room_dims):
            raise ValueError("room_dims must be three positive lengths")
        if len(self.eval_snrs) != 3 or len(self.eval_rt60s) != 5:
            raise ValueError("evaluation grid must be exactly 3 SNRs x 5 RT60s")
        if self.target_mode not in TARGET_MODES:
            raise ValueError(f"target_mode must be one of {TARGET_MODES}")
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}")
        if self.pairs_per_case < 1:
            raise ValueError("pairs_per_case must be >= 1")
        if self.source_distance <= 0:
            raise ValueError("source_distance must be > 0")

    def array(self) -> ArrayGeometry:
        return uniform_circular_array(self.mic_count, self.array_radius)

    def eval_cells(self) -> list[tuple[float, float]]:
        """All (snr_db, rt60_s) evaluation cells, row-major by SNR."""
        return [(snr, rt60) for snr in self.eval_snrs for rt60 in self.eval_rt60s]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)

    def save(self, path: Path | str):
        text = json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"
        atomic_write_bytes(path, text.encode("utf-8"))

    @classmethod
    def load(cls, path: Path | str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))
