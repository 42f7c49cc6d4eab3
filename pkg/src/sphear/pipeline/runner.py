"""Training and evaluation drivers built on the dataset and model layers."""

from __future__ import annotations

import warnings
import zlib
from pathlib import Path

import numpy as np
import torch

from ..acoustics import MultichannelSignal
from ..enhancer.model import Enhancer, EnhancerConfig, enhance
from ..enhancer.train import LrSchedule, make_optimizer, time_mse_loss, train_step
from ..enhancer.model import model_input_tensors
from ..features import ModelInput, extract_sht_features, pack_model_input
from ..metrics import si_sdr, stoi
from ..spectral import Spectrogram, StftConfig, istft, stft
from .checkpoint import load_checkpoint, restore_model, restore_optimizer, save_checkpoint, state_to_tensors
from .config import ExperimentConfig
from .dataset import FEATURE_MANIFEST, MIX_MANIFEST
from .ioutil import read_jsonl, write_jsonl
from .tensorfile import read_tensor
from .wavio import read_wav


class FeatureStore:
    """Lazy reader for the per-utterance tensors of a feature directory."""

    def __init__(self, features_dir: Path | str, variant: str):
        self.dir = Path(features_dir)
        self.variant = variant
        self.records = read_jsonl(self.dir / FEATURE_MANIFEST)
        if not self.records:
            raise ValueError(f"empty feature manifest in {self.dir}")

    def __len__(self) -> int:
        return len(self.records)

    def example(self, i: int) -> tuple[ModelInput, np.ndarray]:
        rec = self.records[i]
        model_input = ModelInput(
            variant=self.variant,
            stft_tensor=read_tensor(self.dir / rec["stft"]),
            sht_tensor=read_tensor(self.dir / rec["sht"]),
        )
        target = read_tensor(self.dir / rec["target"])
        return model_input, target

    def channel_widths(self) -> tuple[int, int]:
        model_input, _ = self.example(0)
        return model_input.stft_tensor.shape[2], model_input.sht_tensor.shape[2]

    def bins(self) -> int:
        return int(self.records[0]["bins"])


def validation_split(records: list[dict], modulo: int = 5) -> tuple[list[int], list[int]]:
    """Deterministic train/validation indices by utterance-name hash."""
    train, val = [], []
    for i, rec in enumerate(records):
        name = f"utt_{rec['index']:05d}"
        if zlib.crc32(name.encode()) % modulo == 0:
            val.append(i)
        else:
            train.append(i)
    if not val:
        val = [train.pop()]
    if not train:
        raise ValueError("not enough utterances to form a training split")
    return train, val


def _validation_loss(model: Enhancer, store: FeatureStore, indices, stft_config) -> float:
    model.eval()
    losses = []
    with torch.no_grad():
        for i in indices:
            model_input, target = store.example(i)
            est = model(*model_input_tensors(model_input))
            t = torch.as_tensor(target, dtype=est.dtype).ravel()
            losses.append(float(time_mse_loss(est, t, stft_config)))
    model.train()
    return float(np.mean(losses))


def train_model(
    config: ExperimentConfig,
    features_dir: Path | str,
    out_path: Path | str,
    net_config: EnhancerConfig,
    epochs: int,
    batch_size: int = 1,
    lr: float = 1e-3,
    resume: Path | str | None = None,
    log=print,
) -> list[dict]:
    """Train a variant on a feature directory and write a checkpoint.

    Per-epoch train/validation losses go to ``<out>.losses.jsonl``; the
    checkpoint captures model, optimizer, and schedule state so training
    can resume exactly.  Batch order is derived from (seed, epoch) only.
    """
    out_path = Path(out_path)
    store = FeatureStore(features_dir, net_config.variant)
    train_idx, val_idx = validation_split(store.records)
    stft_config = StftConfig(sample_rate=config.sample_rate)

    history: list[dict] = []
    start_epoch = 0
    if resume is None:
        torch.manual_seed(config.seed)
        model = Enhancer(net_config)
        optimizer = make_optimizer(model, lr=lr)
        schedule = LrSchedule(lr)
    else:
        ckpt_config, tensors, metadata = load_checkpoint(resume)
        if ckpt_config != net_config:
            net_config = ckpt_config
        model = restore_model(net_config, tensors)
        lr = metadata["initial_lr"]
        schedule = LrSchedule(lr)
        schedule.history = list(metadata["val_history"])
        optimizer = restore_optimizer(model, tensors, lr=schedule.current)
        start_epoch = int(metadata["epoch"])
        history = list(metadata["history"])

    for epoch in range(start_epoch, epochs):
        order = np.random.default_rng(config.seed ^ epoch).permutation(len(train_idx))
        batch_losses = []
        for lo in range(0, len(order), batch_size):
            batch = [store.example(train_idx[j]) for j in order[lo : lo + batch_size]]
            batch_losses.append(train_step(model, batch, optimizer, stft_config))
        train_loss = float(np.mean(batch_losses))
        val_loss = _validation_loss(model, store, val_idx, stft_config)
        schedule.update(val_loss)
        for group in optimizer.param_groups:
            group["lr"] = schedule.current
        entry = {"epoch": epoch, "train_loss": train_loss,
                 "val_loss": val_loss, "lr": schedule.current}
        history.append(entry)
        log(
            f"epoch {epoch}: train {train_loss:.6e}  val {val_loss:.6e}  "
            f"lr {schedule.current:.2e}"
        )
        metadata = {
            "epoch": epoch + 1,
            "initial_lr": lr,
            "val_history": schedule.history,
            "history": history,
            "experiment_seed": config.seed,
        }
        save_checkpoint(out_path, net_config, state_to_tensors(model, optimizer), metadata)
        write_jsonl(out_path.with_suffix(out_path.suffix + ".losses.jsonl"), history)
    return history


def _enhanced_waveform(
    model: Enhancer,
    mixture: np.ndarray,
    config: ExperimentConfig,
    stft_config: StftConfig,
) -> np.ndarray:
    spec = stft(MultichannelSignal(mixture, config.sample_rate), stft_config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        feats = extract_sht_features(
            spec, config.array(), config.sht_order, config.sample_rate, config.sound_speed
        )
    packed = pack_model_input(spec, feats, model.config.variant)
    est = enhance(model, packed)
    return istft(Spectrogram(est.data), stft_config).channel(0)


def evaluate_model(
    config: ExperimentConfig,
    model_path: Path | str,
    data_dir: Path | str,
    out_path: Path | str | None = None,
    log=print,
) -> list[dict]:
    """Mean STOI and SI-SDR per evaluation cell, unprocessed vs enhanced.

    The dataset must carry grid-cell annotations; a configured cell with no
    pairs is an error, never silently skipped.
    """
    data_dir = Path(data_dir)
    net_config, tensors, _ = load_checkpoint(model_path)
    model = restore_model(net_config, tensors)
    model.eval()
    stft_config = StftConfig(sample_rate=config.sample_rate)

    mixes = read_jsonl(data_dir / MIX_MANIFEST)
    if not mixes:
        raise ValueError(f"empty mixture manifest in {data_dir}")
    by_cell: dict[tuple[float, float], list[dict]] = {}
    for rec in mixes:
        if rec.get("cell") is None:
            raise ValueError(
                "dataset lacks evaluation-cell annotations; generate it with "
                "the eval split"
            )
        by_cell.setdefault((rec["cell"][0], rec["cell"][1]), []).append(rec)

    missing = [cell for cell in config.eval_cells() if cell not in by_cell]
    if missing:
        raise ValueError(f"evaluation cells with no pairs: {missing}")

    results = []
    for snr, rt60 in config.eval_cells():
        rows = by_cell[(snr, rt60)]
        scores = {"stoi_unprocessed": [], "stoi_enhanced": [],
                  "si_sdr_unprocessed": [], "si_sdr_enhanced": []}
        for rec in rows:
            mixture, _ = read_wav(data_dir / rec["mixture"], config.sample_rate)
            target, _ = read_wav(data_dir / rec["target"], config.sample_rate)
            enhanced = _enhanced_waveform(model, mixture, config, stft_config)
            n = min(target.size, enhanced.size, mixture.shape[0])
            ref, unproc, enh = target[:n], mixture[:n, 0], enhanced[:n]
            scores["stoi_unprocessed"].append(stoi(ref, unproc))
            scores["stoi_enhanced"].append(stoi(ref, enh))
            scores["si_sdr_unprocessed"].append(si_sdr(ref, unproc))
            scores["si_sdr_enhanced"].append(si_sdr(ref, enh))
        results.append({
            "snr_db": snr, "rt60": rt60, "pairs": len(rows),
            **{k: float(np.mean(v)) for k, v in scores.items()},
        })

    _print_grid(results, config, log)
    if out_path is not None:
        write_jsonl(out_path, results)
    return results


def _print_grid(results: list[dict], config: ExperimentConfig, log=print):
    cells = {(r["snr_db"], r["rt60"]): r for r in results}
    for metric, scale, unit in (("stoi", 100.0, "x100"), ("si_sdr", 1.0, "dB")):
        log(f"\n{metric.upper().replace('_', '-')} ({unit})")
        header = "snr      method      " + "".join(
            f"{rt60:>7.1f}s" for rt60 in config.eval_rt60s
        ) + "     avg"
        log(header)
        for snr in config.eval_snrs:
            for kind in ("unprocessed", "enhanced"):
                vals = [cells[(snr, rt60)][f"{metric}_{kind}"] * scale
                        for rt60 in config.eval_rt60s]
                row = f"{snr:>4.0f} dB  {kind:<11}" + "".join(f"{v:>8.2f}" for v in vals)
                log(row + f"{np.mean(vals):>8.2f}")
