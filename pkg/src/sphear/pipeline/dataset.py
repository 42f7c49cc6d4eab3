"""Dataset generation: scenario RIRs, SNR-controlled mixtures, feature tensors.

Everything is deterministic in (config, seed): scenario ``i`` draws from
``default_rng(seed ^ i)``, so runs are reproducible byte-for-byte and
utterances can be generated independently.  Evaluation scenarios reuse the
per-pair sub-seed across grid cells, so cell (snr, rt60) differs from its
neighbours only in the condition under test, not in geometry or material.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from ..acoustics import MultichannelSignal, RoomConfig, apply_rir, mix_at_snr, simulate_rir
from ..features import extract_sht_features, pack_model_input, sht_valid_max_frequency
from ..spectral import StftConfig, stft
from .config import ExperimentConfig
from .ioutil import read_jsonl, write_jsonl
from .tensorfile import write_tensor
from .wavio import read_wav, write_wav

RIR_MANIFEST = "rir_manifest.jsonl"
MIX_MANIFEST = "mix_manifest.jsonl"
FEATURE_MANIFEST = "feature_manifest.jsonl"


def _sample_point(rng, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return lo + rng.random(3) * (hi - lo)


def _sample_scenario_geometry(config: ExperimentConfig, rng) -> dict:
    dims = np.array(config.room_dims)
    margin = config.wall_margin
    lo_c = np.full(3, margin + config.array_radius)
    hi_c = dims - margin - config.array_radius
    if np.any(lo_c >= hi_c):
        raise ValueError("room too small for the array and wall margin")
    for _ in range(1000):
        center = _sample_point(rng, lo_c, hi_c)
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        source = center + config.source_distance * u
        if np.all(source > margin) and np.all(source < dims - margin):
            break
    else:
        raise ValueError("could not place a source inside the room margins")
    for _ in range(1000):
        noise = _sample_point(rng, np.full(3, margin), dims - margin)
        if np.linalg.norm(noise - center) > 0.3:
            break
    else:
        raise ValueError("could not place a noise source away from the array")
    return {
        "array_center": [float(v) for v in center],
        "source_pos": [float(v) for v in source],
        "noise_pos": [float(v) for v in noise],
    }


def generate_rirs(
    config: ExperimentConfig,
    out_dir: Path | str,
    count: int | None = None,
    split: str = "train",
) -> list[dict]:
    """Simulate speech- and noise-source RIRs for a set of scenarios.

    ``split="train"`` draws ``count`` scenarios with RT60 uniform in the
    training range; ``split="eval"`` generates ``pairs_per_case`` scenarios
    for each of the 15 grid cells, sharing the pair sub-seed across cells.
    Writes one multichannel WAV per source per scenario plus a manifest,
    and returns the manifest records.
    """
    if split not in ("train", "eval"):
        raise ValueError(f"split must be 'train' or 'eval', got {split!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    array = config.array()

    plans: list[dict] = []
    if split == "train":
        if count is None or count < 1:
            raise ValueError("training split needs a positive scenario count")
        for i in range(count):
            rng = np.random.default_rng(config.seed ^ i)
            geo = _sample_scenario_geometry(config, rng)
            rt60 = float(rng.uniform(*config.train_rt60_range))
            snr = float(rng.uniform(*config.train_snr_range))
            plans.append({"index": i, "sub_seed": config.seed ^ i, "rt60": rt60,
                          "snr_db": snr, "cell": None, **geo})
    else:
        i = 0
        for snr, rt60 in config.eval_cells():
            for pair in range(config.pairs_per_case):
                rng = np.random.default_rng(config.seed ^ pair)
                geo = _sample_scenario_geometry(config, rng)
                plans.append({
                    "index": i, "sub_seed": config.seed ^ pair, "rt60": float(rt60),
                    "snr_db": float(snr), "cell": [float(snr), float(rt60)],
                    "pair": pair, **geo,
                })
                i += 1

    records = []
    for plan in plans:
        i = plan["index"]
        speech_name = f"scenario_{i:05d}_speech_rir.wav"
        noise_name = f"scenario_{i:05d}_noise_rir.wav"
        for src_key, name in (("source_pos", speech_name), ("noise_pos", noise_name)):
            room = RoomConfig(
                dimensions=config.room_dims,
                rt60=plan["rt60"],
                source_pos=tuple(plan[src_key]),
                array_center=tuple(plan["array_center"]),
                array=array,
                sample_rate=config.sample_rate,
                sound_speed=config.sound_speed,
            )
            rirs = simulate_rir(room)
            write_wav(out_dir / name, rirs.data.astype(np.float32), config.sample_rate)
        record = dict(plan)
        record.update({"split": split, "speech_rir": speech_name, "noise_rir": noise_name})
        records.append(record)

    write_jsonl(out_dir / RIR_MANIFEST, records)
    return records


def _list_wavs(directory: Path) -> list[Path]:
    files = sorted(directory.glob("*.wav"))
    if not files:
        raise ValueError(f"no WAV files found in {directory}")
    return files


def _load_mono(path: Path, sample_rate: int) -> np.ndarray:
    data, _ = read_wav(path, expected_sample_rate=sample_rate)
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got shape {data.shape}")
    return data


def _spatialize_noise(
    dry: np.ndarray, noise_rirs: MultichannelSignal, mode: str
) -> MultichannelSignal:
    if mode == "point":
        return apply_rir(dry, noise_rirs)
    # diffuse: per-channel decorrelated copies via large circular shifts
    channels = noise_rirs.num_channels
    shift = max(1, dry.size // channels)
    data = np.stack(
        [np.roll(dry, i * shift) for i in range(channels)], axis=1
    )
    return MultichannelSignal(data=data, sample_rate=noise_rirs.sample_rate)


def _direct_path_target(
    dry: np.ndarray, record: dict, config: ExperimentConfig, length: int
) -> np.ndarray:
    mic0 = np.asarray(record["array_center"]) + config.array().positions()[0]
    d = float(np.linalg.norm(np.asarray(record["source_pos"]) - mic0))
    delay = int(round(d / config.sound_speed * config.sample_rate))
    out = np.zeros(length)
    amp = 1.0 / (4.0 * np.pi * d)
    n = min(length - delay, dry.size)
    if n > 0:
        out[delay : delay + n] = amp * dry[:n]
    return out


def generate_mixtures(
    config: ExperimentConfig,
    rir_dir: Path | str,
    speech_dir: Path | str,
    noise_dir: Path | str,
    out_dir: Path | str,
) -> list[dict]:
    """Emit (mixture, target) WAV pairs for every scenario in a RIR set.

    The mixture is reverberant speech plus spatialized noise scaled for the
    scenario's reference-channel SNR; the target is the reference-channel
    reverberant speech (or the direct-path signal when configured).
    """
    rir_dir, out_dir = Path(rir_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenarios = read_jsonl(rir_dir / RIR_MANIFEST)
    if not scenarios:
        raise ValueError(f"empty RIR manifest in {rir_dir}")
    speech_files = _list_wavs(Path(speech_dir))
    noise_files = _list_wavs(Path(noise_dir))

    records = []
    for scenario in scenarios:
        i = scenario["index"]
        rng = np.random.default_rng(scenario["sub_seed"])
        speech_path = speech_files[int(rng.integers(len(speech_files)))]
        noise_path = noise_files[int(rng.integers(len(noise_files)))]
        dry_speech = _load_mono(speech_path, config.sample_rate)
        dry_noise = _load_mono(noise_path, config.sample_rate)

        speech_rirs_data, _ = read_wav(rir_dir / scenario["speech_rir"], config.sample_rate)
        noise_rirs_data, _ = read_wav(rir_dir / scenario["noise_rir"], config.sample_rate)
        speech_rirs = MultichannelSignal(speech_rirs_data, config.sample_rate)
        noise_rirs = MultichannelSignal(noise_rirs_data, config.sample_rate)

        reverberant = apply_rir(dry_speech, speech_rirs)
        spatial_noise = _spatialize_noise(dry_noise, noise_rirs, config.noise_mode)
        mixture, noise_scale = mix_at_snr(reverberant, spatial_noise, scenario["snr_db"])

        if config.target_mode == "reverberant":
            target = reverberant.channel(0)
        else:
            target = _direct_path_target(dry_speech, scenario, config, mixture.num_samples)

        mix_name = f"utt_{i:05d}_mix.wav"
        target_name = f"utt_{i:05d}_target.wav"
        write_wav(out_dir / mix_name, mixture.data.astype(np.float32), config.sample_rate)
        write_wav(out_dir / target_name, target.astype(np.float32), config.sample_rate)
        records.append({
            "index": i,
            "cell": scenario.get("cell"),
            "snr_db": scenario["snr_db"],
            "rt60": scenario["rt60"],
            "noise_scale": noise_scale,
            "speech_file": speech_path.name,
            "noise_file": noise_path.name,
            "target_mode": config.target_mode,
            "mixture": mix_name,
            "target": target_name,
        })

    write_jsonl(out_dir / MIX_MANIFEST, records)
    return records


def generate_features(
    config: ExperimentConfig,
    data_dir: Path | str,
    out_dir: Path | str,
    stft_config: StftConfig | None = None,
) -> list[dict]:
    """Per utterance: STFT and coefficient tensors plus the target waveform.

    Output tensors are float32: (T, F, 2I) for the spectrogram, (T, F,
    2(N+1)^2) for the coefficients, and 1-D for the target.  Re-running is
    idempotent.
    """
    data_dir, out_dir = Path(data_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stft_config = stft_config or StftConfig(sample_rate=config.sample_rate)
    mixes = read_jsonl(data_dir / MIX_MANIFEST)
    if not mixes:
        raise ValueError(f"empty mixture manifest in {data_dir}")
    array = config.array()

    cutoff = sht_valid_max_frequency(array, config.sht_order, config.sound_speed)
    if config.sample_rate / 2 > cutoff:
        print(
            f"note: order-{config.sht_order} analysis is well-conditioned below "
            f"{cutoff:.0f} Hz; higher bins are transformed anyway"
        )

    records = []
    for mix in mixes:
        mixture, _ = read_wav(data_dir / mix["mixture"], config.sample_rate)
        target, _ = read_wav(data_dir / mix["target"], config.sample_rate)
        spec = stft(MultichannelSignal(mixture, config.sample_rate), stft_config)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            feats = extract_sht_features(
                spec, array, config.sht_order, config.sample_rate, config.sound_speed
            )
        packed = pack_model_input(spec, feats, "parallel")

        base = f"utt_{mix['index']:05d}"
        stft_name, sht_name, target_name = (
            f"{base}_stft.shtf", f"{base}_sht.shtf", f"{base}_target.shtf",
        )
        write_tensor(out_dir / stft_name, packed.stft_tensor.astype(np.float32))
        write_tensor(out_dir / sht_name, packed.sht_tensor.astype(np.float32))
        write_tensor(out_dir / target_name, target.astype(np.float32))
        records.append({
            "index": mix["index"],
            "cell": mix.get("cell"),
            "frames": spec.num_frames,
            "bins": spec.num_bins,
            "stft": stft_name,
            "sht": sht_name,
            "target": target_name,
        })

    write_jsonl(out_dir / FEATURE_MANIFEST, records)
    return records
