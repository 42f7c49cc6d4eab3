"""Command-line interface.

Commands: ``rir``, ``mix``, ``features``, ``train``, ``eval``, ``info``.
All commands exit nonzero on error and write outputs atomically.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..enhancer.accounting import REFERENCE_FIGURES, count_params_flops
from ..enhancer.model import EnhancerConfig
from .config import ExperimentConfig
from .dataset import generate_features, generate_mixtures, generate_rirs
from .runner import FeatureStore, evaluate_model, train_model


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config.seed = args.seed
    return config


def _net_config(args, variant: str, stft_channels: int, sht_channels: int, bins: int) -> EnhancerConfig:
    kwargs = dict(stft_channels=stft_channels, sht_channels=sht_channels, bins=bins)
    if args.glu_channels is not None:
        kwargs["glu_channels"] = args.glu_channels
    if args.hidden is not None:
        kwargs["recurrent_hidden"] = args.hidden
    if args.blocks is not None:
        kwargs["encoder_blocks"] = args.blocks
        kwargs["decoder_blocks"] = args.blocks
    if args.decoder_channels is not None:
        kwargs["decoder_in_channels"] = args.decoder_channels
    elif args.glu_channels is not None:
        width = 2 * args.glu_channels if variant == "parallel" else args.glu_channels
        kwargs["decoder_in_channels"] = 2 * width
    if args.direction is not None:
        kwargs["direction"] = args.direction
    if args.no_skips:
        kwargs["skip_connections"] = False
    maker = EnhancerConfig.parallel if variant == "parallel" else EnhancerConfig.serial
    return maker(**kwargs)


def _add_net_args(p: argparse.ArgumentParser):
    p.add_argument("--variant", choices=("serial", "parallel"), default="parallel")
    p.add_argument("--glu-channels", type=int, default=None,
                   help="per-encoder gated-block width (default 32 parallel / 64 serial)")
    p.add_argument("--hidden", type=int, default=None, help="recurrent hidden width")
    p.add_argument("--blocks", type=int, default=None, help="encoder and decoder depth")
    p.add_argument("--decoder-channels", type=int, default=None,
                   help="decoder block input width")
    p.add_argument("--direction", choices=("unidirectional", "bidirectional"), default=None)
    p.add_argument("--no-skips", action="store_true", help="disable skip connections")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphear",
        description="spherical-array dataset simulation, feature extraction, "
                    "and speech-enhancer training/evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None, help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("rir", help="simulate scenario impulse responses")
    common(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--count", type=int, default=None, help="scenario count (train split)")
    p.add_argument("--split", choices=("train", "eval"), default="train")

    p = sub.add_parser("mix", help="emit (mixture, target) pairs from RIRs and corpora")
    common(p)
    p.add_argument("--rirs", type=Path, required=True)
    p.add_argument("--speech", type=Path, required=True)
    p.add_argument("--noise", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("features", help="compute model input tensors for a dataset")
    common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="train an enhancer variant on features")
    common(p)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="checkpoint path")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--resume", type=Path, default=None)
    _add_net_args(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint on an eval dataset")
    common(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="metric records JSONL")

    p = sub.add_parser("info", help="print parameter and FLOP counts")
    common(p)
    _add_net_args(p)

    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _load_config(args)

    if args.command == "rir":
        records = generate_rirs(config, args.out, count=args.count, split=args.split)
        print(f"wrote {len(records)} scenarios to {args.out}")
    elif args.command == "mix":
        records = generate_mixtures(config, args.rirs, args.speech, args.noise, args.out)
        print(f"wrote {len(records)} pairs to {args.out}")
    elif args.command == "features":
        records = generate_features(config, args.data, args.out)
        print(f"wrote tensors for {len(records)} utterances to {args.out}")
    elif args.command == "train":
        store = FeatureStore(args.features, args.variant)
        stft_ch, sht_ch = store.channel_widths()
        net = _net_config(args, args.variant, stft_ch, sht_ch, store.bins())
        train_model(
            config, args.features, args.out, net,
            epochs=args.epochs, batch_size=args.batch_size,
            lr=args.lr, resume=args.resume,
        )
        print(f"checkpoint written to {args.out}")
    elif args.command == "eval":
        evaluate_model(config, args.model, args.data, args.out)
        if args.out is not None:
            print(f"metric records written to {args.out}")
    elif args.command == "info":
        net = _net_config(args, args.variant, 2 * config.mic_count,
                          2 * (config.sht_order + 1) ** 2, 257)
        params, flops = count_params_flops(net)
        print(f"variant: {net.variant}")
        print(f"parameters: {params:,}")
        print(f"flops per second of {config.sample_rate/1000:.0f} kHz audio: {flops/1e9:.2f} G")
        ref = REFERENCE_FIGURES.get(net.variant)
        if ref is not None:
            delta = 100.0 * (params / ref["params"] - 1.0)
            print(f"reference parameters: {ref['params']/1e6:.2f} M ({delta:+.1f}% vs ours)")
            print(f"reference flops: {ref['flops']/1e9:.2f} G")
    return 0


def main() -> int:
    try:
        return run()
    except (ValueError, OSError, FloatingPointError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
