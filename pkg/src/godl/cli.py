"""Command-line front end: ``train``, ``detect``, ``eval``, ``sweep`` and ``synth``.

Exit status is 0 on success, 1 on a runtime failure and 2 on a configuration
error. Labelled data directories follow the ``<kind>_NNN.csv`` naming used by
``synth``; files whose name starts with ``fall`` are positives.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, GodlError
from .evalharness import TRAINERS, evaluate, noise_sweep
from .inference import detect
from .model import dumps, load_model, save_model
from .pipeline import train_model
from .skeleton_io import normalize, read_sequence, write_sequence
from .synthetic import KINDS, generate_synthetic

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
HIST_BINS = np.linspace(0.0, 1.0, 11)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_model_flags(p):
    p.add_argument("--alpha", type=float, help="gate acceptance parameter")
    p.add_argument("--lambda", dest="lam", type=float, help="sparse coding regularizer")
    p.add_argument("--c2", type=float, help="largest accepted inlier error")
    p.add_argument("--w-st", dest="w_st", type=float, help="velocity weight in the feature vector")
    p.add_argument("--units", type=int, help="number of action units")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="random seed")
    parser = argparse.ArgumentParser(prog="godl", description="Robust dictionary-learning fall detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="learn a fall model from a directory of sequences")
    p.add_argument("data", help="directory of .csv/.json training sequences")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--trainer", choices=TRAINERS, default="godl")
    _add_model_flags(p)

    p = sub.add_parser("detect", parents=[common], help="run the detector over one sequence")
    p.add_argument("model")
    p.add_argument("sequence")
    p.add_argument("--out", help="write the result here instead of stdout")

    p = sub.add_parser("eval", parents=[common], help="score a model on a labelled directory")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out", help="write metrics JSON here instead of stdout")

    p = sub.add_parser("sweep", parents=[common], help="outlier-ratio robustness sweep on synthetic data")
    p.add_argument("--ratios", type=_floats, default=[0.0, 0.02, 0.04, 0.06, 0.08, 0.1], help="comma-separated outlier ratios")
    p.add_argument("--seeds", type=int, default=10, help="number of seeds, counted from --seed")
    p.add_argument("--trainers", type=_names, default=list(TRAINERS), help="comma-separated subset of godl,odl")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.csv and PREFIX.json")
    _add_model_flags(p)

    p = sub.add_parser("synth", parents=[common], help="write labelled synthetic sequences")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg.override(None, "seed", args.seed)
    if hasattr(args, "alpha"):
        cfg.override(None, "alpha", args.alpha)
        cfg.override(None, "w_st", args.w_st)
        cfg.override(None, "n_units", args.units)
        cfg.override("odl", "lambda", args.lam)
        cfg.override("gnc", "c2", args.c2)
    cfg.build()
    return cfg


def _sequence_files(data: Path) -> List[Path]:
    if not data.is_dir():
        raise GodlError(f"{data} is not a directory")
    return sorted(p for p in data.iterdir() if p.suffix.lower() in (".csv", ".json"))


def _write(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def weight_histogram(weights, width: int = 40) -> List[str]:
    counts, _ = np.histogram(np.asarray(weights), bins=HIST_BINS)
    top = max(int(counts.max()), 1)
    lines = []
    for lo, hi, c in zip(HIST_BINS[:-1], HIST_BINS[1:], counts):
        lines.append(f"  [{lo:.1f}, {hi:.1f}{']' if hi == 1.0 else ')'} {int(c):5d} {'#' * round(width * c / top)}")
    return lines


def cmd_train(args) -> int:
    cfg = _run_config(args)
    train_cfg, _, _ = cfg.build()
    files = _sequence_files(Path(args.data))
    if not files:
        raise GodlError("no sequences")
    seqs = [read_sequence(f) for f in files]
    provenance = {"trainer": args.trainer, "config": cfg.to_dict(), "training_files": [f.name for f in files]}
    model = train_model(seqs, train_cfg, trainer=args.trainer, provenance=provenance)
    save_model(model, args.out)
    for u in model.units:
        w = np.asarray(u.weights)
        print(f"unit {u.unit_label}: {w.size} frames, e_mean={u.e_mean:.6g}, e_std={u.e_std:.6g}")
        print("\n".join(weight_histogram(w)))
    return EXIT_OK


def cmd_detect(args) -> int:
    model = load_model(args.model)
    stream, _ = normalize(read_sequence(args.sequence))
    _write(detect(stream, model).to_json(), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    files = _sequence_files(Path(args.data))
    if not files:
        raise GodlError("no sequences")
    dataset = [(read_sequence(f), f.name.lower().startswith("fall")) for f in files]
    _write(dumps(evaluate(model, dataset).to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    _, _, sweep_cfg = cfg.build()
    bad = [t for t in args.trainers if t not in TRAINERS]
    if bad:
        raise ConfigError(f"unknown trainer(s) {', '.join(bad)}")
    if args.seeds < 1 or args.jobs < 1:
        raise ConfigError("--seeds and --jobs must be positive")
    if any(not 0.0 <= r <= 0.5 for r in args.ratios):
        raise ConfigError("ratios must lie in [0, 0.5]")
    seeds = range(cfg.seed, cfg.seed + args.seeds)
    report = noise_sweep(args.ratios, args.trainers, seeds, sweep_cfg, jobs=args.jobs)
    Path(args.out + ".csv").write_text(report.to_csv(), encoding="utf-8")
    Path(args.out + ".json").write_text(report.to_json(), encoding="utf-8")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _run_config(args)
    _, synth, _ = cfg.build()
    if args.n < 1:
        raise ConfigError("--n must be positive")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.n):
        seq = generate_synthetic(synth, args.kind, seed=cfg.seed + i).sequence
        write_sequence(seq, out / f"{args.kind}_{i:03d}.{args.format}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "detect": cmd_detect, "eval": cmd_eval, "sweep": cmd_sweep, "synth": cmd_synth}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"godl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GodlError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"godl: error: {msg}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
