"""Detection metrics, dataset evaluation and the outlier-ratio robustness sweep."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GodlError
from .inference import detect_many
from .model import FallModel
from .pipeline import TrainConfig, segment_sequences, train_model
from .skeleton_io import SkeletonSequence, normalize
from .synthetic import KINDS, LabeledSequence, SynthConfig, generate_synthetic, inject_outliers

logger = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "recall", "precision")


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class Metrics:
    """Confusion counts with the derived rates; undefined rates are ``None``."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @classmethod
    def from_predictions(cls, truth: Iterable[bool], predicted: Iterable[bool]) -> "Metrics":
        tp = fp = tn = fn = 0
        for t, p in zip(truth, predicted, strict=True):
            if t and p:
                tp += 1
            elif p:
                fp += 1
            elif t:
                fn += 1
            else:
                tn += 1
        return cls(tp, fp, tn, fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> Optional[float]:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def recall(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def precision(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fp)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "accuracy": self.accuracy,
            "recall": self.recall,
            "precision": self.precision,
        }


def _as_pair(item) -> Tuple[SkeletonSequence, bool]:
    if isinstance(item, LabeledSequence):
        return item.sequence, item.is_fall
    seq, label = item
    return seq, bool(label)


def evaluate(model: FallModel, dataset: Sequence, normalized: bool = False, m_consecutive: int = 2) -> Metrics:
    """Detect on every sequence; a sequence counts as positive if any event fires.

    ``dataset`` holds :class:`LabeledSequence` items or ``(sequence, is_fall)``
    pairs of raw sequences (already normalized ones with ``normalized=True``).
    """
    pairs = [_as_pair(x) for x in dataset]
    if not pairs:
        raise GodlError("empty dataset")
    streams = [s if normalized else normalize(s)[0] for s, _ in pairs]
    results = detect_many(streams, model, m_consecutive)
    return Metrics.from_predictions([t for _, t in pairs], [r.is_fall for r in results])


# --- robustness sweep --------------------------------------------------------

TRAINERS = ("godl", "odl")
_SEED_STRIDE = 100_000


@dataclass
class SweepConfig:
    """One sweep cell trains on ``n_train`` falls and tests on ``n_test_per_kind`` of every kind."""

    synth: SynthConfig = field(default_factory=SynthConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    n_train: int = 20
    n_test_per_kind: int = 10
    magnitude: float = 0.5

    def __post_init__(self):
        if self.n_train < 1 or self.n_test_per_kind < 1:
            raise ValueError("n_train and n_test_per_kind must be positive")
        if not self.magnitude >= 0:
            raise ValueError("magnitude must be nonnegative")


def make_training_set(seed: int, ratio: float, cfg: SweepConfig):
    """Normalized falls for one seed, their clean segmentations, and the corrupted copies.

    Segmentation runs on the clean frames so that both trainers see the same
    unit boundaries; only dictionary learning sees the corrupted frames.
    """
    base = seed * _SEED_STRIDE
    clean = [normalize(generate_synthetic(cfg.synth, "fall", seed=base + i).sequence)[0] for i in range(cfg.n_train)]
    segs = segment_sequences(clean, cfg.train, normalized=True)
    noisy, outliers = [], []
    for i, s in enumerate(clean):
        c, idx = inject_outliers(s, ratio, cfg.magnitude, seed=base + 20_000 + i)
        noisy.append(c)
        outliers.append(idx)
    return noisy, segs, outliers


def make_test_set(seed: int, cfg: SweepConfig) -> List[LabeledSequence]:
    base = seed * _SEED_STRIDE + 50_000
    out = []
    for k, kind in enumerate(KINDS):
        for i in range(cfg.n_test_per_kind):
            out.append(generate_synthetic(cfg.synth, kind, seed=base + 1000 * k + i))
    return out


def sweep_cell(ratio: float, trainer: str, seed: int, cfg: SweepConfig) -> dict:
    """Train on corrupted falls, evaluate on a clean mixed set; one report row."""
    try:
        noisy, segs, _ = make_training_set(seed, ratio, cfg)
        model = train_model(noisy, cfg.train, trainer=trainer, normalized=True, segmentations=segs)
        m = evaluate(model, make_test_set(seed, cfg))
    except GodlError as exc:
        raise GodlError(f"cell ratio={ratio} trainer={trainer} seed={seed}: {exc}") from exc
    row = {"ratio": ratio, "trainer": trainer, "seed": seed}
    row.update({k: getattr(m, k) for k in METRIC_NAMES})
    return row


def _cell_job(args):
    return sweep_cell(*args)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


@dataclass
class SweepReport:
    rows: List[dict]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["ratio", "trainer", "seed", *METRIC_NAMES]
        w.writerow(cols)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in cols])
        return buf.getvalue()

    def aggregate(self) -> List[dict]:
        """Per (ratio, trainer) mean and population std of each metric over seeds."""
        groups: Dict[Tuple[float, str], List[dict]] = {}
        for r in self.rows:
            groups.setdefault((r["ratio"], r["trainer"]), []).append(r)
        out = []
        for (ratio, trainer), rows in groups.items():
            entry = {"ratio": ratio, "trainer": trainer, "n_seeds": len(rows)}
            for name in METRIC_NAMES:
                vals = [r[name] for r in rows if r[name] is not None]
                entry[f"{name}_mean"] = float(np.mean(vals)) if vals else None
                entry[f"{name}_std"] = float(np.std(vals)) if vals else None
            out.append(entry)
        return out

    def to_json(self) -> str:
        return json.dumps({"cells": self.aggregate()}, indent=2) + "\n"

    def mean(self, ratio: float, trainer: str, metric: str = "accuracy") -> Optional[float]:
        for e in self.aggregate():
            if e["ratio"] == ratio and e["trainer"] == trainer:
                return e[f"{metric}_mean"]
        raise KeyError((ratio, trainer))


def noise_sweep(
    ratios: Sequence[float],
    trainers: Sequence[str] = TRAINERS,
    seeds: Sequence[int] = tuple(range(10)),
    cfg: Optional[SweepConfig] = None,
    jobs: int = 1,
) -> SweepReport:
    """Run every (ratio, trainer, seed) cell; rows come back in that nested order
    whatever the completion order of parallel jobs."""
    cfg = cfg or SweepConfig()
    for r in ratios:
        if not 0.0 <= r <= 0.5:
            raise ValueError(f"ratio {r} outside [0, 0.5]")
    for t in trainers:
        if t not in TRAINERS:
            raise ValueError(f"unknown trainer {t!r}")
    cells = [(float(r), t, int(s), cfg) for r in ratios for t in trainers for s in seeds]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_cell_job, cells))
    else:
        rows = [_cell_job(c) for c in cells]
    return SweepReport(rows)
