"""End-to-end training: normalize, featurize, segment, pool units, learn."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dictionary import OdlConfig
from .errors import GodlError
from .gnc import GncConfig, default_labels, train_all
from .model import FallModel, TemporalParams
from .segmentation import Segmentation, kmeans, split, temporalize
from .skeleton_io import SkeletonSequence, build_features, normalize

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    odl: OdlConfig = field(default_factory=OdlConfig)
    gnc: GncConfig = field(default_factory=GncConfig)
    temporal: TemporalParams = field(default_factory=TemporalParams)
    alpha: float = 2.0
    w_st: float = 0.1
    n_units: int = 5
    kmeans_max_iter: int = 100
    seed: int = 0


def segment_features(features, n_units: int, seed: int, max_iter: int = 100) -> Segmentation:
    labels, _ = kmeans(features, n_units, seed=seed, max_iter=max_iter)
    return temporalize(labels, default_labels(n_units), n_clusters=n_units)


def segment_sequences(sequences: Sequence[SkeletonSequence], cfg: TrainConfig, normalized: bool = False) -> List[Segmentation]:
    """K-means/temporalize segmentation of every sequence; sequence ``k`` uses seed ``cfg.seed + k``."""
    segs = []
    for k, seq in enumerate(sequences):
        norm = seq if normalized else normalize(seq)[0]
        try:
            segs.append(segment_features(build_features(norm, cfg.w_st), cfg.n_units, cfg.seed + k, cfg.kmeans_max_iter))
        except GodlError as exc:
            raise type(exc)(f"sequence {k} ({seq.source_id or 'unnamed'}): {exc}") from exc
    return segs


def pooled_units(
    sequences: Sequence[SkeletonSequence],
    cfg: TrainConfig,
    normalized: bool = False,
    segmentations: Optional[Sequence[Segmentation]] = None,
) -> List[np.ndarray]:
    """Segment every training sequence and stack unit ``i`` columns across them.

    Precomputed ``segmentations`` (one per sequence) skip the k-means stage.
    """
    if segmentations is None:
        segmentations = segment_sequences(sequences, cfg, normalized)
    elif len(segmentations) != len(sequences):
        raise GodlError(f"{len(segmentations)} segmentations for {len(sequences)} sequences")
    pools: List[List[np.ndarray]] = [[] for _ in range(cfg.n_units)]
    for seq, seg in zip(sequences, segmentations):
        norm = seq if normalized else normalize(seq)[0]
        for i, sub in enumerate(split(build_features(norm, cfg.w_st), seg)):
            pools[i].append(sub.columns)
    return [np.hstack(p) for p in pools]


def train_model(
    sequences: Sequence[SkeletonSequence],
    cfg: Optional[TrainConfig] = None,
    trainer: str = "godl",
    normalized: bool = False,
    provenance: Optional[dict] = None,
    segmentations: Optional[Sequence[Segmentation]] = None,
) -> FallModel:
    """Train a fall model from raw (or already normalized) sequences."""
    cfg = cfg or TrainConfig()
    if not sequences:
        raise GodlError("no sequences")
    units = pooled_units(sequences, cfg, normalized, segmentations)
    return train_all(
        units,
        cfg.odl,
        cfg.gnc,
        cfg.seed,
        alpha=cfg.alpha,
        temporal=cfg.temporal,
        w_st=cfg.w_st,
        trainer=trainer,
        provenance=provenance,
    )
