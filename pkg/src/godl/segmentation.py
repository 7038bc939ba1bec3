"""K-means segmentation of a sequence into temporally ordered action units."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import median_filter

from .errors import InvalidSequence, MissingCluster, TooFewFrames

SMOOTH_WIDTH = 5


@dataclass(frozen=True)
class Segmentation:
    boundaries: Tuple[int, ...]
    unit_labels: Tuple[str, ...]

    def __post_init__(self):
        b = tuple(int(v) for v in self.boundaries)
        if len(b) < 2 or b[0] != 0:
            raise InvalidSequence("boundaries must start at 0 and hold at least two entries")
        if any(b1 <= b0 for b0, b1 in zip(b, b[1:])):
            raise InvalidSequence("boundaries must be strictly increasing")
        if len(self.unit_labels) != len(b) - 1:
            raise InvalidSequence("one label per segment required")
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "unit_labels", tuple(self.unit_labels))

    @property
    def n_units(self) -> int:
        return len(self.boundaries) - 1

    @property
    def n_frames(self) -> int:
        return self.boundaries[-1]

    def to_json(self) -> str:
        return json.dumps({"boundaries": list(self.boundaries), "labels": list(self.unit_labels)})

    @classmethod
    def from_json(cls, text: str) -> "Segmentation":
        d = json.loads(text)
        return cls(tuple(d["boundaries"]), tuple(d["labels"]))


@dataclass(frozen=True)
class SubSequence:
    unit_index: int
    columns: np.ndarray

    def __post_init__(self):
        if self.columns.ndim != 2 or self.columns.shape[1] < 1:
            raise InvalidSequence("a sub-sequence needs at least one column")


def _sq_dists(X, C):
    # per-point, fixed summation order over features
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeans_pp(X, k, rng):
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = _sq_dists(X, X[centers])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # every point coincides with a chosen center; take the first unused
            remaining = [i for i in range(n) if i not in centers]
            nxt = remaining[0]
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        centers.append(nxt)
        d2 = np.minimum(d2, _sq_dists(X, X[[nxt]])[:, 0])
    return X[centers].copy()


def kmeans(features, n_clusters: int, seed: int = 0, max_iter: int = 100, return_inertia: bool = False):
    """Lloyd's algorithm with k-means++ seeding.

    ``features`` is a FeatureSequence or a (dim, frames) matrix; clustering is
    over frames. Returns ``(labels, centroids)`` with labels in ``0..k-1`` and
    centroids of shape (k, dim). Ties go to the lowest cluster index.
    """
    M = getattr(features, "vectors", features)
    X = np.asarray(M, dtype=float).T
    n = X.shape[0]
    if n_clusters < 1:
        raise ValueError("n_clusters must be positive")
    if n < n_clusters:
        raise TooFewFrames(f"{n} frames cannot form {n_clusters} clusters")
    rng = np.random.default_rng(seed)
    C = _kmeans_pp(X, n_clusters, rng)
    labels = None
    inertia = []
    for _ in range(max_iter):
        d = _sq_dists(X, C)
        new = np.argmin(d, axis=1)  # first minimum = lowest index
        inertia.append(float(d[np.arange(n), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(n_clusters):
            members = labels == j
            if np.any(members):
                C[j] = X[members].mean(axis=0)
    if return_inertia:
        return labels, C, inertia
    return labels, C


def _runs(labels):
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            runs.append((int(labels[start]), start, i))
            start = i
    return runs


def temporalize(labels: Sequence[int], unit_labels: Optional[Sequence[str]] = None, n_clusters: Optional[int] = None) -> Segmentation:
    """Turn per-frame cluster ids into contiguous, time-ordered segments.

    Clusters are renumbered by mean frame index, the label stream is median
    filtered (width 5, mirrored edges), and any cluster split into several runs
    keeps only its longest run (earliest on ties); the other frames join the
    run that precedes them (or follows, at the start).
    """
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size == 0:
        raise InvalidSequence("labels must be a non-empty 1-D sequence")
    ids = sorted(set(lab.tolist()))
    n = n_clusters if n_clusters is not None else len(ids)
    if len(ids) != n:
        raise MissingCluster(f"expected {n} clusters, labels hold {len(ids)}")
    frames = np.arange(lab.size)
    means = [frames[lab == c].mean() for c in ids]
    order = sorted(range(n), key=lambda i: (means[i], ids[i]))
    rank = {ids[i]: r for r, i in enumerate(order)}
    ordered = np.array([rank[v] for v in lab.tolist()])

    smooth = median_filter(ordered, size=SMOOTH_WIDTH, mode="reflect") if ordered.size > 1 else ordered

    runs = _runs(smooth)
    keep = {}
    for c, s, e in runs:
        if c not in keep or (e - s) > (keep[c][1] - keep[c][0]):
            keep[c] = (s, e)
    out = np.full(smooth.size, -1)
    for c, (s, e) in keep.items():
        out[s:e] = c
    for i in range(out.size):
        if out[i] < 0 and i > 0:
            out[i] = out[i - 1]
    first = int(np.flatnonzero(out >= 0)[0])
    out[:first] = out[first]

    missing = sorted(set(range(n)) - set(out.tolist()))
    if missing:
        raise MissingCluster(f"{len(missing)} of {n} clusters vanished after smoothing")
    final_runs = _runs(out)
    boundaries = [s for _, s, _ in final_runs] + [out.size]
    if unit_labels is None:
        from .gnc import default_labels

        unit_labels = default_labels(n)
    return Segmentation(tuple(boundaries), tuple(unit_labels))


def split(matrix, seg: Segmentation) -> List[SubSequence]:
    """Cut the columns of ``matrix`` (dim, frames) at the segment boundaries."""
    M = np.asarray(getattr(matrix, "vectors", matrix))
    if M.shape[1] != seg.n_frames:
        raise InvalidSequence(f"segmentation covers {seg.n_frames} frames, matrix has {M.shape[1]}")
    b = seg.boundaries
    return [SubSequence(i + 1, M[:, b[i]:b[i + 1]].copy()) for i in range(seg.n_units)]
