"""Skeleton sequence parsing, normalization and spatio-temporal features.

CSV layout: one row per frame, ``frame_index, j0x, j0y, j0z, j1x, ...``.
JSON layout: ``{"joint_count": n, "frame_rate_hz": r, "frames": [[x, y, z, ...], ...]}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateExtent, InvalidSequence, MalformedInput, TooShort


@dataclass(frozen=True)
class SkeletonSequence:
    """Frames of 3-D joints stored as an array of shape (frames, joints, 3)."""

    joints: np.ndarray
    frame_rate_hz: float = 30.0
    source_id: str = ""
    indices: Optional[np.ndarray] = None

    def __post_init__(self):
        J = np.asarray(self.joints, dtype=float)
        if J.ndim != 3 or J.shape[2] != 3:
            raise InvalidSequence(f"expected (frames, joints, 3) array, got shape {J.shape}")
        if J.shape[1] < 2:
            raise InvalidSequence("need at least two joints")
        if not np.all(np.isfinite(J)):
            raise InvalidSequence("coordinates must be finite")
        if not self.frame_rate_hz > 0:
            raise InvalidSequence("frame rate must be positive")
        idx = np.arange(J.shape[0]) if self.indices is None else np.asarray(self.indices, dtype=np.int64)
        if idx.shape != (J.shape[0],):
            raise InvalidSequence("one index per frame required")
        if idx.size and (idx[0] < 0 or np.any(np.diff(idx) <= 0)):
            raise InvalidSequence("frame indices must be nonnegative and strictly increasing")
        J.setflags(write=False)
        object.__setattr__(self, "joints", J)
        object.__setattr__(self, "indices", idx)

    @property
    def n_frames(self) -> int:
        return self.joints.shape[0]

    @property
    def joint_count(self) -> int:
        return self.joints.shape[1]

    def __len__(self):
        return self.n_frames

    def slice(self, start: int, stop: int) -> "SkeletonSequence":
        return replace(self, joints=self.joints[start:stop], indices=self.indices[start:stop])


@dataclass(frozen=True)
class NormalizationParams:
    x_min: float
    x_max: float
    y_min: float
    z_min: float

    @property
    def scale(self) -> float:
        return self.x_max - self.x_min

    def apply(self, joints):
        offset = np.array([self.x_min, self.y_min, self.z_min])
        return (np.asarray(joints, dtype=float) - offset) / self.scale

    def invert(self, joints):
        offset = np.array([self.x_min, self.y_min, self.z_min])
        return np.asarray(joints, dtype=float) * self.scale + offset


@dataclass(frozen=True)
class FeatureSequence:
    vectors: np.ndarray  # (6 * joints, frames)
    w_st: float = 0.1

    @property
    def n_frames(self) -> int:
        return self.vectors.shape[1]


def _parse_float(cell: str, line: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise MalformedInput(f"non-numeric cell {cell.strip()!r}", line) from None
    if not math.isfinite(v):
        raise MalformedInput(f"non-finite value {cell.strip()!r}", line)
    return v


def _parse_csv(text: str, source_id: str) -> SkeletonSequence:
    rows = []
    indices = []
    width = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
            if width < 7 or (width - 1) % 3:
                raise MalformedInput(f"row has {width} cells; expected 1 + 3*joints with joints >= 2", lineno)
        elif len(cells) != width:
            raise MalformedInput(f"row has {len(cells)} cells, expected {width}", lineno)
        idx = _parse_float(cells[0], lineno)
        if idx != int(idx) or idx < 0:
            raise MalformedInput(f"frame index {cells[0].strip()!r} is not a nonnegative integer", lineno)
        if indices and int(idx) <= indices[-1]:
            raise MalformedInput("frame indices must be strictly increasing", lineno)
        indices.append(int(idx))
        rows.append([_parse_float(c, lineno) for c in cells[1:]])
    if not rows:
        raise MalformedInput("no frames", 1)
    arr = np.array(rows).reshape(len(rows), -1, 3)
    return SkeletonSequence(arr, source_id=source_id, indices=np.array(indices))


def _parse_json(text: str, source_id: str) -> SkeletonSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict) or "frames" not in doc or "joint_count" not in doc:
        raise MalformedInput("expected an object with 'joint_count' and 'frames'", 1)
    n = doc["joint_count"]
    if not isinstance(n, int) or n < 2:
        raise MalformedInput("joint_count must be an integer >= 2", 1)
    frames = doc["frames"]
    if not isinstance(frames, list) or not frames:
        raise MalformedInput("no frames", 1)
    rows = []
    for i, fr in enumerate(frames):
        if not isinstance(fr, list) or len(fr) != 3 * n:
            raise MalformedInput(f"frame {i} must hold {3 * n} numbers", 1)
        row = []
        for v in fr:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise MalformedInput(f"frame {i} holds a non-finite or non-numeric value", 1)
            row.append(float(v))
        rows.append(row)
    rate = doc.get("frame_rate_hz", 30.0)
    try:
        return SkeletonSequence(np.array(rows).reshape(len(rows), n, 3), float(rate), source_id)
    except InvalidSequence as exc:
        raise MalformedInput(str(exc), 1) from None


def parse_sequence(data, fmt: str, source_id: str = "") -> SkeletonSequence:
    """Parse CSV or JSON bytes/text into a :class:`SkeletonSequence`.

    Raises :class:`MalformedInput` naming the offending line for any defect.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"not UTF-8: {exc}", 1) from None
    fmt = fmt.lower()
    if fmt == "csv":
        return _parse_csv(data, source_id)
    if fmt == "json":
        return _parse_json(data, source_id)
    raise ValueError(f"unknown format {fmt!r}")


def read_sequence(path) -> SkeletonSequence:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower()
    if fmt not in ("csv", "json"):
        raise MalformedInput(f"unsupported file type {path.suffix!r}")
    return parse_sequence(path.read_bytes(), fmt, source_id=path.stem)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def to_csv(seq: SkeletonSequence) -> str:
    flat = seq.joints.reshape(seq.n_frames, -1)
    return "".join(
        str(int(i)) + "," + ",".join(_fmt(v) for v in row) + "\n" for i, row in zip(seq.indices, flat)
    )


def to_json(seq: SkeletonSequence) -> str:
    frames = ",\n    ".join("[" + ", ".join(_fmt(v) for v in row) + "]" for row in seq.joints.reshape(seq.n_frames, -1))
    return (
        "{\n"
        f'  "joint_count": {seq.joint_count},\n'
        f'  "frame_rate_hz": {_fmt(seq.frame_rate_hz)},\n'
        f'  "frames": [\n    {frames}\n  ]\n'
        "}\n"
    )


def write_sequence(seq: SkeletonSequence, path) -> None:
    path = Path(path)
    text = to_json(seq) if path.suffix.lower() == ".json" else to_csv(seq)
    path.write_text(text, encoding="utf-8", newline="\n")


def normalization_params(seq: SkeletonSequence) -> NormalizationParams:
    J = seq.joints
    x_min, x_max = float(J[..., 0].min()), float(J[..., 0].max())
    if not x_max > x_min:
        raise DegenerateExtent("x extent of the sequence is zero")
    return NormalizationParams(x_min, x_max, float(J[..., 1].min()), float(J[..., 2].min()))


def normalize(seq: SkeletonSequence) -> Tuple[SkeletonSequence, NormalizationParams]:
    """Shift every axis to start at 0 and divide by the sequence's x extent."""
    params = normalization_params(seq)
    return replace(seq, joints=params.apply(seq.joints)), params


def build_features(seq: SkeletonSequence, w_st: float = 0.1) -> FeatureSequence:
    """Stack positions over ``w_st``-scaled frame-to-frame velocities.

    Column ``j`` is ``[p_j ; w_st (p_j - p_{j-1})]`` with a zero velocity on
    the first frame.
    """
    if seq.n_frames < 2:
        raise TooShort("need at least two frames to build features")
    P = seq.joints.reshape(seq.n_frames, -1).T
    V = np.zeros_like(P)
    V[:, 1:] = w_st * np.diff(P, axis=1)
    return FeatureSequence(np.vstack([P, V]), w_st)


def frame_heights(seq: SkeletonSequence) -> np.ndarray:
    """Per-frame ``max(y) - min(y)`` over joints."""
    y = seq.joints[..., 1]
    return y.max(axis=1) - y.min(axis=1)
