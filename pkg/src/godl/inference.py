"""Sequential fall detection: unit gates in strict order plus a height-drop test.

A frame advances the detector from stage ``s`` to ``s + 1`` once
``m_consecutive`` frames in a row pass the confidence gate of unit ``s + 1``.
A fall is declared at the first frame where every unit has been passed and the
temporal height-drop condition fired within the last ``window`` frames.
"""

from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateStatsWarning, ModelMismatch
from .gnc import frame_errors
from .model import FallModel, TemporalParams
from .skeleton_io import SkeletonSequence


def unit_gate(e: float, unit, alpha: float) -> bool:
    """``|e - e_mean| / e_std < alpha``; falls back to ``e <= e_mean`` when ``e_std == 0``."""
    if unit.e_std > 0:
        return abs(e - unit.e_mean) / unit.e_std < alpha
    warnings.warn(f"unit {unit.unit_label!r} has zero error spread", DegenerateStatsWarning, stacklevel=2)
    return e <= unit.e_mean * (1.0 + 1e-6)


def height(frame) -> float:
    """Vertical extent of one frame given as a (joints, 3) array."""
    y = np.asarray(frame, dtype=float)[:, 1]
    if y.size < 2:
        raise ValueError("height needs at least two joints")
    return float(y.max() - y.min())


def temporal_check(ring, h_init: float, p: TemporalParams) -> bool:
    """Both height-ratio conditions over a full window, oldest sample first."""
    if len(ring) != p.window:
        raise ValueError(f"window holds {len(ring)} samples, expected {p.window}")
    h0, h_end = ring[0], ring[-1]
    if not (h0 > 0 and h_init > 0):
        return False
    return h0 / h_init > p.start_ratio and h_end / h0 < p.drop_ratio


@dataclass
class DetectorState:
    current_stage: int = 0
    consecutive_hits: int = 0
    height_ring: deque = field(default_factory=deque)
    events: List[Tuple[int, int]] = field(default_factory=list)
    h_init: Optional[float] = None
    standing_heights: List[float] = field(default_factory=list)
    last_fire: Optional[int] = None
    last_progress: int = 0
    start_frame: Optional[int] = None
    post_event: bool = False

    def reset(self):
        self.current_stage = 0
        self.consecutive_hits = 0
        self.h_init = None
        self.standing_heights = []
        self.last_fire = None
        self.start_frame = None
        self.post_event = False


@dataclass
class DetectionResult:
    frames: List[dict]
    events: List[Tuple[int, int]]
    final_stage: int

    @property
    def stages(self) -> List[int]:
        return [f["stage"] for f in self.frames]

    @property
    def is_fall(self) -> bool:
        return bool(self.events)

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "events": [{"start": s, "end": e} for s, e in self.events],
            "final_stage": self.final_stage,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def stream_features(seq: SkeletonSequence, w_st: float) -> np.ndarray:
    """Position/velocity columns; unlike build_features, accepts short streams."""
    P = seq.joints.reshape(seq.n_frames, -1).T
    V = np.zeros_like(P)
    if seq.n_frames > 1:
        V[:, 1:] = w_st * np.diff(P, axis=1)
    return np.vstack([P, V])


def unit_errors(model: FallModel, features: np.ndarray) -> np.ndarray:
    """Error of every frame against every unit, shape (units, frames)."""
    out = np.empty((len(model.units), features.shape[1]))
    for i, unit in enumerate(model.units):
        out[i], _ = frame_errors(features, unit.dictionary, model.lam)
    return out


class Detector:
    """Frame-by-frame state machine over precomputed per-unit errors."""

    def __init__(self, model: FallModel, m_consecutive: int = 2, timeout: Optional[int] = None):
        if m_consecutive < 1:
            raise ValueError("m_consecutive must be >= 1")
        self.model = model
        self.params = model.temporal
        self.m = m_consecutive
        self.timeout = 5 * self.params.window if timeout is None else timeout
        self.n_units = len(model.units)
        self.state = DetectorState(height_ring=deque(maxlen=self.params.window))

    def step(self, j: int, frame_id: int, errors_j: np.ndarray, h: float) -> dict:
        st, p = self.state, self.params
        st.height_ring.append(h)

        if st.post_event and st.h_init is not None and h > p.start_ratio * st.h_init:
            st.reset()

        if st.h_init is not None and len(st.height_ring) == p.window:
            if temporal_check(st.height_ring, st.h_init, p):
                st.last_fire = j

        e = None
        gate = False
        if st.current_stage < self.n_units:
            unit = self.model.units[st.current_stage]
            e = float(errors_j[st.current_stage])
            gate = unit_gate(e, unit, self.model.alpha)
            if gate:
                st.consecutive_hits += 1
                if st.current_stage == 0:
                    st.standing_heights.append(h)
            else:
                st.consecutive_hits = 0
                if st.current_stage == 0:
                    st.standing_heights = []
            if st.consecutive_hits >= self.m:
                if st.current_stage == 0:
                    st.h_init = float(np.mean(st.standing_heights))
                    st.start_frame = self._frame_ids[j - self.m + 1]
                st.current_stage += 1
                st.consecutive_hits = 0
                st.last_progress = j

        if (
            st.current_stage == self.n_units
            and not st.post_event
            and st.last_fire is not None
            and j - st.last_fire < p.window
        ):
            st.events.append((st.start_frame, frame_id))
            st.post_event = True
        elif st.current_stage > 0 and not st.post_event and j - st.last_progress >= self.timeout:
            st.reset()

        return {"frame": frame_id, "stage": st.current_stage, "e": e, "gate": gate, "h": h}

    def run(self, errors: np.ndarray, heights: np.ndarray, frame_ids) -> DetectionResult:
        self._frame_ids = [int(i) for i in frame_ids]
        frames = [self.step(j, self._frame_ids[j], errors[:, j], float(heights[j])) for j in range(len(heights))]
        return DetectionResult(frames, list(self.state.events), self.state.current_stage)


def _check_dims(stream: SkeletonSequence, model: FallModel):
    if stream.joint_count * 6 != model.feature_dim:
        raise ModelMismatch(
            f"stream {stream.source_id or ''} has {stream.joint_count} joints, model expects {model.joint_count}"
        )


def detect_many(
    streams: Sequence[SkeletonSequence], model: FallModel, m_consecutive: int = 2, timeout: Optional[int] = None
) -> List[DetectionResult]:
    """Run the detector over several normalized streams.

    Frame errors for all streams are computed in one batch per unit; each
    stream still gets its own detector state.
    """
    for s in streams:
        _check_dims(s, model)
    live = [s for s in streams if s.n_frames]
    errors = np.zeros((len(model.units), 0))
    if live:
        errors = unit_errors(model, np.hstack([stream_features(s, model.w_st) for s in live]))
    out, col = [], 0
    for s in streams:
        if s.n_frames == 0:
            out.append(DetectionResult([], [], 0))
            continue
        y = s.joints[..., 1]
        heights = y.max(axis=1) - y.min(axis=1)
        E = errors[:, col : col + s.n_frames]
        col += s.n_frames
        out.append(Detector(model, m_consecutive, timeout).run(E, heights, s.indices))
    return out


def detect(stream: SkeletonSequence, model: FallModel, m_consecutive: int = 2, timeout: Optional[int] = None) -> DetectionResult:
    """Run the detector over a normalized stream."""
    return detect_many([stream], model, m_consecutive, timeout)[0]
