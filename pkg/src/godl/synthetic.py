"""Synthetic skeleton sequences and outlier injection.

Bodies are 15-joint stick figures posed by a handful of segment angles in the
sagittal (x-y) plane, with arms allowed to swing out laterally along z. Each
kind of action is five keyframe poses; a sequence moves to each keyframe and
holds it, with per-sample variation in body size, pose angles and timing plus
Gaussian jitter on every coordinate.

Joint order: head, neck, r_shoulder, r_elbow, r_hand, l_shoulder, l_elbow,
l_hand, pelvis, r_hip, r_knee, r_foot, l_hip, l_knee, l_foot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np

from .skeleton_io import SkeletonSequence

KINDS = ("fall", "sit_down", "lie_down", "other")
JOINT_COUNT = 15

# segment lengths in meters for a 1.70 m body
_LEN = {
    "head": 0.25,
    "trunk": 0.55,
    "shoulder": 0.20,
    "hip": 0.10,
    "upper_arm": 0.30,
    "forearm": 0.28,
    "thigh": 0.45,
    "shank": 0.45,
}


@dataclass(frozen=True)
class Pose:
    """Segment angles in degrees.

    ``trunk``: forward lean from vertical. ``thigh``: forward swing from
    hanging straight down. ``shank``: absolute angle of the lower leg from
    straight down (negative points the foot backwards). ``arm_pitch``: forward
    swing of the upper arm; ``arm_abd``: lateral abduction; ``elbow``: extra
    forward bend of the forearm.
    """

    trunk: float = 0.0
    thigh: float = 0.0
    shank: float = 0.0
    arm_pitch: float = 0.0
    arm_abd: float = 8.0
    elbow: float = 10.0
    head: float = 0.0


KEYFRAMES: Dict[str, Tuple[Pose, ...]] = {
    "fall": (
        Pose(),
        Pose(trunk=12, thigh=22, shank=-18, arm_pitch=15, arm_abd=12, elbow=20),
        Pose(trunk=28, thigh=38, shank=-28, arm_pitch=35, arm_abd=75, elbow=15),
        Pose(trunk=70, thigh=15, shank=-90, arm_pitch=70, arm_abd=35, elbow=10, head=-15),
        Pose(trunk=80, thigh=65, shank=-95, arm_pitch=20, arm_abd=15, elbow=5, head=-30),
    ),
    "sit_down": (
        Pose(),
        Pose(trunk=20, thigh=30, shank=-10, arm_pitch=20, arm_abd=10, elbow=20),
        Pose(trunk=25, thigh=65, shank=-5, arm_pitch=30, arm_abd=12, elbow=30),
        Pose(trunk=20, thigh=95, shank=5, arm_pitch=25, arm_abd=10, elbow=50, head=15),
        Pose(trunk=-31, thigh=101, shank=15, arm_pitch=15, arm_abd=10, elbow=60, head=25),
    ),
    "lie_down": (
        Pose(),
        Pose(trunk=20, thigh=45, shank=-40, arm_pitch=30, arm_abd=10, elbow=20),
        Pose(trunk=45, thigh=20, shank=-90, arm_pitch=60, arm_abd=15, elbow=20),
        Pose(trunk=75, thigh=60, shank=-95, arm_pitch=20, arm_abd=15, elbow=10, head=-30),
        Pose(trunk=95, thigh=95, shank=-95, arm_pitch=150, arm_abd=10, elbow=10, head=-5),
    ),
    # ground lift: kneel to pick something off the floor, then stand back up
    "other": (
        Pose(),
        Pose(trunk=15, thigh=25, shank=-20, arm_pitch=20, arm_abd=10, elbow=20),
        Pose(trunk=35, thigh=40, shank=-35, arm_pitch=45, arm_abd=20, elbow=15),
        Pose(trunk=70, thigh=15, shank=-90, arm_pitch=80, arm_abd=10, elbow=10, head=-15),
        Pose(trunk=10, thigh=10, shank=-5, arm_pitch=40, arm_abd=10, elbow=60),
    ),
}

# how many nominal unit lengths each keyframe segment lasts, per kind
_SLOWDOWN = {"fall": 1.0, "sit_down": 1.0, "lie_down": 3.0, "other": 1.0}


def _rot_sagittal(angle_deg):
    a = math.radians(angle_deg)
    return np.array([math.sin(a), math.cos(a), 0.0])


def pose_joints(p: Pose, body_scale: float = 1.0) -> np.ndarray:
    """Joint coordinates (15, 3) for a pose, lowest joint resting on y = 0."""
    L = {k: v * body_scale for k, v in _LEN.items()}
    def dvec(ang):
        # straight down, swung forward by ang
        a = math.radians(ang)
        return np.array([math.sin(a), -math.cos(a), 0.0])

    pelvis = np.zeros(3)
    up = _rot_sagittal(p.trunk)
    neck = pelvis + L["trunk"] * up
    head = neck + L["head"] * _rot_sagittal(p.trunk + p.head)
    out = np.zeros((JOINT_COUNT, 3))
    out[0], out[1], out[8] = head, neck, pelvis

    for side, sgn in (("r", 1.0), ("l", -1.0)):
        shoulder = neck + np.array([0.0, 0.0, sgn * L["shoulder"]])
        a, b = math.radians(p.arm_pitch), math.radians(p.arm_abd)
        upper = np.array([math.sin(a) * math.cos(b), -math.cos(a) * math.cos(b), sgn * math.sin(b)])
        # arm angles are relative to the trunk's lean
        upper = _tilt(upper, p.trunk)
        elbow = shoulder + L["upper_arm"] * upper
        a2 = a + math.radians(p.elbow)
        fore = np.array([math.sin(a2) * math.cos(b), -math.cos(a2) * math.cos(b), sgn * math.sin(b)])
        fore = _tilt(fore, p.trunk)
        hand = elbow + L["forearm"] * fore

        hip = pelvis + np.array([0.0, 0.0, sgn * L["hip"]])
        knee = hip + L["thigh"] * dvec(p.thigh)
        foot = knee + L["shank"] * dvec(p.shank)
        base = 2 if side == "r" else 5
        out[base], out[base + 1], out[base + 2] = shoulder, elbow, hand
        lbase = 9 if side == "r" else 12
        out[lbase], out[lbase + 1], out[lbase + 2] = hip, knee, foot
    out[:, 1] -= out[:, 1].min()
    return out


def _tilt(v, trunk_deg):
    """Rotate a trunk-relative direction by the trunk's forward lean."""
    a = math.radians(trunk_deg)
    c, s = math.cos(a), math.sin(a)
    x, y, z = v
    return np.array([c * x + s * y, -s * x + c * y, z])


def _smoothstep(u):
    return u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class SynthConfig:
    joint_count: int = JOINT_COUNT
    frames_per_unit: int = 12
    n_units: int = 5
    subspace_dim: Tuple[int, ...] = (4, 5, 6, 10, 13)
    noise_sigma: float = 0.01
    seed: int = 0
    pose_jitter_deg: float = 1.5
    scale_range: Tuple[float, float] = (0.9, 1.1)
    yaw_deg: float = 3.0

    def __post_init__(self):
        if self.joint_count != JOINT_COUNT:
            raise ValueError(f"the synthetic body has {JOINT_COUNT} joints")
        if self.frames_per_unit < 2 or self.n_units != 5:
            raise ValueError("synthetic sequences use 5 units of at least 2 frames")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


@dataclass(frozen=True)
class LabeledSequence:
    sequence: SkeletonSequence
    kind: str
    unit_bounds: Tuple[int, ...] = ()

    @property
    def is_fall(self) -> bool:
        return self.kind == "fall"


def _jitter_pose(p: Pose, rng, deg: float) -> Pose:
    fields = ("trunk", "thigh", "shank", "arm_pitch", "arm_abd", "elbow", "head")
    return replace(p, **{f: getattr(p, f) + rng.normal(0.0, deg) for f in fields})


def generate_synthetic(cfg: SynthConfig, kind: str, seed: Optional[int] = None) -> LabeledSequence:
    """One labelled sequence of the given kind, deterministic in the seed."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    scale = rng.uniform(*cfg.scale_range)
    keys = [_jitter_pose(p, rng, cfg.pose_jitter_deg) for p in KEYFRAMES[kind]]
    poses = [pose_joints(p, scale) for p in keys]

    seg_len = max(2, int(round(cfg.frames_per_unit * _SLOWDOWN[kind])))
    frames = []
    bounds = [0]
    prev = poses[0]
    for u, target in enumerate(poses):
        n = seg_len + int(rng.integers(-1, 2))
        # the first unit holds the start pose; later ones blend in then hold
        n_move = 0 if u == 0 else max(1, int(round(n * (0.5 if kind != "lie_down" else 1.0))))
        for f in range(n):
            if f < n_move:
                w = _smoothstep((f + 1) / n_move)
                frames.append((1.0 - w) * prev + w * target)
            else:
                frames.append(target.copy())
        bounds.append(bounds[-1] + n)
        prev = target

    J = np.array(frames)
    yaw = math.radians(rng.normal(0.0, cfg.yaw_deg))
    c, s = math.cos(yaw), math.sin(yaw)
    R = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    J = J @ R.T
    J = J + np.array([rng.uniform(-1.0, 1.0), 0.0, rng.uniform(2.0, 4.0)])
    if cfg.noise_sigma > 0:
        J = J + rng.normal(0.0, cfg.noise_sigma, size=J.shape)
    seq = SkeletonSequence(J, source_id=kind)
    return LabeledSequence(seq, kind, tuple(bounds))


def inject_outliers(seq: SkeletonSequence, ratio: float, magnitude: float = 0.5, seed: int = 0):
    """Add uniform noise in ``[-magnitude, magnitude]`` to ``ceil(ratio * frames)`` frames.

    Returns ``(corrupted_sequence, sorted_outlier_indices)``.
    """
    if not 0.0 <= ratio <= 0.5:
        raise ValueError("ratio must lie in [0, 0.5]")
    n = seq.n_frames
    count = math.ceil(round(ratio * n, 9))
    if count == 0:
        return seq, np.array([], dtype=int)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=count, replace=False))
    J = np.array(seq.joints)
    J[idx] += rng.uniform(-magnitude, magnitude, size=(count,) + J.shape[1:])
    return replace(seq, joints=J), idx
