"""Trained fall model and its JSON persistence.

Floats are written with 17 significant digits so that a save/load round trip
reproduces every value bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict

import numpy as np

from .errors import ModelMismatch

MODEL_VERSION = 1


@dataclass(frozen=True)
class TemporalParams:
    window: int = 30
    start_ratio: float = 0.9
    drop_ratio: float = 0.5

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("temporal window must be positive")
        if not (0.0 < self.drop_ratio < self.start_ratio <= 1.0):
            raise ValueError("need 0 < drop_ratio < start_ratio <= 1")


@dataclass
class FallModel:
    units: list  # of gnc.UnitTrainResult
    lam: float
    c2: float
    alpha: float = 2.0
    temporal: TemporalParams = field(default_factory=TemporalParams)
    w_st: float = 0.1
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.units) < 1:
            raise ValueError("a model needs at least one unit")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        dims = {u.dictionary.dim for u in self.units}
        if len(dims) != 1:
            raise ModelMismatch(f"units disagree on feature dimension: {sorted(dims)}")

    @property
    def feature_dim(self) -> int:
        return self.units[0].dictionary.dim

    @property
    def joint_count(self) -> int:
        return self.feature_dim // 6

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": MODEL_VERSION,
            "lambda": self.lam,
            "c2": self.c2,
            "alpha": self.alpha,
            "units": [
                {
                    "label": u.unit_label,
                    "atoms": u.dictionary.atoms.tolist(),
                    "e_mean": u.e_mean,
                    "e_std": u.e_std,
                    "weights": np.asarray(u.weights).tolist(),
                }
                for u in self.units
            ],
            "temporal": {
                "window": self.temporal.window,
                "start_ratio": self.temporal.start_ratio,
                "drop_ratio": self.temporal.drop_ratio,
            },
            "feature": {"w_st": self.w_st},
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FallModel":
        from .dictionary import Dictionary
        from .gnc import UnitTrainResult

        if data.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {data.get('version')!r}")
        units = [
            UnitTrainResult(
                dictionary=Dictionary(np.array(u["atoms"], dtype=float), i + 1),
                weights=np.array(u["weights"], dtype=float),
                e_mean=float(u["e_mean"]),
                e_std=float(u["e_std"]),
                unit_label=u["label"],
            )
            for i, u in enumerate(data["units"])
        ]
        t = data["temporal"]
        return cls(
            units=units,
            lam=float(data["lambda"]),
            c2=float(data["c2"]),
            alpha=float(data["alpha"]),
            temporal=TemporalParams(int(t["window"]), float(t["start_ratio"]), float(t["drop_ratio"])),
            w_st=float(data["feature"]["w_st"]),
            provenance=data.get("provenance", {}),
        )


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("non-finite value in model")
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 0, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats; key order is preserved."""
    pad = " " * (indent * (_level + 1)) if indent else ""
    end = " " * (indent * _level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl if indent else ","
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + nl + sep.join(items) + nl + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        # numeric rows stay on one line
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in seq]
        return "[" + nl + sep.join(items) + nl + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def save_model(model: FallModel, path) -> None:
    Path(path).write_text(dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_model(path) -> FallModel:
    return FallModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
