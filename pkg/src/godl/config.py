"""Run configuration: one JSON document covering every tunable, with strict keys.

Layout (every key optional)::

    {
      "seed": 0, "alpha": 2.0, "w_st": 0.1, "n_units": 5, "kmeans_max_iter": 100,
      "odl": {"lambda": 0.01, "inner_max_iter": 20, "conv_tol": 1e-5,
              "atom_dims": [4, 5, 6, 10, 13], "fista_max_iter": 300, "fista_tol": 1e-7},
      "gnc": {"c2": 0.5, "mu_divisor": 1.4, "inlier_weight_cutoff": 0.6},
      "temporal": {"window": 30, "start_ratio": 0.9, "drop_ratio": 0.5},
      "synth": {"frames_per_unit": 12, "noise_sigma": 0.01, "pose_jitter_deg": 1.5, "yaw_deg": 3.0},
      "sweep": {"n_train": 20, "n_test_per_kind": 10, "magnitude": 0.5}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from .dictionary import OdlConfig
from .errors import ConfigError
from .evalharness import SweepConfig
from .gnc import GncConfig
from .model import TemporalParams
from .pipeline import TrainConfig
from .sparse_coding import FistaConfig
from .synthetic import SynthConfig

_TOP = {"seed", "alpha", "w_st", "n_units", "kmeans_max_iter", "odl", "gnc", "temporal", "synth", "sweep"}
_SECTIONS = {
    "odl": {"lambda", "inner_max_iter", "conv_tol", "atom_dims", "fista_max_iter", "fista_tol"},
    "gnc": {"c2", "mu_divisor", "inlier_weight_cutoff"},
    "temporal": {"window", "start_ratio", "drop_ratio"},
    "synth": {"frames_per_unit", "noise_sigma", "pose_jitter_deg", "yaw_deg"},
    "sweep": {"n_train", "n_test_per_kind", "magnitude"},
}


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


@dataclass
class RunConfig:
    seed: int = 0
    alpha: float = 2.0
    w_st: float = 0.1
    n_units: int = 5
    kmeans_max_iter: int = 100
    odl: Dict[str, Any] = field(default_factory=dict)
    gnc: Dict[str, Any] = field(default_factory=dict)
    temporal: Dict[str, Any] = field(default_factory=dict)
    synth: Dict[str, Any] = field(default_factory=dict)
    sweep: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "RunConfig":
        _check_keys(d, _TOP, "config")
        for name, keys in _SECTIONS.items():
            if name in d:
                _check_keys(d[name], keys, name)
        cfg = cls(**{k: (dict(v) if k in _SECTIONS else v) for k, v in d.items()})
        cfg.build()  # surface invalid values now
        return cfg

    def override(self, section: Optional[str], key: str, value) -> None:
        if value is None:
            return
        if section is None:
            setattr(self, key, value)
        else:
            getattr(self, section)[key] = value

    def build(self):
        """Materialize the component configs; raises ConfigError on bad values."""
        try:
            if not isinstance(self.seed, int) or isinstance(self.seed, bool):
                raise ValueError("seed must be an integer")
            if not isinstance(self.n_units, int) or self.n_units < 1:
                raise ValueError("n_units must be a positive integer")
            o = self.odl
            dims = list(o.get("atom_dims", OdlConfig().atom_dims))
            if len(dims) < self.n_units:
                raise ValueError(f"{self.n_units} units need {self.n_units} atom_dims, got {len(dims)}")
            fista = FistaConfig(max_iter=int(o.get("fista_max_iter", 300)), tol=float(o.get("fista_tol", 1e-7)))
            odl = OdlConfig(
                lam=float(o.get("lambda", OdlConfig.lam)),
                inner_max_iter=int(o.get("inner_max_iter", OdlConfig.inner_max_iter)),
                conv_tol=float(o.get("conv_tol", OdlConfig.conv_tol)),
                atom_dims=dims[: self.n_units],
                fista=fista,
            )
            gnc = GncConfig(**{k: float(v) for k, v in self.gnc.items()})
            temporal = TemporalParams(**self.temporal)
            if not self.alpha > 0:
                raise ValueError("alpha must be positive")
            if not self.w_st >= 0:
                raise ValueError("w_st must be nonnegative")
            train = TrainConfig(
                odl=odl,
                gnc=gnc,
                temporal=temporal,
                alpha=float(self.alpha),
                w_st=float(self.w_st),
                n_units=self.n_units,
                kmeans_max_iter=int(self.kmeans_max_iter),
                seed=self.seed,
            )
            synth = SynthConfig(**self.synth)
            sweep = SweepConfig(synth=synth, train=train, **self.sweep)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return train, synth, sweep

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved configuration, defaults included (for model provenance)."""
        train, synth, sweep = self.build()
        return {
            "seed": self.seed,
            "alpha": train.alpha,
            "w_st": train.w_st,
            "n_units": train.n_units,
            "kmeans_max_iter": train.kmeans_max_iter,
            "odl": {
                "lambda": train.odl.lam,
                "inner_max_iter": train.odl.inner_max_iter,
                "conv_tol": train.odl.conv_tol,
                "atom_dims": list(train.odl.atom_dims),
                "fista_max_iter": train.odl.fista.max_iter,
                "fista_tol": train.odl.fista.tol,
            },
            "gnc": {
                "c2": train.gnc.c2,
                "mu_divisor": train.gnc.mu_divisor,
                "inlier_weight_cutoff": train.gnc.inlier_weight_cutoff,
            },
            "temporal": {
                "window": train.temporal.window,
                "start_ratio": train.temporal.start_ratio,
                "drop_ratio": train.temporal.drop_ratio,
            },
            "synth": {
                "frames_per_unit": synth.frames_per_unit,
                "noise_sigma": synth.noise_sigma,
                "pose_jitter_deg": synth.pose_jitter_deg,
                "yaw_deg": synth.yaw_deg,
            },
            "sweep": {"n_train": sweep.n_train, "n_test_per_kind": sweep.n_test_per_kind, "magnitude": sweep.magnitude},
        }


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config line {exc.lineno}: {exc.msg}") from None
    return RunConfig.from_dict(data)
