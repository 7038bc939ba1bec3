"""Graduated non-convexity around weighted ODL (the GODL outer loop).

Each outer iteration fits a weighted dictionary, re-codes the unweighted frames
to measure their errors, then sets every frame weight to the closed-form
minimizer of the Geman-McClure/Black-Rangarajan penalty at the current ``mu``.
``mu`` starts at ``2 max(e^2) / c^2`` and is divided by 1.4 until it drops
below one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dictionary import Dictionary, OdlConfig, init_dictionary, odl_fit
from .errors import AllOutliers, GodlError
from .sparse_coding import FistaConfig, fista_batch

logger = logging.getLogger(__name__)

UNIT_LABELS = ("standing", "bending knee", "opening arm", "knee landing", "arm supporting")


@dataclass(frozen=True)
class GncConfig:
    c2: float = 0.5
    mu_divisor: float = 1.4
    inlier_weight_cutoff: float = 0.6

    def __post_init__(self):
        if not self.c2 > 0:
            raise ValueError("c2 must be positive")
        if not self.mu_divisor > 1:
            raise ValueError("mu_divisor must exceed 1")
        if not 0 < self.inlier_weight_cutoff < 1:
            raise ValueError("inlier_weight_cutoff must lie in (0, 1)")


@dataclass
class GncState:
    mu: float
    weights: np.ndarray
    errors: np.ndarray


@dataclass
class UnitTrainResult:
    dictionary: Dictionary
    weights: np.ndarray
    e_mean: float
    e_std: float
    unit_label: str = ""
    history: List[GncState] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.e_std < 0:
            raise ValueError("e_std must be nonnegative")


def gm_cost(e2, mu, c2):
    """Geman-McClure cost ``mu c2 e2 / (mu c2 + e2)``."""
    e2 = np.asarray(e2, dtype=float)
    s = mu * c2
    return s * e2 / (s + e2)


def frame_errors(Y, D: Dictionary, lam: float, cfg: FistaConfig = FistaConfig()):
    """Per-column ``||y - D x||^2 + lam ||x||_1`` with ``x`` the Lasso code of ``y``.

    Returns ``(e2, X)``. Note there is no 1/2 on the residual term here.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != D.dim:
        raise ValueError(f"frame dimension {Y.shape[0]} != dictionary dimension {D.dim}")
    X = fista_batch(D.atoms, Y, lam, cfg)
    R = Y - D.atoms @ X
    e2 = np.einsum("ij,ij->j", R, R) + lam * np.abs(X).sum(axis=0)
    return e2, X


def frame_error(y, D: Dictionary, lam: float, cfg: FistaConfig = FistaConfig()):
    e2, X = frame_errors(np.asarray(y, dtype=float).reshape(-1, 1), D, lam, cfg)
    return float(e2[0]), X[:, 0]


def init_mu(errors, c2: float) -> float:
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("need at least one error")
    return 2.0 * float(errors.max()) / c2


def mu_schedule(mu0: float, divisor: float = 1.4) -> List[float]:
    """Values of mu visited by the outer loop; always at least one."""
    mus = [mu0]
    mu = mu0 / divisor
    while mu >= 1.0:
        mus.append(mu)
        mu /= divisor
    return mus


def update_weights(errors, mu: float, c2: float) -> np.ndarray:
    """Closed-form minimizer over w in [0, 1] of ``w^2 e2 + mu c2 (w - 1)^2``."""
    errors = np.asarray(errors, dtype=float)
    s = mu * c2
    return np.clip(s / (s + errors), 0.0, 1.0)


def _stats(errors, weights, cutoff):
    inliers = weights >= cutoff
    if not np.any(inliers):
        raise AllOutliers(f"no frame kept a weight >= {cutoff}")
    e = errors[inliers]
    return float(e.mean()), float(e.std())


def godl_train(
    columns,
    odl_cfg: OdlConfig,
    gnc_cfg: GncConfig,
    seed: int,
    n_atoms: Optional[int] = None,
    unit_index: int = 1,
    unit_label: str = "",
) -> UnitTrainResult:
    """Learn one unit dictionary with per-frame GNC weights."""
    Y = np.asarray(columns, dtype=float)
    if Y.ndim != 2 or Y.shape[1] < 1:
        raise ValueError("a unit needs at least one frame")
    k = n_atoms if n_atoms is not None else odl_cfg.atom_dims[unit_index - 1]
    lam = odl_cfg.lam
    D = init_dictionary(Y, k, seed, unit_index)

    errors, codes = frame_errors(Y, D, lam, odl_cfg.fista)
    weights = np.ones(Y.shape[1])
    mus = mu_schedule(init_mu(errors, gnc_cfg.c2), gnc_cfg.mu_divisor)
    history = [GncState(mus[0], weights.copy(), errors.copy())]

    X_hat = None
    for mu in mus:
        Y_hat = Y * weights
        fit = odl_fit(Y_hat, lam * weights, D, odl_cfg, X_hat)
        D = fit.dictionary
        errors, codes = frame_errors(Y, D, lam, odl_cfg.fista)
        # mu0 < 1 only when the initial fit is near perfect; weigh at the true GM cost
        weights = update_weights(errors, max(mu, 1.0), gnc_cfg.c2)
        # the weighted problem is solved by the scaled unweighted code
        X_hat = codes * weights
        history.append(GncState(mu, weights.copy(), errors.copy()))
        logger.debug("unit %d mu=%.4g weights min=%.3f mean=%.3f", unit_index, mu, weights.min(), weights.mean())

    e_mean, e_std = _stats(errors, weights, gnc_cfg.inlier_weight_cutoff)
    return UnitTrainResult(D, weights, e_mean, e_std, unit_label, history)


def odl_train(
    columns,
    odl_cfg: OdlConfig,
    seed: int,
    n_atoms: Optional[int] = None,
    unit_index: int = 1,
    unit_label: str = "",
) -> UnitTrainResult:
    """Plain-ODL baseline: unit weights, statistics over every frame."""
    Y = np.asarray(columns, dtype=float)
    k = n_atoms if n_atoms is not None else odl_cfg.atom_dims[unit_index - 1]
    D = init_dictionary(Y, k, seed, unit_index)
    fit = odl_fit(Y, np.full(Y.shape[1], odl_cfg.lam), D, odl_cfg)
    errors, _ = frame_errors(Y, fit.dictionary, odl_cfg.lam, odl_cfg.fista)
    weights = np.ones(Y.shape[1])
    return UnitTrainResult(fit.dictionary, weights, float(errors.mean()), float(errors.std()), unit_label)


def default_labels(n: int) -> List[str]:
    if n == len(UNIT_LABELS):
        return list(UNIT_LABELS)
    return [f"unit {i + 1}" for i in range(n)]


def train_all(
    subsequences: Sequence,
    odl_cfg: OdlConfig,
    gnc_cfg: GncConfig,
    seed: int,
    *,
    alpha: float = 2.0,
    temporal=None,
    w_st: float = 0.1,
    trainer: str = "godl",
    labels: Optional[Sequence[str]] = None,
    provenance: Optional[dict] = None,
):
    """Train every unit and bundle the result into a :class:`FallModel`.

    ``subsequences`` holds one column matrix (or SubSequence) per unit, in
    temporal order.
    """
    from .model import FallModel, TemporalParams

    n = len(subsequences)
    if n < 1:
        raise ValueError("need at least one sub-sequence")
    if len(odl_cfg.atom_dims) < n:
        raise ValueError(f"{n} units but only {len(odl_cfg.atom_dims)} atom dimensions configured")
    labels = list(labels) if labels is not None else default_labels(n)
    units = []
    for i, sub in enumerate(subsequences):
        cols = getattr(sub, "columns", sub)
        try:
            if trainer == "godl":
                unit = godl_train(cols, odl_cfg, gnc_cfg, seed + i, unit_index=i + 1, unit_label=labels[i])
            elif trainer == "odl":
                unit = odl_train(cols, odl_cfg, seed + i, unit_index=i + 1, unit_label=labels[i])
            else:
                raise ValueError(f"unknown trainer {trainer!r}")
        except GodlError as exc:
            raise type(exc)(f"unit {i + 1} ({labels[i]}): {exc}") from exc
        units.append(unit)
    return FallModel(
        units=units,
        lam=odl_cfg.lam,
        c2=gnc_cfg.c2,
        alpha=alpha,
        temporal=temporal if temporal is not None else TemporalParams(),
        w_st=w_st,
        provenance=dict(provenance or {}),
    )
