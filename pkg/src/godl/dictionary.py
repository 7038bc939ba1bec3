"""Online dictionary learning on (optionally weighted) column sets.

The dictionary step is the block-coordinate sweep of Mairal et al. on the
surrogate ``-2 tr(E^T D) + tr(D F D^T)`` with ``E = Y X^T`` and ``F = X X^T``.
Plain ODL is the special case where every column weight is one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .sparse_coding import FistaConfig, fista_batch

UNUSED_ATOM_TOL = 1e-10
NORM_SLACK = 1e-12


@dataclass
class Dictionary:
    atoms: np.ndarray
    unit_index: int = 1

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=float)
        if self.atoms.ndim != 2:
            raise ValueError("atoms must be a 2-D matrix")
        if not np.all(np.isfinite(self.atoms)):
            raise ValueError("atoms must be finite")
        norms = np.linalg.norm(self.atoms, axis=0)
        if np.any(norms > 1.0 + NORM_SLACK):
            raise ValueError(f"atom norm {norms.max():.17g} exceeds 1")

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]

    @property
    def dim(self) -> int:
        return self.atoms.shape[0]


@dataclass
class SurrogateStats:
    E: np.ndarray
    F: np.ndarray

    @classmethod
    def from_codes(cls, Y_hat, X_hat) -> "SurrogateStats":
        return cls(E=Y_hat @ X_hat.T, F=X_hat @ X_hat.T)

    def value(self, D) -> float:
        D = D.atoms if isinstance(D, Dictionary) else D
        return float(-2.0 * np.sum(self.E * D) + np.sum((D @ self.F) * D))


@dataclass
class OdlConfig:
    lam: float = 0.01
    inner_max_iter: int = 20
    conv_tol: float = 1e-5
    atom_dims: List[int] = field(default_factory=lambda: [4, 5, 6, 10, 13])
    fista: FistaConfig = field(default_factory=FistaConfig)

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.inner_max_iter < 1:
            raise ValueError("inner_max_iter must be >= 1")
        if any(int(k) < 1 for k in self.atom_dims):
            raise ValueError("atom dimensions must be positive")
        self.atom_dims = [int(k) for k in self.atom_dims]


def init_dictionary(columns, k: int, seed: int, unit_index: int = 1) -> Dictionary:
    """Draw ``k`` data columns as initial atoms, rescaled to unit norm."""
    Y = np.asarray(columns, dtype=float)
    n = Y.shape[1]
    if n < 1:
        raise ValueError("need at least one column")
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=k, replace=n < k)
    D = Y[:, idx].copy()
    for j in range(k):
        norm = np.linalg.norm(D[:, j])
        if norm > 0.0:
            D[:, j] /= norm
        else:
            g = rng.standard_normal(D.shape[0])
            D[:, j] = g / np.linalg.norm(g)
    return Dictionary(D, unit_index)


def update_coefficients(D: Dictionary, Y_hat, lam_w, cfg: FistaConfig = FistaConfig(), X0=None):
    """Sparse-code every column of ``Y_hat`` against ``D`` with its own lambda."""
    Y_hat = np.asarray(Y_hat, dtype=float)
    lam_w = np.asarray(lam_w, dtype=float)
    if lam_w.ndim == 0:
        lam_w = np.full(Y_hat.shape[1], float(lam_w))
    if lam_w.shape[0] != Y_hat.shape[1]:
        raise ValueError("one regularizer per column required")
    return fista_batch(D.atoms, Y_hat, lam_w, cfg, X0)


def update_dictionary(D: Dictionary, stats: SurrogateStats) -> Dictionary:
    """One sweep of projected block-coordinate descent over the atoms."""
    A = D.atoms.copy()
    E, F = stats.E, stats.F
    for j in range(A.shape[1]):
        fjj = F[j, j]
        if fjj <= UNUSED_ATOM_TOL:
            continue
        u = (E[:, j] - A @ F[:, j]) / fjj + A[:, j]
        A[:, j] = u / max(1.0, float(np.linalg.norm(u)))
    return Dictionary(A, D.unit_index)


def weighted_objective(D: Dictionary, Y_hat, X_hat, lam_w) -> float:
    """Sum over columns of ``0.5||y_hat - D x_hat||^2 + lam_w ||x_hat||_1``."""
    R = Y_hat - D.atoms @ X_hat
    return float(0.5 * np.sum(R * R) + np.sum(np.asarray(lam_w) * np.abs(X_hat).sum(axis=0)))


@dataclass
class OdlResult:
    dictionary: Dictionary
    codes: np.ndarray
    trace: List[float]
    n_iter: int


def odl_fit(Y_hat, lam_w, D0: Dictionary, cfg: OdlConfig, X0=None) -> OdlResult:
    """Alternate sparse coding and dictionary sweeps until the objective settles.

    Coefficients are warm-started from the previous iterate, which keeps the
    objective trace non-increasing.
    """
    Y_hat = np.asarray(Y_hat, dtype=float)
    lam_w = np.broadcast_to(np.asarray(lam_w, dtype=float), (Y_hat.shape[1],))
    D = D0
    X = X0
    trace: List[float] = []
    it = 0
    for it in range(1, cfg.inner_max_iter + 1):
        X = update_coefficients(D, Y_hat, lam_w, cfg.fista, X)
        D = update_dictionary(D, SurrogateStats.from_codes(Y_hat, X))
        obj = weighted_objective(D, Y_hat, X, lam_w)
        trace.append(obj)
        if len(trace) > 1:
            prev = trace[-2]
            if abs(prev - obj) <= cfg.conv_tol * max(abs(prev), 1e-300):
                break
    return OdlResult(D, X, trace, it)


def odl_baseline(Y, D0: Dictionary, cfg: OdlConfig) -> OdlResult:
    """Plain ODL: every column carries weight one."""
    Y = np.asarray(Y, dtype=float)
    return odl_fit(Y, np.full(Y.shape[1], cfg.lam), D0, cfg)
