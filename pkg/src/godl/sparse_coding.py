"""Lasso coefficient solver (monotone FISTA).

Every problem solved here has the form::

    minimize_x  0.5 * ||y - D x||_2^2 + lam * ||x||_1

The batch routine treats each column of ``Y`` as an independent problem with
its own regularizer; a column that has converged is frozen, so batching never
changes the answer of a column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite

_TINY = 1e-300


@dataclass(frozen=True)
class FistaConfig:
    max_iter: int = 300
    tol: float = 1e-7
    power_iter: int = 50
    power_tol: float = 1e-9

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")


@dataclass(frozen=True)
class LassoProblem:
    dictionary: np.ndarray
    target: np.ndarray
    lam: float

    def __post_init__(self):
        D = np.asarray(self.dictionary, dtype=float)
        y = np.asarray(self.target, dtype=float).ravel()
        if D.ndim != 2 or D.shape[0] < 1 or D.shape[1] < 1:
            raise ValueError("dictionary must be a non-empty 2-D matrix")
        if y.shape[0] != D.shape[0]:
            raise ValueError(f"target has {y.shape[0]} rows, dictionary has {D.shape[0]}")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not (np.all(np.isfinite(D)) and np.all(np.isfinite(y)) and np.isfinite(self.lam)):
            raise ValueError("problem data must be finite")
        object.__setattr__(self, "dictionary", D)
        object.__setattr__(self, "target", y)


def soft_threshold(v, t):
    """Elementwise ``sign(v) * max(|v| - t, 0)``; ``t`` may broadcast."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _shrink(v, t):
    # soft_threshold without argument checks, for the inner loop
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def lasso_objective(problem: LassoProblem, x) -> float:
    """``0.5 * ||y - D x||^2 + lam * ||x||_1``."""
    x = np.asarray(x, dtype=float).ravel()
    r = problem.target - problem.dictionary @ x
    return 0.5 * float(r @ r) + problem.lam * float(np.abs(x).sum())


def lipschitz_constant(D, n_iter=50, tol=1e-9) -> float:
    """Largest eigenvalue of ``D.T @ D`` by power iteration."""
    G = D.T @ D
    k = G.shape[0]
    v = np.full(k, 1.0 / np.sqrt(k))
    lam = 0.0
    for _ in range(n_iter):
        w = G @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - lam) <= tol * norm:
            lam = norm
            break
        lam = norm
    # Rayleigh quotient of the final iterate is the tighter lower bound
    return max(lam, float(v @ G @ v))


def _objectives(D, Y, X, lams):
    R = Y - D @ X
    return 0.5 * np.einsum("ij,ij->j", R, R) + lams * np.abs(X).sum(axis=0)


def _gram_objectives(G, DtY, yy, X, lams):
    # same value as _objectives, from k x k quantities only
    quad = np.einsum("ij,ij->j", X, 0.5 * (G @ X) - DtY)
    return 0.5 * yy + quad + lams * np.abs(X).sum(axis=0)


def fista_batch(D, Y, lams, cfg: FistaConfig = FistaConfig(), X0=None, return_info=False):
    """Solve one Lasso problem per column of ``Y``.

    Parameters
    ----------
    D : ndarray of shape (m, k)
    Y : ndarray of shape (m, n)
    lams : float or ndarray of shape (n,)
        Per-column regularizers.
    X0 : ndarray of shape (k, n), optional
        Warm start. Defaults to zeros. The returned objective never exceeds
        the objective at the warm start.

    Returns
    -------
    X : ndarray of shape (k, n)
    info : dict, only if ``return_info``; holds ``n_iter`` and the per-column
        objective ``trace`` (list of arrays, one per iteration).
    """
    D = np.asarray(D, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    m, k = D.shape
    n = Y.shape[1]
    lams = np.broadcast_to(np.asarray(lams, dtype=float), (n,)).copy()
    if np.any(lams < 0):
        raise ValueError("regularizers must be nonnegative")

    L = lipschitz_constant(D, cfg.power_iter, cfg.power_tol)
    L = max(L, 1e-12)
    G = D.T @ D
    DtY = D.T @ Y
    yy = np.einsum("ij,ij->j", Y, Y)

    X = np.zeros((k, n)) if X0 is None else np.array(X0, dtype=float, copy=True)
    Z = X.copy()
    t = np.ones(n)
    F = _gram_objectives(G, DtY, yy, X, lams)
    active = np.ones(n, dtype=bool)
    trace = [F.copy()] if return_info else None
    it = 0

    for it in range(1, cfg.max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            it -= 1
            break
        full = idx.size == n
        if full:
            Xa, Za, la, yya, DtYa, Fa = X, Z, lams, yy, DtY, F
        else:
            Xa, Za, la, yya, DtYa, Fa = X[:, idx], Z[:, idx], lams[idx], yy[idx], DtY[:, idx], F[idx]
        Xn = _shrink(Za - (G @ Za - DtYa) / L, la / L)
        Fn = _gram_objectives(G, DtYa, yya, Xn, la)

        restart = ~(Fn <= Fa)
        any_restart = bool(restart.any())
        if any_restart:
            r = np.flatnonzero(restart)
            Xr = Xa[:, r]
            Xn[:, r] = _shrink(Xr - (G @ Xr - DtYa[:, r]) / L, la[r] / L)
            Fn[r] = _gram_objectives(G, DtYa[:, r], yya[r], Xn[:, r], la[r])
            # a plain proximal step from the current iterate cannot ascend with
            # an exact L; if it does (L underestimated) keep the iterate
            stuck = r[~(Fn[r] <= Fa[r])]
            Xn[:, stuck] = Xa[:, stuck]
            Fn[stuck] = Fa[stuck]

        if not np.isfinite(Fn).all():
            raise NonFinite("FISTA iterates diverged")

        ta = t[idx]
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * ta * ta))
        Zn = Xn + ((ta - 1.0) / tn) * (Xn - Xa)
        if any_restart:
            Zn[:, restart] = Xn[:, restart]
            tn[restart] = 1.0

        rel = np.abs(Fa - Fn) / np.maximum(np.abs(Fa), _TINY)
        if full:
            X, Z, t, F = Xn, Zn, tn, Fn
        else:
            X[:, idx] = Xn
            Z[:, idx] = Zn
            t[idx] = tn
            F[idx] = Fn
        if trace is not None:
            trace.append(F.copy())
        active[idx[rel < cfg.tol]] = False

    if return_info:
        return X, {"n_iter": it, "trace": trace, "objective": _objectives(D, Y, X, lams)}
    return X


def fista_lasso(problem: LassoProblem, cfg: FistaConfig = FistaConfig(), x0=None):
    """Solve a single Lasso problem; returns the coefficient vector."""
    X0 = None if x0 is None else np.asarray(x0, dtype=float).reshape(-1, 1)
    X = fista_batch(problem.dictionary, problem.target[:, None], problem.lam, cfg, X0)
    return X[:, 0]
