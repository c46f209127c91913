"""Numerical equiangular frames.

Alternating projection on the Gram matrix: project onto Hermitian matrices
with unit diagonal and off-diagonal magnitude equal to the Welch bound
(phases kept), then onto Gram matrices of unit-norm tight frames (rank
``d``, eigenvalues ``n/d``). The iterate with the smallest coherence spread
is returned; when no ETF exists for ``(d, n)`` the spread stalls above
``tol`` and ``converged`` is False.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParametersError


@dataclass
class FrameResult:
    vectors: np.ndarray  # d x n, unit-norm columns
    coherence: float  # max pairwise |<a_i, a_j>|
    spread: float  # max - min pairwise |<a_i, a_j>|
    welch_bound: float
    converged: bool
    iterations: int


def welch_bound(d: int, n: int) -> float:
    if n <= 1:
        return 0.0
    return float(np.sqrt(max(n - d, 0) / (d * (n - 1))))


def coherence_stats(X: np.ndarray) -> tuple[float, float]:
    """Return ``(max, max - min)`` of the pairwise absolute inner products of unit columns."""
    n = X.shape[1]
    if n < 2:
        return 0.0, 0.0
    G = np.abs(X.conj().T @ X)
    off = G[np.triu_indices(n, 1)]
    return float(off.max()), float(off.max() - off.min())


def _normalize(X: np.ndarray) -> np.ndarray:
    return X / np.linalg.norm(X, axis=0, keepdims=True)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def equiangular_frame(d: int, n: int, tol: float = 1e-6, max_iters: int = 5000, seed=0) -> FrameResult:
    if not 1 <= d <= n:
        raise InvalidParametersError(f"need 1 <= d <= n, got d={d}, n={n}")
    mu = welch_bound(d, n)
    if d == n:
        return FrameResult(np.eye(d, dtype=complex), 0.0, 0.0, 0.0, True, 0)

    rng = _as_rng(seed)
    X = _normalize(rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n)))
    best = X
    best_coh, best_spread = coherence_stats(X)
    off = ~np.eye(n, dtype=bool)

    it = 0
    for it in range(1, max_iters + 1):
        G = X.conj().T @ X
        mag = np.abs(G)
        phase = np.where(mag > 0, G / np.where(mag > 0, mag, 1.0), 1.0)
        S = np.where(off, mu * phase, 1.0)
        vals, vecs = np.linalg.eigh(S)
        U = vecs[:, -d:]
        X = _normalize(np.sqrt(n / d) * U.conj().T)
        coh, spread = coherence_stats(X)
        if spread < best_spread or (spread == best_spread and coh < best_coh):
            best, best_coh, best_spread = X, coh, spread
        if best_spread <= tol:
            break

    return FrameResult(best, best_coh, best_spread, mu, best_spread <= tol, it)
