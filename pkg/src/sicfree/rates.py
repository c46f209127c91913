"""SINRs, rates and baseline schemes.

Rates are in bits per channel use (log base 2). A sub-interval has the
same length as a single-slot transmission, so the linear scheme spends
``delta`` channel uses per coded symbol it delivers to each user. See
:func:`interval_rate_report` for the goodput definitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .beamforming import BeamformerSet, null_direction, zf_beamformers
from .channel import ChannelRealization
from .coefficients import (
    COND_LIMIT,
    DET_THRESHOLD,
    CoefficientMatrix,
    interference_matrix,
    user_submatrix,
)
from .combinatorics import GroupIndex
from .errors import DecodabilityError, InvalidParametersError


def stream_sinr(A: CoefficientMatrix, k: int, n: int, channel: ChannelRealization, bf: BeamformerSet, N0: float) -> float:
    """Determinant-form SINR of stream ``n`` (0-based) at user ``k``."""
    if not 0 <= n < A.index.delta:
        raise IndexError(f"stream index {n} out of range [0, {A.index.delta})")
    cpl = A.coupling(k)
    h = channel.h(k)
    g_int = h.conj() @ bf.W[list(A.index.interfering[k])].T
    g_sig = h.conj() @ bf.W[A.index.intended[k][n]]
    num = abs(cpl.signal * g_sig) ** 2
    den = float(np.sum(np.abs(cpl.interference[n] * g_int) ** 2)) + N0 * cpl.noise[n]
    return float(num / den)


def sinr_table(A: CoefficientMatrix, channel: ChannelRealization, bf: BeamformerSet, N0: float) -> dict[int, np.ndarray]:
    """All determinant-form SINRs, ``{user: array over streams}``."""
    G = bf.gains(channel)
    out = {}
    for i, k in enumerate(A.index.serving_set):
        cpl = A.coupling(k)
        g_sig = G[i, list(A.index.intended[k])]
        g_int = G[i, list(A.index.interfering[k])]
        num = np.abs(cpl.signal * g_sig) ** 2
        den = np.sum(np.abs(cpl.interference * g_int[None, :]) ** 2, axis=1) + N0 * cpl.noise
        out[k] = num / den
    return out


def _require_user_decodable(A: CoefficientMatrix, k: int) -> None:
    Ak = user_submatrix(A, k)
    if not (abs(np.linalg.det(Ak)) > DET_THRESHOLD and np.linalg.cond(Ak) < COND_LIMIT):
        raise DecodabilityError(f"A_{k} is singular")


def _combining_row(A: CoefficientMatrix, k: int, n: int) -> np.ndarray:
    Ak = user_submatrix(A, k)
    try:
        return np.linalg.solve(Ak.T, np.eye(Ak.shape[0])[n])
    except np.linalg.LinAlgError:
        raise DecodabilityError(f"A_{k} is singular") from None


def oracle_sinr_via_elimination(
    A: CoefficientMatrix, k: int, n: int, channel: ChannelRealization, bf: BeamformerSet, N0: float
) -> float:
    """SINR after applying the linear combiner that cancels user ``k``'s other intended streams.

    The combiner ``c`` solves ``c^T A_k = e_n^T`` directly; no determinant
    is evaluated.
    """
    _require_user_decodable(A, k)
    c = _combining_row(A, k, n)
    h = channel.h(k)
    sig = h.conj() @ bf.W[A.index.intended[k][n]] * (c @ user_submatrix(A, k)[:, n])
    Bk = interference_matrix(A, k)
    g_int = h.conj() @ bf.W[list(A.index.interfering[k])].T
    leak = (c @ Bk) * g_int
    return float(abs(sig) ** 2 / (np.sum(np.abs(leak) ** 2) + N0 * np.sum(np.abs(c) ** 2)))


@dataclass
class DecodeResult:
    transmitted: np.ndarray  # n_groups x n_symbols
    estimates: dict[int, np.ndarray]  # user -> delta x n_symbols, rows follow intended groups
    max_residual: dict[int, float]
    empirical_sinr: dict[int, np.ndarray]


def decode_oracle(
    A: CoefficientMatrix,
    channel: ChannelRealization,
    bf: BeamformerSet,
    seed=None,
    noise_on: bool = True,
    N0: float = 1.0,
    n_symbols: int = 1,
) -> DecodeResult:
    """Simulate the sub-interval transmissions and decode by solving each user's linear system.

    Every user treats the multicast streams it does not want as noise; with
    interference nulled (e.g. ZF beamformers) and ``noise_on=False`` the
    intended symbols are recovered exactly.
    """
    index = A.index
    for k in index.serving_set:
        _require_user_decodable(A, k)
    rng = np.random.default_rng(seed)
    X = (rng.standard_normal((index.n_groups, n_symbols)) + 1j * rng.standard_normal((index.n_groups, n_symbols))) / np.sqrt(2)
    G = bf.gains(channel)
    estimates, residual, emp = {}, {}, {}
    for i, k in enumerate(index.serving_set):
        # y[d] = sum_T A_T(d) h_k^H w_T X_T + z[d]
        y = A.entries @ (G[i][:, None] * X)
        if noise_on:
            y = y + np.sqrt(N0 / 2) * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
        cols = list(index.intended[k])
        M = user_submatrix(A, k) * G[i, cols][None, :]
        try:
            xhat = np.linalg.solve(M, y)
        except np.linalg.LinAlgError:
            raise DecodabilityError(f"A_{k} (with stream gains) is singular") from None
        err = xhat - X[cols]
        estimates[k] = xhat
        residual[k] = float(np.max(np.abs(err)))
        emp[k] = np.mean(np.abs(X[cols]) ** 2, axis=1) / np.maximum(np.mean(np.abs(err) ** 2, axis=1), 1e-300)
    return DecodeResult(X, estimates, residual, emp)


@dataclass
class RateReport:
    """Per-interval rate summary of the linear scheme.

    ``interval_goodput`` is ``delta * min_{k,n} rate[k][n]``: every user gets
    ``delta`` codewords at the common rate. ``per_use_goodput`` divides this by
    the ``delta`` sub-intervals the interval occupies, giving delivered bits
    per channel use comparable with single-slot schemes.
    """

    gamma: dict[int, np.ndarray]
    rate: dict[int, np.ndarray]
    user_min_rate: dict[int, float]
    delta: int

    @property
    def min_rate(self) -> float:
        return min(self.user_min_rate.values())

    @property
    def interval_goodput(self) -> float:
        return self.delta * self.min_rate

    @property
    def per_use_goodput(self) -> float:
        return self.min_rate


def interval_rate_report(A: CoefficientMatrix, channel: ChannelRealization, bf: BeamformerSet, N0: float) -> RateReport:
    gamma = sinr_table(A, channel, bf, N0)
    rate = {k: np.log2(1 + g) for k, g in gamma.items()}
    user_min = {k: float(r.min()) for k, r in rate.items()}
    return RateReport(gamma, rate, user_min, A.index.delta)


# --------------------------------------------------------------------------
# baselines


def mac_symmetric_rate(gains, N0: float) -> float:
    """Max common per-stream rate of a Gaussian MAC with SIC.

    ``min_S (1/|S|) log2(1 + sum_{n in S} g_n / N0)``; for each subset size
    the binding subset is made of the weakest streams.
    """
    g = np.sort(np.asarray(gains, dtype=float))
    if g.size == 0:
        raise InvalidParametersError("MAC needs at least one stream")
    sizes = np.arange(1, g.size + 1)
    return float(np.min(np.log2(1 + np.cumsum(g) / N0) / sizes))


def sic_zf_baseline_rate(channel: ChannelRealization, index: GroupIndex, N0: float, P_T: float) -> float:
    """Per-user goodput ``delta * min_k R_k`` of single-slot ZF multicasting with SIC receivers."""
    bf = zf_beamformers(channel, index, None, P_T, N0)
    G = np.abs(bf.gains(channel)) ** 2
    per_user = [mac_symmetric_rate(G[i, list(index.intended[k])], N0) for i, k in enumerate(index.serving_set)]
    return index.delta * min(per_user)


def no_cc_baseline_rate(channel: ChannelRealization, L: int, cache_ratio: float, N0: float, P_T: float) -> float:
    """Cyclic unicast ZF without coded multicasting.

    Slot ``s`` serves users ``s, ..., s+L-1`` (mod K) with equal power
    ``P_T / L`` and a common rate; the result is the per-user delivered rate
    ``(L/K) * mean_s(min rate)`` scaled by ``1 / (1 - M/N)`` for the locally
    cached part of each file.
    """
    K = channel.K
    if L > K or L != channel.L:
        raise InvalidParametersError(f"need L <= K and L equal to the antenna count, got L={L}, K={K}")
    if not 0 <= cache_ratio < 1:
        raise InvalidParametersError(f"cache ratio M/N must be in [0, 1), got {cache_ratio}")
    H = channel.H
    slots = 1 if K == L else K
    slot_rates = []
    for s in range(slots):
        served = [(s + j) % K for j in range(L)]
        rates = []
        for j in served:
            others = [u for u in served if u != j]
            w = np.sqrt(P_T / L) * null_direction(H[others], L, label=(j,))
            rates.append(np.log2(1 + abs(H[j].conj() @ w) ** 2 / N0))
        slot_rates.append(min(rates))
    return (L / K) * float(np.mean(slot_rates)) / (1 - cache_ratio)


def brute_force_mac_rate(gains, N0: float) -> float:
    """Subset-enumeration form of :func:`mac_symmetric_rate` (for cross-checks)."""
    g = list(gains)
    best = np.inf
    for size in range(1, len(g) + 1):
        for S in combinations(g, size):
            best = min(best, np.log2(1 + sum(S) / N0) / size)
    return float(best)
