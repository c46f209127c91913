"""Multicast beamformers: zero-forcing and successive convex approximation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import cvxpy as cp
import numpy as np

from .channel import ChannelRealization
from .coefficients import CoefficientMatrix, require_decodable
from .combinatorics import GroupIndex
from .errors import DegenerateChannelError, InitInfeasibleError, InvalidExpansionPointError

log = logging.getLogger(__name__)

POWER_SLACK = 1e-6
GAMMA_FLOOR = 1e-6


@dataclass
class BeamformerSet:
    """``W[i]`` is the beamformer of ``index.groups[i]`` (amplitude in sqrt(W))."""

    W: np.ndarray
    index: GroupIndex

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=complex)

    def w(self, group) -> np.ndarray:
        return self.W[self.index.column(group)]

    def power(self, A: Optional[CoefficientMatrix] = None) -> float:
        """Transmit energy summed over sub-intervals (plain ``sum ||w_T||^2`` if ``A`` is None)."""
        norms = np.sum(np.abs(self.W) ** 2, axis=1)
        if A is None:
            return float(norms.sum())
        return float(A.column_energy() @ norms)

    def gains(self, channel: ChannelRealization) -> np.ndarray:
        """``G[i, j] = h_{users[i]}^H w_{groups[j]}`` for the serving set users."""
        H = channel.restrict(self.index.serving_set).H
        return H.conj() @ self.W.T

    def rotated(self, phases) -> "BeamformerSet":
        return BeamformerSet(self.W * np.asarray(phases)[:, None], self.index)


@dataclass
class ScaTrace:
    objective: list[float] = field(default_factory=list)  # r per iterate, bits/s/Hz
    feasible: list[bool] = field(default_factory=list)
    status: list[str] = field(default_factory=list)
    failed: bool = False

    @property
    def iterations(self) -> int:
        return len(self.objective) - 1

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iter,r,feasible\n")
            for i, (r, ok) in enumerate(zip(self.objective, self.feasible)):
                fh.write(f"{i},{r:.10g},{int(ok)}\n")


# --------------------------------------------------------------------------
# zero forcing


def null_direction(rows: np.ndarray, L: int, label=None) -> np.ndarray:
    """Unit vector ``w`` with ``rows.conj() @ w = 0``; first nonzero entry real positive.

    ``rows`` holds the channels to null (one per row). The null space must be
    one-dimensional.
    """
    rows = np.atleast_2d(rows) if len(rows) else np.zeros((0, L), dtype=complex)
    if rows.shape[0] == 0:
        if L != 1:
            raise DegenerateChannelError(f"group {label}: nothing to null but L={L} > 1")
        return np.ones(1, dtype=complex)
    M = rows.conj()
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > max(M.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)))
    if L - rank != 1:
        raise DegenerateChannelError(
            f"group {label}: zero-forcing null space has dimension {L - rank}, expected 1"
        )
    w = Vh[-1].conj()
    lead = w[np.flatnonzero(np.abs(w) > 1e-12)[0]]
    return w * (abs(lead) / lead) / np.linalg.norm(w)


def zf_directions(channel: ChannelRealization, index: GroupIndex) -> np.ndarray:
    """Unit ZF directions for every group, nulling the served users outside it."""
    ch = channel.restrict(index.serving_set)
    L = ch.L
    dirs = np.empty((index.n_groups, L), dtype=complex)
    for i, group in enumerate(index.groups):
        others = [j for j, k in enumerate(ch.users) if k not in group]
        dirs[i] = null_direction(ch.H[others], L, label=group)
    return dirs


def zf_beamformers(
    channel: ChannelRealization,
    index: GroupIndex,
    A: Optional[CoefficientMatrix],
    P_T: float,
    N0: float = 1.0,
) -> BeamformerSet:
    """Equal-power ZF multicast beamformers meeting the power budget with equality.

    With ``A`` the budget is ``delta * P_T`` spread over the sub-intervals;
    with ``A=None`` (single-slot transmission) it is ``P_T``. ``N0`` does not
    affect ZF and is accepted for interface symmetry.
    """
    dirs = zf_directions(channel, index)
    if A is None:
        scale = np.sqrt(P_T / index.n_groups)
    else:
        scale = np.sqrt(index.delta * P_T / A.column_energy().sum())
    return BeamformerSet(scale * dirs, index)


# --------------------------------------------------------------------------
# SCA


def taylor_lower_bound(w, gamma, w_bar, gamma_bar, c, h) -> float:
    """First-order expansion of ``|c h^H w|^2 / gamma`` around ``(w_bar, gamma_bar)``.

    The function is jointly convex, so the expansion is a global under-estimator.
    """
    if gamma_bar <= 0:
        raise InvalidExpansionPointError(f"expansion point gamma_bar={gamma_bar} must be positive")
    h = np.asarray(h, dtype=complex)
    s_bar = c * np.vdot(h, w_bar)
    s = c * np.vdot(h, w)
    return float(2 * np.real(np.conj(s_bar) * s) / gamma_bar - abs(s_bar) ** 2 / gamma_bar**2 * gamma)


@dataclass
class ScaOptions:
    max_iters: int = 50
    tol: float = 1e-4
    init: Optional[BeamformerSet] = None
    solver: str = "CLARABEL"


def _all_sinrs(A, channel, bf, N0) -> np.ndarray:
    from .rates import sinr_table

    return np.concatenate([v for v in sinr_table(A, channel, bf, N0).values()])


class _ScaSubproblem:
    """Convexified max-min SINR problem, built once and re-parametrized per iteration.

    Works in power-normalized units (budget ``delta``, noise ``N0 / P_T``).
    """

    def __init__(self, A: CoefficientMatrix, channel: ChannelRealization, noise: float):
        index = A.index
        ch = channel.restrict(index.serving_set)
        self.A, self.index, self.ch = A, index, ch
        n_groups, L = index.n_groups, ch.L
        self.w = cp.Variable((n_groups, L), complex=True)
        self.g = cp.Variable(nonneg=True)
        self.rows = []  # (user row, stream n, intended column, coupling)
        constraints = []
        self.p_lin = []
        self.p_quad = []
        for i, k in enumerate(ch.users):
            cpl = A.coupling(k)
            h = ch.H[i]
            for n, col in enumerate(index.intended[k]):
                lin = cp.Parameter(L, complex=True)
                quad = cp.Parameter(nonneg=True)
                interf = [
                    cpl.interference[n, m] * (h.conj() @ self.w[mcol])
                    for m, mcol in enumerate(index.interfering[k])
                    if abs(cpl.interference[n, m]) > 1e-12
                ]
                rhs = noise * cpl.noise[n]
                if interf:
                    rhs = rhs + cp.sum_squares(cp.hstack(interf))
                constraints.append(2 * cp.real(lin @ self.w[col]) - quad * self.g >= rhs)
                self.p_lin.append(lin)
                self.p_quad.append(quad)
                self.rows.append((i, n, col, cpl))
        weights = np.sqrt(A.column_energy())
        constraints.append(cp.sum_squares(cp.multiply(weights[:, None], self.w)) <= index.delta)
        self.problem = cp.Problem(cp.Maximize(self.g), constraints)

    def expand(self, W_bar: np.ndarray, gamma_bar: np.ndarray) -> None:
        for (i, n, col, cpl), lin, quad, gb in zip(self.rows, self.p_lin, self.p_quad, gamma_bar):
            h = self.ch.H[i]
            c = cpl.signal
            s_bar = c * (h.conj() @ W_bar[col])
            # 2 Re{conj(s_bar) c h^H w} / gb  ==  2 Re{lin @ w}
            lin.value = np.conj(s_bar) * c * h.conj() / gb
            quad.value = abs(s_bar) ** 2 / gb**2

    def solve(self, solver: str) -> Optional[np.ndarray]:
        try:
            self.problem.solve(solver=solver)
        except cp.SolverError as exc:
            log.warning("SCA subproblem solver error: %s", exc)
            return None
        if self.problem.status not in ("optimal", "optimal_inaccurate") or self.w.value is None:
            return None
        return np.array(self.w.value)


def sca_optimize(
    channel: ChannelRealization,
    index: GroupIndex,
    A: CoefficientMatrix,
    P_T: float,
    N0: float = 1.0,
    opts: Optional[ScaOptions] = None,
) -> tuple[BeamformerSet, ScaTrace]:
    """Max-min SINR beamformers for fixed ``A`` by successive convex approximation.

    Each iteration maximizes the common SINR level over the Taylor-linearized
    SINR constraints, with the expansion point set to the previous iterate
    and its true SINRs. Iterates are kept only when the true min rate does
    not drop, so the returned trace is non-decreasing.
    """
    opts = opts or ScaOptions()
    require_decodable(A)
    bf = opts.init if opts.init is not None else zf_beamformers(channel, index, A, P_T, N0)
    budget = index.delta * P_T
    if bf.power(A) > budget * (1 + POWER_SLACK):
        raise InitInfeasibleError(f"initial beamformers use {bf.power(A):.6g} > budget {budget:.6g}")

    scale = np.sqrt(P_T)
    sub = _ScaSubproblem(A, channel, N0 / P_T)
    trace = ScaTrace()

    W = bf.W / scale
    gam = _all_sinrs(A, channel, bf, N0)
    r = float(np.log2(1 + gam.min()))
    trace.objective.append(r)
    trace.feasible.append(True)
    trace.status.append("init")

    for _ in range(opts.max_iters):
        sub.expand(W, np.maximum(gam, GAMMA_FLOOR))
        W_new = sub.solve(opts.solver)
        if W_new is None:
            trace.failed = True
            trace.status.append(sub.problem.status or "error")
            break
        cand = BeamformerSet(W_new * scale, index)
        used = cand.power(A)
        if used > budget:
            cand = BeamformerSet(cand.W * np.sqrt(budget / used), index)
        gam_new = _all_sinrs(A, channel, cand, N0)
        r_new = float(np.log2(1 + gam_new.min()))
        if r_new < r:
            trace.status.append("no-improvement")
            break
        W, gam, bf = cand.W / scale, gam_new, cand
        trace.objective.append(r_new)
        trace.feasible.append(True)
        trace.status.append(sub.problem.status)
        converged = r_new - r < opts.tol
        r = r_new
        if converged:
            break
    return bf, trace
