"""I.i.d. Rayleigh channels and successive-projection user ordering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParametersError


@dataclass
class ChannelRealization:
    """``H[i]`` is the channel vector of ``users[i]``; received signal is ``h^H w``."""

    H: np.ndarray
    users: tuple[int, ...]

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        if self.users is None:
            self.users = tuple(range(1, self.H.shape[0] + 1))
        self.users = tuple(self.users)
        if len(self.users) != self.H.shape[0]:
            raise InvalidParametersError("one user id per channel row required")
        if not np.all(np.isfinite(self.H)):
            raise InvalidParametersError("channel matrix has non-finite entries")

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def L(self) -> int:
        return self.H.shape[1]

    def h(self, k: int) -> np.ndarray:
        return self.H[self.users.index(k)]

    def restrict(self, users: Sequence[int]) -> "ChannelRealization":
        rows = [self.users.index(k) for k in users]
        return ChannelRealization(self.H[rows], tuple(users))


def draw_channel(K: int, L: int, seed=None, users: Optional[Sequence[int]] = None) -> ChannelRealization:
    """CN(0, 1) entries, deterministic given ``seed`` (int, SeedSequence or Generator)."""
    if K < 1 or L < 1:
        raise InvalidParametersError(f"K and L must be >= 1, got K={K}, L={L}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    H = (rng.standard_normal((K, L)) + 1j * rng.standard_normal((K, L))) / np.sqrt(2)
    return ChannelRealization(H, tuple(users) if users is not None else None)


@dataclass(frozen=True)
class UserOrdering:
    """``order`` lists users as picked by successive projection (strongest first).

    ``residuals[i]`` is the residual energy of ``order[i]`` when it was picked.
    """

    order: tuple[int, ...]
    residuals: tuple[float, ...]
    reverse: bool = True

    @property
    def priority_for_sparse(self) -> tuple[int, ...]:
        return priority_from_order(self, reverse=self.reverse)


def successive_projection_order(channel: ChannelRealization, reverse: bool = True) -> UserOrdering:
    """Greedy selection of the user with maximal energy outside the span of those already picked.

    The projector uses a pseudo-inverse, so collinear users simply get zero
    residual. Ties go to the smallest user id.
    """
    H = channel.H
    users = channel.users
    remaining = sorted(range(len(users)), key=lambda i: users[i])
    picked: list[int] = []
    residuals: list[float] = []
    L = channel.L
    # residuals at rounding level count as exact zeros so they tie
    floor = 1e-10 * max(float(np.max(np.sum(np.abs(H) ** 2, axis=1))), np.finfo(float).tiny)
    while remaining:
        if picked:
            Hbar = H[picked].T  # L x |picked|, columns are channel vectors
            P = np.eye(L) - Hbar @ np.linalg.pinv(Hbar)
        else:
            P = np.eye(L)
        energy = [float(np.real(H[i].conj() @ P @ H[i])) for i in remaining]
        energy = [e if e > floor else 0.0 for e in energy]
        best = int(np.argmax(energy))  # first maximum = smallest id
        picked.append(remaining.pop(best))
        residuals.append(max(energy[best], 0.0))
    return UserOrdering(tuple(users[i] for i in picked), tuple(residuals), reverse)


def priority_from_order(ordering: UserOrdering, reverse: bool = True) -> tuple[int, ...]:
    """Sparse-generation priority: the reversed projection order by default.

    The last-picked user (largest spatial overlap) is served first by the
    greedy construction and so gets the least-penalized ``A_k``; the
    strongest user is served last. ``reverse=False`` hands the projection
    order through unchanged.
    """
    return tuple(reversed(ordering.order)) if reverse else tuple(ordering.order)


def read_channel_csv(path) -> ChannelRealization:
    """K rows of 2L reals, interleaved ``re, im`` per antenna; ``#`` lines are skipped."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise InvalidParametersError(f"{path}: non-numeric channel entry in {line!r}") from None
    if not rows:
        raise InvalidParametersError(f"{path}: no channel rows")
    if len({len(r) for r in rows}) != 1 or len(rows[0]) % 2:
        raise InvalidParametersError(f"{path}: rows must all have the same even number of columns")
    arr = np.array(rows)
    return ChannelRealization(arr[:, 0::2] + 1j * arr[:, 1::2], None)


def write_channel_csv(channel: ChannelRealization, path) -> None:
    with open(path, "w") as fh:
        for row in channel.H:
            fh.write(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")
