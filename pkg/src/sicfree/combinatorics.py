"""Serving sets, multicast groups and per-user group partitions.

Users are identified by positive integers (1-based, as in the usual
coded-caching notation). Groups are sorted member tuples and are always
listed in lexicographic order, which fixes the column order of every
coefficient matrix built on top of a :class:`GroupIndex`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Optional, Sequence

from .errors import InvalidParametersError

MulticastGroup = tuple[int, ...]


@dataclass(frozen=True)
class SystemParams:
    """Network dimensions and budgets.

    ``M`` and ``N`` (cache and library size in files) are optional; when
    both are given ``t`` must equal ``K * M / N`` exactly.
    """

    K: int
    L: int
    t: int
    theta: float = 1.0
    F: float = 1.0
    P_T: float = 1.0
    N0: float = 1.0
    M: Optional[float] = None
    N: Optional[float] = None

    def __post_init__(self):
        if self.t < 0 or int(self.t) != self.t:
            raise InvalidParametersError(f"t must be a nonnegative integer, got {self.t}")
        if self.L < 1:
            raise InvalidParametersError(f"L must be >= 1, got {self.L}")
        if self.t + self.L < 2 or self.K < self.t + self.L:
            raise InvalidParametersError(
                f"need K >= t + L >= 2, got K={self.K}, t={self.t}, L={self.L}"
            )
        if self.P_T <= 0 or self.N0 <= 0:
            raise InvalidParametersError("P_T and N0 must be positive")
        if (self.M is None) != (self.N is None):
            raise InvalidParametersError("M and N must be given together")
        if self.M is not None:
            if self.N <= 0 or not 0 <= self.M <= self.N:
                raise InvalidParametersError(f"invalid cache/library sizes M={self.M}, N={self.N}")
            if self.K * self.M != self.t * self.N:
                raise InvalidParametersError(
                    f"t={self.t} does not equal K*M/N={self.K * self.M / self.N}"
                )

    @property
    def cache_ratio(self) -> float:
        """Fraction M/N of the library each user caches (t/K if M, N absent)."""
        if self.M is not None:
            return self.M / self.N
        return self.t / self.K

    @property
    def delta(self) -> int:
        return comb(self.t + self.L - 1, self.t)

    @property
    def delta_bar(self) -> int:
        return comb(self.t + self.L - 1, self.t + 1)

    @property
    def snr(self) -> float:
        return self.P_T / self.N0


@dataclass(frozen=True)
class GroupIndex:
    """All multicast groups of one serving set with per-user partitions.

    ``intended[k]`` lists the positions (into ``groups``) of the groups
    containing user ``k``; ``interfering[k]`` lists the others. Both keep the
    global group order.
    """

    serving_set: tuple[int, ...]
    t: int
    groups: tuple[MulticastGroup, ...]
    intended: dict[int, tuple[int, ...]] = field(repr=False)
    interfering: dict[int, tuple[int, ...]] = field(repr=False)

    @property
    def L(self) -> int:
        return len(self.serving_set) - self.t

    @property
    def delta(self) -> int:
        return comb(len(self.serving_set) - 1, self.t)

    @property
    def delta_bar(self) -> int:
        return comb(len(self.serving_set) - 1, self.t + 1)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def column(self, group: Sequence[int]) -> int:
        """Position of ``group`` in the global group order."""
        key = tuple(sorted(group))
        try:
            return self._columns[key]
        except KeyError:
            raise KeyError(f"{key} is not a multicast group of {self.serving_set}") from None

    @property
    def _columns(self) -> dict[MulticastGroup, int]:
        cols = self.__dict__.get("_column_cache")
        if cols is None:
            cols = {g: i for i, g in enumerate(self.groups)}
            object.__setattr__(self, "_column_cache", cols)
        return cols

    def labels(self) -> list[str]:
        return [group_label(g) for g in self.groups]


def group_label(group: Sequence[int]) -> str:
    """Column label such as ``a_12``; ids above 9 are dot-separated (``a_3.12``)."""
    if all(0 <= u <= 9 for u in group):
        return "a_" + "".join(str(u) for u in group)
    return "a_" + ".".join(str(u) for u in group)


def enumerate_multicast_groups(serving_set: Sequence[int], t: int) -> GroupIndex:
    users = tuple(sorted(serving_set))
    if len(set(users)) != len(users):
        raise InvalidParametersError(f"serving set has repeated users: {serving_set}")
    if t < 0 or len(users) < t + 1:
        raise InvalidParametersError(
            f"serving set of size {len(users)} cannot hold groups of size t+1={t + 1}"
        )
    groups = tuple(itertools.combinations(users, t + 1))
    intended = {}
    interfering = {}
    for k in users:
        intended[k] = tuple(i for i, g in enumerate(groups) if k in g)
        interfering[k] = tuple(i for i, g in enumerate(groups) if k not in g)
    return GroupIndex(users, t, groups, intended, interfering)


def user_group_partition(k: int, index: GroupIndex) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return ``(intended, interfering)`` group positions for user ``k``."""
    if k not in index.intended:
        raise KeyError(f"user {k} is not in serving set {index.serving_set}")
    return index.intended[k], index.interfering[k]


def enumerate_serving_sets(K: int, t: int, L: int) -> Iterator[tuple[int, ...]]:
    """Lazily yield all ``C(K, t+L)`` serving sets of users ``1..K`` in lexicographic order."""
    if t < 0 or L < 1 or K < t + L:
        raise InvalidParametersError(f"need K >= t + L, got K={K}, t={t}, L={L}")
    return itertools.combinations(range(1, K + 1), t + L)


def count_serving_sets(K: int, t: int, L: int) -> int:
    if K < t + L:
        raise InvalidParametersError(f"need K >= t + L, got K={K}, t={t}, L={L}")
    return comb(K, t + L)
