"""Coefficient matrices for the sub-interval linear scheme.

A coefficient matrix has one row per sub-interval and one column per
multicast group (global lexicographic group order). User ``k`` decodes from
``A_k`` (the columns of its intended groups); interference couples in through
``B_k`` (the remaining columns).

Stream and interferer indices ``n`` and ``m`` are 0-based positions into the
intended and interfering group lists of a user.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .combinatorics import GroupIndex, MulticastGroup, enumerate_multicast_groups
from .errors import DecodabilityError, GenerationInfeasibleError, InvalidParametersError
from .etf import equiangular_frame

STRATEGIES = ("sparse", "equal_distance", "random")

MAX_SPARSE_DELTA = 14  # the pool has 2^delta - 1 vectors

DET_THRESHOLD = 1e-9
COND_LIMIT = 1e9


@dataclass
class CoefficientMatrix:
    entries: np.ndarray
    index: GroupIndex
    strategy: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        expected = (self.index.delta, self.index.n_groups)
        if self.entries.shape != expected:
            raise InvalidParametersError(
                f"coefficient matrix has shape {self.entries.shape}, expected {expected}"
            )

    @property
    def delta(self) -> int:
        return self.entries.shape[0]

    @property
    def column_map(self) -> dict[MulticastGroup, int]:
        return {g: i for i, g in enumerate(self.index.groups)}

    def column(self, group: Sequence[int]) -> np.ndarray:
        return self.entries[:, self.index.column(group)]

    def column_energy(self) -> np.ndarray:
        """``sum_d |A_T(d)|^2`` for every group, the per-group power weight."""
        return np.sum(np.abs(self.entries) ** 2, axis=0)

    @cached_property
    def _coupling(self) -> dict[int, "UserCoupling"]:
        return {k: _user_coupling(self, k) for k in self.index.serving_set}

    def coupling(self, k: int) -> "UserCoupling":
        """Determinant factors of user ``k`` (cached; matrices are treated as immutable)."""
        if k not in self.index.intended:
            raise KeyError(f"user {k} is not in serving set {self.index.serving_set}")
        return self._coupling[k]


@dataclass(frozen=True)
class UserCoupling:
    """Channel-independent SINR factors of one user.

    ``signal`` is ``det(A_k)``, ``interference[n, m]`` is ``det(B_{n,m})`` and
    ``noise[n]`` is the noise amplification of stream ``n``.
    """

    signal: complex
    interference: np.ndarray
    noise: np.ndarray


@dataclass
class DecodabilityReport:
    determinants: dict[int, float]
    condition_numbers: dict[int, float]
    passed: bool
    threshold: float = DET_THRESHOLD

    def failing_users(self) -> list[int]:
        return [
            k
            for k, d in self.determinants.items()
            if not (d > self.threshold and self.condition_numbers[k] < COND_LIMIT)
        ]


# --------------------------------------------------------------------------
# determinant views


def _check_user(A: CoefficientMatrix, k: int):
    if k not in A.index.intended:
        raise KeyError(f"user {k} is not in serving set {A.index.serving_set}")


def user_submatrix(A: CoefficientMatrix, k: int, order: str = "global") -> np.ndarray:
    """``A_k``: the intended columns of user ``k``.

    ``order="global"`` keeps the global group order. ``order="pivot"`` sorts
    the columns by their first nonzero row (ties in global order), which is
    the layout in which a sparse ``A_k`` is closest to the identity.
    """
    _check_user(A, k)
    cols = list(A.index.intended[k])
    if order == "pivot":
        cols = sorted(cols, key=lambda c: (_first_nonzero(A.entries[:, c]), c))
    elif order != "global":
        raise ValueError(f"unknown column order {order!r}")
    return A.entries[:, cols]


def _first_nonzero(col: np.ndarray) -> int:
    nz = np.flatnonzero(np.abs(col) > 0)
    return int(nz[0]) if nz.size else len(col)


def interference_matrix(A: CoefficientMatrix, k: int) -> np.ndarray:
    """``B_k``: the interfering columns of user ``k`` in global order."""
    _check_user(A, k)
    return A.entries[:, list(A.index.interfering[k])]


def interference_submatrix(A: CoefficientMatrix, k: int, n: int, m: int) -> np.ndarray:
    """``A_k`` with its ``n``-th column replaced by the ``m``-th column of ``B_k``."""
    _check_user(A, k)
    delta, delta_bar = A.index.delta, A.index.delta_bar
    if not 0 <= n < delta:
        raise IndexError(f"stream index {n} out of range [0, {delta})")
    if not 0 <= m < delta_bar:
        raise IndexError(f"interferer index {m} out of range [0, {delta_bar})")
    out = user_submatrix(A, k).copy()
    out[:, n] = A.entries[:, A.index.interfering[k][m]]
    return out


def noise_amplification(A: CoefficientMatrix, k: int, n: int) -> float:
    """``sum_j |det(N_{n,j})|^2``; equals 1 when ``delta == 1``."""
    _check_user(A, k)
    delta = A.index.delta
    if not 0 <= n < delta:
        raise IndexError(f"stream index {n} out of range [0, {delta})")
    if delta == 1:
        return 1.0
    rest = np.delete(user_submatrix(A, k), n, axis=1)
    minors = [np.linalg.det(np.delete(rest, j, axis=0)) for j in range(delta)]
    return float(np.sum(np.abs(minors) ** 2))


def _user_coupling(A: CoefficientMatrix, k: int) -> UserCoupling:
    delta, delta_bar = A.index.delta, A.index.delta_bar
    Ak = user_submatrix(A, k)
    Bk = interference_matrix(A, k)
    inter = np.zeros((delta, delta_bar), dtype=complex)
    for n in range(delta):
        for m in range(delta_bar):
            M = Ak.copy()
            M[:, n] = Bk[:, m]
            inter[n, m] = np.linalg.det(M)
    noise = np.array([noise_amplification(A, k, n) for n in range(delta)])
    return UserCoupling(complex(np.linalg.det(Ak)), inter, noise)


def validate_decodability(
    A: CoefficientMatrix, threshold: float = DET_THRESHOLD, cond_limit: float = COND_LIMIT
) -> DecodabilityReport:
    dets, conds = {}, {}
    for k in A.index.serving_set:
        Ak = user_submatrix(A, k)
        dets[k] = float(abs(np.linalg.det(Ak)))
        conds[k] = float(np.linalg.cond(Ak))
    passed = all(dets[k] > threshold and conds[k] < cond_limit for k in dets)
    return DecodabilityReport(dets, conds, passed, threshold)


def require_decodable(A: CoefficientMatrix) -> None:
    report = validate_decodability(A)
    if not report.passed:
        raise DecodabilityError(f"singular A_k for users {report.failing_users()}")


# --------------------------------------------------------------------------
# sparse (greedy) construction


def basis_pool(delta: int) -> list[int]:
    """All nonzero {0,1} vectors of length ``delta`` as bitmasks (bit ``l`` = row ``l``).

    Sorted by number of ones, then lexicographically by support, so the
    pool starts ``e1, ..., e_delta, e1+e2, e1+e3, ...``.
    """
    pool = []
    for weight in range(1, delta + 1):
        for support in combinations(range(delta), weight):
            pool.append(sum(1 << l for l in support))
    return pool


def _mask_to_vector(mask: int, delta: int) -> np.ndarray:
    return np.array([(mask >> l) & 1 for l in range(delta)], dtype=float)


def sparse_generate(index: GroupIndex, priority: Optional[Sequence[int]] = None) -> CoefficientMatrix:
    """Greedy sparse construction over {0,1} combinations of basis vectors.

    Users are visited in ``priority`` order (first = highest priority). Every
    still-unassigned group of the current user receives the first pool vector
    that is not forbidden for any of its members, where a member's forbidden
    set holds every pool vector in the span of the columns already assigned
    to it. Among the user's open groups, the one whose members have the
    largest combined forbidden set is served first; ties go to the group whose
    members come first in ``priority``.
    """
    users = index.serving_set
    if priority is None:
        priority = users
    priority = tuple(priority)
    if sorted(priority) != list(users):
        raise InvalidParametersError(f"priority {priority} is not a permutation of {users}")

    delta = index.delta
    if delta > MAX_SPARSE_DELTA:
        raise InvalidParametersError(
            f"sparse construction enumerates 2^delta vectors; delta={delta} exceeds {MAX_SPARSE_DELTA}"
        )
    pool = basis_pool(delta)
    pool_vectors = np.column_stack([_mask_to_vector(v, delta) for v in pool])
    columns: dict[int, list[np.ndarray]] = {k: [] for k in users}
    forbidden: dict[int, set[int]] = {k: set() for k in users}
    assigned: dict[int, int] = {}

    # groups are ranked by their members' priorities, so the construction
    # commutes with relabeling users; with priority (1, ..., K) this is the
    # global group order
    rank = {u: i for i, u in enumerate(priority)}
    group_key = {c: tuple(sorted(rank[u] for u in g)) for c, g in enumerate(index.groups)}

    for k in priority:
        open_groups = sorted((c for c in index.intended[k] if c not in assigned), key=group_key.__getitem__)
        while open_groups:
            blocked = [set().union(*(forbidden[u] for u in index.groups[c])) for c in open_groups]
            pick = max(range(len(open_groups)), key=lambda i: (len(blocked[i]), -i))
            col = open_groups.pop(pick)
            group = index.groups[col]
            choice = next((v for v in pool if v not in blocked[pick]), None)
            if choice is None:
                raise GenerationInfeasibleError(f"no admissible vector left for group {group}")
            assigned[col] = choice
            for u in group:
                columns[u].append(_mask_to_vector(choice, delta))
                forbidden[u] = _pool_in_span(pool, pool_vectors, columns[u])

    entries = np.column_stack([_mask_to_vector(assigned[c], delta) for c in range(index.n_groups)])
    A = CoefficientMatrix(entries, index, "sparse", {"priority": priority})
    report = validate_decodability(A)
    if not report.passed:
        raise GenerationInfeasibleError(
            f"greedy assignment left singular A_k for users {report.failing_users()}"
        )
    return A


def _pool_in_span(pool: list[int], pool_vectors: np.ndarray, cols: list[np.ndarray]) -> set[int]:
    Q, _ = np.linalg.qr(np.column_stack(cols))
    residual = pool_vectors - Q @ (Q.T @ pool_vectors)
    inside = np.linalg.norm(residual, axis=0) < 1e-9
    return {v for v, hit in zip(pool, inside) if hit}


# --------------------------------------------------------------------------
# reference strategies


def random_generate(
    index: GroupIndex,
    q: int = 17,
    rng_seed=None,
    max_retries: int = 100,
) -> CoefficientMatrix:
    """I.i.d. uniform entries from ``{0, ..., q-1}``, redrawn until every ``A_k`` is invertible.

    ``info["retries"]`` records how many draws were rejected.
    """
    if q < 2:
        raise InvalidParametersError(f"field size q must be >= 2, got {q}")
    rng = np.random.default_rng(rng_seed)
    shape = (index.delta, index.n_groups)
    for retries in range(max_retries + 1):
        entries = rng.integers(0, q, size=shape).astype(complex)
        A = CoefficientMatrix(entries, index, "random", {"q": q, "retries": retries})
        if validate_decodability(A).passed:
            return A
    raise GenerationInfeasibleError(
        f"no decodable random matrix over q={q} after {max_retries} redraws"
    )


def equal_distance_generate(
    index: GroupIndex,
    tol: float = 1e-6,
    max_iters: int = 5000,
    seed=0,
    max_reseeds: int = 20,
) -> CoefficientMatrix:
    """Unit-norm columns with (near-)equal pairwise coherence.

    The frame is re-seeded when some ``A_k`` comes out singular. When the
    coherence spread does not reach ``tol`` the best iterate is used and
    ``info["converged"]`` is False.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    for attempt, child in enumerate(ss.spawn(max_reseeds + 1)):
        frame = equiangular_frame(index.delta, index.n_groups, tol=tol, max_iters=max_iters, seed=child)
        info = {
            "coherence": frame.coherence,
            "spread": frame.spread,
            "welch_bound": frame.welch_bound,
            "converged": frame.converged,
            "iterations": frame.iterations,
            "reseeds": attempt,
        }
        A = CoefficientMatrix(frame.vectors, index, "equal_distance", info)
        if validate_decodability(A).passed:
            if not frame.converged:
                warnings.warn(
                    f"equal-distance frame ({index.delta}, {index.n_groups}) stopped with "
                    f"coherence spread {frame.spread:.3g} > tol",
                    RuntimeWarning,
                    stacklevel=2,
                )
            return A
    raise GenerationInfeasibleError(
        f"equal-distance frame left a singular A_k after {max_reseeds} re-seeds"
    )


def generate(strategy: str, index: GroupIndex, *, priority=None, seed=None, q: int = 17, **kw) -> CoefficientMatrix:
    """Dispatch on strategy name."""
    if strategy == "sparse":
        return sparse_generate(index, priority)
    if strategy == "random":
        return random_generate(index, q=q, rng_seed=seed, **kw)
    if strategy == "equal_distance":
        return equal_distance_generate(index, seed=seed, **kw)
    raise InvalidParametersError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


# --------------------------------------------------------------------------
# CSV exchange format: header row of group labels, one row per sub-interval,
# complex entries written as "re+imj".


def _format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}{z.imag:+}j"


def write_matrix_csv(A: CoefficientMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(A.index.labels())
        for row in A.entries:
            writer.writerow([_format_complex(z) for z in row])


def read_matrix_csv(path, serving_set: Iterable[int], t: int, strategy: str = "imported") -> CoefficientMatrix:
    index = enumerate_multicast_groups(tuple(serving_set), t)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise InvalidParametersError(f"{path}: empty matrix file")
    header, body = rows[0], rows[1:]
    if [h.strip() for h in header] != index.labels():
        raise InvalidParametersError(
            f"{path}: header {header} does not match groups {index.labels()}"
        )
    try:
        entries = np.array([[complex(tok.strip()) for tok in r] for r in body], dtype=complex)
    except ValueError as exc:
        raise InvalidParametersError(f"{path}: bad complex entry ({exc})") from None
    return CoefficientMatrix(entries, index, strategy)
