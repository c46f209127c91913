"""Monte Carlo SNR sweeps.

Rates are symmetric delivery rates in bits per channel use, ``R_sym = F /
sum_i T_i`` over the delivery intervals, so every scheme is charged for the
channel uses it actually occupies:

* proposed linear scheme: an interval delivers ``delta`` codewords per user
  over ``delta`` sub-intervals, so its per-use rate is ``min_{k,n} R_k^n``;
* SIC baseline: ``delta`` streams decoded in one slot, ``delta * min_k R_k``;
* No-CC: cyclic unicast ZF (see :func:`sicfree.rates.no_cc_baseline_rate`).

For the coded-caching schemes the interval rates ``R_i`` combine as
``(t+L)/K * hmean(R_i) / (1 - M/N)``: a user appears in a fraction
``(t+L)/K`` of the intervals and only the uncached ``1 - M/N`` of each file
is delivered. When ``K > t+L`` the harmonic mean runs over the sampled
serving sets.
"""

from __future__ import annotations

import csv
import logging
import math
import re
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .beamforming import ScaOptions, ScaTrace, sca_optimize, zf_beamformers
from .channel import ChannelRealization, draw_channel, successive_projection_order
from .coefficients import CoefficientMatrix, STRATEGIES, equal_distance_generate, random_generate, sparse_generate
from .combinatorics import enumerate_multicast_groups
from .errors import ConfigError, SicFreeError, SweepError
from .rates import interval_rate_report, no_cc_baseline_rate, sic_zf_baseline_rate

log = logging.getLogger(__name__)

BEAMFORMERS = ("zf", "sca")
ORDERINGS = ("fixed", "successive_projection", "successive_projection_no_reverse")
BASELINES = ("sic_zf", "no_cc")
MAX_FAILED_FRACTION = 0.05
N0 = 1.0


@dataclass
class SweepConfig:
    k: int = 5
    l: int = 4
    t: int = 1
    m_over_n: Optional[float] = None  # defaults to t / k
    snr_db: list[float] = field(default_factory=lambda: [20.0])
    draws: int = 200
    strategy: list[str] = field(default_factory=lambda: ["sparse"])
    beamformer: list[str] = field(default_factory=lambda: ["zf"])
    ordering: list[str] = field(default_factory=lambda: ["fixed"])
    baselines: list[str] = field(default_factory=list)
    serving_set_samples: int = 10
    master_seed: int = 0
    sca_max_iters: int = 50
    sca_tol: float = 1e-4
    q: int = 17

    def __post_init__(self):
        if self.m_over_n is None:
            self.m_over_n = self.t / self.k
        self.validate()

    def validate(self) -> None:
        if self.t < 0 or self.l < 1 or self.k < self.t + self.l or self.t + self.l < 2:
            raise ConfigError(f"need K >= t+L >= 2, t >= 0; got k={self.k}, l={self.l}, t={self.t}")
        if not math.isclose(self.m_over_n * self.k, self.t, abs_tol=1e-9):
            raise ConfigError(f"m_over_n={self.m_over_n} inconsistent with t/K={self.t}/{self.k}")
        if not 0 <= self.m_over_n < 1:
            raise ConfigError(f"m_over_n must lie in [0, 1), got {self.m_over_n}")
        if self.draws < 1:
            raise ConfigError("draws must be >= 1")
        if not self.snr_db:
            raise ConfigError("snr_db must be nonempty")
        if self.serving_set_samples < 1:
            raise ConfigError("serving_set_samples must be >= 1")
        if self.q < 2:
            raise ConfigError("q must be >= 2")
        for name, allowed in (
            ("strategy", STRATEGIES),
            ("beamformer", BEAMFORMERS),
            ("ordering", ORDERINGS),
            ("baselines", BASELINES),
        ):
            bad = [v for v in getattr(self, name) if v not in allowed]
            if bad:
                raise ConfigError(f"{name}: unknown value(s) {bad}; expected from {allowed}")
        if not self.schemes():
            raise ConfigError("no schemes requested")

    def schemes(self) -> list[str]:
        """Scheme labels, ``proposed:<strategy>:<beamformer>:<ordering>`` plus baselines.

        Orderings only affect the sparse strategy; the others always run ``fixed``.
        """
        out = []
        for s in self.strategy:
            orders = self.ordering if s == "sparse" else ["fixed"]
            for b in self.beamformer:
                for o in orders:
                    label = f"proposed:{s}:{b}:{o}"
                    if label not in out:
                        out.append(label)
        out.extend(b for b in self.baselines if b not in out)
        return out


_LIST_FIELDS = {"snr_db", "strategy", "beamformer", "ordering", "baselines"}


def _parse_scalar(text: str, kind):
    if kind is float:
        return float(text)
    if kind is int:
        return int(text)
    return text


def load_config(path) -> SweepConfig:
    """Read a ``key = value`` file; ``#`` starts a comment, list values are comma-separated."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(lines, source=str(path))


def parse_config(lines, source: str = "<config>") -> SweepConfig:
    kinds = {
        "k": int, "l": int, "t": int, "m_over_n": float, "snr_db": float, "draws": int,
        "strategy": str, "beamformer": str, "ordering": str, "baselines": str,
        "serving_set_samples": int, "master_seed": int, "sca_max_iters": int,
        "sca_tol": float, "q": int,
    }
    assert set(kinds) == {f.name for f in fields(SweepConfig)}
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            if key in _LIST_FIELDS:
                values[key] = [_parse_scalar(v.strip(), kinds[key]) for v in value.split(",") if v.strip()]
            else:
                values[key] = _parse_scalar(value, kinds[key])
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {value!r}") from None
    return SweepConfig(**values)


@dataclass
class SweepRow:
    snr_db: float
    scheme: str
    mean_rate: float
    std_err: float
    draws: int
    failed: int
    seed: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    samples: dict[tuple[float, str], np.ndarray] = field(default_factory=dict)  # per-draw, NaN = failed
    failures: list[tuple[int, str]] = field(default_factory=list)  # (draw, message)

    def row(self, snr_db: float, scheme: str) -> SweepRow:
        for r in self.rows:
            if r.snr_db == snr_db and r.scheme == scheme:
                return r
        raise KeyError((snr_db, scheme))

    def paired_difference(self, snr_db: float, a: str, b: str) -> tuple[float, float]:
        """Mean and standard error of ``rate(a) - rate(b)`` over draws where both succeeded."""
        d = self.samples[(snr_db, a)] - self.samples[(snr_db, b)]
        d = d[np.isfinite(d)]
        se = float(np.std(d, ddof=1) / np.sqrt(d.size)) if d.size > 1 else 0.0
        return float(np.mean(d)), se


def _hmean(x) -> float:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        return 0.0
    return float(x.size / np.sum(1.0 / x))


def _draw_seed(master: int, draw: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, draw, *path])


def _serving_sets(cfg: SweepConfig, draw: int) -> list[tuple[int, ...]]:
    size = cfg.t + cfg.l
    if cfg.k == size:
        return [tuple(range(1, cfg.k + 1))]
    rng = np.random.default_rng(_draw_seed(cfg.master_seed, draw, 1))
    return [
        tuple(int(u) + 1 for u in np.sort(rng.choice(cfg.k, size, replace=False)))
        for _ in range(cfg.serving_set_samples)
    ]


class _FrameCache:
    """Equal-distance matrices depend only on (delta, n_groups, seed), so compute each once.

    Relabeling a serving set preserves the lexicographic group structure,
    hence the same entries are decodable for every serving set of a size.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self.entries: dict[tuple[int, int], tuple[np.ndarray, dict]] = {}

    def get(self, index) -> CoefficientMatrix:
        key = (index.delta, index.n_groups)
        if key not in self.entries:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                A = equal_distance_generate(index, seed=self.seed)
            self.entries[key] = (A.entries, A.info)
        entries, info = self.entries[key]
        return CoefficientMatrix(entries, index, "equal_distance", dict(info))


def _proposed_rates(cfg, scheme, channel, index, A, snrs, trace_cb) -> list[float]:
    _, strategy, beamformer, ordering = scheme.split(":")
    out = []
    for snr in snrs:
        P_T = 10 ** (snr / 10)
        bf = zf_beamformers(channel, index, A, P_T, N0)
        if beamformer == "sca":
            bf, trace = sca_optimize(
                channel, index, A, P_T, N0, ScaOptions(cfg.sca_max_iters, cfg.sca_tol, init=bf)
            )
            if trace_cb is not None:
                trace_cb(snr, scheme, trace)
        out.append(interval_rate_report(A, channel, bf, N0).per_use_goodput)
    return out


def _matrix_for(cfg, strategy, ordering, channel, index, draw, ss_idx, frames) -> CoefficientMatrix:
    if strategy == "sparse":
        priority = None
        if ordering != "fixed":
            reverse = ordering == "successive_projection"
            priority = successive_projection_order(channel.restrict(index.serving_set), reverse).priority_for_sparse
        return sparse_generate(index, priority)
    if strategy == "random":
        return random_generate(index, q=cfg.q, rng_seed=_draw_seed(cfg.master_seed, draw, 2, ss_idx))
    return frames.get(index)


def _run_draw(cfg: SweepConfig, draw: int, frames: _FrameCache, trace_cb=None) -> dict[tuple[float, str], float]:
    channel = draw_channel(cfg.k, cfg.l, seed=_draw_seed(cfg.master_seed, draw, 0))
    snrs = list(cfg.snr_db)
    schemes = cfg.schemes()
    interval: dict[str, list[list[float]]] = {s: [] for s in schemes if s != "no_cc"}
    for ss_idx, serving in enumerate(_serving_sets(cfg, draw)):
        index = enumerate_multicast_groups(serving, cfg.t)
        sub = channel.restrict(serving)
        for scheme in interval:
            if scheme == "sic_zf":
                rates = [sic_zf_baseline_rate(sub, index, N0, 10 ** (s / 10)) for s in snrs]
            else:
                _, strategy, _, ordering = scheme.split(":")
                A = _matrix_for(cfg, strategy, ordering, sub, index, draw, ss_idx, frames)
                cb = None if trace_cb is None else (lambda snr, sch, tr, i=ss_idx: trace_cb(draw, i, snr, sch, tr))
                rates = _proposed_rates(cfg, scheme, sub, index, A, snrs, cb)
            interval[scheme].append(rates)

    factor = (cfg.t + cfg.l) / cfg.k / (1 - cfg.m_over_n)
    out = {}
    for scheme, per_set in interval.items():
        arr = np.asarray(per_set)  # serving sets x snrs
        for j, snr in enumerate(snrs):
            out[(snr, scheme)] = factor * _hmean(arr[:, j])
    if "no_cc" in schemes:
        for snr in snrs:
            out[(snr, "no_cc")] = no_cc_baseline_rate(channel, cfg.l, cfg.m_over_n, N0, 10 ** (snr / 10))
    return out


def run_sweep(cfg: SweepConfig, trace_dir=None) -> SweepResult:
    """Run every requested scheme on common channel draws and aggregate per SNR.

    A draw in which any scheme raises a library error is excluded for all
    schemes (keeping comparisons paired); more than 5% failures aborts.
    """
    cfg.validate()
    schemes = cfg.schemes()
    snrs = sorted(set(cfg.snr_db))
    frames = _FrameCache(cfg.master_seed)
    trace_cb = None
    if trace_dir is not None:
        trace_dir = Path(trace_dir)
        trace_dir.mkdir(parents=True, exist_ok=True)

        def trace_cb(draw, ss_idx, snr, scheme, trace: ScaTrace):
            tag = re.sub(r"[^A-Za-z0-9_.-]+", "-", scheme)
            trace.to_csv(trace_dir / f"trace_d{draw}_s{ss_idx}_snr{snr:g}_{tag}.csv")

    samples = {(s, sch): np.full(cfg.draws, np.nan) for s in snrs for sch in schemes}
    failures = []
    for draw in range(cfg.draws):
        try:
            values = _run_draw(cfg, draw, frames, trace_cb)
        except (SicFreeError, np.linalg.LinAlgError) as exc:
            log.warning("draw %d failed: %s", draw, exc)
            failures.append((draw, f"{type(exc).__name__}: {exc}"))
            if len(failures) > MAX_FAILED_FRACTION * cfg.draws:
                raise SweepError(
                    f"{len(failures)} of {cfg.draws} draws failed (limit {MAX_FAILED_FRACTION:.0%}); "
                    f"last: {failures[-1][1]}"
                ) from exc
            continue
        for key, v in values.items():
            samples[key][draw] = v

    rows = []
    for snr in snrs:
        for scheme in sorted(schemes):
            x = samples[(snr, scheme)]
            x = x[np.isfinite(x)]
            se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
            rows.append(SweepRow(snr, scheme, float(np.mean(x)), se, int(x.size), len(failures), cfg.master_seed))
    return SweepResult(rows, samples, failures)


CSV_HEADER = ["snr_db", "scheme", "mean_rate", "std_err", "draws", "failed", "seed"]


def emit_csv(result: SweepResult, path) -> None:
    rows = sorted(result.rows, key=lambda r: (r.snr_db, r.scheme))
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([
                    f"{r.snr_db:.6g}", r.scheme, f"{r.mean_rate:.6g}", f"{r.std_err:.6g}",
                    r.draws, r.failed, r.seed,
                ])
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV {path}: {exc}") from exc


def read_csv(path) -> SweepResult:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ConfigError(f"{path}: unexpected header {header}")
        rows = [
            SweepRow(float(a), b, float(c), float(d), int(e), int(f), int(g))
            for a, b, c, d, e, f, g in reader
        ]
    return SweepResult(rows)
