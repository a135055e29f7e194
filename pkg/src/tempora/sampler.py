"""Reproducible Monte Carlo sweeps over random machines.

A sweep scores `count` independent trials; trial k draws four machines (and,
for delay sweeps, an intermediary) from counter sub-streams derived from
(master_seed, k), so results are a pure function of the configuration.  Work
is chunked into fixed-size batches whose partial results are reduced in
batch order, which makes every output, including float summaries,
bit-identical for any worker count.
"""
from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .chsh import ORDERING_MODES, QUANTUM_DELAY_MODES, SCORE_CONVENTIONS
from .errors import ConfigError, ShapeMismatch
from .kernels import KINDS, sample_machine  # noqa: F401  (re-exported API)

BATCH = 16384
TWO_SQRT2 = float(2.0 * np.sqrt(2.0))


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines a sweep's output."""

    kind: str
    count: int
    master_seed: int = 0
    bins: int = 400
    range: tuple[float, float] = (0.0, 4.0)
    mode: str = "symmetrized"
    convention: str = "canonical"
    random_initial: bool = False
    t_list: tuple[int, ...] | None = None
    quantum_mode: str = "vector-sum"

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not isinstance(self.count, (int, np.integer)) or self.count < 0:
            raise ConfigError(f"count must be a non-negative integer, got {self.count!r}")
        if not isinstance(self.bins, (int, np.integer)) or self.bins < 1:
            raise ConfigError(f"bins must be a positive integer, got {self.bins!r}")
        lo, hi = self.range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ConfigError(f"range must satisfy lo < hi, got {self.range!r}")
        if self.mode not in ORDERING_MODES:
            raise ConfigError(f"mode must be one of {ORDERING_MODES}, got {self.mode!r}")
        if self.convention not in SCORE_CONVENTIONS:
            raise ConfigError(
                f"convention must be one of {SCORE_CONVENTIONS}, got {self.convention!r}")
        if self.quantum_mode not in QUANTUM_DELAY_MODES:
            raise ConfigError(
                f"quantum_mode must be one of {QUANTUM_DELAY_MODES}, "
                f"got {self.quantum_mode!r}")
        if self.t_list is not None:
            ts = tuple(self.t_list)
            if not ts or any(not isinstance(t, (int, np.integer)) or t < 0
                             for t in ts):
                raise ConfigError(
                    f"t_list must be non-empty, non-negative integers, got {self.t_list!r}")

    def as_dict(self) -> dict:
        out = {
            "kind": self.kind, "count": int(self.count),
            "seed": int(self.master_seed), "bins": int(self.bins),
            "range": [float(self.range[0]), float(self.range[1])],
            "mode": self.mode, "convention": self.convention,
            "random_initial": self.random_initial,
            "measure": MEASURES[self.kind],
        }
        if self.t_list is not None:
            out["t_list"] = [int(t) for t in self.t_list]
            out["quantum_mode"] = self.quantum_mode
        return out


# Sampling measure per kind, echoed into results so runs are comparable.
MEASURES = {
    "mm": "a,b ~ U[0,1]",
    "hmm": "nested-uniform: a,d ~ U[0,1]; b ~ U[0,1-a]; c ~ U[0,1-a-b]; "
           "e ~ U[0,1-d]; f ~ U[0,1-d-e]",
    "hqmm": "two standard complex Gaussian 4-vectors, Gram-Schmidt "
            "orthonormalized (unitarily invariant pair measure)",
    "hqmm-proj": "phi ~ U[0,2*pi)",
}


@dataclass(eq=False)
class Histogram:
    """Fixed-width integer histogram with under/overflow counters."""

    lo: float
    hi: float
    counts: np.ndarray
    total: int = 0
    underflow: int = 0
    overflow: int = 0
    observed_min: float | None = None
    observed_max: float | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return (self.lo == other.lo and self.hi == other.hi
                and np.array_equal(self.counts, other.counts)
                and self.total == other.total
                and self.underflow == other.underflow
                and self.overflow == other.overflow
                and self.observed_min == other.observed_min
                and self.observed_max == other.observed_max)

    @classmethod
    def empty(cls, bins: int, lo: float, hi: float) -> "Histogram":
        return cls(lo=float(lo), hi=float(hi),
                   counts=np.zeros(bins, dtype=np.int64))

    @property
    def bins(self) -> int:
        return int(self.counts.shape[0])

    def add_scores(self, scores: np.ndarray) -> None:
        """Bin an array of scores; out-of-range values hit the counters."""
        scores = np.asarray(scores, dtype=np.float64)
        if scores.size == 0:
            return
        idx = np.floor((scores - self.lo)
                       * (self.bins / (self.hi - self.lo))).astype(np.int64)
        under = int(np.count_nonzero(idx < 0))
        over = int(np.count_nonzero(idx >= self.bins))
        good = idx[(idx >= 0) & (idx < self.bins)]
        self.counts += np.bincount(good, minlength=self.bins)
        self.total += int(scores.size)
        self.underflow += under
        self.overflow += over
        lo = float(scores.min())
        hi = float(scores.max())
        self.observed_min = lo if self.observed_min is None else min(self.observed_min, lo)
        self.observed_max = hi if self.observed_max is None else max(self.observed_max, hi)

    def as_dict(self) -> dict:
        return {
            "lo": self.lo, "hi": self.hi, "bins": self.bins,
            "counts": self.counts.tolist(), "total": int(self.total),
            "underflow": int(self.underflow), "overflow": int(self.overflow),
            "observed_min": self.observed_min, "observed_max": self.observed_max,
        }


def histogram_merge(h1: Histogram, h2: Histogram) -> Histogram:
    """Combine two histograms with identical binning (commutative)."""
    if (h1.lo, h1.hi, h1.bins) != (h2.lo, h2.hi, h2.bins):
        raise ShapeMismatch(
            f"cannot merge ({h1.lo}, {h1.hi}, {h1.bins} bins) with "
            f"({h2.lo}, {h2.hi}, {h2.bins} bins)")
    mins = [m for m in (h1.observed_min, h2.observed_min) if m is not None]
    maxs = [m for m in (h1.observed_max, h2.observed_max) if m is not None]
    return Histogram(
        lo=h1.lo, hi=h1.hi, counts=h1.counts + h2.counts,
        total=h1.total + h2.total,
        underflow=h1.underflow + h2.underflow,
        overflow=h1.overflow + h2.overflow,
        observed_min=min(mins) if mins else None,
        observed_max=max(maxs) if maxs else None)


@dataclass
class SweepSummary:
    """Aggregate statistics of the selected score over one sweep."""

    count: int
    observed_min: float | None
    observed_max: float | None
    mean_s: float | None
    fraction_above_2: float | None
    fraction_above_2sqrt2: float | None

    def as_dict(self) -> dict:
        return {
            "count": int(self.count),
            "observed_min": self.observed_min,
            "observed_max": self.observed_max,
            "mean_s": self.mean_s,
            "fraction_above_2": self.fraction_above_2,
            "fraction_above_2sqrt2": self.fraction_above_2sqrt2,
        }


@dataclass
class DelayPoint:
    """Statistics of one delay value within a delay sweep."""

    t: int
    count: int
    mean_s: float | None
    max_s: float | None
    fraction_above_2: float | None

    def as_dict(self) -> dict:
        return {"t": int(self.t), "count": int(self.count),
                "mean_s": self.mean_s, "max_s": self.max_s,
                "fraction_above_2": self.fraction_above_2}


@dataclass
class DelayStats:
    """Per-t statistics of a delay sweep."""

    points: list[DelayPoint] = field(default_factory=list)

    def point(self, t: int) -> DelayPoint:
        for p in self.points:
            if p.t == t:
                return p
        raise KeyError(f"no statistics for t={t}")

    def as_dict(self) -> dict:
        return {"points": [p.as_dict() for p in self.points]}


def _batches(count: int) -> list[tuple[int, int]]:
    return [(start, min(start + BATCH, count)) for start in range(0, count, BATCH)]


@dataclass
class _Partial:
    counts: np.ndarray
    underflow: int
    overflow: int
    n: int
    sum_s: float
    min_s: float
    max_s: float
    above2: int
    above2r2: int


def _partial_from_scores(cfg: SweepConfig, scores: np.ndarray) -> _Partial:
    h = Histogram.empty(cfg.bins, *cfg.range)
    h.add_scores(scores)
    return _Partial(
        counts=h.counts, underflow=h.underflow, overflow=h.overflow,
        n=int(scores.size), sum_s=float(scores.sum()),
        min_s=float(scores.min()), max_s=float(scores.max()),
        above2=int(np.count_nonzero(scores > 2.0)),
        above2r2=int(np.count_nonzero(scores > TWO_SQRT2)))


def _sweep_batch(args: tuple[SweepConfig, int, int]) -> _Partial:
    cfg, start, stop = args
    trials = np.arange(start, stop, dtype=np.int64)
    scores = kernels.batch_scores(cfg.kind, cfg.master_seed, trials,
                                  cfg.mode, cfg.convention, cfg.random_initial)
    return _partial_from_scores(cfg, scores)


def _delay_batch(args: tuple[SweepConfig, int, int]) -> list[tuple]:
    cfg, start, stop = args
    trials = np.arange(start, stop, dtype=np.int64)
    rows = kernels.batch_delay_scores(
        cfg.kind, cfg.master_seed, trials, tuple(cfg.t_list),
        cfg.quantum_mode, cfg.mode, cfg.convention, cfg.random_initial)
    return [(float(row.sum()), float(row.max()),
             int(np.count_nonzero(row > 2.0)), int(row.size)) for row in rows]


def _map_batches(worker, cfg: SweepConfig, workers: int) -> list:
    jobs = [(cfg, start, stop) for start, stop in _batches(cfg.count)]
    if workers <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with multiprocessing.Pool(processes=workers) as pool:
        return pool.map(worker, jobs, chunksize=1)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> tuple[Histogram, SweepSummary]:
    """Score cfg.count random machines; deterministic for any worker count."""
    cfg.validate()
    hist = Histogram.empty(cfg.bins, *cfg.range)
    sum_s = 0.0
    above2 = above2r2 = 0
    for part in _map_batches(_sweep_batch, cfg, workers):
        hist.counts += part.counts
        hist.underflow += part.underflow
        hist.overflow += part.overflow
        hist.total += part.n
        hist.observed_min = part.min_s if hist.observed_min is None \
            else min(hist.observed_min, part.min_s)
        hist.observed_max = part.max_s if hist.observed_max is None \
            else max(hist.observed_max, part.max_s)
        sum_s += part.sum_s
        above2 += part.above2
        above2r2 += part.above2r2
    n = hist.total
    summary = SweepSummary(
        count=n,
        observed_min=hist.observed_min, observed_max=hist.observed_max,
        mean_s=(sum_s / n) if n else None,
        fraction_above_2=(above2 / n) if n else None,
        fraction_above_2sqrt2=(above2r2 / n) if n else None)
    return hist, summary


def run_delay_sweep(cfg: SweepConfig, workers: int = 1) -> DelayStats:
    """Delay sweep over cfg.t_list; one intermediary per trial, reused across t."""
    cfg.validate()
    if cfg.t_list is None:
        raise ConfigError("delay sweep needs a t_list")
    t_list = tuple(int(t) for t in cfg.t_list)
    sums = [0.0] * len(t_list)
    maxs: list[float | None] = [None] * len(t_list)
    above2 = [0] * len(t_list)
    ns = [0] * len(t_list)
    for rows in _map_batches(_delay_batch, cfg, workers):
        for i, (s, mx, a2, n) in enumerate(rows):
            sums[i] += s
            maxs[i] = mx if maxs[i] is None else max(maxs[i], mx)
            above2[i] += a2
            ns[i] += n
    points = [DelayPoint(t=t, count=ns[i],
                         mean_s=(sums[i] / ns[i]) if ns[i] else None,
                         max_s=maxs[i],
                         fraction_above_2=(above2[i] / ns[i]) if ns[i] else None)
              for i, t in enumerate(t_list)]
    return DelayStats(points=points)
